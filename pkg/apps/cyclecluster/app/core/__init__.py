"""Core infrastructure: logging, telemetry and errors"""
