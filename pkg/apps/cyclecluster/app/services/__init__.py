"""Domain services: ingestion, preprocessing, k-means, validation and analysis"""
