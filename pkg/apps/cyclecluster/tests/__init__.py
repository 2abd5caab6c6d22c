"""cyclecluster test suite"""
