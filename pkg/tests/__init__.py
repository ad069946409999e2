"""
Test suite for Random Similarity Isolation Forest
"""
