"""
Command-line interface for Random Similarity Isolation Forest
"""
