"""
Random Similarity Isolation Forest - Main package
"""
__version__ = "1.0.0"
