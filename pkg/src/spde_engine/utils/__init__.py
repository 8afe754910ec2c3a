"""
Utilities
=========
Logging and the exception hierarchy.
"""
