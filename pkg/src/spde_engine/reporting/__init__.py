"""
Reporting Layer
===============
Console summaries and CSV/JSON exports.
"""
