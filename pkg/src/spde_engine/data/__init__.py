"""
Data Layer
==========
Seeded noise paths and run identity (canonical JSON, config hash).
"""
