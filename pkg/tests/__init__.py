"""
Test Suite
==========
Unit tests, integration tests, and test fixtures.
"""
