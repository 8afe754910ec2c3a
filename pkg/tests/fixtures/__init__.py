"""Seeded synthetic data for the test suite."""
