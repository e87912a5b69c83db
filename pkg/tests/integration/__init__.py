"""Integration tests for the filling scheduler.

This package contains integration tests that test the full pipeline and interactions
between components.
"""
