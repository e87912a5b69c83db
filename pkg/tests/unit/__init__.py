"""Unit tests for the filling scheduler.

This package contains unit tests for individual components and functions.
"""
