"""Test package for filling scheduler."""
