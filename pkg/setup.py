"""
Backward-compatible setup.py for contacthvi.

Modern configuration is in pyproject.toml.
This file exists for compatibility with older tools.
"""

from setuptools import setup

setup()
