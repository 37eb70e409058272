"""Utility functions and modules."""
