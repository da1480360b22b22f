"""Keeps the tests directory importable (for helpers.py)."""
