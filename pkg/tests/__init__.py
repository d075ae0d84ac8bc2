"""
Tests for ffradon.
"""
