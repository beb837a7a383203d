"""Test suite for smart_csg."""
