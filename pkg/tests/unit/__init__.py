"""Unit tests for the smart_csg modules."""
