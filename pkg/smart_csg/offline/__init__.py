"""Offline size-set tuning (SSD and SOFT) and tuning files."""
