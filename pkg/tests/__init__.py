"""Tests for GPAC clustering."""
