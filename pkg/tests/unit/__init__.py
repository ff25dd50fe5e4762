"""Unit test package placeholder."""
