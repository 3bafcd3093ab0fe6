"""Unit test package for negperc."""
