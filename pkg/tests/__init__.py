"""Unit test package for calsim."""
