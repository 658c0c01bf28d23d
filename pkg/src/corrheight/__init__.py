"""Canonical heights along paths of algebraic correspondences."""
