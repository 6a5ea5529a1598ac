"""Closed-form constants and permutation statistics."""
