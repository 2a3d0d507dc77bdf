"""Tug-of-war with noise and running payoff: solver and numerical laboratory."""
