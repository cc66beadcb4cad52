"""Physical constants (SI, CODATA 2018)."""

HBAR = 1.054571817e-34  # J s
SPEED_OF_LIGHT = 2.99792458e8  # m/s
EPSILON_0 = 8.8541878128e-12  # F/m
