"""Numerical constants shared across pathgrad."""

from __future__ import annotations

import math

EULER_GAMMA = 0.57721566490153286061
SQRT_2PI = math.sqrt(2.0 * math.pi)

# Densities below this are treated as zero by the master formula
DENSITY_FLOOR = 1e-300

# Lentz continued-fraction guard
TINY = 1e-300
