"""Shared verification suite: the systems every certificate is run against."""

import math

from rapidstab import demo_system


def suite_systems():
    """(system, T0) pairs covering scalar, oscillatory, random skew, and a
    semi-discretized string."""
    return [
        (demo_system("scalar"), 1.0),
        (demo_system("oscillator"), math.pi),
        (demo_system("skew(4,7)"), math.pi),
        (demo_system("skew(8,11)"), math.pi),
        (demo_system("string(20)"), math.pi),
    ]
