"""Built-in example system sources used by the docs and the test suite."""
from __future__ import annotations

from .sysdsl import SystemDef, parse_system

LORENZ_SOURCE = """\
# Lorenz system
param sigma = 10
param b = 8/3
param R = 28
diff(x(t), t) = sigma * (y(t) - x(t))
diff(y(t), t) = -x(t) * z(t) + R * x(t) - y(t)
diff(z(t), t) = x(t) * y(t) - b * z(t)
"""

HARMONIC_SOURCE = """\
# harmonic oscillator, unit frequency
diff(x, t) = v
diff(v, t) = -x
"""

EXPONENTIAL_SOURCE = "diff(x, t) = x\n"

CONSTANT_SOURCE = "diff(x, t) = 0\n"

BLOWUP_SOURCE = "diff(x, t) = x^2\n"

PLANE3_SOURCE = """\
# three frozen coordinates; the predicate boundary is an exact hyperplane
diff(x, t) = 0
diff(y, t) = 0
diff(z, t) = 0
"""


def lorenz(sigma: float = 10.0, b: float = 8.0 / 3.0, R: float = 28.0) -> SystemDef:
    return parse_system(LORENZ_SOURCE, "lorenz").rebind(sigma=sigma, b=b, R=R)


def harmonic_oscillator() -> SystemDef:
    return parse_system(HARMONIC_SOURCE, "harmonic")


def exponential() -> SystemDef:
    return parse_system(EXPONENTIAL_SOURCE, "exponential")


def constant() -> SystemDef:
    return parse_system(CONSTANT_SOURCE, "constant")


def blowup() -> SystemDef:
    return parse_system(BLOWUP_SOURCE, "blowup")


def plane3() -> SystemDef:
    return parse_system(PLANE3_SOURCE, "plane3")


BUILTIN_SYSTEMS = {
    "lorenz": LORENZ_SOURCE,
    "harmonic": HARMONIC_SOURCE,
    "exponential": EXPONENTIAL_SOURCE,
    "constant": CONSTANT_SOURCE,
    "blowup": BLOWUP_SOURCE,
    "plane3": PLANE3_SOURCE,
}
