from __future__ import annotations

import math

from scipy import special

POLE_GUARD = 1e-9


class GammaPoleError(ValueError):
    def __init__(self, x: float):
        super().__init__(f"gamma has a pole at or near x={x!r}")
        self.x = x


class GammaOverflowError(OverflowError):
    def __init__(self, x: float):
        super().__init__(f"gamma({x!r}) exceeds the double-precision range")
        self.x = x


class ComplexPowerDomainError(ValueError):
    pass


def _sinpi(x: float) -> float:
    """sin(pi*x) with the argument reduced to [-1/2, 1/2] first."""
    n = round(x)
    r = math.sin(math.pi * (x - n))
    return -r if n % 2 else r


def gamma(x: float) -> float:
    """Euler's gamma function on the real line, poles excluded."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"gamma argument must be finite, got {x!r}")
    nearest = round(x)
    if nearest <= 0 and abs(x - nearest) < POLE_GUARD:
        raise GammaPoleError(x)
    if x > 0.0:
        value = float(special.gamma(x))
        if not math.isfinite(value):
            raise GammaOverflowError(x)
        return value
    # Γ(x) = π / (sin(πx) Γ(1 - x))
    mirror = float(special.gamma(1.0 - x))
    if not math.isfinite(mirror):
        # Γ(1 - x) overflowed, so |Γ(x)| is below the smallest subnormal.
        return 0.0
    return math.pi / (_sinpi(x) * mirror)


def complex_pow(base: complex, exponent: float) -> complex:
    """Principal-branch power exp(exponent * (ln|base| + i Arg(base)))."""
    base = complex(base)
    if base == 0:
        if exponent > 0:
            return 0j
        raise ComplexPowerDomainError(
            f"0 cannot be raised to the non-positive power {exponent!r}"
        )
    modulus = math.exp(exponent * math.log(abs(base)))
    angle = exponent * math.atan2(base.imag, base.real)
    if angle == 0.0:
        return complex(modulus, 0.0)
    return complex(modulus * math.cos(angle), modulus * math.sin(angle))
