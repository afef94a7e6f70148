"""CGMY characteristic exponent and its contour-shifted, rescaled variants."""

from __future__ import annotations

import cmath
import functools
import logging
import math

import numpy as np
from scipy import optimize, special

from cgmy_atm.models import CgmyParams, DerivedParams
from cgmy_atm.special_fn import complex_pow, gamma

logger = logging.getLogger(__name__)

# Im(u) bounds of the strip on which Ψ is analytic and the LL formula applies.
_STRIP_SLACK = 1e-14


class StripError(ValueError):
    def __init__(self, u: complex):
        super().__init__(f"u={u!r} lies outside the strip -1 <= Im(u) <= 0")
        self.u = u


@functools.lru_cache(maxsize=256)
def derive(p: CgmyParams) -> DerivedParams:
    C, G, M, Y = p.C, p.G, p.M, p.Y
    c_gamma = C * gamma(-Y)
    tilde_b = -c_gamma * ((M - 1.0) ** Y + (G + 1.0) ** Y - M**Y - G**Y)
    kappa = tilde_b / 2.0 - c_gamma * (M**Y + G**Y)
    sigma_y = 2.0 * c_gamma * abs(math.cos(math.pi * Y / 2.0))
    m_shift = M - 0.5
    g_shift = G + 0.5
    phi = (Y - 1.0) * math.pi / 2.0
    beta1 = c_gamma * Y * complex(
        (m_shift + g_shift) * math.cos(phi), (g_shift - m_shift) * math.sin(phi)
    )
    beta2 = (
        -c_gamma
        * Y
        * (Y - 1.0)
        / 2.0
        * (
            m_shift**2 * cmath.exp(-1j * math.pi * Y / 2.0)
            + g_shift**2 * cmath.exp(1j * math.pi * Y / 2.0)
        )
    )
    return DerivedParams(
        c_gamma=c_gamma,
        tilde_b=tilde_b,
        kappa=kappa,
        sigma_y=sigma_y,
        m_shift=m_shift,
        g_shift=g_shift,
        beta1=beta1,
        beta2=beta2,
    )


def ensure_derived(p: CgmyParams, d: DerivedParams | None) -> DerivedParams:
    return d if d is not None else derive(p)


def psi(u: complex, p: CgmyParams, d: DerivedParams | None = None) -> complex:
    """Characteristic exponent Ψ(u) with the martingale drift."""
    d = ensure_derived(p, d)
    u = complex(u)
    if not (-1.0 - _STRIP_SLACK <= u.imag <= _STRIP_SLACK):
        raise StripError(u)
    Y = p.Y
    tempering = (
        complex_pow(p.M - 1j * u, Y)
        + complex_pow(p.G + 1j * u, Y)
        - p.M**Y
        - p.G**Y
    )
    return 1j * u * d.tilde_b + d.c_gamma * tempering


def psi_shifted(v: float, p: CgmyParams, d: DerivedParams | None = None) -> complex:
    """ψ₀(v) = Ψ(v - i/2)."""
    d = ensure_derived(p, d)
    Y = p.Y
    powers = complex_pow(complex(d.m_shift, -v), Y) + complex_pow(complex(d.g_shift, v), Y)
    return 1j * v * d.tilde_b + d.kappa + d.c_gamma * powers


def re_psi_shifted(v: float, p: CgmyParams, d: DerivedParams | None = None) -> float:
    """Re ψ₀(v) from the modulus/arctangent form, without complex arithmetic."""
    d = ensure_derived(p, d)
    Y = p.Y
    m_part = math.hypot(d.m_shift, v) ** Y * math.cos(Y * math.atan(-v / d.m_shift))
    g_part = math.hypot(d.g_shift, v) ** Y * math.cos(Y * math.atan(v / d.g_shift))
    return d.kappa + d.c_gamma * (m_part + g_part)


def theta(t: float, v: float, p: CgmyParams, d: DerivedParams | None = None) -> complex:
    """Rescaled exponent θ(t, v) = t Ψ(v t^{-1/Y} - i/2)."""
    if not t > 0:
        raise ValueError(f"t must be positive, got {t!r}")
    d = ensure_derived(p, d)
    Y = p.Y
    s = t ** (1.0 / Y)
    powers = complex_pow(complex(d.m_shift * s, -v), Y) + complex_pow(
        complex(d.g_shift * s, v), Y
    )
    return 1j * v * d.tilde_b * t ** (1.0 - 1.0 / Y) + d.kappa * t + d.c_gamma * powers


def theta0(u: float, p: CgmyParams, d: DerivedParams | None = None) -> float:
    """Limiting symmetric stable exponent -σ_Y |u|^Y."""
    d = ensure_derived(p, d)
    return -d.sigma_y * abs(u) ** p.Y


def _power_gap(b: float, z: complex, Y: float) -> complex:
    """(z + b)^Y - z^Y, computed without cancellation when |b/z| is small."""
    ratio = b / z
    if abs(ratio) > 0.5:
        return complex_pow(z + b, Y) - complex_pow(z, Y)
    return complex_pow(z, Y) * complex(special.expm1(Y * special.log1p(ratio)))


def _tempering_gap(w: float, p: CgmyParams, d: DerivedParams) -> complex:
    Y = p.Y
    return d.c_gamma * (
        _power_gap(d.m_shift, complex(0.0, -w), Y) + _power_gap(d.g_shift, complex(0.0, w), Y)
    )


def delta(w: float, p: CgmyParams, d: DerivedParams | None = None) -> complex:
    """δ(w) = ψ₀(w) - θ₀(w), the tempering and drift corrections to the stable limit."""
    if not w > 0:
        raise ValueError(f"w must be positive, got {w!r}")
    d = ensure_derived(p, d)
    return 1j * d.tilde_b * w + d.kappa + _tempering_gap(w, p, d)


def binomial_coefficient(n: int, p: CgmyParams, d: DerivedParams | None = None) -> complex:
    """β_n, the coefficient of w^{Y-n} in the large-w expansion of δ(w)."""
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    d = ensure_derived(p, d)
    Y = p.Y
    rot = cmath.exp(-0.5j * math.pi * (Y - n))
    return (
        d.c_gamma
        * float(special.binom(Y, n))
        * (d.m_shift**n * rot + d.g_shift**n * rot.conjugate())
    )


def fit_binomial_tail(
    p: CgmyParams,
    d: DerivedParams | None = None,
    *,
    w_lo: float = 1e3,
    w_hi: float = 1e5,
    points: int = 40,
    order: int = 3,
) -> complex:
    """Least-squares estimate of the w^{Y-2} coefficient of δ(w) - i b̃ w - β₁ w^{Y-1} - κ.

    The residual is scaled by w^{2-Y} and fitted against 1, 1/w, ..., 1/w^{order-1};
    the constant is returned.
    """
    d = ensure_derived(p, d)
    Y = p.Y
    w = np.geomspace(w_lo, w_hi, points)
    residual = np.array(
        [_tempering_gap(x, p, d) - d.beta1 * x ** (Y - 1.0) for x in w], dtype=complex
    )
    scaled = residual * w ** (2.0 - Y)
    design = np.vander(1.0 / w, order, increasing=True).astype(complex)
    coeffs, *_ = np.linalg.lstsq(design, scaled, rcond=None)
    logger.debug("binomial tail fit for %s: %s", p.label, coeffs)
    return complex(coeffs[0])


def exp_diff_bound(
    t: float, w: float, p: CgmyParams, d: DerivedParams | None = None
) -> tuple[float, float]:
    """|e^{tψ₀(w)} - e^{tθ₀(w)}| and its bound t|ψ₀(w) - θ₀(w)|."""
    d = ensure_derived(p, d)
    lhs = abs(cmath.exp(t * psi_shifted(w, p, d)) - math.exp(t * theta0(w, p, d)))
    return lhs, t * abs(delta(w, p, d))


def negativity_threshold(
    p: CgmyParams, d: DerivedParams | None = None, *, w_max: float = 1e4, points: int = 400
) -> float:
    """Empirical w₀ beyond which Re ψ₀(w) < 0 on a log grid up to w_max."""
    d = ensure_derived(p, d)
    grid = np.concatenate(([0.0], np.geomspace(1e-3, w_max, points)))
    values = np.array([re_psi_shifted(x, p, d) for x in grid])
    non_negative = np.flatnonzero(values >= 0.0)
    if non_negative.size == 0:
        return 0.0
    last = int(non_negative[-1])
    if last == grid.size - 1:
        raise ValueError(f"Re psi_0 is still non-negative at w={w_max!r}")
    root = optimize.brentq(
        lambda x: re_psi_shifted(x, p, d), grid[last], grid[last + 1], xtol=1e-14
    )
    return float(root)


def levy_density(x: float, p: CgmyParams) -> float:
    if x == 0:
        raise ValueError("the Levy density is singular at x=0")
    rate = p.G if x < 0 else p.M
    ax = abs(x)
    return p.C * math.exp(-rate * ax) / ax ** (1.0 + p.Y)
