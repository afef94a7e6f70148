"""Normalized call prices and their asymptotic remainders by Fourier quadrature.

All prices are for S₀ = 1 and zero rates, i.e. c(t, k) = E[(e^{X_t} - e^{-k})⁺].
Every quadrature-backed function returns a :class:`QuadratureResult`; call
``.require()`` to get the value or a :class:`QuadratureError`.
"""

from __future__ import annotations

import math

from scipy import special

from cgmy_atm import expansion
from cgmy_atm.cgmy import delta, ensure_derived, psi_shifted, theta, theta0
from cgmy_atm.models import (
    CgmyParams,
    DerivedParams,
    PriceRequest,
    QuadratureConfig,
    QuadratureResult,
)
from cgmy_atm.quadrature import integrate, integrate_fourier, laplace_breakpoints

_SERIES_CUTOFF = 1e-4


def _check_t(t: float) -> None:
    if not t > 0:
        raise ValueError("t must be positive")


def f_stable(x: complex | float) -> complex | float:
    """f(x) = 1 - eˣ + x without cancellation near zero.

    Real input gives a real result; for x ≤ 0 it lies in [-x²/2, 0].
    """
    if abs(x) <= _SERIES_CUTOFF:
        return -x * x * (0.5 + x * (1 / 6 + x * (1 / 24 + x * (1 / 120 + x / 720))))
    if isinstance(x, complex):
        return -(complex(special.expm1(x)) - x)
    return -(math.expm1(x) - x)


def _sin2(x: float) -> float:
    s = math.sin(0.5 * x)
    return 2.0 * s * s


def _one_minus_exp_cos(a: float, b: float) -> float:
    """1 - eᵃ cos b, computed as -expm1(a) + 2eᵃ sin²(b/2)."""
    return -math.expm1(a) + math.exp(a) * _sin2(b)


def _cfg_for(t: float, p: CgmyParams, d: DerivedParams, cfg: QuadratureConfig | None) -> QuadratureConfig:
    return (cfg or QuadratureConfig()).with_breakpoints(laplace_breakpoints(d.sigma_y * t, p.Y))


def price_atm(
    t: float,
    p: CgmyParams,
    d: DerivedParams | None = None,
    cfg: QuadratureConfig | None = None,
) -> QuadratureResult:
    """c(t) = (1/π) ∫₀^∞ [1 - Re e^{tψ₀(u)}] / (u² + 1/4) du."""
    _check_t(t)
    d = ensure_derived(p, d)

    def integrand(u: float) -> float:
        z = t * psi_shifted(u, p, d)
        return _one_minus_exp_cos(z.real, z.imag) / (u * u + 0.25)

    return integrate(integrand, 0.0, cfg=_cfg_for(t, p, d, cfg)).scaled(1.0 / math.pi)


def price(
    t: float,
    k: float,
    p: CgmyParams,
    d: DerivedParams | None = None,
    cfg: QuadratureConfig | None = None,
) -> QuadratureResult:
    """c(t, k) = (1 - e^{-k})⁺ + (e^{-k/2}/π) ∫₀^∞ [cos(ku) - Re e^{tψ₀(u) + iku}] / (u² + 1/4) du.

    The intrinsic value comes from ∫₀^∞ cos(ku) / (u² + 1/4) du = π e^{-|k|/2}.
    The remaining integrand splits into (1 - eᵃ cos b)·cos(ku) + eᵃ sin b·sin(ku)
    with a + ib = tψ₀(u); both pieces go to the Fourier-weighted rules.
    """
    _check_t(t)
    if not math.isfinite(k):
        raise ValueError(f"k must be finite, got {k!r}")
    d = ensure_derived(p, d)
    if k == 0.0:
        return price_atm(t, p, d, cfg)

    def even(u: float) -> float:
        z = t * psi_shifted(u, p, d)
        return _one_minus_exp_cos(z.real, z.imag) / (u * u + 0.25)

    def odd(u: float) -> float:
        z = t * psi_shifted(u, p, d)
        return math.exp(z.real) * math.sin(z.imag) / (u * u + 0.25)

    qcfg = _cfg_for(t, p, d, cfg)
    time_value = integrate_fourier(even, k, "cos", cfg=qcfg).combined(
        integrate_fourier(odd, k, "sin", cfg=qcfg)
    )
    intrinsic = -math.expm1(-k) if k > 0 else 0.0
    return time_value.scaled(math.exp(-0.5 * k) / math.pi).shifted(intrinsic)


def price_from_request(
    req: PriceRequest,
    p: CgmyParams,
    d: DerivedParams | None = None,
    cfg: QuadratureConfig | None = None,
) -> QuadratureResult:
    if req.k == 0.0:
        return price_atm(req.t, p, d, cfg)
    return price(req.t, req.k, p, d, cfg)


def price_rescaled(
    t: float,
    p: CgmyParams,
    d: DerivedParams | None = None,
    cfg: QuadratureConfig | None = None,
) -> QuadratureResult:
    """ATM price after the substitution u = v t^{-1/Y}:

    c(t) = (t^{1/Y}/π) ∫₀^∞ [1 - Re e^{θ(t, v)}] / (v² + t^{2/Y}/4) dv.
    """
    _check_t(t)
    d = ensure_derived(p, d)
    Y = p.Y
    s = t ** (1.0 / Y)
    v_star = d.sigma_y ** (-1.0 / Y)
    base = cfg or QuadratureConfig()
    cfg = base.with_breakpoints([0.5 * s, v_star, 10.0 * v_star])

    def integrand(v: float) -> float:
        z = theta(t, v, p, d)
        return _one_minus_exp_cos(z.real, z.imag) / (v * v + 0.25 * s * s)

    return integrate(integrand, 0.0, cfg=cfg).scaled(s / math.pi)


def remainder_r3(
    t: float,
    p: CgmyParams,
    d: DerivedParams | None = None,
    cfg: QuadratureConfig | None = None,
) -> QuadratureResult:
    """R3(t) = c(t) - d1 t^{1/Y} - d2 t, as one cancellation-free integral.

    With x₀ = tθ₀(w) and tδ(w) = A + iB the integrand is

        [f(A) - expm1(x₀) expm1(A) + 2 e^{x₀+A} sin²(B/2)] / (w² + 1/4)
            - f(x₀) / (4w²(w² + 1/4)),

    which equals Re f(tψ₀)/(w²+1/4) - f(tθ₀)/w² without subtracting large terms.
    """
    _check_t(t)
    d = ensure_derived(p, d)

    def integrand(w: float) -> float:
        q = w * w + 0.25
        x0 = t * theta0(w, p, d)
        z = t * delta(w, p, d)
        a, b = z.real, z.imag
        if a > 1.0:
            # e^{x₀}(e^A - 1) directly; expm1(A) alone may overflow far out in w.
            gap = a - (math.exp(x0 + a) - math.exp(x0)) + math.exp(x0 + a) * _sin2(b)
        else:
            gap = f_stable(a) - math.expm1(x0) * math.expm1(a) + math.exp(x0 + a) * _sin2(b)
        return gap / q - f_stable(x0) / (4.0 * w * w * q)

    return integrate(integrand, 0.0, cfg=_cfg_for(t, p, d, cfg)).scaled(1.0 / math.pi)


def remainder_r4(
    t: float,
    p: CgmyParams,
    d: DerivedParams | None = None,
    cfg: QuadratureConfig | None = None,
) -> QuadratureResult:
    """R4(t) = R3(t) - a21 t^{2-1/Y}."""
    d = ensure_derived(p, d)
    r3 = remainder_r3(t, p, d, cfg)
    return r3.shifted(-expansion.a21(p, d) * t ** (2.0 - 1.0 / p.Y))


def remainder_r5(
    t: float,
    p: CgmyParams,
    d: DerivedParams | None = None,
    cfg: QuadratureConfig | None = None,
) -> QuadratureResult:
    """R5(t) = R4(t) - a41 t^{4-3/Y}."""
    d = ensure_derived(p, d)
    r4 = remainder_r4(t, p, d, cfg)
    return r4.shifted(-expansion.a41(p, d) * t ** (4.0 - 3.0 / p.Y))


def laplace_check_a21(
    t: float,
    p: CgmyParams,
    d: DerivedParams | None = None,
    cfg: QuadratureConfig | None = None,
) -> QuadratureResult:
    """L21(t) = (b̃² t² / 2π) ∫₀^∞ w² e^{-σ_Y t w^Y} / (w² + 1/4) dw."""
    _check_t(t)
    d = ensure_derived(p, d)
    Y, lam = p.Y, d.sigma_y * t

    def integrand(w: float) -> float:
        return w * w / (w * w + 0.25) * math.exp(-lam * w**Y)

    factor = d.tilde_b**2 * t * t / (2.0 * math.pi)
    return integrate(integrand, 0.0, cfg=_cfg_for(t, p, d, cfg)).scaled(factor)


def laplace_check_a12(
    t: float,
    p: CgmyParams,
    d: DerivedParams | None = None,
    cfg: QuadratureConfig | None = None,
) -> QuadratureResult:
    """L12(t) = (Re β₁ / π) t ∫₀^∞ w^{Y-1} (1 - e^{-σ_Y t w^Y}) / (w² + 1/4) dw."""
    _check_t(t)
    d = ensure_derived(p, d)
    Y, lam = p.Y, d.sigma_y * t

    def integrand(w: float) -> float:
        return w ** (Y - 1.0) * -math.expm1(-lam * w**Y) / (w * w + 0.25)

    factor = d.beta1.real / math.pi * t
    return integrate(integrand, 0.0, cfg=_cfg_for(t, p, d, cfg)).scaled(factor)


def drift_series_integral(
    t: float,
    p: CgmyParams,
    d: DerivedParams | None = None,
    cfg: QuadratureConfig | None = None,
) -> QuadratureResult:
    """(1/π) ∫₀^∞ e^{-σ_Y t w^Y} (1 - cos(b̃ t w)) / w² dw, the summed drift family."""
    _check_t(t)
    d = ensure_derived(p, d)
    Y, lam, bt = p.Y, d.sigma_y * t, d.tilde_b * t

    def integrand(w: float) -> float:
        return math.exp(-lam * w**Y) * _sin2(bt * w) / (w * w)

    return integrate(integrand, 0.0, cfg=_cfg_for(t, p, d, cfg)).scaled(1.0 / math.pi)

