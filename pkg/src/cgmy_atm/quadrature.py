from __future__ import annotations

import logging
import math
from collections.abc import Callable
from typing import Any, Literal

import scipy.integrate

from cgmy_atm.models import QuadratureConfig, QuadratureResult
from cgmy_atm.special_fn import gamma

logger = logging.getLogger(__name__)

Integrand = Callable[[float], float]


class IntegrandError(ArithmeticError):
    def __init__(self, abscissa: float, value: float):
        super().__init__(f"integrand is not finite at x={abscissa!r} (value {value!r})")
        self.abscissa = abscissa
        self.value = value


class LaplaceDomainError(ValueError):
    pass


class _Counted:
    """Wraps an integrand, counts evaluations and rejects non-finite values."""

    def __init__(self, f: Integrand):
        self.f = f
        self.calls = 0

    def __call__(self, x: float) -> float:
        self.calls += 1
        y = self.f(x)
        if not math.isfinite(y):
            raise IntegrandError(x, y)
        return y


# w^Y leaves the double range past this point for every Y in (1, 2).
_W_MAX = 1e150

# Cycle budget for the Fourier tail; scipy defaults to 50.
_FOURIER_CYCLES = 200


def _tail(f: _Counted, b: float) -> Integrand:
    def mapped(x: float) -> float:
        w = b / x
        if w > _W_MAX:
            return 0.0
        y = f(w)
        if y == 0.0:
            return 0.0
        return y * (w / x)

    return mapped


def _segments(lower: float, upper: float, breakpoints: tuple[float, ...]) -> list[tuple[float, float]]:
    inner = [b for b in breakpoints if lower < b < upper]
    if math.isinf(upper) and not inner and lower == 0.0:
        inner = [1.0]
    nodes = [lower, *inner]
    if math.isfinite(upper):
        nodes.append(upper)
    return list(zip(nodes, nodes[1:]))


def _quad(g: Integrand, a: float, b: float, epsabs: float, epsrel: float, limit: int, **weighting):
    out = scipy.integrate.quad(
        g, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit, full_output=1, **weighting
    )
    value, err = out[0], out[1]
    ier = 0 if len(out) < 4 else 1
    if ier:
        logger.debug("quad on [%g, %g] flagged: %s", a, b, out[3])
    return value, err, ier


def _integrate_segments(
    f: Integrand,
    lower: float,
    upper: float,
    cfg: QuadratureConfig,
    epsabs: float,
    epsrel: float,
) -> tuple[list[float], list[float], list[int], int]:
    counted = _Counted(f)
    values: list[float] = []
    errors: list[float] = []
    flags: list[int] = []
    segments = _segments(lower, upper, cfg.breakpoints)
    for a, b in segments:
        v, e, ier = _quad(counted, a, b, epsabs, epsrel, cfg.max_subdivisions)
        values.append(v)
        errors.append(e)
        flags.append(ier)
    if math.isinf(upper):
        start = segments[-1][1] if segments else lower
        v, e, ier = _quad(_tail(counted, start), 0.0, 1.0, epsabs, epsrel, cfg.max_subdivisions)
        values.append(v)
        errors.append(e)
        flags.append(ier)
    return values, errors, flags, counted.calls


def _summarize(
    values: list[float],
    errors: list[float],
    flags: list[int],
    calls: int,
    cfg: QuadratureConfig,
    lower: float,
    upper: float,
) -> QuadratureResult:
    value, err = math.fsum(values), math.fsum(errors)
    target = max(cfg.rel_tol * abs(value), cfg.abs_tol)
    converged = not any(flags) and err <= target
    if not converged:
        logger.warning(
            "integration on [%g, %g] not converged: value=%.16g error=%.3g (target %.3g)",
            lower,
            upper,
            value,
            err,
            target,
        )
    return QuadratureResult(
        value=value, error_estimate=err, evaluations=max(calls, 1), converged=converged
    )


def _check_lower(lower: float) -> None:
    if not (lower >= 0.0 and math.isfinite(lower)):
        raise ValueError(f"lower limit must be a finite non-negative number, got {lower!r}")


def integrate(
    f: Integrand,
    lower: float,
    upper: float = math.inf,
    cfg: QuadratureConfig | None = None,
) -> QuadratureResult:
    """Integrate a real integrand over [lower, upper], upper possibly infinite."""
    cfg = cfg or QuadratureConfig()
    _check_lower(lower)
    if not upper > lower:
        raise ValueError(f"upper limit must exceed the lower limit, got {upper!r}")

    values, errors, flags, calls = _integrate_segments(
        f, lower, upper, cfg, cfg.abs_tol, cfg.rel_tol
    )
    value, err = math.fsum(values), math.fsum(errors)
    target = max(cfg.rel_tol * abs(value), cfg.abs_tol)
    if err > target and len(values) > 1:
        # Segments of opposite sign: retry with the absolute budget split evenly.
        budget = target / len(values)
        values, errors, flags, extra = _integrate_segments(f, lower, upper, cfg, budget, 0.0)
        calls += extra
    return _summarize(values, errors, flags, calls, cfg, lower, upper)


def integrate_fourier(
    f: Integrand,
    omega: float,
    weight: Literal["cos", "sin"],
    lower: float = 0.0,
    cfg: QuadratureConfig | None = None,
) -> QuadratureResult:
    """∫_lower^∞ f(u)·cos(ωu) du, or the sine transform, with QUADPACK's Fourier rules.

    Panels between breakpoints use the weighted finite rule (QAWO). The tail
    past the last breakpoint uses the cycle-by-cycle rule (QAWF), which only
    honours an absolute target, so that target is taken relative to the
    panel sum.
    """
    cfg = cfg or QuadratureConfig()
    _check_lower(lower)
    if weight not in ("cos", "sin"):
        raise ValueError(f"weight must be 'cos' or 'sin', got {weight!r}")
    if not (math.isfinite(omega) and omega != 0.0):
        raise ValueError(f"frequency must be finite and non-zero, got {omega!r}")

    weighting: dict[str, Any] = {"weight": weight, "wvar": omega}
    counted = _Counted(f)
    values: list[float] = []
    errors: list[float] = []
    flags: list[int] = []
    segments = _segments(lower, math.inf, cfg.breakpoints)
    for a, b in segments:
        v, e, ier = _quad(
            counted, a, b, cfg.abs_tol, cfg.rel_tol, cfg.max_subdivisions, **weighting
        )
        values.append(v)
        errors.append(e)
        flags.append(ier)
    start = segments[-1][1] if segments else lower
    tail_tol = 0.5 * max(cfg.abs_tol, cfg.rel_tol * abs(math.fsum(values)))
    v, e, ier = _quad(
        counted, start, math.inf, tail_tol, 0.0, cfg.max_subdivisions, limlst=_FOURIER_CYCLES, **weighting
    )
    values.append(v)
    errors.append(e)
    flags.append(ier)
    return _summarize(values, errors, flags, counted.calls, cfg, lower, math.inf)


def laplace_scale(lam: float, Y: float) -> float:
    """w* = λ^{-1/Y}, where the mass of e^{-λ w^Y} concentrates."""
    return lam ** (-1.0 / Y)


def laplace_breakpoints(lam: float, Y: float) -> tuple[float, ...]:
    w_star = laplace_scale(lam, Y)
    return tuple(sorted({1.0, w_star, 10.0 * w_star}))


def laplace_exp_integral(lam: float, Y: float, p: float = 0.0) -> float:
    """∫₀^∞ w^p e^{-λ w^Y} dw = λ^{-(p+1)/Y} Γ((p+1)/Y) / Y."""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam!r}")
    if not p >= 0:
        raise ValueError(f"moment p must be non-negative, got {p!r}")
    if not Y > 0:
        raise ValueError(f"Y must be positive, got {Y!r}")
    s = (p + 1.0) / Y
    return lam ** (-s) * gamma(s) / Y


def laplace_frac_integral(lam: float, Y: float, alpha: float) -> float:
    """∫₀^∞ (1 - e^{-λ u^Y}) u^{αY - 1} du = -λ^{-α} Γ(α) / Y for -1 < α < 0."""
    if not -1.0 < alpha < 0.0:
        raise LaplaceDomainError(f"alpha must lie in (-1, 0), got {alpha!r}")
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam!r}")
    return -(lam ** (-alpha)) * gamma(alpha) / Y
