"""Coefficients of the small-time ATM expansion and the exponent structure behind them.

The proven expansion is

    c(t) = d1 t^{1/Y} + d2 t + Σ_k a_{2k,1} t^{2k-(2k-1)/Y} + a12 t^{2/Y} + o(t^{2/Y}),

with the drift family truncated at K(Y). Candidate higher terms are computed on
request and always marked unproven.
"""

from __future__ import annotations

import json
import logging
import math
from typing import Any

from cgmy_atm.cgmy import delta, ensure_derived, theta0
from cgmy_atm.models import (
    Bifurcation,
    CgmyParams,
    DerivedParams,
    Expansion,
    ExpansionTerm,
    LatticeRow,
    QuadratureConfig,
    QuadratureResult,
)
from cgmy_atm.quadrature import integrate, laplace_breakpoints
from cgmy_atm.special_fn import gamma

logger = logging.getLogger(__name__)

TIE_TOL = 1e-12

# (label, exponent as a function of Y, coefficient vanishes identically)
LATTICE_CURVES: tuple[tuple[str, Any, bool], ...] = (
    ("1/Y", lambda Y: 1.0 / Y, False),
    ("1", lambda Y: 1.0, False),
    ("2-1/Y", lambda Y: 2.0 - 1.0 / Y, False),
    ("2/Y", lambda Y: 2.0 / Y, False),
    ("1+1/Y", lambda Y: 1.0 + 1.0 / Y, False),
    ("3-2/Y", lambda Y: 3.0 - 2.0 / Y, True),
    ("4-3/Y", lambda Y: 4.0 - 3.0 / Y, False),
    ("3/Y", lambda Y: 3.0 / Y, False),
    ("5-4/Y", lambda Y: 5.0 - 4.0 / Y, True),
    ("7-6/Y", lambda Y: 7.0 - 6.0 / Y, True),
)


def _laplace_factor(m: int, p: CgmyParams, d: DerivedParams) -> float:
    """σ^{-m/Y} Γ(m/Y) / (πY), the Laplace weight of w^{m-1} against e^{-σ w^Y}."""
    Y = p.Y
    return d.sigma_y ** (-m / Y) * gamma(m / Y) / (math.pi * Y)


def d1(p: CgmyParams, d: DerivedParams | None = None) -> float:
    d = ensure_derived(p, d)
    return gamma(1.0 - 1.0 / p.Y) * d.sigma_y ** (1.0 / p.Y) / math.pi


def d1_integral(
    p: CgmyParams, d: DerivedParams | None = None, cfg: QuadratureConfig | None = None
) -> QuadratureResult:
    """d1 by quadrature: (1/π) ∫₀^∞ (1 - e^{-σ_Y u^Y}) / u² du."""
    d = ensure_derived(p, d)
    Y, sigma = p.Y, d.sigma_y
    cfg = (cfg or QuadratureConfig()).with_breakpoints(laplace_breakpoints(sigma, Y))

    def integrand(u: float) -> float:
        return -math.expm1(-sigma * u**Y) / (u * u)

    return integrate(integrand, 0.0, cfg=cfg).scaled(1.0 / math.pi)


def d2_integral(
    p: CgmyParams, d: DerivedParams | None = None, cfg: QuadratureConfig | None = None
) -> QuadratureResult:
    """d2 = (1/π) ∫₀^∞ [θ₀(w)/w² - Re ψ₀(w)/(w² + 1/4)] dw.

    The integrand is rewritten as θ₀/(4w²(w²+1/4)) - Re δ(w)/(w²+1/4) so the
    two O(w^{Y-2}) pieces never cancel numerically.
    """
    d = ensure_derived(p, d)
    scale = max(d.m_shift, d.g_shift)
    cfg = (cfg or QuadratureConfig()).with_breakpoints(
        [0.5, d.g_shift, d.m_shift, 10.0 * scale]
    )

    def integrand(w: float) -> float:
        q = w * w + 0.25
        return theta0(w, p, d) / (4.0 * w * w * q) - delta(w, p, d).real / q

    return integrate(integrand, 0.0, cfg=cfg).scaled(1.0 / math.pi)


def d2_closed_fl(p: CgmyParams, d: DerivedParams | None = None) -> float:
    d = ensure_derived(p, d)
    C_gamma, G, M, Y = d.c_gamma, p.G, p.M, p.Y
    return C_gamma / 2.0 * ((M - 1.0) ** Y - M**Y - (G + 1.0) ** Y + G**Y)


def stable_density_at_zero(p: CgmyParams, d: DerivedParams | None = None) -> float:
    """p_Z(0) for the symmetric stable law with exponent -σ_Y|u|^Y."""
    return _laplace_factor(1, p, ensure_derived(p, d))


def a_drift(k: int, p: CgmyParams, d: DerivedParams | None = None) -> float:
    """a_{2k,1}, the coefficient carried by the 2k-th power of the drift."""
    if k < 1:
        raise ValueError(f"drift order k must be a positive integer, got {k!r}")
    d = ensure_derived(p, d)
    sign = 1.0 if k % 2 else -1.0
    return sign * d.tilde_b ** (2 * k) / math.factorial(2 * k) * _laplace_factor(2 * k - 1, p, d)


def a21(p: CgmyParams, d: DerivedParams | None = None) -> float:
    return a_drift(1, p, d)


def a41(p: CgmyParams, d: DerivedParams | None = None) -> float:
    return a_drift(2, p, d)


def a12(p: CgmyParams, d: DerivedParams | None = None) -> float:
    d = ensure_derived(p, d)
    Y = p.Y
    return (
        -(d.c_gamma * (d.m_shift + d.g_shift) * math.sin(Y * math.pi / 2.0) / math.pi)
        * gamma(1.0 - 2.0 / Y)
        * d.sigma_y ** ((2.0 - Y) / Y)
    )


def k_cap(Y: float) -> int:
    """K(Y) = max(⌊1/(2(Y-1))⌋, 2): drift orders that can precede t^{2/Y}."""
    if not 1.0 < Y < 2.0:
        raise ValueError(f"Y must lie in the open interval (1, 2), got {Y!r}")
    # 1e-9 keeps exact lattice values such as Y=1.1 from flooring down through rounding.
    return max(math.floor(1.0 / (2.0 * (Y - 1.0)) + 1e-9), 2)


def higher_candidates(p: CgmyParams, d: DerivedParams | None = None) -> list[ExpansionTerm]:
    """Unproven next-order terms: the κ/drift cross term and, for Y > 3/2, the t^{3/Y} term."""
    d = ensure_derived(p, d)
    Y, sigma = p.Y, d.sigma_y
    g = gamma((Y - 1.0) / Y)
    cross = (
        d.kappa * sigma ** (1.0 / Y) * g / math.pi
        + d.tilde_b * d.beta1.imag * sigma ** (-(Y - 1.0) / Y) * g / (math.pi * Y)
    )
    terms = [
        ExpansionTerm(
            exponent=1.0 + 1.0 / Y,
            coefficient=cross,
            mechanism="candidate_kappa_cross",
            proven=False,
            label="d_{1+1/Y}",
        )
    ]
    if Y > 1.5:
        second = -d.beta2.real / (math.pi * Y) * sigma ** ((3.0 - Y) / Y) * gamma(
            1.0 - 3.0 / Y
        ) - (d.beta1 * d.beta1).real / (2.0 * math.pi * Y) * sigma ** (
            (3.0 - 2.0 * Y) / Y
        ) * gamma((2.0 * Y - 3.0) / Y)
        terms.append(
            ExpansionTerm(
                exponent=3.0 / Y,
                coefficient=second,
                mechanism="candidate_second_binomial",
                proven=False,
                label="d_{3/Y}",
            )
        )
    else:
        logger.info("t^{3/Y} candidate omitted for %s: it only applies when Y > 3/2", p.label)
    return terms


def _mark_ties(terms: list[ExpansionTerm]) -> tuple[list[ExpansionTerm], list[str]]:
    tied = [False] * len(terms)
    notes: list[str] = []
    for i in range(len(terms) - 1):
        a, b = terms[i], terms[i + 1]
        if abs(a.exponent - b.exponent) <= TIE_TOL:
            tied[i] = tied[i + 1] = True
            notes.append(f"{a.label} and {b.label} coalesce at t^{a.exponent:.6g}")
    marked = [
        term.model_copy(update={"tie": True}) if flag else term for term, flag in zip(terms, tied)
    ]
    return marked, notes


def expansion_terms(
    p: CgmyParams, d: DerivedParams | None = None, include_unproven: bool = False
) -> Expansion:
    d = ensure_derived(p, d)
    Y = p.Y
    cap = k_cap(Y)
    leading = max(2.0 - 1.0 / Y, 2.0 / Y)
    terms = [
        ExpansionTerm(
            exponent=1.0 / Y, coefficient=d1(p, d), mechanism="stable_first_order", label="d1"
        ),
        ExpansionTerm(
            exponent=1.0, coefficient=d2_closed_fl(p, d), mechanism="second_order", label="d2"
        ),
    ]
    for k in range(1, cap + 1):
        exponent = 2.0 * k - (2.0 * k - 1.0) / Y
        terms.append(
            ExpansionTerm(
                exponent=exponent,
                coefficient=a_drift(k, p, d),
                mechanism="drift",
                drift_order=k,
                label=f"a{2 * k},1",
                absorbed=exponent > leading + TIE_TOL,
            )
        )
    terms.append(
        ExpansionTerm(exponent=2.0 / Y, coefficient=a12(p, d), mechanism="binomial_first", label="a1,2")
    )
    if include_unproven:
        terms.extend(higher_candidates(p, d))
    terms.sort(key=lambda term: term.exponent)
    terms, notes = _mark_ties(terms)
    absorbed = [term.label for term in terms if term.absorbed]
    if absorbed:
        notes.append(f"{', '.join(absorbed)} sit inside the o(t^{{2/Y}}) remainder")
    return Expansion(params=p, terms=terms, k_cap=cap, notes=notes)


def evaluate_expansion(e: Expansion, t: float, include_unproven: bool = False) -> float:
    if not t > 0:
        raise ValueError("t must be positive")
    terms = e.terms if include_unproven else e.proven_terms()
    return math.fsum(term.coefficient * t**term.exponent for term in terms)


def effective_order(Y: float) -> list[tuple[str, float]]:
    """Third- and fourth-order exponents among the non-vanishing candidates.

    Exponents within 1e-12 of each other are reported together, their labels
    joined with ``+``.
    """
    if not 1.0 < Y < 2.0:
        raise ValueError(f"Y must lie in the open interval (1, 2), got {Y!r}")
    candidates = [(label, fn(Y)) for label, fn, vanishes in LATTICE_CURVES if not vanishes]
    candidates = [(label, x) for label, x in candidates if x > 1.0 + TIE_TOL]
    if Y <= 1.5:
        candidates = [(label, x) for label, x in candidates if label != "3/Y"]
    for k in range(3, k_cap(Y) + 1):
        candidates.append((f"{2 * k}-{2 * k - 1}/Y", 2.0 * k - (2.0 * k - 1.0) / Y))
    candidates.sort(key=lambda c: c[1])
    groups: list[tuple[str, float]] = []
    for label, x in candidates:
        if groups and abs(groups[-1][1] - x) <= TIE_TOL:
            groups[-1] = (f"{groups[-1][0]}+{label}", groups[-1][1])
        else:
            groups.append((label, x))
    return groups[:2]


def exponent_lattice(y_grid: list[float]) -> list[LatticeRow]:
    rows: list[LatticeRow] = []
    for Y in y_grid:
        if not 1.0 < Y < 2.0:
            raise ValueError(f"Y must lie in the open interval (1, 2), got {Y!r}")
        for label, fn, vanishes in LATTICE_CURVES:
            rows.append(LatticeRow(Y=Y, exponent=fn(Y), label=label, coefficient_vanishes=vanishes))
    return rows


def bifurcations(n_max: int, j_max: int) -> list[Bifurcation]:
    """Values Y = (n+j)/j where the n-th binomial exponent meets the j-th drift exponent.

    Odd drift powers carry a zero coefficient, so only even j changes the ordering.
    """
    if n_max < 1 or j_max < 1:
        raise ValueError("n_max and j_max must be positive integers")
    found: list[Bifurcation] = []
    for j in range(1, j_max + 1):
        for n in range(1, n_max + 1):
            if n >= j:
                continue
            effective = j % 2 == 0
            note = "" if effective else f"drift power {j} vanishes; ordering unchanged"
            found.append(Bifurcation(n=n, j=j, Y=(n + j) / j, effective=effective, note=note))
    return found


def expansion_to_json(e: Expansion) -> str:
    payload = {
        "Y": e.params.Y,
        "params": e.params.model_dump(),
        "k_cap": e.k_cap,
        "terms": [term.model_dump() for term in e.terms],
        "notes": e.notes,
    }
    return json.dumps(payload, indent=2)


def expansion_from_json(text: str) -> Expansion:
    raw = json.loads(text)
    return Expansion(
        params=CgmyParams(**raw["params"]),
        terms=[ExpansionTerm(**term) for term in raw["terms"]],
        k_cap=raw["k_cap"],
        notes=raw.get("notes", []),
    )


def coefficient_summary(p: CgmyParams, d: DerivedParams | None = None) -> dict[str, Any]:
    """Derived constants plus every closed-form coefficient, JSON-ready."""
    d = ensure_derived(p, d)
    return {
        "params": p.model_dump(),
        "derived": d.model_dump(mode="json"),
        "d1": d1(p, d),
        "d2": d2_closed_fl(p, d),
        "a21": a21(p, d),
        "a41": a41(p, d),
        "a12": a12(p, d),
        "p_z": stable_density_at_zero(p, d),
        "k_cap": k_cap(p.Y),
    }
