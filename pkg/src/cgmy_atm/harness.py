from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from cgmy_atm import expansion, pricer
from cgmy_atm.cgmy import derive
from cgmy_atm.models import (
    CgmyParams,
    GridCell,
    GridSpec,
    LatticeReport,
    QuadratureConfig,
    QuadratureError,
    QuadratureResult,
    TableKind,
    TableRow,
)
from cgmy_atm.quadrature import (
    IntegrandError,
    integrate,
    laplace_breakpoints,
    laplace_exp_integral,
    laplace_frac_integral,
)

logger = logging.getLogger(__name__)

TABLE_KINDS: tuple[TableKind, ...] = ("table_a21", "table_a12", "table_cubic", "table_convergence")
DECADES = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7]


def _p(C: float, G: float, M: float, Y: float) -> CgmyParams:
    return CgmyParams(C=C, G=G, M=M, Y=Y)


def _column(values: list[float]) -> dict[float, float]:
    return dict(zip([*DECADES, 1e-8], values))


_REFERENCE: dict[TableKind, dict[CgmyParams, dict[float, float]]] = {
    "table_a21": {
        _p(1, 3, 5, 1.2): _column([0.95748, 0.99347, 0.99903, 0.99986, 0.99998, 1.00000]),
        _p(1, 3, 5, 1.3): _column([0.94573, 0.99031, 0.99834, 0.99972, 0.99995, 0.99999]),
        _p(1, 3, 5, 1.4): _column([0.93216, 0.98620, 0.99731, 0.99948, 0.99990, 0.99998]),
    },
    "table_a12": {
        _p(1, 3, 5, 1.7): _column([0.98782, 0.99794, 0.99967, 0.99995, 0.99999, 1.00000]),
        _p(1, 3, 5, 1.8): _column([0.99140, 0.99864, 0.99980, 0.99997, 1.00000, 1.00000]),
        _p(1, 3, 5, 1.9): _column([0.99396, 0.99905, 0.99987, 0.99998, 1.00000, 1.00000]),
        _p(2, 2, 3, 1.75): _column([0.98291, 0.99710, 0.99956, 0.99994, 0.99999, 1.00000]),
    },
    "table_cubic": {
        _p(1, 3, 5, 1.15): _column([3.12, 1.85, 0.903, 0.385, 0.151, 0.056]),
        _p(1, 3, 5, 1.2): _column([5.12, 3.98, 2.56, 1.45, 0.767, 0.386]),
        _p(1, 3, 5, 1.3): _column([13.0, 16.4, 17.5, 16.8, 15.2, 13.3]),
    },
    "table_convergence": {
        _p(1, 3, 5, 1.2): _column([0.242, 0.406, 0.562, 0.688, 0.781, 0.848]),
        _p(1, 3, 5, 1.3): _column([0.380, 0.572, 0.728, 0.834, 0.901, 0.941]),
        _p(1, 3, 5, 1.4): _column([0.493, 0.684, 0.821, 0.904, 0.950, 0.974, 0.988]),
        _p(1, 3, 5, 1.7): _column([0.742, 0.865, 0.937, 0.973, 0.989, 0.996, 0.998]),
        _p(1, 3, 5, 1.9): _column([0.886, 0.942, 0.973, 0.989, 0.996, 0.998, 0.999]),
    },
}

# Printed formula rows: a21 for the first table, a12 for the second.
FORMULA_ROWS: dict[TableKind, dict[CgmyParams, float]] = {
    "table_a21": {
        _p(1, 3, 5, 1.2): 0.008981,
        _p(1, 3, 5, 1.3): 0.015382,
        _p(1, 3, 5, 1.4): 0.027278,
    },
    "table_a12": {
        _p(1, 3, 5, 1.7): 24.437,
        _p(1, 3, 5, 1.8): 29.730,
        _p(1, 3, 5, 1.9): 49.359,
        _p(2, 2, 3, 1.75): 36.297,
    },
}


def reference_table(target: TableKind) -> dict[CgmyParams, dict[float, float]]:
    if target not in _REFERENCE:
        raise ValueError(f"no reference values for target {target!r}")
    return {p: dict(column) for p, column in _REFERENCE[target].items()}


def default_grid(target: TableKind) -> GridSpec:
    t_values = DECADES + [1e-8] if target == "table_convergence" else list(DECADES)
    return GridSpec(
        parameter_sets=list(_REFERENCE[target]), t_values=t_values, target=target
    )


def convergence_remainder(p: CgmyParams) -> str:
    """Which remainder isolates a12 t^{2/Y}: R5 below 5/4, R4 up to 3/2, R3 above."""
    if p.Y <= 1.25:
        return "R5"
    if p.Y <= 1.5:
        return "R4"
    return "R3"


def _numerator(
    kind: TableKind, p: CgmyParams, t: float, cfg: QuadratureConfig
) -> tuple[QuadratureResult, float]:
    d = derive(p)
    Y = p.Y
    if kind == "table_a21":
        return pricer.laplace_check_a21(t, p, d, cfg), expansion.a21(p, d) * t ** (2.0 - 1.0 / Y)
    if kind == "table_a12":
        return pricer.laplace_check_a12(t, p, d, cfg), expansion.a12(p, d) * t ** (2.0 / Y)
    if kind == "table_cubic":
        return pricer.remainder_r4(t, p, d, cfg), t ** (3.0 - 2.0 / Y)
    remainder = {
        "R5": pricer.remainder_r5,
        "R4": pricer.remainder_r4,
        "R3": pricer.remainder_r3,
    }[convergence_remainder(p)]
    return remainder(t, p, d, cfg), expansion.a12(p, d) * t ** (2.0 / Y)


def _gate(kind: TableKind, p: CgmyParams, t: float, ratio: float, published: float | None) -> tuple[bool, bool]:
    """(gated, within_gate) for one cell."""
    if published is None:
        return False, True
    if kind in ("table_a21", "table_a12"):
        return True, abs(ratio - published) <= 5e-4
    if kind == "table_cubic":
        if p.Y not in (1.15, 1.2) or t < 1e-5:
            return False, True
        return True, abs(ratio / published - 1.0) <= 0.10
    if t < 1e-6:
        return False, True
    return True, abs(ratio - published) <= 0.01


def _lookup(kind: TableKind, p: CgmyParams, t: float) -> float | None:
    column = _REFERENCE[kind].get(p, {})
    for key, value in column.items():
        if math.isclose(key, t, rel_tol=1e-9):
            return value
    return None


def table_row(kind: TableKind, p: CgmyParams, t: float, cfg: QuadratureConfig) -> TableRow:
    published = _lookup(kind, p, t)
    try:
        result, reference = _numerator(kind, p, t, cfg)
    except (IntegrandError, QuadratureError, OverflowError) as e:
        logger.warning("%s cell %s t=%g failed: %s", kind, p.label, t, e)
        gated = published is not None
        return TableRow(
            params_label=p.label,
            Y=p.Y,
            t=t,
            numerator=math.nan,
            reference=math.nan,
            ratio=math.nan,
            quad_error=math.inf,
            within_gate=not gated,
            gated=gated,
            converged=False,
            published=published,
        )
    ratio = result.value / reference if reference != 0 else math.nan
    gated, within = _gate(kind, p, t, ratio, published)
    if gated and not within:
        logger.warning(
            "%s cell %s t=%g outside gate: ratio %.6g vs %.6g", kind, p.label, t, ratio, published
        )
    return TableRow(
        params_label=p.label,
        Y=p.Y,
        t=t,
        numerator=result.value,
        reference=reference,
        ratio=ratio,
        quad_error=result.error_estimate,
        within_gate=within,
        gated=gated,
        converged=result.converged,
        published=published,
    )


def run_table(spec: GridSpec, cfg: QuadratureConfig | None = None, workers: int = 1) -> list[TableRow]:
    """One row per (parameter set, t), parameter-set major, whatever the completion order."""
    if spec.target not in TABLE_KINDS:
        raise ValueError(f"run_table needs a table target, got {spec.target!r}")
    cfg = cfg or QuadratureConfig()
    cells = [(p, t) for p in spec.parameter_sets for t in spec.t_values]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(lambda cell: table_row(spec.target, cell[0], cell[1], cfg), cells))
    passed, failed, informational = gate_summary(rows)
    logger.info(
        "%s: %d rows, %d within gate, %d outside, %d informational",
        spec.target,
        len(rows),
        passed,
        failed,
        informational,
    )
    return rows


def gate_summary(rows: list[TableRow]) -> tuple[int, int, int]:
    passed = sum(1 for r in rows if r.gated and r.within_gate)
    failed = sum(1 for r in rows if r.gated and not r.within_gate)
    return passed, failed, len(rows) - passed - failed


def _axis(name: str, spec: tuple[float, float, int]) -> np.ndarray:
    lo, hi, steps = spec
    if int(steps) < 1:
        raise ValueError(f"{name} steps must be a positive integer, got {steps!r}")
    if hi < lo:
        raise ValueError(f"{name} range must satisfy lo <= hi, got ({lo!r}, {hi!r})")
    return np.linspace(lo, hi, int(steps))


def heatmap_cell(p: CgmyParams, cfg: QuadratureConfig) -> GridCell:
    try:
        d = derive(p)
        result = expansion.d2_integral(p, d, cfg)
        return GridCell(
            M=p.M,
            G=p.G,
            difference=result.value - expansion.d2_closed_fl(p, d),
            quad_error=result.error_estimate,
            converged=result.converged,
        )
    except (IntegrandError, OverflowError, ValueError) as e:
        logger.warning("heatmap cell %s failed: %s", p.label, e)
        return GridCell(M=p.M, G=p.G, difference=math.nan, quad_error=math.inf, converged=False, error=str(e))


def run_heatmap(
    Y: float,
    C: float,
    M_range: tuple[float, float, int],
    G_range: tuple[float, float, int],
    cfg: QuadratureConfig | None = None,
    workers: int = 1,
) -> list[GridCell]:
    """d2_integral - d2_closed_fl over an (M, G) grid, M-major."""
    m_axis = _axis("M", M_range)
    g_axis = _axis("G", G_range)
    if m_axis[0] <= 1.0:
        raise ValueError(f"M must exceed 1 across the grid, got {M_range[0]!r}")
    if g_axis[0] < 0.0:
        raise ValueError(f"G must be non-negative across the grid, got {G_range[0]!r}")
    cfg = cfg or QuadratureConfig()
    grid = [CgmyParams(C=C, G=float(G), M=float(M), Y=Y) for M in m_axis for G in g_axis]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        cells = list(pool.map(lambda p: heatmap_cell(p, cfg), grid))
    finite = [abs(c.difference) for c in cells if math.isfinite(c.difference)]
    logger.info(
        "heatmap Y=%g: %d cells, max |difference| %.3g",
        Y,
        len(cells),
        max(finite) if finite else math.nan,
    )
    return cells


def run_lattice(y_grid: list[float], n_max: int = 1, j_max: int = 4) -> LatticeReport:
    rows = expansion.exponent_lattice(y_grid)
    found = expansion.bifurcations(n_max, j_max)
    markers = sorted({b.Y for b in found if b.effective and b.n == 1})
    return LatticeReport(rows=rows, bifurcations=found, markers=markers)


LAPLACE_LAMBDAS = (1e-6, 1e-4, 1e-2, 1.0)
LAPLACE_MOMENTS = (0.0, 2.0, 4.0)


def check_laplace(Y: float, cfg: QuadratureConfig | None = None) -> list[dict[str, float | str]]:
    """Closed-form Laplace integrals against direct quadrature, one row per (λ, identity)."""
    if not 1.0 < Y < 2.0:
        raise ValueError(f"Y must lie in the open interval (1, 2), got {Y!r}")
    base = cfg or QuadratureConfig()
    alpha = 1.0 - 2.0 / Y
    rows: list[dict[str, float | str]] = []
    for lam in LAPLACE_LAMBDAS:
        qcfg = base.with_breakpoints(laplace_breakpoints(lam, Y))
        for p in LAPLACE_MOMENTS:
            closed = laplace_exp_integral(lam, Y, p)
            quad = integrate(
                lambda w, p=p: math.exp(p * math.log(w) - lam * w**Y), 0.0, cfg=qcfg
            )
            rows.append(_laplace_row("exp", lam, p, closed, quad))
        closed = laplace_frac_integral(lam, Y, alpha)
        quad = integrate(
            lambda u: -math.expm1(-lam * u**Y) * u ** (alpha * Y - 1.0), 0.0, cfg=qcfg
        )
        rows.append(_laplace_row("frac", lam, alpha, closed, quad))
    return rows


def _laplace_row(
    identity: str, lam: float, param: float, closed: float, quad: QuadratureResult
) -> dict[str, float | str]:
    rel = abs(quad.value - closed) / abs(closed)
    return {
        "identity": identity,
        "lambda": lam,
        "param": param,
        "closed_form": closed,
        "quadrature": quad.value,
        "quad_error": quad.error_estimate,
        "rel_error": rel,
    }
