import logging

from fastmcp import FastMCP
from fastmcp.exceptions import ToolError
from pydantic import ValidationError

from cgmy_atm import expansion, harness, pricer
from cgmy_atm.cgmy import derive
from cgmy_atm.models import CgmyParams, PriceRequest, QuadratureConfig
from cgmy_atm.quadrature import IntegrandError
from cgmy_atm.special_fn import GammaOverflowError

logger = logging.getLogger(__name__)

mcp = FastMCP(
    name="cgmy-atm",
    instructions=(
        "Short-maturity at-the-money call prices and their asymptotic expansion "
        "for the exponential CGMY model. Prices are normalized (spot 1, zero rates)."
    ),
)


def _params(C: float, G: float, M: float, Y: float) -> CgmyParams:
    try:
        return CgmyParams(C=C, G=G, M=M, Y=Y)
    except ValidationError as e:
        raise ToolError("; ".join(err["msg"].removeprefix("Value error, ") for err in e.errors()))


def _quad(rel_tol: float, abs_tol: float) -> QuadratureConfig:
    try:
        return QuadratureConfig(rel_tol=rel_tol, abs_tol=abs_tol)
    except ValidationError as e:
        raise ToolError(str(e))


@mcp.tool
def coeffs(C: float, G: float, M: float, Y: float) -> dict:
    """Derived constants and expansion coefficients (d1, d2, a21, a41, a12, K(Y))."""
    return expansion.coefficient_summary(_params(C, G, M, Y))


@mcp.tool
def price(
    C: float,
    G: float,
    M: float,
    Y: float,
    t: float,
    k: float = 0.0,
    rel_tol: float = 1e-12,
    abs_tol: float = 1e-15,
) -> dict:
    """Normalized call price c(t, k); k = log(S0/K), 0 for at-the-money.
    Fails when the quadrature does not reach the requested tolerance."""
    p = _params(C, G, M, Y)
    try:
        req = PriceRequest(t=t, k=k)
    except ValidationError:
        raise ToolError("t must be positive")
    try:
        result = pricer.price_from_request(req, p, cfg=_quad(rel_tol, abs_tol))
        result.require()
    except (IntegrandError, GammaOverflowError, RuntimeError) as e:
        raise ToolError(str(e))
    return {"t": t, "k": k, **result.model_dump()}


@mcp.tool
def expand(
    C: float, G: float, M: float, Y: float, t: float | None = None, include_unproven: bool = False
) -> dict:
    """Expansion terms sorted by exponent, evaluated at t when given.
    Candidate higher-order terms are included only on request and flagged unproven."""
    p = _params(C, G, M, Y)
    e = expansion.expansion_terms(p, include_unproven=include_unproven)
    out: dict = {"k_cap": e.k_cap, "terms": [term.model_dump() for term in e.terms], "notes": e.notes}
    if t is not None:
        if not t > 0:
            raise ToolError("t must be positive")
        out["value"] = expansion.evaluate_expansion(e, t, include_unproven)
    return out


@mcp.tool
def remainder(C: float, G: float, M: float, Y: float, t: float, order: int = 3) -> dict:
    """R3, R4 or R5 at maturity t: the price minus the expansion through that order."""
    if order not in (3, 4, 5):
        raise ToolError(f"order must be 3, 4 or 5, got {order!r}")
    if not t > 0:
        raise ToolError("t must be positive")
    p = _params(C, G, M, Y)
    fn = {3: pricer.remainder_r3, 4: pricer.remainder_r4, 5: pricer.remainder_r5}[order]
    try:
        result = fn(t, p, derive(p))
    except (IntegrandError, GammaOverflowError) as e:
        raise ToolError(str(e))
    return {"t": t, "order": order, **result.model_dump()}


@mcp.tool
def lattice(points: int = 99, n_max: int = 1, j_max: int = 4) -> dict:
    """Exponent lattice on an evenly spaced Y grid in (1, 2) with the bifurcation list."""
    if points < 1:
        raise ToolError("points must be a positive integer")
    try:
        y_grid = [1.0 + (i + 1) / (points + 1) for i in range(points)]
        return harness.run_lattice(y_grid, n_max, j_max).model_dump()
    except ValueError as e:
        raise ToolError(str(e))


@mcp.tool
def check_laplace(Y: float) -> list[dict]:
    """Closed-form Laplace integrals against direct quadrature for the given Y."""
    try:
        return harness.check_laplace(Y)
    except (ValueError, IntegrandError, GammaOverflowError) as e:
        raise ToolError(str(e))


def main():
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    mcp.run()


if __name__ == "__main__":
    main()
