from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import ValidationError

from cgmy_atm import artifacts, expansion, harness, pricer
from cgmy_atm.cgmy import derive
from cgmy_atm.config import load_config
from cgmy_atm.models import CgmyParams, GridSpec, PriceRequest, RunConfig, TableKind
from cgmy_atm.quadrature import IntegrandError
from cgmy_atm.special_fn import GammaOverflowError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_GATE = 2
EXIT_NONCONVERGED = 3

EXAMPLES = """\
commands:
  price          cgmy-atm price --C 1 --G 3 --M 5 --Y 1.5 --t 0.01
  coeffs         cgmy-atm coeffs --C 1 --G 3 --M 5 --Y 1.7 --format json
  expand         cgmy-atm expand --C 1 --G 3 --M 5 --Y 1.7 --tmin 1e-5 --tmax 1e-2 --points 4
  remainder      cgmy-atm remainder --C 1 --G 3 --M 5 --Y 1.4 --order 4 --t 1e-4
  table          cgmy-atm table --kind a21 --out a21.csv
  heatmap        cgmy-atm heatmap --Y 1.5 --C 1 --M-range 2 8 8 --G-range 1 7 8
  lattice        cgmy-atm lattice --points 99 --format json
  check-laplace  cgmy-atm check-laplace --Y 1.7
"""

_TABLE_KINDS: dict[str, TableKind] = {
    "a21": "table_a21",
    "a12": "table_a12",
    "cubic": "table_cubic",
    "convergence": "table_convergence",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _model_flags(p: argparse.ArgumentParser) -> None:
    for name in ("C", "G", "M", "Y"):
        p.add_argument(f"--{name}", type=float, default=None, help=f"CGMY parameter {name}")


def _t_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--t", type=float, default=None, help="single maturity")
    p.add_argument("--tmin", type=float, default=None)
    p.add_argument("--tmax", type=float, default=None)
    p.add_argument("--points", type=int, default=None, help="log-spaced maturities in [tmin, tmax]")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="cgmy-atm",
        description="Short-maturity ATM call asymptotics for the exponential CGMY model.",
        epilog=EXAMPLES,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    common = _Parser(add_help=False)
    common.add_argument("--config", default=None, help="JSON config file (or CGMY_ATM_CONFIG)")
    common.add_argument("--rel-tol", dest="rel_tol", type=float, default=None)
    common.add_argument("--abs-tol", dest="abs_tol", type=float, default=None)
    common.add_argument("--out", default=None, help="output file (stdout when omitted)")
    common.add_argument("--format", choices=["csv", "json"], default=None)
    common.add_argument("--workers", type=int, default=None)
    common.add_argument("-v", "--verbose", action="store_true")
    common.add_argument("-q", "--quiet", action="store_true")

    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("price", parents=[common], help="normalized call price")
    _model_flags(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--k", type=float, default=0.0, help="log-moneyness log(S0/K)")

    p = sub.add_parser("coeffs", parents=[common], help="derived constants and coefficients")
    _model_flags(p)

    p = sub.add_parser("expand", parents=[common], help="expansion terms and values")
    _model_flags(p)
    _t_flags(p)
    p.add_argument("--include-unproven", action="store_true")

    p = sub.add_parser("remainder", parents=[common], help="R3, R4 or R5 by quadrature")
    _model_flags(p)
    _t_flags(p)
    p.add_argument("--order", type=int, choices=[3, 4, 5], default=3)

    p = sub.add_parser("table", parents=[common], help="reproduce a verification table")
    p.add_argument("--kind", choices=sorted(_TABLE_KINDS), required=True)

    p = sub.add_parser("heatmap", parents=[common], help="d2 integral minus closed form")
    p.add_argument("--Y", type=float, required=True)
    p.add_argument("--C", type=float, default=1.0)
    for axis in ("M", "G"):
        p.add_argument(
            f"--{axis}-range",
            dest=f"{axis}_range",
            nargs=3,
            type=float,
            default=None,
            metavar=("LO", "HI", "STEPS"),
        )
    p.add_argument(
        "--steps",
        dest="heatmap_steps",
        type=int,
        default=None,
        help="steps per axis for ranges taken from the config",
    )

    p = sub.add_parser("lattice", parents=[common], help="exponent lattice and bifurcations")
    p.add_argument("--points", type=int, default=99, help="Y grid size on (1, 2)")
    p.add_argument("--n-max", dest="n_max", type=int, default=1)
    p.add_argument("--j-max", dest="j_max", type=int, default=4)

    p = sub.add_parser("check-laplace", parents=[common], help="Laplace identities vs quadrature")
    p.add_argument("--Y", type=float, required=True)
    return parser


def _params(args: argparse.Namespace, cfg: RunConfig) -> CgmyParams:
    values = cfg.params.model_dump() if cfg.params else {}
    values.update({k: getattr(args, k) for k in "CGMY" if getattr(args, k, None) is not None})
    missing = [k for k in "CGMY" if k not in values]
    if missing:
        raise UsageError(f"missing model flag(s): {', '.join('--' + k for k in missing)}")
    return CgmyParams(**values)


def _t_grid(args: argparse.Namespace, cfg: RunConfig) -> list[float]:
    if args.t is not None:
        PriceRequest(t=args.t)
        return [args.t]
    if args.tmin is not None and args.tmax is not None:
        points = args.points or 4
        if not 0 < args.tmin <= args.tmax:
            raise UsageError("--tmin and --tmax must satisfy 0 < tmin <= tmax")
        return [float(t) for t in np.geomspace(args.tmax, args.tmin, points)]
    if cfg.t_values:
        return list(cfg.t_values)
    raise UsageError("give --t or both --tmin and --tmax")


def _emit(args: argparse.Namespace, text: str) -> None:
    if args.out:
        artifacts.write_text_atomic(Path(args.out), text)
    else:
        sys.stdout.write(text)


def _csv(header: list[str], rows: list[list[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _emit_json(args: argparse.Namespace, payload: Any) -> None:
    if args.out:
        artifacts.write_json(Path(args.out), payload)
    else:
        sys.stdout.write(json.dumps(payload, indent=2) + "\n")


def _cmd_price(args: argparse.Namespace, cfg: RunConfig) -> int:
    req = PriceRequest(t=args.t, k=args.k)
    p = _params(args, cfg)
    result = pricer.price_from_request(req, p, cfg=cfg.quadrature())
    if cfg.format == "json":
        _emit_json(args, {"params": p.model_dump(), "t": req.t, "k": req.k, **result.model_dump()})
    else:
        _emit(
            args,
            _csv(
                ["params", "t", "k", "price", "quad_error", "converged"],
                [[p.label, req.t, req.k, repr(result.value), f"{result.error_estimate:.3g}", result.converged]],
            ),
        )
    return EXIT_OK if result.converged else EXIT_NONCONVERGED


def _cmd_coeffs(args: argparse.Namespace, cfg: RunConfig) -> int:
    coeffs = expansion.coefficient_summary(_params(args, cfg))
    if cfg.format == "json":
        _emit_json(args, coeffs)
    else:
        scalars = [[k, repr(v)] for k, v in coeffs.items() if k not in ("params", "derived")]
        _emit(args, _csv(["name", "value"], scalars))
    return EXIT_OK


def _cmd_expand(args: argparse.Namespace, cfg: RunConfig) -> int:
    p = _params(args, cfg)
    e = expansion.expansion_terms(p, include_unproven=args.include_unproven)
    ts = _t_grid(args, cfg)
    values = [expansion.evaluate_expansion(e, t, args.include_unproven) for t in ts]
    if cfg.format == "json":
        doc = json.loads(expansion.expansion_to_json(e))
        doc["values"] = [{"t": t, "expansion": v} for t, v in zip(ts, values)]
        _emit_json(args, doc)
    else:
        _emit(args, _csv(["t", "expansion"], [[t, repr(v)] for t, v in zip(ts, values)]))
    return EXIT_OK


def _cmd_remainder(args: argparse.Namespace, cfg: RunConfig) -> int:
    p = _params(args, cfg)
    fn = {3: pricer.remainder_r3, 4: pricer.remainder_r4, 5: pricer.remainder_r5}[args.order]
    d = derive(p)
    results = [(t, fn(t, p, d, cfg.quadrature())) for t in _t_grid(args, cfg)]
    if cfg.format == "json":
        _emit_json(args, [{"t": t, "order": args.order, **r.model_dump()} for t, r in results])
    else:
        _emit(
            args,
            _csv(
                ["t", f"R{args.order}", "quad_error", "converged"],
                [[t, repr(r.value), f"{r.error_estimate:.3g}", r.converged] for t, r in results],
            ),
        )
    return EXIT_OK if all(r.converged for _, r in results) else EXIT_NONCONVERGED


def _cmd_table(args: argparse.Namespace, cfg: RunConfig) -> int:
    kind = _TABLE_KINDS[args.kind]
    spec = harness.default_grid(kind)
    overrides: dict[str, Any] = {}
    if kind in cfg.table_params:
        overrides["parameter_sets"] = cfg.table_params[kind]
    if cfg.t_values:
        overrides["t_values"] = cfg.t_values
    if overrides:
        spec = GridSpec.model_validate({**spec.model_dump(), **overrides})
    rows = harness.run_table(spec, cfg.quadrature(), workers=cfg.workers)
    if cfg.format == "json":
        _emit_json(args, [row.model_dump() for row in rows])
    elif args.out:
        artifacts.write_rows_csv(Path(args.out), rows)
    else:
        sys.stdout.write(artifacts.rows_to_csv(rows))
    _, failed, _ = harness.gate_summary(rows)
    return EXIT_GATE if failed else EXIT_OK


def _axis(
    flag: list[float] | None, default: tuple[float, float], steps: int
) -> tuple[float, float, int]:
    if flag is None:
        return (*default, steps)
    lo, hi, n = flag
    return (lo, hi, int(n))


def _cmd_heatmap(args: argparse.Namespace, cfg: RunConfig) -> int:
    cells = harness.run_heatmap(
        args.Y,
        args.C,
        _axis(args.M_range, cfg.heatmap_m_range, cfg.heatmap_steps),
        _axis(args.G_range, cfg.heatmap_g_range, cfg.heatmap_steps),
        cfg.quadrature(),
        workers=cfg.workers,
    )
    if cfg.format == "json":
        _emit_json(args, [cell.model_dump() for cell in cells])
    else:
        _emit(
            args,
            _csv(
                ["M", "G", "difference", "quad_error", "converged"],
                [[c.M, c.G, repr(c.difference), f"{c.quad_error:.3g}", c.converged] for c in cells],
            ),
        )
    return EXIT_OK


def _cmd_lattice(args: argparse.Namespace, cfg: RunConfig) -> int:
    if args.points < 1:
        raise UsageError("--points must be a positive integer")
    y_grid = [float(y) for y in np.linspace(1.0, 2.0, args.points + 2)[1:-1]]
    report = harness.run_lattice(y_grid, args.n_max, args.j_max)
    if cfg.format == "json":
        _emit_json(args, report.model_dump())
    else:
        _emit(
            args,
            _csv(
                ["Y", "exponent", "label", "coefficient_vanishes"],
                [[r.Y, repr(r.exponent), r.label, r.coefficient_vanishes] for r in report.rows],
            ),
        )
    return EXIT_OK


def _cmd_check_laplace(args: argparse.Namespace, cfg: RunConfig) -> int:
    rows = harness.check_laplace(args.Y, cfg.quadrature())
    if cfg.format == "json":
        _emit_json(args, rows)
    else:
        header = list(rows[0])
        _emit(args, _csv(header, [[row[k] for k in header] for row in rows]))
    worst = max(row["rel_error"] for row in rows)
    logger.info("largest relative error %.3g", worst)
    return EXIT_OK if worst <= 1e-10 else EXIT_GATE


_COMMANDS = {
    "price": _cmd_price,
    "coeffs": _cmd_coeffs,
    "expand": _cmd_expand,
    "remainder": _cmd_remainder,
    "table": _cmd_table,
    "heatmap": _cmd_heatmap,
    "lattice": _cmd_lattice,
    "check-laplace": _cmd_check_laplace,
}


def _describe(e: ValidationError) -> str:
    parts = []
    for err in e.errors():
        loc = ".".join(str(x) for x in err["loc"])
        msg = err["msg"].removeprefix("Value error, ")
        parts.append(f"--{loc}: {msg}" if loc else msg)
    return "; ".join(parts)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"cgmy-atm: error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_INVALID

    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")

    try:
        cfg = load_config(
            args.config,
            rel_tol=args.rel_tol,
            abs_tol=args.abs_tol,
            format=args.format,
            workers=args.workers,
            heatmap_steps=getattr(args, "heatmap_steps", None),
        )
        return _COMMANDS[args.command](args, cfg)
    except ValidationError as e:
        print(f"cgmy-atm: error: {_describe(e)}", file=sys.stderr)
        return EXIT_INVALID
    except (UsageError, ValueError, FileNotFoundError) as e:
        print(f"cgmy-atm: error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except (IntegrandError, GammaOverflowError) as e:
        print(f"cgmy-atm: error: {e}", file=sys.stderr)
        return EXIT_NONCONVERGED


if __name__ == "__main__":
    sys.exit(main())
