"""Command-line front end.

Subcommands::

    relasym compute RHO SIGMA
    relasym verify  [--dim D ...] [--n N] [--seed S] [--floor F]
    relasym prop    [--dim D ...] [--n N] [--nodes K]  | --sigma F --delta F --t T
    relasym chain   [--dim D] [--n N] [--t-nodes M]    | --sigma F --delta F --t T
    relasym ascent  [--dim D ...] [--n N]              | --rho F --delta F
    relasym grid    [--kind a|s2] [--p-range LO HI] [--t-range LO HI] [--resolution R]

Matrices are read from JSON files ``{"dim": d, "re": [[...]], "im": [[...]]}``.
Report files start with a ``#`` line recording the tool version, seed,
tolerance profile and units. Exit status is 0 on success, 1 on a usage or
input error and 2 when a checked inequality is violated.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import statistics
import sys

import numpy as np

from . import __version__
from .bounds import (
    DEFAULT_T_NODES,
    VIOLATED,
    _num,
    corollary_bound,
    proof_chain_check,
    proposition_check,
    theorem_bound,
    trace_cap_check,
)
from .divergences import j_divergence, relative_entropy
from .errors import DomainError, RelasymError
from .extremal import commuting_orbit_max, unitary_ascent
from .frechet import DEFAULT_NODES, Perturbation, QuadratureRule
from .scalar import asym_a, s2
from .spectral import DEFAULT_TOLERANCES, DensityMatrix, min_eigenvalue, read_matrix
from . import sweeps

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION = 0, 1, 2
ASCENT_GAP_TOL = 1e-6


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def header_line(seed) -> str:
    tol = json.dumps(DEFAULT_TOLERANCES.as_dict(), sort_keys=True)
    seed = "none" if seed is None else seed
    return f"# relasym {__version__} seed={seed} tolerances={tol} units: nats"


def _flatten(rec: dict) -> dict:
    out = {}
    for k, v in rec.items():
        if isinstance(v, dict):
            out.update({f"{k}.{kk}": vv for kk, vv in v.items()})
        else:
            out[k] = v
    return out


def render(records, fmt: str, seed) -> str:
    """Header line plus records as JSON lines or CSV."""
    buf = io.StringIO()
    buf.write(header_line(seed) + "\n")
    if fmt == "jsonl":
        for rec in records:
            buf.write(json.dumps(rec) + "\n")
        return buf.getvalue()
    rows = [_flatten(r) for r in records]
    fields = []
    for row in rows:
        fields.extend(k for k in row if k not in fields)
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _emit(text: str, path):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _print_json(obj):
    print(json.dumps(obj))


def _slack_summary(reports) -> dict:
    s = sweeps.summarize(reports)
    return {k: _num(v) for k, v in s.items()}


# -- compute -----------------------------------------------------------------------


def cmd_compute(args) -> int:
    rho = read_matrix(args.rho, DensityMatrix)
    sigma = read_matrix(args.sigma, DensityMatrix)
    s_rs, s_sr = relative_entropy(rho, sigma), relative_entropy(sigma, rho)
    rep = corollary_bound(rho, sigma)
    z = max(min(rep.x, rep.y), 0.0)
    out = {
        "S_rho_sigma": _num(s_rs.value),
        "S_sigma_rho": _num(s_sr.value),
        "J": _num(j_divergence(rho, sigma).value),
        "A": _num(abs(s_rs.value - s_sr.value) if s_rs.finite and s_sr.finite else math.inf),
        "T": rep.T,
        "x": rep.x,
        "y": rep.y,
        "a": _num(asym_a(z, min(rep.T, 1.0 - z))),
        "slack": _num(rep.slack),
        "verdict": rep.verdict,
    }
    _print_json(out)
    return EXIT_VIOLATION if rep.verdict == VIOLATED else EXIT_OK


# -- verify ------------------------------------------------------------------------


def cmd_verify(args) -> int:
    if args.rho or args.sigma:
        if not (args.rho and args.sigma):
            raise ValueError("--rho and --sigma must be given together")
        rho = read_matrix(args.rho, DensityMatrix)
        sigma = read_matrix(args.sigma, DensityMatrix)
        z = max(0.0, min(min_eigenvalue(rho), min_eigenvalue(sigma)))
        reports = [theorem_bound(rho, sigma), corollary_bound(rho, sigma), trace_cap_check(rho, sigma, z)]
    else:
        reports = []
        for d in args.dim:
            reports += sweeps.verify_sweep(d, args.n, args.seed, args.floor, args.workers)
    _write_reports(args, [r.to_record() for r in reports])
    summary = _slack_summary(reports)
    _print_json(summary)
    return EXIT_VIOLATION if summary["violated"] else EXIT_OK


def _write_reports(args, records):
    text = render(records, args.format, args.seed)
    _emit(text, args.out)


def _read_triple(args):
    if not (args.sigma and args.delta and args.t is not None):
        raise ValueError("--sigma, --delta and --t must be given together")
    sigma = read_matrix(args.sigma, DensityMatrix)
    delta = Perturbation(read_matrix(args.delta).data)
    return sigma, delta, args.t


# -- prop --------------------------------------------------------------------------


def cmd_prop(args) -> int:
    rule = QuadratureRule(args.nodes)
    if args.sigma or args.delta:
        sigma, delta, t = _read_triple(args)
        reports = [proposition_check(sigma, delta, t, rule)]
    else:
        reports = []
        for d in args.dim:
            reports += sweeps.prop_sweep(
                d, args.n, args.seed, args.floor, args.t_fraction, args.nodes, args.workers
            )
    _write_reports(args, [r.to_record() for r in reports])
    summary = _slack_summary(reports)
    _print_json(summary)
    return EXIT_VIOLATION if summary["violated"] else EXIT_OK


# -- chain -------------------------------------------------------------------------


def chain_summary(reports) -> dict:
    res = np.array([r.residuals for r in reports]).reshape(-1, 3)
    return {
        "n": len(reports),
        "t_nodes": reports[0].t_nodes if reports else None,
        "holds": sum(r.holds for r in reports),
        "max_residual": [float(v) for v in res.max(axis=0)],
        "sum_residual": [float(v) for v in res.sum(axis=0)],
    }


def cmd_chain(args) -> int:
    rule = QuadratureRule(args.nodes)
    if args.sigma or args.delta:
        sigma, delta, T = _read_triple(args)
        reports = [proof_chain_check(sigma, delta, T, rule, t_nodes=args.t_nodes)]
    else:
        reports = []
        for d in args.dim:
            reports += sweeps.chain_sweep(
                d, args.n, args.seed, args.floor, args.t_fraction, args.t_nodes, args.nodes,
                args.workers,
            )
    _write_reports(args, [r.to_record() for r in reports])
    summary = chain_summary(reports)
    _print_json(summary)
    return EXIT_OK if summary["holds"] == summary["n"] else EXIT_VIOLATION


# -- ascent ------------------------------------------------------------------------


def ascent_summary(records) -> dict:
    gaps = [r["gap"] for r in records]
    return {
        "n": len(records),
        "converged": sum(r["converged"] for r in records),
        "anti_ordered": sum(r["anti_ordered"] for r in records),
        "max_gap": max(gaps),
        "max_commutator_defect": max(r["commutator_defect"] for r in records),
        "median_iterations": statistics.median(r["iterations"] for r in records),
    }


def cmd_ascent(args) -> int:
    rule = QuadratureRule(args.nodes)
    trajectories = []
    if args.rho or args.delta:
        if not (args.rho and args.delta):
            raise ValueError("--rho and --delta must be given together")
        rho = read_matrix(args.rho, DensityMatrix)
        delta = Perturbation(read_matrix(args.delta).data)
        state = unitary_ascent(
            rho, delta, rule, max_iter=args.max_iter, seed=args.seed, record=bool(args.trajectory)
        )
        best = commuting_orbit_max(rho, delta.delta.spectrum.eigenvalues)
        records = [sweeps.ascent_record(rho, state, best, args.seed)]
        trajectories = state.trajectory_records()
    else:
        records = []
        for d in args.dim:
            records += sweeps.ascent_sweep(
                d, args.n, args.seed, args.floor, args.nodes, args.max_iter, args.workers
            )
    _write_reports(args, records)
    if args.trajectory:
        if not trajectories:
            raise ValueError("--trajectory needs a single run given by --rho and --delta")
        _emit(render(trajectories, "jsonl", args.seed), args.trajectory)
    summary = ascent_summary(records)
    _print_json(summary)
    # an objective above the commuting maximum contradicts extremality
    return EXIT_VIOLATION if summary["max_gap"] < -ASCENT_GAP_TOL else EXIT_OK


# -- grid --------------------------------------------------------------------------


def _cell(fn, *args):
    try:
        value = fn(*args)
    except DomainError:
        return ""
    # inf - inf: no value to report
    return "" if math.isnan(value) else _num(value)


def grid_records(kind, p_range, second_range, resolution):
    """Rows of the ``a(p, t)`` or ``s2(p, q)`` grid; out-of-domain values are ``""``."""
    if resolution < 2:
        raise ValueError(f"resolution must be >= 2, got {resolution}")
    for lo, hi in (p_range, second_range):
        if not lo <= hi:
            raise ValueError(f"invalid range [{lo}, {hi}]")
    # a degenerate range is a single grid line
    ps, qs = (np.linspace(lo, hi, resolution if lo < hi else 1) for lo, hi in (p_range, second_range))
    rows = []
    for p in ps.tolist():
        for v in qs.tolist():
            if kind == "a":
                rows.append({"p": p, "t": v, "a": _cell(asym_a, p, v)})
            else:
                rows.append({
                    "p": p,
                    "q": v,
                    "s2": _cell(s2, p, v),
                    "asym": _cell(lambda p, q: s2(q, p) - s2(p, q), p, v),
                })
    return rows


def cmd_grid(args) -> int:
    second = args.t_range if args.kind == "a" else args.q_range
    rows = grid_records(args.kind, args.p_range, second, args.resolution)
    _emit(render(rows, "csv", None), args.out)
    return EXIT_OK


# -- parser ------------------------------------------------------------------------


def _add_output(sp, default_format="jsonl"):
    sp.add_argument("--format", choices=("jsonl", "csv"), default=default_format)
    sp.add_argument("--out", help="report file (default: standard output)")


def _add_batch(sp, dims=(3,), n=100, floor=1e-3):
    sp.add_argument("--dim", type=int, nargs="+", default=list(dims))
    sp.add_argument("--n", type=_positive_int, default=n, help="samples per dimension")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--floor", type=float, default=floor, help="lower bound on lambda_min")
    sp.add_argument("--workers", type=int, default=1, help="worker processes")
    _add_output(sp)


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="relasym", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"relasym {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("compute", help="divergences and bound for one pair of states")
    sp.add_argument("rho")
    sp.add_argument("sigma")
    sp.set_defaults(func=cmd_compute)

    sp = sub.add_parser("verify", help="theorem, corollary and trace-cap sweep")
    _add_batch(sp)
    sp.add_argument("--rho", help="check this single pair instead of sampling")
    sp.add_argument("--sigma")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("prop", help="second-derivative inequality sweep")
    _add_batch(sp, floor=sweeps.PROP_FLOOR)
    sp.add_argument("--nodes", type=_positive_int, default=DEFAULT_NODES)
    sp.add_argument("--t-fraction", type=float, default=sweeps.PROP_T_FRACTION)
    sp.add_argument("--sigma", help="check this single triple instead of sampling")
    sp.add_argument("--delta")
    sp.add_argument("--t", type=float)
    sp.set_defaults(func=cmd_prop)

    sp = sub.add_parser("chain", help="replay of the integration chain")
    _add_batch(sp, n=50, floor=sweeps.CHAIN_FLOOR)
    sp.add_argument("--nodes", type=_positive_int, default=DEFAULT_NODES)
    sp.add_argument("--t-nodes", type=_positive_int, default=DEFAULT_T_NODES)
    sp.add_argument("--t-fraction", type=float, default=sweeps.CHAIN_T_FRACTION)
    sp.add_argument("--sigma", help="replay this single triple instead of sampling")
    sp.add_argument("--delta")
    sp.add_argument("--t", type=float)
    sp.set_defaults(func=cmd_chain)

    sp = sub.add_parser("ascent", help="unitary-orbit ascent batch")
    _add_batch(sp, dims=(2, 3), n=50, floor=0.0)
    sp.add_argument("--nodes", type=_positive_int, default=DEFAULT_NODES)
    sp.add_argument("--max-iter", type=_positive_int, default=5000)
    sp.add_argument("--rho", help="run a single ascent from this state")
    sp.add_argument("--delta")
    sp.add_argument("--trajectory", help="JSONL file for the per-iteration trajectory")
    sp.set_defaults(func=cmd_ascent)

    sp = sub.add_parser("grid", help="CSV grid of a(p, t) or s2(p, q)")
    sp.add_argument("--kind", choices=("a", "s2"), default="a")
    sp.add_argument("--p-range", type=float, nargs=2, default=[0.0, 1.0], metavar=("LO", "HI"))
    sp.add_argument("--t-range", type=float, nargs=2, default=[-1.0, 1.0], metavar=("LO", "HI"))
    sp.add_argument("--q-range", type=float, nargs=2, default=[0.0, 1.0], metavar=("LO", "HI"))
    sp.add_argument("--resolution", type=int, default=51)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_grid)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (RelasymError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"relasym: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
