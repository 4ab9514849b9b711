"""Command-line front end for order checks, recovery, strategies, portfolios.

Subcommands
-----------
``check-order``
    Estimate V(mu, nu) for one or more measure pairs and decide convex
    order; repeated ``--input-a/--input-b`` pairs produce a sweep CSV.
``recover-f``
    Rebuild the separating convex function from a witness measure and
    emit gradient/potential tables (plus a grid mesh in 2D).
``strategy``
    Full call-sheet pipeline: extract the marginal laws, test convex
    order, and on a violation build and verify the calendar-spread
    position.
``fgp``
    Simulate (or load) a market-weight path and compare two functionally
    generated portfolios, reporting the relative-arbitrage test.

File grammars (plain CSV, UTF-8, blank lines ignored):

* samples: header ``dim=<d>``; one point per row with d coordinates and an
  optional trailing weight column.
* histogram: rows ``grid_point,mass``; no header, one dimension.
* call sheet: header ``maturity=<label>``; rows ``strike,price``.
* weight path: header ``dim=<d>``; rows ``t,w_1,...,w_d``.

Exit codes: 0 success/ordered, 3 order violation found, 1 input error,
2 internal numerical failure.  The environment variable
``CONVEX_ORDER_LOG`` (quiet, info, debug) controls stderr logging.  Every
command is deterministic given ``--seed``: output files are byte-identical
across reruns.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .arbitrage import (
    CallSheet,
    bl_extract,
    build_strategy,
    payoff,
    verify_strategy,
)
from .errors import ConvexOrderError, SolverError, ValidationError
from .fgp import (
    ArbitrageTestConfig,
    GeneratingFunction,
    MarketPath,
    constant_function,
    detect_relative_arbitrage,
    entropy_function,
    gamma_process,
    quadratic_function,
    simulate_market,
)
from .measures import DiscreteMeasure
from .order import OrderSearchConfig, estimate_v
from .recover import assemble_poisson, recover_f, solve_poisson_neumann
from .transport import cost_matrix, emd

logger = logging.getLogger(__name__)

_LOG_LEVELS = {"quiet": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
_METHOD_MAP = {
    "indirect-hist": "indirect_histogram",
    "indirect-samples": "indirect_samples",
    "direct": "direct",
}


def _fmt(x) -> str:
    """Shortest round-trip decimal form; reparsing returns the same double."""
    return repr(float(x))


# ---------------------------------------------------------------------------
# file grammars
# ---------------------------------------------------------------------------


def _read_lines(path) -> list[str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    return [line.strip() for line in text.splitlines() if line.strip()]


def _header_value(line: str, key: str, path) -> str:
    prefix = f"{key}="
    if not line.startswith(prefix):
        raise ValidationError(f"{path}: expected header '{key}=<value>', got {line!r}")
    return line[len(prefix):].strip()


def _float_row(line: str, path, lineno: int) -> list[float]:
    try:
        return [float(part) for part in line.split(",")]
    except ValueError as exc:
        raise ValidationError(f"{path} line {lineno}: non-numeric field in {line!r}") from exc


def read_samples(path) -> DiscreteMeasure:
    """Parse a sample CSV (header ``dim=<d>``, optional weight column)."""
    lines = _read_lines(path)
    if not lines:
        raise ValidationError(f"{path}: empty file")
    try:
        dim = int(_header_value(lines[0], "dim", path))
    except ValueError as exc:
        raise ValidationError(f"{path}: dim header is not an integer") from exc
    if dim < 1:
        raise ValidationError(f"{path}: dim must be >= 1, got {dim}")
    rows = [_float_row(line, path, i + 2) for i, line in enumerate(lines[1:])]
    if not rows:
        raise ValidationError(f"{path}: no data rows")
    widths = {len(row) for row in rows}
    if widths == {dim}:
        return DiscreteMeasure.from_samples(np.asarray(rows))
    if widths == {dim + 1}:
        table = np.asarray(rows)
        return DiscreteMeasure(table[:, :dim], table[:, dim])
    raise ValidationError(
        f"{path}: every row needs {dim} coordinates (plus an optional weight); "
        f"saw widths {sorted(widths)}"
    )


def write_samples(path, measure: DiscreteMeasure) -> None:
    lines = [f"dim={measure.dim}"]
    for point, weight in zip(measure.points, measure.weights):
        lines.append(",".join(_fmt(c) for c in point) + "," + _fmt(weight))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_histogram(path) -> DiscreteMeasure:
    """Parse a 1-D histogram CSV of ``grid_point,mass`` rows."""
    lines = _read_lines(path)
    if not lines:
        raise ValidationError(f"{path}: empty file")
    rows = [_float_row(line, path, i + 1) for i, line in enumerate(lines)]
    if any(len(row) != 2 for row in rows):
        raise ValidationError(f"{path}: histogram rows must be 'grid_point,mass'")
    table = np.asarray(rows)
    return DiscreteMeasure(table[:, :1], table[:, 1])


def write_histogram(path, measure: DiscreteMeasure) -> None:
    if measure.dim != 1:
        raise ValidationError("histogram files hold one-dimensional measures")
    lines = [
        f"{_fmt(x)},{_fmt(w)}"
        for x, w in zip(measure.points[:, 0], measure.weights)
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_sheet(path) -> CallSheet:
    """Parse a call-sheet CSV (header ``maturity=<label>``, strike/price rows)."""
    lines = _read_lines(path)
    if not lines:
        raise ValidationError(f"{path}: empty file")
    label = _header_value(lines[0], "maturity", path)
    rows = [_float_row(line, path, i + 2) for i, line in enumerate(lines[1:])]
    if not rows:
        raise ValidationError(f"{path}: no strike rows")
    if any(len(row) != 2 for row in rows):
        raise ValidationError(f"{path}: call-sheet rows must be 'strike,price'")
    table = np.asarray(rows)
    return CallSheet(maturity=label, strikes=table[:, 0], prices=table[:, 1])


def write_sheet(path, sheet: CallSheet) -> None:
    lines = [f"maturity={sheet.maturity}"]
    lines += [f"{_fmt(k)},{_fmt(p)}" for k, p in zip(sheet.strikes, sheet.prices)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_path_csv(path) -> MarketPath:
    """Parse a weight-path CSV (header ``dim=<d>``, rows ``t,w_1..w_d``)."""
    lines = _read_lines(path)
    if not lines:
        raise ValidationError(f"{path}: empty file")
    try:
        dim = int(_header_value(lines[0], "dim", path))
    except ValueError as exc:
        raise ValidationError(f"{path}: dim header is not an integer") from exc
    rows = [_float_row(line, path, i + 2) for i, line in enumerate(lines[1:])]
    if not rows:
        raise ValidationError(f"{path}: no data rows")
    if any(len(row) != dim + 1 for row in rows):
        raise ValidationError(f"{path}: path rows must be 't,w_1,...,w_{dim}'")
    table = np.asarray(rows)
    return MarketPath(times=table[:, 0], weights=table[:, 1:])


def write_path_csv(path, market: MarketPath) -> None:
    lines = [f"dim={market.d}"]
    for t, row in zip(market.times, market.weights):
        lines.append(_fmt(t) + "," + ",".join(_fmt(w) for w in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# structured text reports
# ---------------------------------------------------------------------------


class _Report:
    """Accumulates 'key: value' lines and CSV blocks, then writes one file."""

    def __init__(self):
        self._lines: list[str] = []

    def kv(self, key: str, value) -> None:
        self._lines.append(f"{key}: {value}")

    def blank(self) -> None:
        self._lines.append("")

    def block(self, title: str, header: str, rows) -> None:
        self._lines.append(f"[{title}]")
        self._lines.append(header)
        self._lines.extend(",".join(cells) for cells in rows)
        self._lines.append(f"[/{title}]")

    def write(self, path) -> None:
        Path(path).write_text("\n".join(self._lines) + "\n", encoding="utf-8")


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _table(path, header: str, rows) -> None:
    lines = [header] + [",".join(cells) for cells in rows]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# check-order
# ---------------------------------------------------------------------------


def _order_config(args, method: str) -> OrderSearchConfig:
    return OrderSearchConfig(
        method=method,
        grid_partitions=args.grid_p,
        max_evals=args.max_evals,
        bounds=(args.alpha_lo, args.alpha_hi),
        tolerance=args.tolerance,
        seed=args.seed,
    )


def cmd_check_order(args) -> int:
    if len(args.input_a) != len(args.input_b):
        raise ValidationError(
            f"--input-a given {len(args.input_a)} times but --input-b "
            f"{len(args.input_b)} times; supply one file per side and pair"
        )
    method = _METHOD_MAP[args.method]
    reader = read_histogram if method == "indirect_histogram" else read_samples
    out = _out_dir(args)

    report = _Report()
    report.kv("command", "check-order")
    report.kv("method", args.method)
    report.kv("seed", args.seed)
    report.kv("pairs", len(args.input_a))

    # the sweep parameter follows whichever input varies across the pairs
    stems_b = [Path(p).stem for p in args.input_b]
    labels = stems_b if len(set(stems_b)) > 1 or len(stems_b) == 1 else [
        Path(p).stem for p in args.input_a
    ]

    sweep_rows = []
    any_violation = False
    for i, (path_a, path_b) in enumerate(zip(args.input_a, args.input_b), start=1):
        mu = reader(path_a)
        nu = reader(path_b)
        result = estimate_v(mu, nu, _order_config(args, method))
        witness_file = out / f"witness_{i}.csv"
        write_samples(witness_file, result.witness_rho)
        any_violation |= result.decision == "not_ordered"
        sweep_rows.append(
            (labels[i - 1], _fmt(result.v_estimate), result.decision)
        )
        report.blank()
        report.kv(f"pair_{i}_input_a", path_a)
        report.kv(f"pair_{i}_input_b", path_b)
        report.kv(f"pair_{i}_v_estimate", _fmt(result.v_estimate))
        report.kv(f"pair_{i}_tolerance", _fmt(result.tolerance))
        report.kv(f"pair_{i}_decision", result.decision)
        report.kv(f"pair_{i}_evals_used", result.evals_used)
        report.kv(f"pair_{i}_anchor_gap", _fmt(result.anchor_gap))
        report.kv(f"pair_{i}_witness_file", witness_file.name)

    if len(sweep_rows) > 1:
        _table(out / "sweep.csv", "parameter,v_estimate,decision", sweep_rows)
        report.blank()
        report.kv("sweep_file", "sweep.csv")
    report.write(out / "report.txt")
    return 3 if any_violation else 0


# ---------------------------------------------------------------------------
# recover-f
# ---------------------------------------------------------------------------


def _witness_plan(nu: DiscreteMeasure, rho: DiscreteMeasure):
    cost = cost_matrix(rho, nu, "neg_inner_product")
    value, plan = emd(rho, nu, cost)
    return value, plan


def cmd_recover_f(args) -> int:
    nu = read_samples(args.input_a)
    rho = read_samples(args.input_b)
    value, plan = _witness_plan(nu, rho)
    grad, potential = recover_f(nu, rho, plan, span=args.span, h=args.grid_h)
    out = _out_dir(args)

    dim = grad.dim
    if dim == 1:
        _table(
            out / "gradient.csv",
            "x,g",
            (( _fmt(a[0]), _fmt(v[0])) for a, v in zip(grad.anchors, grad.values)),
        )
        _table(
            out / "potential.csv",
            "x,f",
            ((_fmt(a[0]), _fmt(v)) for a, v in zip(potential.anchors, potential.values)),
        )
    else:
        _table(
            out / "gradient.csv",
            "x,y,gx,gy",
            (
                (_fmt(a[0]), _fmt(a[1]), _fmt(v[0]), _fmt(v[1]))
                for a, v in zip(grad.anchors, grad.values)
            ),
        )
        _table(
            out / "potential.csv",
            "x,y,f",
            (
                (_fmt(a[0]), _fmt(a[1]), _fmt(v))
                for a, v in zip(potential.anchors, potential.values)
            ),
        )
        spans = grad.anchors.max(axis=0) - grad.anchors.min(axis=0)
        h = args.grid_h if args.grid_h is not None else float(max(spans.max(), 1e-9) / 32.0)
        problem = assemble_poisson(grad, h)
        mesh = solve_poisson_neumann(problem)
        _table(
            out / "mesh.csv",
            "x,y,f",
            (
                (_fmt(a[0]), _fmt(a[1]), _fmt(v))
                for a, v in zip(mesh.anchors, mesh.values)
            ),
        )

    report = _Report()
    report.kv("command", "recover-f")
    report.kv("input_nu", args.input_a)
    report.kv("input_rho", args.input_b)
    report.kv("dim", dim)
    report.kv("transport_value", _fmt(value))
    report.kv("anchors", grad.n_anchors)
    report.kv("normalization", potential.normalization)
    report.kv("span", _fmt(args.span))
    if dim == 2:
        report.kv("grid_h", _fmt(h))
        report.kv("mesh_cells", problem.n_cells)
        report.kv("files", "gradient.csv potential.csv mesh.csv")
    else:
        report.kv("files", "gradient.csv potential.csv")
    report.write(out / "report.txt")
    return 0


# ---------------------------------------------------------------------------
# strategy
# ---------------------------------------------------------------------------


def _rescale(measure: DiscreteMeasure, mid: float, half: float) -> DiscreteMeasure:
    return DiscreteMeasure((measure.points - mid) / half, measure.weights)


def cmd_strategy(args) -> int:
    sheet_1 = read_sheet(args.input_a)
    sheet_2 = read_sheet(args.input_b)
    law_1 = bl_extract(sheet_1)
    law_2 = bl_extract(sheet_2)
    out = _out_dir(args)

    report = _Report()
    report.kv("command", "strategy")
    report.kv("sheet_t1", args.input_a)
    report.kv("sheet_t2", args.input_b)
    report.kv("maturity_t1", sheet_1.maturity)
    report.kv("maturity_t2", sheet_2.maturity)
    report.kv("atoms_t1", law_1.n_atoms)
    report.kv("atoms_t2", law_2.n_atoms)

    lo = float(min(law_1.points.min(), law_2.points.min()))
    hi = float(max(law_1.points.max(), law_2.points.max()))
    if hi == lo:
        report.kv("decision", "ordered")
        report.kv("conclusion", "market consistent with convex order")
        report.write(out / "report.txt")
        return 0
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    report.kv("rescale_mid", _fmt(mid))
    report.kv("rescale_half", _fmt(half))

    mu_scaled = _rescale(law_1, mid, half)
    nu_scaled = _rescale(law_2, mid, half)
    result = estimate_v(mu_scaled, nu_scaled, _order_config(args, _METHOD_MAP[args.method]))
    report.kv("method", args.method)
    report.kv("seed", args.seed)
    report.kv("v_estimate", _fmt(result.v_estimate))
    report.kv("tolerance", _fmt(result.tolerance))
    report.kv("decision", result.decision)

    if result.decision == "ordered":
        report.kv("conclusion", "market consistent with convex order")
        report.write(out / "report.txt")
        return 0

    witness = result.witness_rho
    _, plan = _witness_plan(nu_scaled, witness)
    grad, potential = recover_f(nu_scaled, witness, plan, span=args.span)
    strategy = build_strategy(mu_scaled, nu_scaled, potential, grad)
    verification = verify_strategy(strategy, mu_scaled, nu_scaled)
    diagonal_drift = max(
        abs(payoff(strategy, x, x) - strategy.margin) for x in mu_scaled.points
    )

    report.kv("margin", _fmt(strategy.margin))
    report.kv("min_payoff", _fmt(verification.min_payoff))
    report.kv("mean_payoff", _fmt(verification.mean_payoff))
    report.kv("pairs_scanned", verification.n_pairs)
    report.kv("verification", "PASS" if verification.passed else "FAIL")
    report.kv("max_diagonal_drift", _fmt(diagonal_drift))
    report.kv(
        "units",
        "payoffs quoted in rescaled coordinates x -> (x - mid)/half; "
        "delta converted to per unit of the original underlying",
    )

    strikes_1 = np.asarray(sheet_1.strikes, dtype=float)
    strikes_2 = np.asarray(sheet_2.strikes, dtype=float)
    x_scaled = ((strikes_1 - mid) / half)[:, None]
    y_scaled = ((strikes_2 - mid) / half)[:, None]
    u1 = strategy.u1(x_scaled)
    delta = strategy.delta(x_scaled)[:, 0] / half
    u2 = strategy.u2(y_scaled)
    rows_t1 = [
        (_fmt(k), _fmt(a), _fmt(d)) for k, a, d in zip(strikes_1, u1, delta)
    ]
    rows_t2 = [(_fmt(k), _fmt(b)) for k, b in zip(strikes_2, u2)]
    _table(out / "legs_t1.csv", "strike,u1,delta", rows_t1)
    _table(out / "legs_t2.csv", "strike,u2", rows_t2)
    report.blank()
    report.block("legs_t1", "strike,u1,delta", rows_t1)
    report.blank()
    report.block("legs_t2", "strike,u2", rows_t2)
    report.blank()
    report.kv("conclusion", "convex order violated; calendar-spread strategy constructed")
    report.write(out / "report.txt")
    return 3


# ---------------------------------------------------------------------------
# fgp
# ---------------------------------------------------------------------------


def _generating(text: str) -> GeneratingFunction:
    if text == "entropy":
        return entropy_function()
    if text == "quadratic":
        return quadratic_function()
    if text.startswith("constant:"):
        try:
            level = float(text.split(":", 1)[1])
        except ValueError as exc:
            raise ValidationError(f"bad constant level in {text!r}") from exc
        return constant_function(level)
    raise ValidationError(
        f"unknown generating function {text!r}; use entropy, quadratic, or constant:<c>"
    )


def cmd_fgp(args) -> int:
    if args.path_file is not None:
        market = read_path_csv(args.path_file)
    else:
        market = simulate_market(args.assets, args.steps, args.dt, args.vol, seed=args.seed)
    g_first = _generating(args.g1)
    g_second = _generating(args.g2)
    g_first.validate(market.d)
    g_second.validate(market.d)

    second_values = np.array([g_second.value(w) for w in market.weights])
    c_bound = args.c_bound if args.c_bound is not None else float(second_values.max())
    horizon = args.horizon if args.horizon is not None else float(market.times[-1])
    cfg = ArbitrageTestConfig(eta=args.eta, c_bound=c_bound, horizon=horizon)
    outcome = detect_relative_arbitrage(g_first, g_second, market, cfg)

    out = _out_dir(args)
    write_path_csv(out / "path.csv", market)
    _table(
        out / "kappa.csv",
        "t,kappa,v_first,v_second",
        (
            (_fmt(t), _fmt(k), _fmt(a), _fmt(b))
            for t, k, a, b in zip(
                outcome.times, outcome.kappa, outcome.v_first, outcome.v_second
            )
        ),
    )

    report = _Report()
    report.kv("command", "fgp")
    if args.path_file is not None:
        report.kv("path_file", args.path_file)
    else:
        report.kv("assets", market.d)
        report.kv("steps", market.n_steps)
        report.kv("dt", _fmt(args.dt))
        report.kv("vol", _fmt(args.vol))
        report.kv("seed", args.seed)
    report.kv("g1", args.g1)
    report.kv("g2", args.g2)
    report.kv("eta", _fmt(args.eta))
    report.kv("c_bound", _fmt(c_bound))
    report.kv("horizon", _fmt(horizon))
    report.kv("eta_ok", outcome.eta_ok)
    report.kv("t_star", "none" if outcome.t_star is None else _fmt(outcome.t_star))
    report.kv(
        "strong_arbitrage_from",
        "none" if outcome.strong_arb_from is None else _fmt(outcome.strong_arb_from),
    )
    report.kv("fired", outcome.fired)
    report.kv("files", "path.csv kappa.csv")
    report.write(out / "report.txt")
    return 0


# ---------------------------------------------------------------------------
# parser / entry point
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    """Exit 1 (not argparse's default 2) on usage errors; 2 means numerics."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_common(parser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    parser.add_argument(
        "--out-dir", default=".", help="directory for output files (default .)"
    )


def _add_order_knobs(parser) -> None:
    parser.add_argument(
        "--method",
        choices=sorted(_METHOD_MAP),
        default="indirect-samples",
        help="witness search method (default indirect-samples)",
    )
    parser.add_argument(
        "--grid-p", type=int, default=None,
        help="lattice partitions per axis for the indirect methods",
    )
    parser.add_argument(
        "--max-evals", type=int, default=100,
        help="gap-evaluation budget for the search (default 100)",
    )
    parser.add_argument(
        "--alpha-lo", type=float, default=0.01,
        help="lower bound of the concentration box (default 0.01)",
    )
    parser.add_argument(
        "--alpha-hi", type=float, default=10.0,
        help="upper bound of the concentration box (default 10)",
    )
    parser.add_argument(
        "--tolerance", type=float, default=None,
        help="decision threshold eps (default 0.05, the n=100 scaling)",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="convex-order",
        description="Convex-order detection, convex-function recovery, and "
        "arbitrage construction for discrete measures.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    check = commands.add_parser(
        "check-order", help="estimate V(mu, nu) and decide convex order"
    )
    check.add_argument(
        "--input-a", action="append", required=True, metavar="FILE",
        help="measure mu (sample CSV, or histogram CSV with --method "
        "indirect-hist); repeat to sweep several pairs",
    )
    check.add_argument(
        "--input-b", action="append", required=True, metavar="FILE",
        help="measure nu, paired with --input-a in order",
    )
    _add_order_knobs(check)
    _add_common(check)
    check.set_defaults(func=cmd_check_order)

    recover = commands.add_parser(
        "recover-f", help="rebuild the separating convex function from a witness"
    )
    recover.add_argument(
        "--input-a", required=True, metavar="FILE",
        help="sample CSV of the dominating law nu",
    )
    recover.add_argument(
        "--input-b", required=True, metavar="FILE",
        help="sample CSV of the witness rho (e.g. a check-order witness file)",
    )
    recover.add_argument(
        "--span", type=float, default=0.3,
        help="lowess window fraction for the 1-D route (default 0.3)",
    )
    recover.add_argument(
        "--grid-h", type=float, default=None,
        help="cell size for the 2-D grid (default: anchor span / 32)",
    )
    _add_common(recover)
    recover.set_defaults(func=cmd_recover_f)

    strategy = commands.add_parser(
        "strategy", help="call-sheet pipeline: extract, test order, build strategy"
    )
    strategy.add_argument(
        "--input-a", required=True, metavar="FILE",
        help="call sheet at the earlier maturity T1",
    )
    strategy.add_argument(
        "--input-b", required=True, metavar="FILE",
        help="call sheet at the later maturity T2",
    )
    strategy.add_argument(
        "--span", type=float, default=0.3,
        help="lowess window fraction for the recovery step (default 0.3)",
    )
    _add_order_knobs(strategy)
    _add_common(strategy)
    strategy.set_defaults(func=cmd_strategy)

    fgp = commands.add_parser(
        "fgp", help="compare two functionally generated portfolios on a path"
    )
    fgp.add_argument(
        "--path-file", default=None, metavar="FILE",
        help="weight-path CSV; omit to simulate",
    )
    fgp.add_argument("--assets", type=int, default=3, help="simulated assets (default 3)")
    fgp.add_argument("--steps", type=int, default=1000, help="simulated steps (default 1000)")
    fgp.add_argument("--dt", type=float, default=1e-3, help="time step (default 1e-3)")
    fgp.add_argument("--vol", type=float, default=0.2, help="log-price volatility (default 0.2)")
    fgp.add_argument(
        "--g1", default="entropy",
        help="first generating function: entropy, quadratic, or constant:<c>",
    )
    fgp.add_argument(
        "--g2", default="quadratic",
        help="second generating function (same choices as --g1)",
    )
    fgp.add_argument(
        "--eta", type=float, default=0.05,
        help="required linear drift rate of kappa (default 0.05)",
    )
    fgp.add_argument(
        "--c-bound", type=float, default=None,
        help="upper bound C for G2 along the path (default: observed max)",
    )
    fgp.add_argument(
        "--horizon", type=float, default=None,
        help="test horizon (default: final path time)",
    )
    _add_common(fgp)
    fgp.set_defaults(func=cmd_fgp)
    return parser


def _configure_logging() -> None:
    name = os.environ.get("CONVEX_ORDER_LOG", "quiet").strip().lower()
    level = _LOG_LEVELS.get(name)
    if level is None:
        print(
            f"warning: CONVEX_ORDER_LOG={name!r} not in {sorted(_LOG_LEVELS)}; "
            "using quiet", file=sys.stderr,
        )
        level = _LOG_LEVELS["quiet"]
    logging.basicConfig(
        level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )


def main(argv=None) -> int:
    _configure_logging()
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (SolverError, ConvexOrderError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
