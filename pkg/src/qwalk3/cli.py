"""Command-line front end.

    qwalk3 simulate --theta grover --init 1/sqrt3,1/sqrt3,1/sqrt3 --time 500
    qwalk3 limit    --theta 5pi/6 --init 0,1,0 --grid 2000 --approx-at-time 500
    qwalk3 compare  --theta grover --time 500
    qwalk3 spectrum --theta 5pi/6 --grid 4096
    qwalk3 delta    --theta grover --nodes 512

Exit codes: 0 ok, 2 bad input, 3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import ast
import json
import math
import operator
import re
import sys
from dataclasses import dataclass
from typing import Any, Sequence, TextIO

import numpy as np

from . import __version__
from .limit import LimitDensityModel, approximate_prob
from .measurement import distribution, windowed_average
from .quadrature import NonConvergenceError
from .spectral import (
    DegenerateMomentError,
    delta_mass,
    dispersion_g,
    overlaps,
    velocity_grid,
)
from .walk import GROVER_THETA, CoinParameters, InitialState, Schedule, build_coin, evolve, evolve_state, initial_walk_state

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_NONCONVERGENCE = 3

COMPARE_MIN_TIME = 50
COMPARE_WINDOW = 11
COMPARE_X_MIN = 30

_INIT_TOL = 1e-9


class BadInput(ValueError):
    pass


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNOPS = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_NAMES = {"pi": math.pi, "e": math.e}
_FUNCS = {"sqrt": math.sqrt, "cos": math.cos, "sin": math.sin, "acos": math.acos, "arccos": math.acos}


def _eval_node(node: ast.AST) -> float:
    if isinstance(node, ast.Expression):
        return _eval_node(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_node(node.left), _eval_node(node.right))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
        return _UNOPS[type(node.op)](_eval_node(node.operand))
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS and len(node.args) == 1:
        return _FUNCS[node.func.id](_eval_node(node.args[0]))
    raise BadInput("unsupported expression")


def parse_number(text: str) -> float:
    """Evaluate a small arithmetic expression such as ``5pi/6``, ``1/sqrt3`` or ``1/√3``."""
    expr = text.strip().lower().replace("π", "pi").replace("·", "*")
    expr = re.sub(r"(?:√|sqrt)\s*(\d+(?:\.\d*)?)", r"sqrt(\1)", expr)
    expr = expr.replace("√", "sqrt")
    expr = re.sub(r"(\d)\s*(pi|sqrt)", r"\1*\2", expr)
    try:
        value = _eval_node(ast.parse(expr, mode="eval"))
    except (SyntaxError, BadInput, ZeroDivisionError, ValueError, TypeError) as exc:
        raise BadInput(f"cannot parse number {text!r}") from exc
    if not math.isfinite(value):
        raise BadInput(f"number {text!r} is not finite")
    return value


def parse_theta(text: str) -> CoinParameters:
    theta = GROVER_THETA if text.strip().lower() == "grover" else parse_number(text)
    try:
        return CoinParameters(theta)
    except ValueError as exc:
        raise BadInput(f"invalid theta {text!r}: {exc}") from exc


def parse_init(text: str) -> InitialState:
    """Three real amplitudes ``a,b,g`` or six numbers ``a_re,a_im,b_re,b_im,g_re,g_im``."""
    parts = [p for p in text.split(",")]
    values = [parse_number(p) for p in parts]
    if len(values) == 3:
        amps = [complex(v) for v in values]
    elif len(values) == 6:
        amps = [complex(values[i], values[i + 1]) for i in (0, 2, 4)]
    else:
        raise BadInput(f"--init takes 3 or 6 comma-separated numbers, got {len(values)}")
    norm = sum(abs(a) ** 2 for a in amps)
    if abs(norm - 1.0) > _INIT_TOL:
        raise BadInput(f"initial state is not normalized: |alpha|^2+|beta|^2+|gamma|^2 = {norm:.12g}")
    # rescale away the sub-tolerance rounding of the user's input
    amps = [a / math.sqrt(norm) for a in amps]
    return InitialState(*amps)


@dataclass
class RunConfig:
    command: str
    theta_text: str
    params: CoinParameters
    init: InitialState
    time: int
    schedule: Schedule
    out: str | None
    fmt: str
    extra: dict[str, Any]

    def echo(self) -> dict[str, Any]:
        i = self.init
        d = {
            "tool": f"qwalk3 {__version__}",
            "command": self.command,
            "theta": self.theta_text,
            "theta_rad": repr(self.params.theta),
            "init": [repr(z) for z in (i.alpha, i.beta, i.gamma)],
            "time": self.time,
            "schedule": self.schedule.cli_name,
        }
        d.update({k: v for k, v in self.extra.items() if v is not None and v is not False})
        return d


def _fmt(v: float) -> str:
    return repr(float(v))


def _write_csv(fh: TextIO, meta: dict[str, Any], header: Sequence[str], rows) -> None:
    for key, val in meta.items():
        fh.write(f"# {key}: {val}\n")
    fh.write(",".join(header) + "\n")
    for row in rows:
        fh.write(",".join(x if isinstance(x, str) else _fmt(x) if isinstance(x, float) else str(x) for x in row) + "\n")


def _emit(config: RunConfig, meta: dict[str, Any], header: Sequence[str], rows: list, stdout: TextIO) -> None:
    fh = open(config.out, "w", newline="\n") if config.out else stdout
    try:
        if config.fmt == "json":
            payload = {"config": config.echo(), **meta, "columns": list(header), "rows": rows}
            json.dump(payload, fh, indent=1)
            fh.write("\n")
        else:
            _write_csv(fh, {**config.echo(), **meta}, header, rows)
    finally:
        if fh is not stdout:
            fh.close()


def cmd_simulate(config: RunConfig, stdout: TextIO) -> int:
    series = config.extra.get("series", False)
    if series:
        state = initial_walk_state(config.init)
        coin = build_coin(config.params)
        rows = []
        for t in range(config.time + 1):
            dist = distribution(state)
            rows.extend([t, int(x), float(p)] for x, p in dist.as_dict().items())
            if t < config.time:
                state = evolve_state(state, coin, config.schedule, 1)
        _emit(config, {}, ["t", "x", "probability"], rows, stdout)
        return EXIT_OK
    state = evolve(config.init, config.params, config.schedule, config.time)
    dist = distribution(state)
    rows = [[x, p] for x, p in dist.as_dict().items()]
    _emit(config, {"total_probability": _fmt(dist.total())}, ["x", "probability"], rows, stdout)
    return EXIT_OK


def _model(config: RunConfig, nodes: int = 512) -> LimitDensityModel:
    dq = delta_mass(config.init, config.params, nodes=nodes)
    try:
        return LimitDensityModel(config.params, config.init, delta_mass=dq.value)
    except ValueError as exc:
        raise NonConvergenceError(str(exc)) from exc


def cmd_limit(config: RunConfig, stdout: TextIO) -> int:
    model = _model(config, config.extra.get("nodes", 512))
    sup = model.support
    approx_t = config.extra.get("approx_at_time")
    meta = {
        "delta": _fmt(model.delta_mass),
        "continuous_mass": _fmt(model.continuous_mass),
        "total_mass": _fmt(model.delta_mass + model.continuous_mass),
        "support_d1": f"({_fmt(sup.d1[0])}, {_fmt(sup.d1[1])})",
        "support_d2": f"({_fmt(sup.d2[0])}, {_fmt(sup.d2[1])})",
    }
    if approx_t is not None:
        if approx_t < 1:
            raise BadInput("--approx-at-time must be positive")
        xs = np.array([x for x in range(-approx_t, approx_t + 1) if x != 0])
        ap = approximate_prob(xs, approx_t, model)
        rows = [[int(x), float(p)] for x, p in zip(xs, ap)]
        _emit(config, meta, ["x", "approx_prob"], rows, stdout)
        return EXIT_OK
    n = config.extra.get("grid", 1000)
    if n < 2:
        raise BadInput("--grid must be at least 2")
    # cell midpoints over [-outer, outer]; never lands on the outer ends
    width = 2 * sup.outer / n
    xs = -sup.outer + (np.arange(n) + 0.5) * width
    rows = []
    skipped = 0
    for x in xs:
        if x == 0.0 or any(abs(x - e) < 1e-9 for e in sup.endpoints()):
            skipped += 1
            continue
        rows.append([float(x), float(model.continuous(x))])
    meta["grid_points_skipped"] = skipped
    _emit(config, meta, ["x", "density"], rows, stdout)
    return EXIT_OK


def compare_paths(config: RunConfig) -> tuple[dict[str, Any], list]:
    """Windowed simulated vs. approximate probabilities over the ballistic region."""
    t = config.time
    model = _model(config)
    dist = distribution(evolve(config.init, config.params, config.schedule, t))
    xs = np.arange(-t, t + 1)
    sim = np.array([dist[int(x)] for x in xs])
    approx = np.zeros(xs.shape)
    nz = xs != 0
    approx[nz] = approximate_prob(xs[nz], t, model)
    ws = windowed_average(sim, COMPARE_WINDOW)
    wa = windowed_average(approx, COMPARE_WINDOW)
    sup = model.support
    half = COMPARE_WINDOW // 2
    inside = sup.in_d1(xs / t) | sup.in_d2(xs / t)
    # whole window strictly inside the ballistic support and away from the peak
    full = np.array([bool(np.all(inside[max(i - half, 0) : i + half + 1])) and half <= i < xs.size - half for i in range(xs.size)])
    sel = full & (np.abs(xs) >= COMPARE_X_MIN)
    diff = np.abs(ws - wa)
    summary: dict[str, Any] = {
        "window": COMPARE_WINDOW,
        "x_min": COMPARE_X_MIN,
        "points": int(sel.sum()),
        "mean_abs_gap": float(np.mean(diff[sel])) if sel.any() else float("nan"),
        "max_abs_gap": float(np.max(diff[sel])) if sel.any() else float("nan"),
        "delta": model.delta_mass,
    }
    if sup.has_gap:
        gsel = (np.abs(xs) >= COMPARE_X_MIN) & (np.abs(xs / t) < sup.inner)
        summary["gap_window"] = [-sup.inner, sup.inner]
        summary["gap_mass_simulated"] = float(np.sum(sim[gsel]))
        summary["gap_mass_approx"] = float(np.sum(approx[gsel]))
    rows = [[int(x), float(ws[i]), float(wa[i]), float(diff[i])] for i, x in enumerate(xs) if sel[i]]
    return summary, rows


def cmd_compare(config: RunConfig, stdout: TextIO) -> int:
    if config.time < COMPARE_MIN_TIME:
        raise BadInput(f"compare needs --time >= {COMPARE_MIN_TIME}")
    summary, rows = compare_paths(config)
    meta = {k: (json.dumps(v) if isinstance(v, list) else v) for k, v in summary.items()}
    if config.fmt == "json":
        meta = summary
    _emit(config, meta, ["x", "simulated_windowed", "approx_windowed", "abs_gap"], rows, stdout)
    return EXIT_OK


def cmd_spectrum(config: RunConfig, stdout: TextIO) -> int:
    n = config.extra.get("grid", 1024)
    if n < 2:
        raise BadInput("--grid must be at least 2")
    ks = -math.pi + (np.arange(n) + 0.5) * (2 * math.pi / n)
    valid, h2, h3 = velocity_grid(ks, config.params)
    bad = ~valid
    ks_ok, h2, h3 = ks[valid], h2[valid], h3[valid]
    g = dispersion_g(ks_ok, config.params)
    ov = overlaps(ks_ok, config.init, config.params)
    rows = [[float(k), float(gv), float(a), float(b), float(o1), float(o2), float(o3)] for k, gv, a, b, o1, o2, o3 in zip(ks_ok, g, h2, h3, *ov)]
    meta = {"skipped_sign_undefined": int(bad.sum())}
    _emit(config, meta, ["k", "g", "h2", "h3", "overlap1", "overlap2", "overlap3"], rows, stdout)
    return EXIT_OK


def cmd_delta(config: RunConfig, stdout: TextIO) -> int:
    dq = delta_mass(config.init, config.params, nodes=config.extra.get("nodes", 512))
    fh = open(config.out, "w") if config.out else stdout
    try:
        if config.fmt == "json":
            json.dump({"config": config.echo(), "delta": dq.value, "nodes": dq.nodes, "error_estimate": dq.error}, fh, indent=1)
            fh.write("\n")
        else:
            fh.write(f"delta {_fmt(dq.value)}\nnodes {dq.nodes}\nerror_estimate {dq.error:.3e}\n")
    finally:
        if fh is not stdout:
            fh.close()
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "limit": cmd_limit,
    "compare": cmd_compare,
    "spectrum": cmd_spectrum,
    "delta": cmd_delta,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qwalk3", description="3-period three-state quantum walk toolkit")
    parser.add_argument("--version", action="version", version=f"qwalk3 {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, time_default: int | None = 500) -> None:
        p.add_argument("--theta", default="grover", help="radians, an expression like 5pi/6, or 'grover'")
        p.add_argument("--init", default="1/sqrt3,1/sqrt3,1/sqrt3", help="a,b,g or a_re,a_im,b_re,b_im,g_re,g_im")
        p.add_argument("--time", type=int, default=time_default)
        p.add_argument("--schedule", choices=["main", "skip0", "skip1"], default="main")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--format", choices=["csv", "json"], default="csv")

    p = sub.add_parser("simulate", help="simulate the walk and write P(X_t = x)")
    common(p)
    p.add_argument("--series", action="store_true", help="emit t,x,probability for every t up to --time")

    p = sub.add_parser("limit", help="evaluate the limit density")
    common(p)
    p.add_argument("--grid", type=int, default=1000)
    p.add_argument("--nodes", type=int, default=512)
    p.add_argument("--approx-at-time", type=int, default=None, dest="approx_at_time")

    p = sub.add_parser("compare", help="compare simulation with the large-t approximation")
    common(p)

    p = sub.add_parser("spectrum", help="dispersion, group velocities and overlaps on a k grid")
    common(p)
    p.add_argument("--grid", type=int, default=1024)

    p = sub.add_parser("delta", help="atom mass at the origin")
    common(p)
    p.add_argument("--nodes", type=int, default=512)
    return parser


def parse_config(args: argparse.Namespace) -> RunConfig:
    params = parse_theta(args.theta)
    init = parse_init(args.init)
    if args.time is None or args.time < 0:
        raise BadInput("--time must be nonnegative")
    extra = {k: getattr(args, k) for k in ("grid", "nodes", "approx_at_time", "series") if hasattr(args, k)}
    if args.command != "simulate" and args.schedule != "main":
        raise BadInput(f"{args.command} describes the main schedule only")
    return RunConfig(
        command=args.command,
        theta_text=args.theta,
        params=params,
        init=init,
        time=args.time,
        schedule=Schedule.from_name(args.schedule),
        out=args.out,
        fmt=args.format,
        extra=extra,
    )


def main(argv: Sequence[str] | None = None, stdout: TextIO | None = None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = parse_config(args)
        if "nodes" in config.extra and config.extra["nodes"] < 64:
            raise BadInput("--nodes must be at least 64")
        return COMMANDS[args.command](config, stdout)
    except BadInput as exc:
        print(f"qwalk3: error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except (NonConvergenceError, DegenerateMomentError) as exc:
        print(f"qwalk3: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
