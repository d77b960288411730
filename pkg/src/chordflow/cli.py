"""Command-line front end.

Exit codes: 0 success, 2 usage or validation error, 3 numerical failure,
4 flow that did not converge.
"""

from __future__ import annotations

import argparse
import ast
import csv
import io
import json
import math
import operator
import os
import sys
import warnings

import numpy as np

from . import _backend
from .body import ConvexBody, make_canonical_body, read_body, write_body
from .chord import chord_integral_dual, chord_integral_measure, ma_residual, target_chord_integral
from .errors import (ChordFlowError, CoverageError, DegenerateConvexityError, FitError, StallError)
from .flow import FlowConfig, FlowTrace, TRACE_FIELDS, chord_law_check, run, run_summary
from .oracle import mc_chord_integral, mc_volume_potential
from .riesz import (PotentialSpec, holder_exponent_estimate, potential_boundary_nodes,
                    potential_volume_nodes, vtilde_nodes)
from .sphere import make_circle_grid, make_s2_grid, spectral_derivative

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_FLOW = 0, 2, 3, 4


class UsageError(ChordFlowError, ValueError):
    """Bad command-line input detected after argument parsing."""


# ---------------------------------------------------------------------------
# expressions


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}
VARIABLES = ("x", "y", "z", "t", "p")
_FUNCS = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "log": np.log, "sqrt": np.sqrt, "abs": np.abs}


def _check_tree(node, text):
    if isinstance(node, ast.Expression):
        return _check_tree(node.body, text)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return
    if isinstance(node, ast.Name) and (node.id == "pi" or node.id in VARIABLES):
        return
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        _check_tree(node.left, text)
        return _check_tree(node.right, text)
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
        return _check_tree(node.operand, text)
    if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS
            and len(node.args) == 1 and not node.keywords):
        return _check_tree(node.args[0], text)
    raise UsageError(f"unsupported construct in expression {text!r}")


def compile_expression(text: str):
    """Arithmetic expression in named variables; ``^`` means power.

    Returns ``fn(**variables)``.  Only numbers, ``pi``, the variables
    x y z t p, the operators + - * / ^ and the functions sin cos exp log
    sqrt abs are allowed; anything else is rejected before evaluation.
    """
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise UsageError(f"cannot parse expression {text!r}") from exc
    _check_tree(tree, text)

    def ev(node, env):
        if isinstance(node, ast.Expression):
            return ev(node.body, env)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name):
            if node.id == "pi":
                return math.pi
            if node.id in env:
                return env[node.id]
            raise UsageError(f"unknown variable {node.id!r} in {text!r}")
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left, env), ev(node.right, env))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](ev(node.operand, env))
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS
                and len(node.args) == 1 and not node.keywords):
            return _FUNCS[node.func.id](ev(node.args[0], env))
        raise UsageError(f"unsupported construct in expression {text!r}")

    def fn(**env):
        return ev(tree, env)

    return fn


def _coordinate_env(points):
    points = np.asarray(points, dtype=float)
    env = {"x": points[..., 0], "y": points[..., 1]}
    if points.shape[-1] == 3:
        env["z"] = points[..., 2]
        env["t"] = np.arccos(np.clip(points[..., 2], -1.0, 1.0))
        env["p"] = np.mod(np.arctan2(points[..., 1], points[..., 0]), 2.0 * np.pi)
    else:
        env["t"] = np.mod(np.arctan2(points[..., 1], points[..., 0]), 2.0 * np.pi)
    return env


def point_function(text: str | None):
    """Callable on arrays of points (..., dim) from an expression, or None."""
    if text is None:
        return None
    expr = compile_expression(text)

    def fn(points):
        val = expr(**_coordinate_env(points))
        return np.broadcast_to(np.asarray(val, dtype=float), np.shape(points)[:-1])

    return fn


def parse_field(spec: str, grid) -> np.ndarray:
    """``const:<v>`` or an expression in the node angle ``t`` and coordinates."""
    if spec.startswith("const:"):
        try:
            value = float(spec[6:])
        except ValueError as exc:
            raise UsageError(f"bad constant field {spec!r}") from exc
        return np.full(grid.size, value)
    return np.array(point_function(spec)(grid.nodes), dtype=float)


# ---------------------------------------------------------------------------
# bodies and grids


def make_grid(dim: int, n: int):
    if dim == 2:
        return make_circle_grid(n)
    return make_s2_grid(n, 2 * n)


def parse_body(spec: str, dim: int, n: int) -> ConvexBody:
    """``kind:p1,p2,...`` for a canonical body, otherwise a body file path."""
    if ":" in spec and not os.path.exists(spec):
        kind, _, params = spec.partition(":")
        try:
            values = [float(v) for v in params.split(",") if v.strip()]
        except ValueError as exc:
            raise UsageError(f"bad body parameters in {spec!r}") from exc
        if kind == "ellipse" and dim == 3:
            kind = "ellipsoid"
        return make_canonical_body(kind, values, make_grid(dim, n))
    if not os.path.exists(spec):
        raise UsageError(f"body {spec!r} is neither kind:params nor an existing file")
    return read_body(spec)


def node_labels(body: ConvexBody):
    if body.dim == 2:
        return [repr(float(t)) for t in body.theta]
    return [";".join(repr(float(c)) for c in x) for x in body.grid.nodes]


# ---------------------------------------------------------------------------
# output helpers


def _out_path(args, name):
    if args.out is None:
        return None
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def _emit_csv(args, name, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([v if isinstance(v, str) else repr(v) for v in r])
    path = _out_path(args, name)
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


def _emit_json(args, name, obj):
    text = json.dumps(obj, indent=2, sort_keys=False)
    path = _out_path(args, name)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    sys.stdout.write(text + "\n")


def resolved_config(args) -> dict:
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in ("func",):
            continue
        out[k] = v
    return out


def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


# ---------------------------------------------------------------------------
# subcommands


def _potential_spec(args):
    return PotentialSpec(float(args.a), omega=point_function(args.omega), phi=point_function(args.phi))


def cmd_potential(args) -> int:
    body = parse_body(args.body, args.dim, args.n)
    spec = _potential_spec(args)
    vol = potential_volume_nodes(body, spec)
    bnd = potential_boundary_nodes(body, spec)
    labels = node_labels(body)
    rows = [(i, labels[i], float(vol[i]), float(bnd[i]), float(abs(vol[i] - bnd[i]))) for i in range(vol.size)]
    _emit_csv(args, "potential.csv", ["node_index", "theta_or_dir", "Na_volume", "Na_boundary", "abs_diff"], rows)
    return EXIT_OK


def cmd_querm(args) -> int:
    _require(args, "q")
    body = parse_body(args.body, args.dim, args.n)
    v = vtilde_nodes(body, float(args.q))
    labels = node_labels(body)
    _emit_csv(args, "querm.csv", ["node_index", "theta_or_dir", "Vq"],
              [(i, labels[i], float(v[i])) for i in range(v.size)])
    return EXIT_OK


def cmd_chord(args) -> int:
    _require(args, "q")
    body = parse_body(args.body, args.dim, args.n)
    q = float(args.q)
    dual = chord_integral_dual(body, q)
    meas = chord_integral_measure(body, q)
    out = {"Iq_dual": dual.value, "Iq_measure": meas.value, "dual_error": dual.error,
           "measure_error": meas.error}
    if args.mc_lines:
        mc = mc_chord_integral(body, q, int(args.mc_lines), int(args.seed))
        out.update({"Iq_mc": mc.value, "mc_stderr": mc.stderr})
    else:
        out.update({"Iq_mc": None, "mc_stderr": None})
    out["seed"] = int(args.seed)
    _emit_json(args, "chord.json", out)
    return EXIT_OK


def cmd_residual(args) -> int:
    _require(args, "q", "f")
    body = parse_body(args.body, args.dim, args.n)
    f = parse_field(args.f, body.grid)
    res = ma_residual(body, float(args.q), f)
    labels = node_labels(body)
    _emit_csv(args, "residual.csv", ["node_index", "theta_or_dir", "residual"],
              [(i, labels[i], float(res[i])) for i in range(res.size)])
    return EXIT_OK


def cmd_probe(args) -> int:
    if args.data:
        data = np.loadtxt(args.data, delimiter=",", skiprows=1, ndmin=2)
        pos, vals = data[:, 0], data[:, 1]
    else:
        _require(args, "a")
        body = parse_body(args.body, args.dim, args.n)
        if body.dim != 2:
            raise UsageError("the potential probe runs on planar bodies; pass --data for other samples")
        vals = potential_volume_nodes(body, _potential_spec(args))
        if args.derivative:
            vals = spectral_derivative(vals, int(args.derivative))
        pos = body.theta
    est = holder_exponent_estimate(pos, vals, periodic=not args.aperiodic)
    _emit_json(args, "probe.json", {"exponent": est.exponent, "residual": est.residual, "flag": est.flag,
                                    "samples": int(len(vals))})
    return EXIT_OK


def cmd_mc(args) -> int:
    body = parse_body(args.body, args.dim, args.n)
    if args.kind == "chord":
        _require(args, "q")
        est = mc_chord_integral(body, float(args.q), int(args.samples), int(args.seed))
    else:
        _require(args, "a", "point")
        z = np.array([float(v) for v in args.point.split(",")])
        if z.shape != (body.dim,):
            raise UsageError(f"--point needs {body.dim} coordinates")
        est = mc_volume_potential(body, _potential_spec(args), z, int(args.samples), int(args.seed))
    _emit_json(args, "mc.json", {"kind": args.kind, "value": est.value, "stderr": est.stderr,
                                 "samples": est.samples, "seed": est.seed})
    return EXIT_OK


def cmd_flow(args) -> int:
    _require(args, "q", "f")
    if args.dim != 2:
        raise UsageError("the flow runs in dimension 2")
    init = args.init or args.body
    body = parse_body(init, args.dim, args.n)
    f = parse_field(args.f, body.grid)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        config = FlowConfig(float(args.q), f, dt=args.dt, safety=args.safety, dt_max=args.dt_max,
                            t_max=args.t_max, max_steps=args.max_steps, tol=args.tol,
                            renormalize=not args.no_renormalize, stride=args.stride)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    final, trace, status = run(config, body)
    steps_path = _out_path(args, "trace.csv") or "trace.csv"
    trace.write_csv(steps_path)
    write_body(final, _out_path(args, "body.txt") or "body.txt")
    summary = run_summary(trace, status, trace.steps)
    summary["target_Iq"] = target_chord_integral(config.q, f, body.grid)
    summary["config"] = resolved_config(args)
    summary["seed"] = int(args.seed)
    _emit_json(args, "summary.json", summary)
    if status in ("stalled", "convexity-lost"):
        return EXIT_FLOW
    if status != "converged" and config.renormalize:
        return EXIT_FLOW
    return EXIT_OK


def cmd_chord_law_fit(args) -> int:
    _require(args, "trace", "q")
    with open(args.trace) as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != TRACE_FIELDS:
        raise UsageError(f"{args.trace} is not a flow trace")
    trace = FlowTrace([tuple(float(v) for v in r) for r in rows[1:]])
    if args.target is not None:
        target = float(args.target)
    else:
        _require(args, "f")
        target = target_chord_integral(float(args.q), parse_field(args.f, make_grid(args.dim, args.n)),
                                       make_grid(args.dim, args.n))
    slope = chord_law_check(trace, float(args.q), args.dim, target)
    expected = float(args.q) + args.dim - 1
    _emit_json(args, "chord_law.json", {"slope": slope, "expected": expected,
                                        "relative_error": abs(slope - expected) / expected})
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _bool(text):
    if isinstance(text, bool):
        return text
    if str(text).lower() in ("1", "true", "yes", "on"):
        return True
    if str(text).lower() in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def _common(p, n_default):
    p.add_argument("--config", help="key=value file merged under explicit flags")
    p.add_argument("--dim", type=int, choices=(2, 3), default=2)
    p.add_argument("--n", type=int, default=None,
                   help=f"grid size (circle nodes; polar rows in 3D). Default {n_default} in 2D, 16 in 3D")
    p.add_argument("--body", default="ball:1", help="kind:params (ball, ellipse, ellipsoid) or body file")
    p.add_argument("--q", type=float)
    p.add_argument("--a", type=float)
    p.add_argument("--f", help="const:<v> or expression in t, x, y, z")
    p.add_argument("--omega", help="angular weight expression in direction coordinates")
    p.add_argument("--phi", help="density expression in point coordinates")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output directory")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(n_default=n_default)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chordflow", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("potential", help="Riesz potential at every boundary node, both forms")
    _common(p, 256)
    p.set_defaults(func=cmd_potential)

    p = sub.add_parser("querm", help="dual quermassintegral at every boundary node")
    _common(p, 256)
    p.set_defaults(func=cmd_querm)

    p = sub.add_parser("chord", help="chord integral by both deterministic routes and Monte Carlo")
    _common(p, 256)
    p.add_argument("--mc-lines", type=int, default=0)
    p.set_defaults(func=cmd_chord)

    p = sub.add_parser("residual", help="chord Monge-Ampere residual at every node")
    _common(p, 256)
    p.set_defaults(func=cmd_residual)

    p = sub.add_parser("probe", help="empirical Hoelder exponent")
    _common(p, 256)
    p.add_argument("--data", help="CSV with header and columns position,value")
    p.add_argument("--derivative", type=int, default=0, choices=(0, 1, 2))
    p.add_argument("--aperiodic", action="store_true")
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("mc", help="Monte Carlo oracle estimates")
    _common(p, 256)
    p.add_argument("--kind", choices=("chord", "potential"), default="chord")
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--point", help="comma-separated evaluation point for --kind potential")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("flow", help="run the nonlocal Gauss curvature flow")
    _common(p, 64)
    p.add_argument("--init", help="initial body (same syntax as --body)")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-steps", type=int, default=100_000)
    p.add_argument("--dt", type=float, default=None, help="fixed time step (default adaptive)")
    p.add_argument("--safety", type=float, default=0.4)
    p.add_argument("--dt-max", type=float, default=1e-2)
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--stride", type=int, default=10)
    p.add_argument("--no-renormalize", type=_bool, nargs="?", const=True, default=False)
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("chord-law-fit", help="fit the growth exponent of a flow trace")
    _common(p, 64)
    p.add_argument("--trace", help="trace CSV written by the flow command")
    p.add_argument("--target", type=float, help="target I_q (default from --f)")
    p.set_defaults(func=cmd_chord_law_fit)
    return parser


def read_config_file(path) -> dict:
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            out[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return out


REQUIRED = {"potential": ("a",), "querm": ("q",), "chord": ("q",), "residual": ("q", "f"),
            "flow": ("q", "f"), "chord-law-fit": ("trace", "q")}


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    if args.config:
        values = read_config_file(args.config)
        known = {a.dest: a for a in sub._actions}
        unknown = sorted(set(values) - set(known))
        if unknown:
            raise UsageError("unknown config keys: " + ", ".join(unknown))
        sub.set_defaults(**values)
        args = parser.parse_args(argv)
    missing = [k for k in REQUIRED.get(args.command, ()) if getattr(args, k) is None]
    if missing:
        sub.error("missing required option(s): " + ", ".join("--" + k for k in missing))
    if args.n is None:
        args.n = args.n_default if args.dim == 2 else 16
    del args.n_default
    return args


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parse_args(argv)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _backend.set_threads(args.threads)
    try:
        return args.func(args)
    except (DegenerateConvexityError, StallError, CoverageError, FitError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ChordFlowError, ValueError, NotImplementedError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
