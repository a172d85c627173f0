"""Command-line entry point.

    biortho models
    biortho analyze --model s2xs2 --a 1 --b 0.5
    biortho check --model cp2
    biortho yamabe --kind y1perp --model s2xs2 --start random --seed 7
    biortho props --suite trace-sum --count 10000

Common options: ``--format text|json``, ``--output FILE``, ``--output-dir DIR``
and ``--config FILE`` (``key = value`` lines using option names, applied
beneath explicit flags).  ``BIORTHO_OUTPUT_DIR`` overrides the output
directory.  Exit codes: 0 pass, 1 invariant violation, 2 numeric failure,
3 usage error.
"""

from __future__ import annotations

import argparse
import inspect
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import kperp_bruteforce, kperp_spectral, predicates
from .curvature import CurvatureError, curvature_field
from .bivector import decompose
from .integrals import scalar_square_threshold, gauss_bonnet_check, euler_bound_check
from .models import MODELS, catalog, get_model
from .report import render

EXIT_OK, EXIT_VIOLATION, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2, 3
OUTPUT_ENV = "BIORTHO_OUTPUT_DIR"
MODEL_PARAMS = ("r", "a", "b", "L")


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--output", default=None, help="write the report here instead of stdout")
    p.add_argument("--output-dir", default=".", help="base directory for relative output paths")
    p.add_argument("--config", default=None, help="key = value file merged beneath flags")


def _model_args(p, default="s2xs2") -> None:
    p.add_argument("--model", choices=sorted(MODELS), default=default)
    for name in MODEL_PARAMS:
        p.add_argument(f"--{name}", type=float, default=None, help=f"model parameter {name}")


def build_parser() -> Parser:
    parser = Parser(prog="biortho", description="Bi-orthogonal curvature toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=Parser)
    sub.required = True

    p = sub.add_parser("models", help="list catalog models")
    _common(p)

    p = sub.add_parser("analyze", help="curvature extrema and predicates at sampled points")
    _common(p)
    _model_args(p)
    p.add_argument("--points", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--h", type=float, default=1e-3, help="finite-difference step")
    p.add_argument("--budget", type=int, default=512, help="brute-force start count (0 skips it)")
    p.add_argument("--chart-tol", type=float, default=1e-5)

    p = sub.add_parser("check", help="Gauss-Bonnet, Euler bound and threshold reports")
    _common(p)
    p.add_argument("--model", choices=sorted(MODELS) + ["all"], default="all")
    for name in MODEL_PARAMS:
        p.add_argument(f"--{name}", type=float, default=None)
    p.add_argument("--nodes", type=int, default=24)
    p.add_argument("--chart-nodes", type=int, default=8, help="0 skips the finite-difference pass")

    p = sub.add_parser("yamabe", help="conformal functionals on a spectral mesh")
    _common(p)
    _model_args(p)
    p.add_argument("--kind", choices=("y", "yperp", "y1perp"), default="y")
    p.add_argument("--u", choices=("const", "random", "axis", "first-coordinate"), default="const")
    p.add_argument("--start", choices=("const", "random", "axis", "first-coordinate"), default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--amplitude", type=float, default=0.3)
    p.add_argument("--nlat", type=int, default=32)
    p.add_argument("--ntorus", type=int, default=32)
    p.add_argument("--degree", type=int, default=6)
    p.add_argument("--max-iter", type=int, default=5000)
    p.add_argument("--rtol", type=float, default=1e-8)
    p.add_argument("--trace", default="yamabe_trace.csv", help="trace CSV path when minimizing")

    p = sub.add_parser("props", help="property suites on random curvature blocks")
    _common(p)
    p.add_argument("--suite", action="append", default=None, help="repeatable; default all")
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--s-scale", type=float, default=10.0)
    p.add_argument("--w-scale", type=float, default=1.0)
    p.add_argument("--b-scale", type=float, default=1.0)
    p.add_argument("--einstein", action="store_true")
    p.add_argument("--conformally-flat", action="store_true")
    p.add_argument("--nonneg-k1", action="store_true")
    return parser


def read_config(path) -> dict:
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _apply_config(sub: argparse.ArgumentParser, config: dict) -> None:
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, raw in config.items():
        action = actions.get(key)
        if action is None or key in ("config", "help"):
            raise UsageError(f"unknown config key {key!r}")
        if isinstance(action, argparse._StoreTrueAction):
            value = raw.lower() in ("1", "true", "yes", "on")
        elif isinstance(action, argparse._AppendAction):
            value = [v.strip() for v in raw.split(",") if v.strip()]
        else:
            value = action.type(raw) if action.type else raw
            if action.choices is not None and value not in action.choices:
                raise UsageError(f"config {key} = {raw!r} not in {sorted(action.choices)}")
        defaults[key] = value
    sub.set_defaults(**defaults)


def parse(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            config = read_config(args.config)
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
        sub = parser._subparsers._group_actions[0].choices[args.command]
        _apply_config(sub, config)
        args = parser.parse_args(argv)
    return args


def _model_from(args):
    params = {k: getattr(args, k) for k in MODEL_PARAMS if getattr(args, k, None) is not None}
    factory = MODELS[args.model]
    accepted = set(inspect.signature(factory).parameters)
    extra = sorted(set(params) - accepted)
    if extra:
        raise UsageError(f"model {args.model} does not take {', '.join('--' + e for e in extra)}")
    try:
        return get_model(args.model, **params)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _config_echo(args) -> dict:
    skip = {"output", "output_dir", "config", "format", "command"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None}


def _summary(spec) -> dict:
    return {k: getattr(spec, k) for k in ("s", "w1p", "w2p", "w3p", "w1m", "w2m", "w3m", "k1perp", "k2perp", "k3perp")}


def cmd_models(args) -> tuple[dict, int]:
    body = {}
    for m in catalog():
        key = m.label
        body[key] = {
            "name": m.name,
            "params": m.params,
            "chi": m.euler_characteristic,
            "volume": m.volume,
            "description": m.description,
        }
    return body, EXIT_OK


def cmd_analyze(args) -> tuple[dict, int]:
    model = _model_from(args)
    blocks = model.blocks
    spec = kperp_spectral(blocks)
    pred = predicates(blocks)
    rng = np.random.default_rng(args.seed)
    pts = model.chart.sample(rng, args.points, margin=0.05)
    ops, _, _ = curvature_field(model.chart, pts, args.h)
    body: dict = {"model": model.label, "points": args.points}
    k1s, k3s, dev = [], [], 0.0
    for i, (p, op) in enumerate(zip(pts, ops)):
        local = decompose(0.5 * (op + op.T), tol=1e-7)
        lsp = kperp_spectral(local)
        k1s.append(lsp.k1perp)
        k3s.append(lsp.k3perp)
        dev = max(dev, abs(local.s - blocks.s), float(np.max(np.abs(local.wplus - blocks.wplus))),
                  float(np.max(np.abs(local.wminus - blocks.wminus))), float(np.max(np.abs(local.b - blocks.b))))
        body[f"point{i}"] = {"coords": p, **_summary(lsp)}
    body["closed_form"] = _summary(spec)
    body["chart"] = {
        "k1perp_min": min(k1s), "k1perp_max": max(k1s), "k3perp_min": min(k3s), "k3perp_max": max(k3s),
        "max_block_deviation": dev, "tolerance": args.chart_tol,
    }
    body["k1perp_min"] = spec.k1perp
    body["k3perp_max"] = spec.k3perp
    if args.budget > 0:
        lo, hi = kperp_bruteforce(blocks, args.budget)
        body["bruteforce"] = {"k1perp": lo, "k3perp": hi, "gap": max(abs(lo - spec.k1perp), abs(hi - spec.k3perp))}
    body["predicates"] = {k: getattr(pred, k) for k in pred.__dataclass_fields__}
    code = EXIT_OK if dev <= args.chart_tol else EXIT_VIOLATION
    return body, code


def cmd_check(args) -> tuple[dict, int]:
    if args.model == "all":
        if any(getattr(args, k) is not None for k in MODEL_PARAMS):
            raise UsageError("model parameters need a specific --model")
        models = catalog()
    else:
        models = [_model_from(args)]
    body, code = {}, EXIT_OK
    for m in models:
        gb = gauss_bonnet_check(m, args.nodes, args.chart_nodes or None)
        t3 = euler_bound_check(m, nodes=args.nodes)
        entry = {"gauss_bonnet": gb.as_dict(), "euler_bound": t3.as_dict()}
        if not gb.passed or not t3.passed:
            code = EXIT_VIOLATION
        if t3.flags["hypotheses_met"] and not t3.flags["proof_holds"]:
            code = EXIT_VIOLATION
        if m.name == "s2xs2":
            th = scalar_square_threshold(m)
            entry["threshold"] = th.as_dict()
            if th.conflict:
                code = EXIT_VIOLATION
        body[m.label] = entry
    return body, code


def _factor_fn(choice, model, seed, amplitude):
    from .yamabe import axis_harmonic, first_coordinate, smooth_factor

    if choice == "const":
        return lambda p: np.ones(np.shape(p)[:-1])
    if choice == "random":
        return smooth_factor(model, np.random.default_rng(seed), amplitude)
    if choice == "axis":
        return axis_harmonic(amplitude)
    return first_coordinate(amplitude)


def cmd_yamabe(args, out_dir: Path) -> tuple[dict, int]:
    from .integrals import scalar_square_threshold_conformal
    from .meshes import build_mesh
    from .yamabe import (
        ConformalFactor,
        FunctionalKind,
        InvalidFactor,
        mean_k1_certificate,
        functional_value,
        minimize,
    )

    model = _model_from(args)
    try:
        mesh = build_mesh(model, nlat=args.nlat, ntorus=args.ntorus, degree=args.degree)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    kind = FunctionalKind.parse(args.kind)
    try:
        u = ConformalFactor.from_function(mesh, _factor_fn(args.u, model, args.seed, args.amplitude))
    except (InvalidFactor, ValueError) as exc:
        raise UsageError(str(exc)) from None
    body: dict = {"model": model.label, "kind": kind.value, "nodes": int(np.prod(mesh.shape)), "volume": mesh.volume}
    body["value"] = functional_value(mesh, kind, u)
    if kind is FunctionalKind.Y1PERP:
        body["value_raw"] = functional_value(mesh, kind, u, normalized=False)
    code = EXIT_OK
    if model.name == "s2xs2":
        body["mean_k1"] = mean_k1_certificate(mesh, u).as_dict()
        body["threshold"] = scalar_square_threshold_conformal(mesh, u).as_dict()
    if args.start is not None:
        start = ConformalFactor.from_function(mesh, _factor_fn(args.start, model, args.seed, args.amplitude))
        trace_path = out_dir / args.trace
        res = minimize(mesh, kind, start, max_iter=args.max_iter, rtol=args.rtol, trace_path=trace_path)
        scale = 12.0 if kind is FunctionalKind.Y1PERP else 1.0
        body["minimize"] = {
            "start_value": res.start_value / scale,
            "value": res.value / scale,
            "value_raw": res.value,
            "iterations": res.iterations,
            "converged": res.converged,
            "monotone": res.monotone,
            "clamp_count": res.clamp_count,
            "trace": str(args.trace),
            "u_min": float(res.u.min()),
            "u_max": float(res.u.max()),
        }
        if not res.monotone or res.clamp_count or res.value > res.start_value + 1e-12:
            code = EXIT_VIOLATION
    return body, code


def cmd_props(args) -> tuple[dict, int]:
    from .proplab import RandomBlockSpec, RejectionBudgetExceeded, run_suite, suite_names

    names = args.suite or suite_names()
    unknown = [n for n in names if n not in suite_names()]
    if unknown:
        raise UsageError(f"unknown suite(s) {unknown}; choose from {suite_names()}")
    try:
        spec = RandomBlockSpec(
            seed=args.seed, count=args.count, s_scale=args.s_scale, w_scale=args.w_scale, b_scale=args.b_scale,
            einstein=args.einstein, conformally_flat=args.conformally_flat, nonneg_k1=args.nonneg_k1,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    body, code = {}, EXIT_OK
    for name in names:
        try:
            rep = run_suite(name, spec)
        except RejectionBudgetExceeded as exc:
            raise UsageError(str(exc)) from None
        body[name] = rep.as_dict()
        if not rep.passed:
            code = EXIT_VIOLATION
    return body, code


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"biortho: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out_dir = Path(os.environ.get(OUTPUT_ENV) or args.output_dir)
    header = {"tool": "biortho", "version": __version__, "command": args.command, "config": _config_echo(args)}
    try:
        if args.command == "yamabe":
            out_dir.mkdir(parents=True, exist_ok=True)
            body, code = cmd_yamabe(args, out_dir)
        else:
            body, code = {
                "models": cmd_models, "analyze": cmd_analyze, "check": cmd_check, "props": cmd_props,
            }[args.command](args)
    except UsageError as exc:
        print(f"biortho: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CurvatureError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"biortho: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    header["exit_code"] = code
    text = render(header, body, args.format)
    if args.output:
        path = out_dir / args.output
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
