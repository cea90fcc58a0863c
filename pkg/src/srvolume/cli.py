"""Command-line front end: ``srvolume <command> [options]``.

Every command can be given directly on the command line or as an entry of
the ``commands`` list of a JSON scenario (``srvolume run --config ...``).
Exit status: 0 success, 1 a check failed, 2 malformed input, 3 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .algebra import (
    FrequencySpectrum,
    StructureField,
    classify_normal_form,
    growth_vector,
    hausdorff_dimension,
    normal_form_constants,
    parse_structure_constants,
)
from .density import GridSpec, SmoothVolumeSpec, density_map
from .expr import parse_expression
from .exceptions import CheckFailure, ParseError, SrVolumeError, ValidationError
from .geodesics import CovectorParam, exp_coords, shoot_all
from .group import GroupPoint
from .oracle import (
    ballbox_check,
    cut_optimality_check,
    diameter_check,
    injectivity_check,
    raster_volume,
)
from .regularity import FrequencyCurve, c3_certificate, resonance_scan
from .volume import horizontal_constant, unit_ball_volume

FLOAT = "%.17e"


# -- formatting ---------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None:
        return ""
    return FLOAT % (float(v) + 0.0)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else str(obj)
    return obj


def _dump_json(payload) -> str:
    return json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"


def _csv_text(header_comment: str, columns, rows) -> str:
    buf = io.StringIO()
    buf.write(f"# {header_comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v) if not isinstance(v, str) else v for v in row])
    return buf.getvalue()


class Output:
    """Writes artifacts to ``out_dir`` or, without one, to stdout."""

    def __init__(self, out_dir: str | None, stream=None):
        self.out_dir = Path(out_dir) if out_dir else None
        self.stream = stream or sys.stdout
        self.written: list[Path] = []

    def emit(self, name: str, text: str, explicit: str | None = None):
        if explicit:
            path = Path(explicit)
            if self.out_dir and not path.is_absolute():
                path = self.out_dir / path
        elif self.out_dir:
            path = self.out_dir / name
        else:
            self.stream.write(text)
            return
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        self.written.append(path)


# -- parsing helpers ----------------------------------------------------------


def _float_list(text, what="list") -> list:
    if isinstance(text, (list, tuple)):
        vals = list(text)
    else:
        vals = [s for s in str(text).replace(";", ",").split(",") if s.strip()]
    try:
        return [float(v) for v in vals]
    except ValueError:
        raise ParseError(f"cannot read {what} {text!r} as numbers") from None


def _orders(text) -> list:
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    text = str(text)
    try:
        if ".." in text:
            a, b = text.split("..")
            return list(range(int(a), int(b) + 1))
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise ParseError(f"cannot read orders {text!r}; use e.g. 1..5 or 1,4,5") from None


def _spectrum(freqs, kind) -> FrequencySpectrum:
    return FrequencySpectrum.of(_float_list(freqs, "frequencies"), kind or "contact")


def _locate(raw: str, value: str):
    """1-based (line, column) just inside the JSON literal holding ``value``."""
    needle = json.dumps(value)
    pos = raw.find(needle)
    if pos < 0:
        return None
    line = raw.count("\n", 0, pos) + 1
    col = pos - (raw.rfind("\n", 0, pos) + 1) + 1
    return line, col + 1


def _reanchor(exc: ParseError, raw: str | None, value: str, source: str):
    """Shift an expression error so it points into the scenario file."""
    if raw is None:
        return exc
    where = _locate(raw, value)
    if where is None:
        return exc
    line, col = where
    msg = str(exc.args[0]).split(" (line")[0]
    if exc.source and msg.startswith(f"{exc.source}: "):
        msg = msg[len(exc.source) + 2:]
    return ParseError(msg, line=line + (exc.line or 1) - 1,
                      column=col + (exc.column or 1) - 1, source=source)


# -- command implementations --------------------------------------------------


def cmd_classify(opts: dict, ctx) -> int:
    if opts.get("constants_file"):
        path = Path(opts["constants_file"])
        const = parse_structure_constants(path.read_text(), source=str(path))
    elif opts.get("constants"):
        const = parse_structure_constants(opts["constants"], source="constants")
    elif opts.get("normal_form"):
        const = normal_form_constants(opts["normal_form"], float(opts.get("alpha") or 1.0))
    else:
        raise ValidationError("classify needs --constants, --constants-file or --normal-form")
    label = classify_normal_form(const)
    gv = growth_vector(const)
    payload = {"label": label.tag, "alpha": label.alpha, "growth_vector": list(gv.dims),
               "Q": hausdorff_dimension(gv), "n": const.n, "k": const.k}
    ctx.out.emit("classify.json", _dump_json(payload), opts.get("out"))
    return 0


def cmd_volume(opts: dict, ctx) -> int:
    spec = _spectrum(opts.get("freqs"), opts.get("kind"))
    qo = {"epsabs": ctx.tol, "epsrel": ctx.tol} if ctx.tol else None
    res = unit_ball_volume(spec, quad_opts=qo)
    payload = {"freqs": list(spec.freqs), "kind": spec.kind, "volume": res.value,
               "quadrature_error": res.quadrature_error, "calibration": res.calibration,
               "units": "Lebesgue volume in exponential coordinates"}
    ctx.out.emit("volume.json", _dump_json(payload), opts.get("out"))
    return 0


def _field_from(cfg: dict, ctx) -> StructureField:
    if not isinstance(cfg, dict):
        raise ValidationError("'structure' must be an object")
    dim = int(cfg.get("dim_manifold", 1))
    kind = cfg.get("kind", "contact")
    freqs = cfg.get("frequencies")
    if not isinstance(freqs, list) or not freqs:
        raise ValidationError("structure.frequencies must be a non-empty list of expressions")
    lower = cfg.get("lower")
    upper = cfg.get("upper")
    parsed = []
    for i, e in enumerate(freqs):
        try:
            parsed.append(parse_expression(str(e), allowed={f"q{j + 1}" for j in range(dim)},
                                           source=f"structure.frequencies[{i}]"))
        except ParseError as exc:
            raise _reanchor(exc, ctx.raw, str(e), ctx.source) from None
    return StructureField.from_freq_field(parsed, dim, kind, lower, upper)


def _volume_from(cfg, dim: int, ctx):
    if cfg is None or cfg == "lebesgue":
        return SmoothVolumeSpec.lebesgue()
    if cfg == "popp":
        return "popp"
    if isinstance(cfg, dict):
        if cfg.get("name") == "popp":
            return "popp"
        text = str(cfg.get("density", "1"))
        try:
            return SmoothVolumeSpec.from_expression(text, dim, cfg.get("name", "mu"),
                                                    source="volume.density")
        except ParseError as exc:
            raise _reanchor(exc, ctx.raw, text, ctx.source) from None
    raise ValidationError("'volume' must be 'lebesgue', 'popp' or an object")


def cmd_density_map(opts: dict, ctx) -> int:
    scen = ctx.scenario
    if scen is None:
        raise ValidationError("density-map needs --config with structure, volume and grid")
    field_ = _field_from(scen.get("structure"), ctx)
    vol = _volume_from(scen.get("volume"), field_.dim_manifold, ctx)
    g = scen.get("grid")
    if not isinstance(g, dict):
        raise ValidationError("scenario needs a 'grid' object")
    grid = GridSpec(tuple(_float_list(g.get("lower", []))), tuple(_float_list(g.get("upper", []))),
                    tuple(int(v) for v in g.get("shape", [])))
    if len(grid.shape) != field_.dim_manifold:
        raise ValidationError("grid dimension differs from structure.dim_manifold")
    if field_.lower is not None and (np.any(np.array(grid.lower) < np.array(field_.lower))
                                     or np.any(np.array(grid.upper) > np.array(field_.upper))):
        raise ValidationError("grid leaves the structure domain")
    rows = density_map(grid, field_, vol)
    ell = len(rows[0].b)
    kind = "quasi-contact" if field_.matrix_dim % 2 else "contact"
    C = horizontal_constant(ell, kind)
    name = "popp" if vol == "popp" else vol.name
    cols = [f"q{i + 1}" for i in range(field_.dim_manifold)] + [f"b{i + 1}" for i in range(ell)] \
        + ["Q", "ball_volume", "f"]
    header = (f"srvolume density-map; volume={name}; units: q coordinates, b 1/time, "
              f"ball_volume Lebesgue, f = m*V/2^Q per unit S^Q; calibration C_l={C:.17e}")
    table = [list(r.q) + list(r.b) + [r.Q, r.ball_volume, r.f_muS] for r in rows]
    ctx.out.emit("density.csv", _csv_text(header, cols, table), opts.get("out"))
    return 0


def cmd_regularity_scan(opts: dict, ctx) -> int:
    text = opts.get("curve")
    if not text:
        raise ValidationError("regularity-scan needs --curve")
    lo, hi = _float_list(opts.get("interval") or "-0.25,0.25", "interval")
    try:
        curve = FrequencyCurve.from_expressions(text, lo, hi, opts.get("kind") or "contact")
    except ParseError as exc:
        if ctx.raw is not None:
            raise _reanchor(exc, ctx.raw, text, ctx.source) from None
        raise
    orders = _orders(opts.get("orders") or "1..5")
    tol = ctx.tol or 1e-6
    rows = []
    for res in resonance_scan(curve):
        if not res.transversal:
            rows.append([res.t0, "", "", "", "", "", f"multiplicity {res.multiplicity}"])
            continue
        for rep in c3_certificate(curve, res.t0, orders, tol=tol):
            pred = rep.paper_prediction or {}
            rows.append([rep.t0, rep.order, rep.left_limit, rep.right_limit, rep.jump,
                         rep.continuous, f"{_fmt(pred.get('left'))}|{_fmt(pred.get('right'))}"
                         if pred else ""])
    header = ("srvolume regularity-scan; one-sided limits of d^k W/dt^k at each resonance, "
              "W = tail of the s-integral (no calibration constant applied); "
              f"calibration C_l={horizontal_constant(curve.ell, curve.kind):.17e}")
    cols = ["t0", "order", "left", "right", "jump", "continuous", "prediction_left|right"]
    ctx.out.emit("regularity.csv", _csv_text(header, cols, rows), opts.get("out"))
    return 0


def cmd_geodesic(opts: dict, ctx) -> int:
    spec = _spectrum(opts.get("freqs"), opts.get("kind"))
    if opts.get("target"):
        target = GroupPoint.from_json(opts["target"]) if str(opts["target"]).lstrip().startswith("{") \
            else GroupPoint.from_array(_float_list(opts["target"], "target"), spec.kind)
        t_fix = float(opts.get("t") or 1.0)
        shots = shoot_all(target, spec, t_fix)
        payload = {"target": list(target.as_array()), "t": t_fix, "solutions": [
            {"r": list(s.param.r), "theta": list(s.param.theta), "w": s.param.w,
             "extra_u": s.param.extra_u, "length": s.length, "residual": s.residual,
             "degenerate": s.degenerate} for s in shots]}
        ctx.out.emit("shoot.json", _dump_json(payload), opts.get("out"))
        return 0
    r = _float_list(opts.get("r") or "1", "r")
    th = _float_list(opts.get("theta") or ",".join(["0"] * len(r)), "theta")
    extra = opts.get("extra_u")
    p = CovectorParam(r, th, float(opts.get("w") or 0.0),
                      None if extra in (None, "") else float(extra))
    t_max = float(opts.get("t") or 1.0)
    n = int(opts.get("samples") or 101)
    ts = np.linspace(0.0, t_max, n)
    pts = exp_coords(np.broadcast_to(p.r, (n, p.ell)), np.broadcast_to(p.theta, (n, p.ell)),
                     np.full(n, p.w), spec, ts,
                     None if p.extra_u is None else np.full(n, p.extra_u))
    ell = spec.ell
    cols = ["t"] + [f"x{i + 1}" for i in range(ell)] + [f"y{i + 1}" for i in range(ell)] \
        + (["x_extra"] if spec.kind == "quasi-contact" else []) + ["z"]
    header = (f"srvolume geodesic; b={list(spec.freqs)}; chart: closed-form exponential map; "
              f"units: time = arclength x speed; calibration C_l={horizontal_constant(ell, spec.kind):.17e}")
    ctx.out.emit("geodesic.csv", _csv_text(header, cols, np.column_stack([ts, pts]).tolist()),
                 opts.get("out"))
    return 0


def cmd_oracle_verify(opts: dict, ctx) -> int:
    spec = _spectrum(opts.get("freqs"), opts.get("kind"))
    check = opts.get("check") or "volume"
    seed = ctx.seed
    tol = ctx.tol
    if check == "volume":
        quad = unit_ball_volume(spec).value
        res = int(opts.get("resolution") or 32)
        rep = raster_volume(spec, resolution=res, method=opts.get("method") or "auto", seed=seed,
                            n_points=int(opts.get("points") or 1 << 20))
        rel = abs(rep.value - quad) / quad
        tol = tol or 0.02
        payload = {"check": "volume", "quadrature": quad, "raster": rep.to_dict(),
                   "relative_error": rel, "tolerance": tol, "passed": rel <= tol}
    elif check == "ballbox":
        eps = _float_list(opts.get("eps") or "0.25,0.5,1", "eps")
        reps = ballbox_check(spec, eps, seed=seed)
        c1 = [r.c1_est for r in reps]
        c2 = [r.c2_est for r in reps]
        tol = tol or 0.05
        spread = max((max(c) - min(c)) / max(c) for c in (c1, c2))
        payload = {"check": "ballbox", "reports": [vars(r) for r in reps], "spread": spread,
                   "tolerance": tol, "passed": spread <= tol}
    elif check == "cut":
        n = int(opts.get("samples") or 50)
        rep = cut_optimality_check(n, spec, seed=seed)
        payload = {"check": "cut", **rep.to_dict()}
    elif check == "diameter":
        eps = float(opts.get("eps") or 0.5)
        rep = diameter_check(spec, eps, seed=seed)
        tol = tol or 1e-8
        payload = {"check": "diameter", "eps": eps, "line_distance": rep.line_distance,
                   "max_pair_distance": rep.max_pair_distance, "seed": seed,
                   "passed": abs(rep.line_distance - 2 * eps) <= tol
                   and rep.max_pair_distance <= 2 * eps + tol}
    elif check == "injectivity":
        rep = injectivity_check(spec, int(opts.get("samples") or 100), seed=seed)
        payload = {"check": "injectivity", **rep, "passed": rep["collisions"] == 0}
    else:
        raise ValidationError(f"unknown check {check!r}")
    payload["seed"] = seed
    payload["freqs"] = list(spec.freqs)
    payload["calibration"] = horizontal_constant(spec.ell, spec.kind)
    ctx.out.emit(f"oracle_{check}.json", _dump_json(payload), opts.get("out"))
    if not payload["passed"]:
        raise CheckFailure(f"oracle check '{check}' failed")
    return 0


COMMANDS = {
    "classify": cmd_classify,
    "volume": cmd_volume,
    "density-map": cmd_density_map,
    "regularity-scan": cmd_regularity_scan,
    "geodesic": cmd_geodesic,
    "oracle-verify": cmd_oracle_verify,
}


# -- scenario -------------------------------------------------------------------


class Context:
    def __init__(self, out: Output, seed: int = 0, tol: float | None = None,
                 scenario: dict | None = None, raw: str | None = None,
                 source: str | None = None):
        self.out = out
        self.source = source
        self.seed = seed
        self.tol = tol
        self.scenario = scenario
        self.raw = raw


def load_scenario(path: str):
    raw = Path(path).read_text()
    try:
        scen = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno, source=path) from None
    if not isinstance(scen, dict):
        raise ParseError("scenario must be a JSON object", line=1, column=1, source=path)
    cmds = scen.get("commands", [])
    if not isinstance(cmds, list) or any(not isinstance(c, dict) or "command" not in c
                                         for c in cmds):
        raise ValidationError("'commands' must be a list of objects with a 'command' key")
    for c in cmds:
        if c["command"] not in COMMANDS:
            raise ValidationError(f"unknown command {c['command']!r}")
    return scen, raw


def run(scenario: dict, out: Output, seed: int | None = None, tol: float | None = None,
        raw: str | None = None, source: str | None = None) -> int:
    """Execute the scenario's commands in order; first failing check decides the status."""
    seed = int(scenario.get("seed", 0) if seed is None else seed)
    ctx = Context(out, seed, tol if tol is not None else scenario.get("tol"), scenario, raw, source)
    status = 0
    for entry in scenario.get("commands", []):
        opts = {k.replace("-", "_"): v for k, v in entry.items() if k != "command"}
        try:
            COMMANDS[entry["command"]](opts, ctx)
        except CheckFailure as exc:
            print(f"check failed: {exc}", file=sys.stderr)
            status = exc.exit_code
    return status


# -- argparse -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON scenario file")
    common.add_argument("--out-dir", help="directory for output files (default: stdout)")
    common.add_argument("--seed", type=int, default=None, help="random seed (default 0)")
    common.add_argument("--tol", type=float, default=None, help="tolerance override")
    common.add_argument("--out", help="output file name (relative to --out-dir)")

    p = argparse.ArgumentParser(prog="srvolume", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("classify", parents=[common], help="normal form, growth vector and Q")
    s.add_argument("--constants-file")
    s.add_argument("--constants", help="bracket text, e.g. 'n=3; k=2; [1,2]=Z1' with ';' as newline")
    s.add_argument("--normal-form")
    s.add_argument("--alpha", type=float)

    s = sub.add_parser("volume", parents=[common], help="unit-ball volume by quadrature")
    s.add_argument("--freqs", required=True, help="comma-separated frequencies")
    s.add_argument("--kind", choices=["contact", "quasi-contact"], default="contact")

    sub.add_parser("density-map", parents=[common], help="density table over a grid (needs --config)")

    s = sub.add_parser("regularity-scan", parents=[common], help="one-sided derivatives at resonances")
    s.add_argument("--curve", required=True, help="e.g. 'b1=1+t; b2=1+2*t'")
    s.add_argument("--orders", default="1..5")
    s.add_argument("--interval", default="-0.25,0.25")
    s.add_argument("--kind", choices=["contact", "quasi-contact"], default="contact")

    s = sub.add_parser("geodesic", parents=[common], help="sample a geodesic or shoot to a target")
    s.add_argument("--freqs", required=True)
    s.add_argument("--kind", choices=["contact", "quasi-contact"], default="contact")
    s.add_argument("--r")
    s.add_argument("--theta")
    s.add_argument("--w", type=float, default=0.0)
    s.add_argument("--extra-u", type=float)
    s.add_argument("--t", type=float, default=1.0)
    s.add_argument("--samples", type=int, default=101)
    s.add_argument("--target", help="comma-separated coordinates or GroupPoint JSON")

    s = sub.add_parser("oracle-verify", parents=[common], help="brute-force verification")
    s.add_argument("--freqs", required=True)
    s.add_argument("--kind", choices=["contact", "quasi-contact"], default="contact")
    s.add_argument("--check", default="volume",
                   choices=["volume", "ballbox", "cut", "diameter", "injectivity"])
    s.add_argument("--resolution", type=int, default=32)
    s.add_argument("--method", default="auto", choices=["auto", "sweep", "grid", "qmc"])
    s.add_argument("--samples", type=int)
    s.add_argument("--points", type=int, help="QMC points for --check volume (default 2^20)")
    s.add_argument("--eps")

    sub.add_parser("run", parents=[common], help="execute every command of a scenario")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    opts = {k: v for k, v in vars(args).items()
            if k not in ("command", "config", "out_dir", "seed", "tol")}
    if opts.get("constants"):
        opts["constants"] = opts["constants"].replace(";", "\n")
    out = Output(args.out_dir)
    try:
        scenario, raw = (None, None)
        if args.config:
            scenario, raw = load_scenario(args.config)
        if args.command == "run":
            if scenario is None:
                raise ValidationError("run needs --config")
            return run(scenario, out, args.seed, args.tol, raw, args.config)
        seed = args.seed if args.seed is not None else int((scenario or {}).get("seed", 0))
        ctx = Context(out, seed, args.tol, scenario, raw, args.config)
        return COMMANDS[args.command](opts, ctx)
    except SrVolumeError as exc:
        print(f"srvolume: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"srvolume: error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
