"""Command-line front end.

Usage::

    tugwar COMMAND [--config FILE.json] [--seed S] [--threads T] [--out DIR]
                   [--format {csv,json}] [--dump-traces] [--timing]

Every command writes ``<command>.json`` into ``--out`` (schema version,
effective configuration, summary and rows).  With ``--format csv`` (the
default) the rows are also written to ``<command>.csv``.  ``solve`` and
``verify`` additionally write the solved field to ``value.grid``.

Exit codes: 0 success, 1 invalid configuration, 2 numerical or IO failure
(an ``error.json`` report is written when the output directory is usable).
"""
from dataclasses import asdict, dataclass
import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import regularity as reg
from .core import (GameParams, NodeClass, build_domain, running_payoff_field,
                   shape_from_spec, solve_value, write_grid_dump)
from .errors import (DegenerateGradient, NonConvergence, StepLimitExceeded, TugWarError)
from .games import (GreedyMax, GreedyMin, PullToward, RngSpec, StandStill, cylinder_walk,
                    mean_and_se, play_game, run_games, walk_1d, walk_1d_bound,
                    walk_1d_exact)
from .payoffs import make_payoff
from .pde import convergence_study, make_quadratic_solution

SCHEMA_VERSION = 1
COMMANDS = ("solve", "simulate", "walk", "cylinder", "verify", "converge")


class ConfigError(TugWarError):
    def __init__(self, field_name, message):
        super().__init__(f"config field {field_name!r}: {message}")
        self.field = field_name


@dataclass
class RunConfig:
    command: str
    p: float = 4.0
    n: int = 2
    epsilon: float = 0.1
    shape: dict = None
    F: object = 1.0
    f: object = 1.0
    h: float = None
    tol: float = None
    method: str = "policy"
    max_iter: int = 1000000
    check_resolution: bool = True
    allow_nonnegative_f: bool = False
    start: list = None
    N: int = 10000
    seed: int = 0
    strategies: dict = None
    trace_count: int = 10
    t0: list = None
    t: list = None
    r: float = 0.5
    probes: dict = None
    eps_list: list = None
    A: float = 1.0
    scale: bool = True
    exclusion_radius: float = 0.0
    threads: int = 1
    out: str = "."
    format: str = "csv"
    dump_traces: bool = False
    timing: bool = False

    def echo(self):
        """Effective configuration, excluding run-environment settings."""
        d = asdict(self)
        for k in ("threads", "out", "format", "dump_traces", "timing"):
            d.pop(k)
        return d


_RUNTIME_KEYS = {"threads", "out", "format", "dump_traces", "timing", "command"}
CONFIG_KEYS = set(RunConfig.__dataclass_fields__) - _RUNTIME_KEYS


def _num(cfg, key, positive=False, integer=False):
    v = getattr(cfg, key)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(key, f"expected a number, got {v!r}")
    if integer:
        if int(v) != v:
            raise ConfigError(key, "expected an integer")
        v = int(v)
    else:
        v = float(v)
    if positive and not v > 0:
        raise ConfigError(key, "must be positive")
    setattr(cfg, key, v)
    return v


def _point(key, v, n):
    try:
        arr = [float(x) for x in np.atleast_1d(v)]
    except (TypeError, ValueError):
        raise ConfigError(key, f"expected a list of {n} numbers") from None
    if len(arr) != n:
        raise ConfigError(key, f"expected {n} coordinates")
    return arr


def _num_list(key, v, positive=False):
    numeric = all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v) \
        if isinstance(v, list) else False
    if not numeric:
        raise ConfigError(key, "expected a list of numbers")
    if positive and any(x <= 0 for x in v):
        raise ConfigError(key, "entries must be positive")
    return [float(x) for x in v]


def _wrap(key, fn, *args):
    try:
        return fn(*args)
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(key, str(exc)) from None


def build_config(command, mapping):
    """Validate a mapping into a ``RunConfig``; raises ``ConfigError``."""
    if command not in COMMANDS:
        raise ConfigError("command", f"unknown command {command!r}")
    if not isinstance(mapping, dict):
        raise ConfigError("<root>", "configuration must be a JSON object")
    unknown = sorted(set(mapping) - CONFIG_KEYS)
    if unknown:
        raise ConfigError(unknown[0], "unknown key")
    cfg = RunConfig(command=command, **mapping)

    if command == "walk":
        cfg.n = mapping.get("n", 1)
    _num(cfg, "p")
    _num(cfg, "n", positive=True, integer=True)
    _num(cfg, "epsilon", positive=True)
    params = _wrap("p", GameParams, cfg.p, cfg.n, cfg.epsilon)
    if cfg.shape is None:
        cfg.shape = {"kind": "ball", "center": [0.0] * cfg.n, "radius": 1.0}
    shape = _wrap("shape", shape_from_spec, cfg.shape)
    if shape.dim != cfg.n:
        raise ConfigError("shape", f"dimension {shape.dim} differs from n = {cfg.n}")
    if cfg.h is None:
        cfg.h = cfg.epsilon / 4
    _num(cfg, "h", positive=True)
    if cfg.check_resolution and cfg.h > cfg.epsilon / 4 * (1 + 1e-9):
        raise ConfigError("h", "must not exceed epsilon/4")
    if cfg.tol is not None:
        _num(cfg, "tol", positive=True)
    _num(cfg, "max_iter", positive=True, integer=True)
    if cfg.method not in ("jacobi", "gauss-seidel", "policy"):
        raise ConfigError("method", "expected jacobi, gauss-seidel or policy")
    for key in ("F", "f"):
        pay = _wrap(key, make_payoff, getattr(cfg, key), cfg.n)
        setattr(cfg, key, pay.spec())
    _num(cfg, "N", positive=True, integer=True)
    _num(cfg, "seed", integer=True)
    if cfg.seed < 0:
        raise ConfigError("seed", "must be non-negative")
    _num(cfg, "trace_count", integer=True)

    if command == "simulate":
        if cfg.N < 100:
            raise ConfigError("N", "must be at least 100")
        cfg.start = _point("start", [0.0] * cfg.n if cfg.start is None else cfg.start, cfg.n)
        if cfg.strategies is None:
            cfg.strategies = {"I": {"kind": "greedy"}, "II": {"kind": "greedy"}}
        if not isinstance(cfg.strategies, dict) or set(cfg.strategies) != {"I", "II"}:
            raise ConfigError("strategies", "expected a mapping with keys 'I' and 'II'")
        for who, s in cfg.strategies.items():
            kind = s.get("kind") if isinstance(s, dict) else None
            if kind not in ("greedy", "pull", "still"):
                raise ConfigError("strategies",
                                  f"player {who}: kind must be greedy, pull or still")
            if kind == "pull":
                s["target"] = _point("strategies", s.get("target"), cfg.n)
    elif command == "walk":
        cfg.t0 = _num_list("t0", [0.5] if cfg.t0 is None else cfg.t0)
        for t0 in cfg.t0:
            if not cfg.epsilon < t0 < 1:
                raise ConfigError("t0", "entries must satisfy epsilon < t0 < 1")
    elif command == "cylinder":
        _num(cfg, "r", positive=True)
        cfg.t = _num_list("t", [0.0, 0.1, 0.2, 0.4] if cfg.t is None else cfg.t)
        if any(not 0 <= t <= 2 * cfg.r for t in cfg.t):
            raise ConfigError("t", "entries must lie in [0, 2r]")
        if cfg.epsilon >= cfg.r:
            raise ConfigError("epsilon", "must be smaller than r")
    elif command == "verify":
        cfg.probes = _validate_probes(cfg, shape)
    elif command == "converge":
        cfg.eps_list = _num_list("eps_list", [0.2, 0.1, 0.05] if cfg.eps_list is None
                                 else cfg.eps_list, positive=True)
        _num(cfg, "A", positive=True)
        _num(cfg, "exclusion_radius")
        radius = float(cfg.shape.get("radius", 0.0)) if cfg.shape.get("kind") == "ball" else None
        if radius is None or any(c != 0 for c in cfg.shape["center"]):
            raise ConfigError("shape", "converge needs a ball centred at the origin")
        _wrap("A", make_quadratic_solution, params, cfg.A, radius)
    if command in ("solve", "simulate") and cfg.start is not None:
        cfg.start = _point("start", cfg.start, cfg.n)
    return cfg


def _validate_probes(cfg, shape):
    probes = cfg.probes
    if probes is None:
        probes = {"global_bound": True, "local_comparison": 1000}
    if not isinstance(probes, dict):
        raise ConfigError("probes", "expected a mapping")
    allowed = {"harnack", "lipschitz", "inf_decay", "local_comparison", "global_bound"}
    extra = sorted(set(probes) - allowed)
    if extra:
        raise ConfigError("probes", f"unknown probe kind {extra[0]!r}")
    out = {"global_bound": bool(probes.get("global_bound", False)),
           "local_comparison": int(probes.get("local_comparison", 0))}
    needs = {"harnack": ("center", "r"), "lipschitz": ("center", "r", "R"),
             "inf_decay": ("y", "z", "r", "R")}
    for kind, keys in needs.items():
        items = probes.get(kind, [])
        if not isinstance(items, list):
            raise ConfigError("probes", f"{kind} must be a list")
        clean = []
        for i, item in enumerate(items):
            label = f"probes.{kind}[{i}]"
            if not isinstance(item, dict) or set(item) != set(keys):
                raise ConfigError(label, f"expected keys {list(keys)}")
            c = {k: (_point(label, item[k], cfg.n) if k in ("center", "y", "z")
                     else float(item[k])) for k in keys}
            if kind == "harnack" and not shape.contains_ball(c["center"], 30 * c["r"]):
                raise ConfigError(label, "ball of radius 30r must lie in the domain")
            if kind == "lipschitz":
                if not cfg.epsilon < c["r"] <= c["R"]:
                    raise ConfigError(label, "need epsilon < r <= R")
                if not shape.contains_ball(c["center"], 6 * c["R"]):
                    raise ConfigError(label, "ball of radius 6R must lie in the domain")
            if kind == "inf_decay":
                if not 2 * cfg.epsilon < c["r"] < c["R"]:
                    raise ConfigError(label, "need 2 epsilon < r < R")
                if not shape.contains_ball(c["y"], 30 * c["R"]):
                    raise ConfigError(label, "ball of radius 30R around y must lie in the domain")
            clean.append(c)
        out[kind] = clean
    return out


# --- commands ---------------------------------------------------------------

def _domain(cfg):
    params = GameParams(cfg.p, cfg.n, cfg.epsilon)
    dom = build_domain(shape_from_spec(cfg.shape), params, cfg.h,
                       make_payoff(cfg.F, cfg.n), make_payoff(cfg.f, cfg.n),
                       allow_nonnegative_f=cfg.allow_nonnegative_f,
                       check_resolution=cfg.check_resolution)
    return params, dom


def _solve(cfg, dom):
    return solve_value(dom, tol=cfg.tol, method=cfg.method, max_iter=cfg.max_iter)


def _start_node(dom, point):
    node = dom.index_of(point)
    if dom.classes()[node] != NodeClass.INTERIOR:
        raise ConfigError("start", "start must be an interior grid node")
    return node


def cmd_solve(cfg):
    params, dom = _domain(cfg)
    res = _solve(cfg, dom)
    row = {"epsilon": cfg.epsilon, "h": dom.h, "n_interior": dom.n_interior,
           "iterations": res.iterations, "residual": res.residual,
           "max_value": float(res.field.interior_values().max()),
           "min_value": float(res.field.interior_values().min())}
    if cfg.start is not None:
        row["value_at_start"] = res.field.at(_start_node(dom, cfg.start))
    return {"rows": [row], "summary": {"converged": True}, "grid": res.field}


def _strategy(spec, value_field, maximize):
    kind = spec["kind"]
    if kind == "greedy":
        return GreedyMax(value_field) if maximize else GreedyMin(value_field)
    if kind == "pull":
        return PullToward(np.asarray(spec["target"]))
    return StandStill()


def cmd_simulate(cfg):
    params, dom = _domain(cfg)
    start = _start_node(dom, cfg.start)
    value = None
    uses_field = any(s["kind"] == "greedy" for s in cfg.strategies.values())
    if uses_field:
        value = _solve(cfg, dom).field
    sI = _strategy(cfg.strategies["I"], value, True)
    sII = _strategy(cfg.strategies["II"], value, False)
    batch = run_games(dom, params, sI, sII, start, cfg.N, RngSpec(cfg.seed), cfg.threads)
    pay, pay_se = mean_and_se(batch.total_payoff)
    tau, tau_se = mean_and_se(batch.tau)
    where = " ".join(repr(float(x)) for x in dom.coords(start))
    ref = value.at(start) if value is not None else None
    rows = [{"estimator": "total_payoff", "mean": pay, "std_error": pay_se, "N": cfg.N,
             "seed": cfg.seed, "start": where, "reference": ref},
            {"estimator": "tau", "mean": tau, "std_error": tau_se, "N": cfg.N,
             "seed": cfg.seed, "start": where, "reference": None}]
    summary = {"mean_tau_eps2": tau * cfg.epsilon ** 2}
    both_greedy = cfg.strategies["I"]["kind"] == cfg.strategies["II"]["kind"] == "greedy"
    if both_greedy:
        z = abs(pay - ref) / pay_se if pay_se > 0 else (0.0 if pay == ref else math.inf)
        summary.update(z_score=z, within_4_se=bool(z <= 4))
    out = {"rows": rows, "summary": summary}
    if cfg.dump_traces:
        lines = []
        for k in range(min(cfg.trace_count, cfg.N)):
            tr = play_game(dom, params, sI, sII, start, RngSpec(cfg.seed, k))
            lines.append(f"# game {k} tau {tr.tau} total_payoff {tr.total_payoff!r}")
            lines.extend(tr.lines(dom))
        out["traces"] = lines
    return out


def cmd_walk(cfg):
    rows = []
    for i, t0 in enumerate(cfg.t0):
        params = GameParams(cfg.p, cfg.n, cfg.epsilon)
        mean, se = walk_1d(t0, params, cfg.N, RngSpec(cfg.seed, i * cfg.N))
        bound = walk_1d_bound(t0, params)
        rows.append({"t0": t0, "epsilon": cfg.epsilon, "N": cfg.N, "mean_tau": mean,
                     "std_error": se, "bound": bound, "exact": walk_1d_exact(t0, params),
                     "within_bound": bool(mean <= bound + 3 * se)})
    return {"rows": rows, "summary": {"all_within_bound": all(r["within_bound"] for r in rows)}}


def cylinder_trend(ts, p_fail, se, epsilon):
    """Monotonicity (within 3 combined standard errors) and fitted slope in ``t + eps``."""
    order = np.argsort(ts)
    p, s = np.asarray(p_fail)[order], np.asarray(se)[order]
    tol = 3 * np.sqrt(s[1:] ** 2 + s[:-1] ** 2)
    nondecreasing = bool(np.all(p[1:] >= p[:-1] - tol))
    slope = float(np.polyfit(np.asarray(ts)[order] + epsilon, p, 1)[0]) if len(p) > 1 else 0.0
    return nondecreasing, slope


def cmd_cylinder(cfg):
    params = GameParams(cfg.p, cfg.n, cfg.epsilon)
    rows = []
    for i, t in enumerate(cfg.t):
        pf, se = cylinder_walk(t, cfg.r, params, cfg.N, RngSpec(cfg.seed, i * cfg.N))
        rows.append({"t": t, "r": cfg.r, "epsilon": cfg.epsilon, "N": cfg.N,
                     "p_fail": pf, "std_error": se})
    mono, slope = cylinder_trend([r["t"] for r in rows], [r["p_fail"] for r in rows],
                                 [r["std_error"] for r in rows], cfg.epsilon)
    return {"rows": rows, "summary": {"nondecreasing": mono, "slope": slope,
                                      "passed": bool(mono and slope >= 0)}}


def cmd_verify(cfg):
    params, dom = _domain(cfg)
    u = _solve(cfg, dom).field
    f = running_payoff_field(dom)
    reports = []
    pr = cfg.probes
    if pr["global_bound"]:
        reports.append(reg.verify_global_bound(u))
    for c in pr["harnack"]:
        reports.append(reg.verify_harnack(u, f, c["center"], c["r"]))
    for c in pr["lipschitz"]:
        reports.append(reg.verify_lipschitz(u, f, c["center"], c["r"], c["R"]))
    for c in pr["inf_decay"]:
        reports.append(reg.verify_inf_decay(u, c["y"], c["z"], c["r"], c["R"]))
    if pr["local_comparison"]:
        pairs = reg.random_admissible_pairs(dom, pr["local_comparison"], cfg.seed)
        reports.append(reg.verify_local_comparison(u, params, pairs))
    summary = reg.summarize(reports)["estimates"]
    return {"rows": [r.as_row() for r in reports], "columns": reg.CSV_COLUMNS,
            "summary": summary, "grid": u}


def cmd_converge(cfg):
    params = GameParams(cfg.p, cfg.n, cfg.epsilon)
    shape = shape_from_spec(cfg.shape)
    sol = make_quadratic_solution(params, cfg.A, shape.radius)
    table = convergence_study(sol, shape, cfg.eps_list, tol=cfg.tol, scale=cfg.scale,
                              method=cfg.method, exclusion_radius=cfg.exclusion_radius,
                              timing=cfg.timing)
    rows = [asdict(r) for r in table.rows]
    return {"rows": rows, "columns": list(rows[0]) if rows else [],
            "summary": {"monotone": table.monotone, "scaled_running_payoff": table.scaled,
                        "description": table.description}}


HANDLERS = {"solve": cmd_solve, "simulate": cmd_simulate, "walk": cmd_walk,
            "cylinder": cmd_cylinder, "verify": cmd_verify, "converge": cmd_converge}


# --- output -----------------------------------------------------------------

def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def emit_report(cfg, result, out_dir):
    """Write ``<command>.json`` (and ``.csv`` / grid / traces); return the paths."""
    os.makedirs(out_dir, exist_ok=True)
    rows = result["rows"]
    columns = result.get("columns") or (list(rows[0]) if rows else [])
    written = []
    doc = {"schema_version": SCHEMA_VERSION, "command": cfg.command,
           "config": cfg.echo(), "summary": result.get("summary", {}), "rows": rows}
    path = os.path.join(out_dir, f"{cfg.command}.json")
    with open(path, "w") as fh:
        fh.write(json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n")
    written.append(path)
    if cfg.format == "csv":
        path = os.path.join(out_dir, f"{cfg.command}.csv")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for row in rows:
                w.writerow([_cell(row.get(c)) for c in columns])
        written.append(path)
    if "grid" in result:
        path = os.path.join(out_dir, "value.grid")
        write_grid_dump(result["grid"], path)
        written.append(path)
    if "traces" in result:
        path = os.path.join(out_dir, "traces.txt")
        with open(path, "w") as fh:
            fh.write("\n".join(result["traces"]) + "\n")
        written.append(path)
    return written


def _error_report(out_dir, command, exc):
    doc = {"schema_version": SCHEMA_VERSION, "command": command,
           "error": type(exc).__name__, "message": str(exc)}
    for attr in ("iterations", "residual"):
        if getattr(exc, attr, None) is not None:
            doc[attr] = getattr(exc, attr)
    try:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "error.json"), "w") as fh:
            fh.write(json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n")
    except OSError:
        pass


def run(cfg):
    """Execute a validated config; returns ``(exit_code, written_paths)``."""
    try:
        result = HANDLERS[cfg.command](cfg)
        return 0, emit_report(cfg, result, cfg.out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1, []
    except (NonConvergence, StepLimitExceeded, DegenerateGradient, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        _error_report(cfg.out, cfg.command, exc)
        return 2, []
    except (TugWarError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1, []


def load_config_file(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("--config", str(exc)) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("--config", f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def build_parser():
    ap = argparse.ArgumentParser(prog="tugwar", description="Tug-of-war with noise and "
                                 "running payoff: solver, simulator and regularity harness.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="JSON file with configuration keys")
    ap.add_argument("--seed", type=int, help="master seed (overrides the config)")
    ap.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                    help="worker threads for game simulation (results do not depend on it)")
    ap.add_argument("--out", default=".", help="output directory")
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    ap.add_argument("--dump-traces", action="store_true",
                    help="write per-step traces of the first games (simulate)")
    ap.add_argument("--timing", action="store_true",
                    help="record wall-clock runtimes (makes outputs non-reproducible)")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        mapping = load_config_file(args.config) if args.config else {}
        if args.seed is not None and isinstance(mapping, dict):
            mapping["seed"] = args.seed
        cfg = build_config(args.command, mapping)
        if args.threads < 1:
            raise ConfigError("--threads", "must be at least 1")
    except (ConfigError, TugWarError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    cfg.threads, cfg.out, cfg.format = args.threads, args.out, args.format
    cfg.dump_traces, cfg.timing = args.dump_traces, args.timing
    code, paths = run(cfg)
    for p in paths:
        print(p)
    return code


if __name__ == "__main__":
    sys.exit(main())
