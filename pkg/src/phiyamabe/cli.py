"""Batch front-end: run, verify, rescale-check, sweep and report commands.

Configuration is a JSON file mirroring RunConfig.  Exit codes: 0 success,
1 configuration error, 2 runtime flow error, 3 verification failure,
4 partial sweep failure.
"""

import argparse
import itertools
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, asdict, replace

import numpy as np

from .checks import run_identity_suites
from .flow import (
    FlowConfig,
    FlowError,
    GapUnderflow,
    detect_convergence,
    fit_gap_rate,
    run_flow,
)
from .geometry import build_grid, build_manifold
from .rescale import (
    InsufficientSamples,
    NonmonotoneF,
    OutOfRange,
    apply_reparam,
    build_reparam,
    _interp_rows,
)
from .traceio import read_trace_csv, write_snapshots_json, write_trace_csv, write_trace_svg

__all__ = [
    "ConfigError",
    "RunConfig",
    "load_config",
    "cmd_run",
    "cmd_verify",
    "cmd_rescale_check",
    "cmd_sweep",
    "cmd_report",
    "main",
]

THREADS_ENV = "PHI_YAMABE_THREADS"


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class ManifoldSpec:
    m: int
    b: int
    scalY: float
    scalZ: float


@dataclass(frozen=True)
class GridSpec:
    N: int
    x_min: float
    x_max: float


@dataclass(frozen=True)
class FlowSpec:
    variant: str
    t_end: float
    cfl_safety: float
    tol_converge: float
    record_every: int
    tol_step: float = 0.05
    snapshot_every: int = 1


@dataclass(frozen=True)
class OutputSpec:
    csv_path: str
    json_path: str
    svg_path: str = None


@dataclass(frozen=True)
class RunConfig:
    manifold: ManifoldSpec
    grid: GridSpec
    flow: FlowSpec
    outputs: OutputSpec
    seed: int = 0

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        def section(name, spec_cls, required, optional=()):
            optional = dict(optional)
            sub = d.get(name)
            if not isinstance(sub, dict):
                raise ConfigError(f"{name}: missing or not an object")
            kwargs = {}
            for key in sub:
                if key in required:
                    typ = required[key]
                elif key in optional:
                    typ = optional[key]
                else:
                    raise ConfigError(f"{name}.{key}: unknown field")
                val = sub[key]
                if val is None and key in optional:
                    kwargs[key] = None
                    continue
                try:
                    kwargs[key] = typ(val)
                except (TypeError, ValueError):
                    raise ConfigError(
                        f"{name}.{key}: expected {typ.__name__}, got {val!r}"
                    )
            for key in required:
                if key not in kwargs:
                    raise ConfigError(f"{name}.{key}: missing")
            return spec_cls(**kwargs)

        man = section("manifold", ManifoldSpec,
                      {"m": int, "b": int, "scalY": float, "scalZ": float})
        grid = section("grid", GridSpec, {"N": int, "x_min": float, "x_max": float})
        flow = section("flow", FlowSpec,
                       {"variant": str, "t_end": float, "cfl_safety": float,
                        "tol_converge": float, "record_every": int},
                       optional={"tol_step": float, "snapshot_every": int})
        outputs = section("outputs", OutputSpec,
                          {"csv_path": str, "json_path": str},
                          optional={"svg_path": str})
        seed = d.get("seed", 0)
        if not isinstance(seed, int):
            raise ConfigError(f"seed: expected int, got {seed!r}")
        return cls(manifold=man, grid=grid, flow=flow, outputs=outputs, seed=seed)


def load_config(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: parse error at line {exc.lineno} column {exc.colno}: {exc.msg}")
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return RunConfig.from_dict(doc)


def build_objects(cfg):
    """Manifold, grid and flow settings from a RunConfig; ConfigError on bad values."""
    try:
        man = build_manifold(cfg.manifold.m, cfg.manifold.b, cfg.manifold.scalY,
                             cfg.manifold.scalZ, cfg.grid.x_max)
        grid = build_grid(man, cfg.grid.N, cfg.grid.x_min, cfg.grid.x_max)
        fc = FlowConfig(variant=cfg.flow.variant, t_end=cfg.flow.t_end,
                        cfl_safety=cfg.flow.cfl_safety, tol_step=cfg.flow.tol_step,
                        tol_converge=cfg.flow.tol_converge,
                        record_every=cfg.flow.record_every,
                        snapshot_every=cfg.flow.snapshot_every)
    except ValueError as exc:
        raise ConfigError(str(exc))
    return man, grid, fc


def _as_config(cfg):
    return cfg if isinstance(cfg, RunConfig) else load_config(cfg)


def cmd_run(config, quiet=False):
    """Integrate the configured flow; write CSV, JSON and optional SVG."""
    try:
        cfg = _as_config(config)
        man, grid, fc = build_objects(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    u0 = np.ones(grid.n)
    try:
        trace = run_flow(man, grid, fc, u0)
    except FlowError as exc:
        print(f"flow error: {exc}", file=sys.stderr)
        return 2
    state = trace.final_state()
    report = detect_convergence(man, grid, state, fc.tol_converge,
                                bracket0=(trace.s_inf[0], trace.s_sup[0]))
    try:
        write_trace_csv(trace, cfg.outputs.csv_path)
        write_snapshots_json(trace, cfg.outputs.json_path, convergence={
            "converged": report.converged,
            "s_star": report.s_star,
            "s_star_negative": report.s_star_negative,
            "s_star_in_initial_bracket": report.s_star_in_initial_bracket,
            "residual_sup": report.residual_sup,
            "gap": report.gap,
            "dtu_norm": report.dtu_norm,
            "tol": report.tol,
        })
        if cfg.outputs.svg_path:
            write_trace_svg(trace, cfg.outputs.svg_path)
    except OSError as exc:
        print(f"config error: cannot write outputs: {exc}", file=sys.stderr)
        return 1
    if not quiet:
        verdict = "converged" if report.converged else "not converged"
        print(f"{verdict}, S* = {report.s_star:.6f}")
    return 0


def cmd_verify(config, laplacian=None):
    """Run the identity suites; exit 0 only if all pass."""
    try:
        cfg = _as_config(config)
        man, grid, _ = build_objects(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    results = run_identity_suites(man, grid, seed=cfg.seed, laplacian=laplacian)
    width = max(len(r.name) for r in results)
    for r in results:
        mark = "pass" if r.passed else "FAIL"
        print(f"{r.name:<{width}}  {mark}  {r.detail}")
    return 0 if all(r.passed for r in results) else 3


def cmd_rescale_check(config, quiet=False):
    """Compare the reparametrized unnormalized flow with a direct normalized run.

    Writes the per-tau sup-node difference series next to the configured CSV
    path; exit 0 when its maximum stays below flow.tol_converge.
    """
    try:
        cfg = _as_config(config)
        man, grid, fc = build_objects(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    u0 = np.ones(grid.n)
    try:
        fc_unnorm = replace(fc, variant="unnormalized", snapshot_every=1)
        trace = run_flow(man, grid, fc_unnorm, u0)
        rmap = build_reparam(trace)
        ntrace = apply_reparam(trace, rmap)
        fc_direct = replace(fc, variant="cyf_plus", t_end=rmap.tau_max,
                            snapshot_every=1)
        direct = run_flow(man, grid, fc_direct, u0)
        if direct.snap_t.size < 3 or ntrace.snap_t.size < 3:
            raise InsufficientSamples("not enough snapshots for the comparison")
        taus = ntrace.snap_t
        keep = taus <= direct.snap_t[-1]
        taus = taus[keep]
        u_direct = _interp_rows(direct.snap_t, direct.snap_u, taus)
        diff = np.abs(ntrace.snap_u[keep] - u_direct).max(axis=1)
    except (FlowError, NonmonotoneF, OutOfRange, InsufficientSamples) as exc:
        print(f"rescale check error: {exc}", file=sys.stderr)
        return 2
    base, ext = os.path.splitext(cfg.outputs.csv_path)
    out_path = base + "_rescale" + (ext or ".csv")
    try:
        write_trace_csv(ntrace, base + "_tau" + (ext or ".csv"))
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("tau,residual\n")
            for tv, rv in zip(taus, diff):
                fh.write("%.17g,%.17g\n" % (tv, rv))
    except OSError as exc:
        print(f"config error: cannot write outputs: {exc}", file=sys.stderr)
        return 1
    worst = float(diff.max())
    ok = worst <= fc.tol_converge
    if not quiet:
        print(f"two-route residual max {worst:.3e} "
              f"({'<=' if ok else '>'} {fc.tol_converge:g}), series in {out_path}")
    return 0 if ok else 2


def _set_dotted(doc, path, value):
    keys = path.split(".")
    node = doc
    for key in keys[:-1]:
        if not isinstance(node.get(key), dict):
            raise ConfigError(f"sweep parameter {path}: no section {key}")
        node = node[key]
    if keys[-1] not in node:
        raise ConfigError(f"sweep parameter {path}: unknown field")
    node[keys[-1]] = value


def _suffix_path(path, idx):
    base, ext = os.path.splitext(path)
    return f"{base}__{idx:03d}{ext}"


def cmd_sweep(config_path, sweep_path, quiet=False):
    """Run the cartesian product of parameter overrides concurrently."""
    try:
        cfg = _as_config(config_path)
        base_doc = cfg.to_dict()
        with open(sweep_path, "r", encoding="utf-8") as fh:
            sweep = json.load(fh)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: cannot read sweep spec: {exc}", file=sys.stderr)
        return 1
    params = sweep.get("parameters") if isinstance(sweep, dict) else None
    if not params or not isinstance(params, dict):
        print("config error: sweep spec has no non-empty 'parameters' object",
              file=sys.stderr)
        return 1
    names = sorted(params)
    grids = [params[k] if isinstance(params[k], list) else [params[k]] for k in names]
    combos = list(itertools.product(*grids))

    def one(idx_combo):
        idx, combo = idx_combo
        doc = json.loads(json.dumps(base_doc))
        row = {"index": idx, "params": dict(zip(names, combo))}
        try:
            for name, value in zip(names, combo):
                _set_dotted(doc, name, value)
            for key in ("csv_path", "json_path", "svg_path"):
                if doc["outputs"].get(key):
                    doc["outputs"][key] = _suffix_path(doc["outputs"][key], idx)
            run_cfg = RunConfig.from_dict(doc)
            man, grid, fc = build_objects(run_cfg)
            trace = run_flow(man, grid, fc, np.ones(grid.n))
            rep = detect_convergence(man, grid, trace.final_state(),
                                     fc.tol_converge,
                                     bracket0=(trace.s_inf[0], trace.s_sup[0]))
            write_trace_csv(trace, run_cfg.outputs.csv_path)
            write_snapshots_json(trace, run_cfg.outputs.json_path)
            row.update(status="ok", converged=rep.converged, s_star=rep.s_star,
                       csv_path=run_cfg.outputs.csv_path)
        except (ConfigError, ValueError) as exc:
            row.update(status="config_error", error=str(exc))
        except FlowError as exc:
            row.update(status="flow_error", error=str(exc))
        return row

    workers = os.environ.get(THREADS_ENV)
    workers = int(workers) if workers else min(8, os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        rows = list(pool.map(one, enumerate(combos)))
    rows.sort(key=lambda r: r["index"])

    summary_path = sweep.get("summary_path")
    if not summary_path:
        summary_path = os.path.join(
            os.path.dirname(os.path.abspath(cfg.outputs.json_path)),
            "sweep_summary.json",
        )
    with open(summary_path, "w", encoding="utf-8") as fh:
        json.dump({"parameters": params, "runs": rows}, fh, indent=1)
        fh.write("\n")
    n_bad = sum(1 for r in rows if r["status"] != "ok")
    if not quiet:
        print(f"{len(rows)} runs, {n_bad} failed, summary in {summary_path}")
    return 0 if n_bad == 0 else 4


def cmd_report(csv_path):
    """Summarize a trace CSV: monotonicity, final gap, fitted decay rate."""
    try:
        tr = read_trace_csv(csv_path)
    except (OSError, ValueError) as exc:
        print(f"cannot read trace: {exc}", file=sys.stderr)
        return 1
    n = tr.t.size
    print(f"records: {n}, {tr.time_label} in [{tr.t[0]:.6g}, {tr.t[-1]:.6g}]")
    if n >= 2:
        sup_mono = bool(np.all(np.diff(tr.s_sup) <= 1e-9))
        inf_mono = bool(np.all(np.diff(tr.s_inf) >= -1e-9))
        print(f"S_sup non-increasing: {sup_mono};  S_inf non-decreasing: {inf_mono}")
    print(f"final gap: {tr.gap[-1]:.6e},  final dtu_norm: {tr.dtu_norm[-1]:.6e}")
    t_lo = tr.t[0] + 0.5 * (tr.t[-1] - tr.t[0])
    try:
        # fit over the later half; needs 5 records above the gap floor
        class _T:
            t = tr.t
            gap = tr.gap
        C, rate = fit_gap_rate(_T, t_lo, tr.t[-1])
        print(f"gap fit over [{t_lo:.6g}, {tr.t[-1]:.6g}]: "
              f"C = {C:.6g}, rate = {rate:.6g}")
    except (ValueError, GapUnderflow) as exc:
        print(f"gap fit skipped: {exc}")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="phiyamabe",
        description="Curvature-normalized Yamabe flow simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="integrate a configured flow")
    p_run.add_argument("config")
    p_verify = sub.add_parser("verify", help="run the identity suites")
    p_verify.add_argument("config")
    p_rc = sub.add_parser("rescale-check", help="two-route rescaling comparison")
    p_rc.add_argument("config")
    p_sweep = sub.add_parser("sweep", help="run a parameter sweep")
    p_sweep.add_argument("config")
    p_sweep.add_argument("sweep_spec")
    p_rep = sub.add_parser("report", help="summarize a trace CSV")
    p_rep.add_argument("trace_csv")
    args = parser.parse_args(argv)
    if args.command == "run":
        return cmd_run(args.config)
    if args.command == "verify":
        return cmd_verify(args.config)
    if args.command == "rescale-check":
        return cmd_rescale_check(args.config)
    if args.command == "sweep":
        return cmd_sweep(args.config, args.sweep_spec)
    return cmd_report(args.trace_csv)


if __name__ == "__main__":
    sys.exit(main())
