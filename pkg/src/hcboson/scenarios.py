"""The two expansion scenarios, parameter sweeps, reports and checkpoints."""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import analysis, config as cfgmod, dmrg, fock, freefermion as ff, mps
from .engines import ExactEngine, FreeFermionEngine, MpsEngine
from .errors import ConvergenceError, HcbError, IntegrityError
from .model import hamiltonian
from .observables import ObservableSeries, melt_time, write_csv

log = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "hcboson-checkpoint/1"
REPORT_FORMAT = "hcboson-report/1"
SWEEP_FORMAT = "hcboson-sweep/1"
NUMBER_TOL = 1e-8
DENSITY_TOL = 1e-9
WAVEFRONT_SITES = 6
WAVEFRONT_LEVEL = 1e-4


@dataclass
class RunResult:
    config: cfgmod.ScenarioConfig
    engine: str
    series: ObservableSeries
    report: dict = field(default_factory=dict)
    complete: bool = True
    csv_path: str | None = None
    report_path: str | None = None
    checkpoint_path: str | None = None


# --- setup ------------------------------------------------------------------


def _box_occupations(cfg) -> np.ndarray:
    i1, i2 = cfg.resolved_box
    occ = np.zeros(cfg.L, dtype=int)
    occ[i1 - 1 : i2] = 1
    return occ


def build_engine(cfg: cfgmod.ScenarioConfig):
    """Initial state and engine for a single-run config; returns (engine, extras)."""
    name = cfg.resolve_engine()
    params = cfg.params
    interval = cfg.record_every
    schedule = mps.TebdSchedule(dt=cfg.dt, order=cfg.order)
    extras = {}
    if cfg.kind == "mi-expansion":
        occ = _box_occupations(cfg)
        if name == "free-fermion":
            return FreeFermionEngine(params, ff.from_occupations(occ), interval), extras
        if name == "exact":
            basis = fock.enumerate_basis(cfg.L, cfg.N, cfg.exact_cap)
            return ExactEngine(params, fock.box_state(basis, *cfg.resolved_box), interval), extras
        state = mps.from_occupations(occ, chi_max=cfg.chi_max, svd_eps=cfg.svd_eps)
        return MpsEngine(params, state, schedule, cfg.steps_per_record, cfg.alarm_threshold), extras

    site = cfg.L // 2
    if name == "exact":
        basis = fock.enumerate_basis(cfg.L, cfg.N - 2, cfg.exact_cap)
        gs = fock.ground_state(hamiltonian(params, basis), basis)
        target = fock.enumerate_basis(cfg.L, cfg.N, cfg.exact_cap)
        state, weight = fock.apply_pair_creation(gs.state, site, target)
        extras.update(gs_energy=gs.energy, gs_degenerate=gs.degenerate, pair_weight=weight)
        return ExactEngine(params, state, interval), extras
    if name == "free-fermion":
        raise cfgmod.ConfigError("gs-quench cannot run on the free-fermion engine")
    res = dmrg.ground_state_search(
        params,
        cfg.N - 2,
        chi_max=cfg.chi_max,
        tol=cfg.dmrg_tol,
        max_sweeps=cfg.dmrg_max_sweeps,
    )
    state = res.state
    state.svd_eps = cfg.svd_eps
    state, weight = mps.apply_pair_creation_mps(state, site)
    extras.update(gs_energy=res.energy, dmrg_sweeps=len(res.history), pair_weight=weight)
    return MpsEngine(params, state, schedule, cfg.steps_per_record, cfg.alarm_threshold), extras


# --- integrity and reports ---------------------------------------------------


def _check_snapshot(cfg, snap, time):
    dens = np.asarray(snap.density)
    if dens.min() < -DENSITY_TOL or dens.max() > 1 + DENSITY_TOL:
        raise IntegrityError(f"density outside [0, 1] at t={time:g}: range [{dens.min():.3e}, {dens.max():.3e}]")
    drift = abs(float(dens.sum()) - cfg.N)
    allowed = NUMBER_TOL + 10 * snap.discarded_weight
    if drift > allowed:
        raise IntegrityError(f"particle number drift {drift:.3e} at t={time:g} exceeds {allowed:.3e}")


def wavefront_time(series: ObservableSeries, sites: int = WAVEFRONT_SITES, level: float = WAVEFRONT_LEVEL):
    """First recorded time with density above ``level`` within ``sites`` of an
    end, ignoring sites that were already occupied at t = 0."""
    if not series.density:
        return None
    pos = np.arange(series.L)
    watch = ((pos < sites) | (pos >= series.L - sites)) & (np.asarray(series.density[0]) <= level)
    if not watch.any():
        return None
    for t, dens in zip(series.times, series.density):
        if np.asarray(dens)[watch].max() > level:
            return t
    return None


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (tuple, list)):
        return ",".join(_fmt(x) for x in v)
    return str(v)


def write_report(report: dict, path, config_lines=()):
    with open(path, "w") as fh:
        for line in config_lines:
            fh.write(f"# {line}\n")
        for k, v in report.items():
            fh.write(f"{k} = {_fmt(v)}\n")


def read_report(path) -> dict:
    out = {}
    with open(path) as fh:
        for line in fh:
            if line.startswith("#") or "=" not in line:
                continue
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def fit_report(series: ObservableSeries, window) -> dict:
    """Linear-in-t and linear-in-sqrt(t) fits, reported side by side."""
    rep = {}
    try:
        lin = analysis.fit_velocity(series, window)
        sq = analysis.fit_sqrt_time(series, window)
    except analysis.FitError as exc:
        rep.update(velocity=None, fit_error=str(exc))
        return rep
    rep.update(
        velocity=lin.slope,
        velocity_intercept=lin.intercept,
        velocity_r_squared=lin.r_squared,
        fit_window=lin.window,
        fit_points=lin.n_points,
        sqrt_slope=sq.slope,
        sqrt_r_squared=sq.r_squared,
    )
    return rep


def _run_report(cfg, engine, series, extras, complete) -> dict:
    rep = {
        "format": REPORT_FORMAT,
        "scenario": cfg.kind,
        "engine": engine.name,
        "L": cfg.L,
        "N": cfg.N,
        "W": cfg.W,
        "status": "complete" if complete else "partial",
        "t_last": series.times[-1],
        "records": len(series),
    }
    rep.update(fit_report(series, cfg.fit_window))
    rep["melt_threshold"] = cfg.melt_threshold
    rep["melt_time"] = melt_time(series, cfg.melt_threshold)
    rep["max_number_drift"] = float(np.max(np.abs(np.array(series.total_n) - cfg.N)))
    if cfg.kind == "mi-expansion":
        wt = wavefront_time(series)
        rep["wavefront_time"] = wt
        rep["wavefront_warning"] = wt is not None
    if isinstance(engine, MpsEngine):
        rep.update(
            discarded_weight=engine.state.discarded_weight,
            max_step_discarded=engine.max_step_discarded,
            alarm_threshold=engine.alarm_threshold,
            alarm_steps=engine.alarm_steps,
            max_bond_dim=max(engine.state.bond_dims),
            chi_max=engine.state.chi_max,
            svd_eps=engine.state.svd_eps,
            chi_cap_reached=engine.cap_reached,
            max_entropy=float(np.max(series.entropy_max)),
        )
    rep.update(extras)
    return rep


def _header_lines(cfg, engine_name, extras) -> list:
    lines = [f"resolved_engine = {engine_name}"]
    lines += [f"{k} = {_fmt(v)}" for k, v in extras.items()]
    return lines + cfgmod.dump_lines(cfg)


# --- checkpoints -------------------------------------------------------------


def save_checkpoint(path, cfg, engine, series, extras, records_done):
    arrays = {
        "format": np.array(CHECKPOINT_FORMAT),
        "config": np.array(cfgmod.dumps(cfg)),
        "engine": np.array(engine.name),
        "records_done": np.array(records_done),
        "series_table": series.table(),
        "series_r0_sq": np.array(series.r0_sq),
        "extras_keys": np.array(list(extras), dtype=str),
        "extras_values": np.array([repr(v) for v in extras.values()], dtype=str),
    }
    arrays.update(engine.to_arrays())
    tmp = str(path) + ".tmp.npz"
    np.savez(tmp, **arrays)
    os.replace(tmp, path)


def _literal(text: str):
    if text in ("True", "False"):
        return text == "True"
    try:
        return int(text)
    except ValueError:
        return float(text)


def load_checkpoint(path):
    """Returns (config, engine, series, extras, records_done)."""
    try:
        data = np.load(path, allow_pickle=False)
    except (OSError, ValueError) as exc:
        raise IntegrityError(f"cannot read checkpoint {path}: {exc}") from None
    with data:
        arrays = {k: data[k] for k in data.files}
    fmt = str(arrays.get("format", ""))
    if fmt != CHECKPOINT_FORMAT:
        raise IntegrityError(f"checkpoint format {fmt!r}, expected {CHECKPOINT_FORMAT!r}")
    cfg = cfgmod.loads(str(arrays["config"]))
    name = str(arrays["engine"])
    params = cfg.params
    if name == "free-fermion":
        engine = FreeFermionEngine.from_arrays(params, cfg.record_every, arrays)
    elif name == "exact":
        engine = ExactEngine.from_arrays(params, cfg.record_every, arrays)
    elif name == "mps":
        schedule = mps.TebdSchedule(dt=cfg.dt, order=cfg.order)
        engine = MpsEngine.from_arrays(params, schedule, cfg.steps_per_record, cfg.alarm_threshold, arrays)
    else:
        raise IntegrityError(f"unknown engine {name!r} in checkpoint")
    table = arrays["series_table"]
    series = ObservableSeries(L=cfg.L, N=cfg.N, meta=_meta(cfg, name))
    ncol = 6
    series.times = table[:, 0].tolist()
    series.radius = table[:, 1].tolist()
    series.half_current = table[:, 2].tolist()
    series.entropy_max = table[:, 3].tolist()
    series.total_n = table[:, 4].tolist()
    series.discarded_weight = table[:, 5].tolist()
    series.density = [row.copy() for row in table[:, ncol:]]
    series.r0_sq = float(arrays["series_r0_sq"])
    extras = {k: _literal(v) for k, v in zip(arrays["extras_keys"].tolist(), arrays["extras_values"].tolist())}
    return cfg, engine, series, extras, int(arrays["records_done"])


# --- running -------------------------------------------------------------------


def _meta(cfg, engine_name) -> dict:
    return {"params": cfg.params, "N": cfg.N, "engine": engine_name, "schedule": (cfg.dt, cfg.order)}


def _paths(cfg):
    out = cfgmod.output_dir(cfg)
    os.makedirs(out, exist_ok=True)
    return (
        os.path.join(out, "series.csv"),
        os.path.join(out, "report.txt"),
        os.path.join(out, "checkpoint.npz"),
    )


def _advance(cfg, engine, series, extras, done, stop_at=None) -> RunResult:
    csv_path, report_path, ckpt_path = _paths(cfg)
    complete = True
    try:
        for k in range(done + 1, cfg.n_records + 1):
            engine.step()
            t = k * cfg.record_every
            snap = engine.snapshot()
            _check_snapshot(cfg, snap, t)
            series.record(t, snap)
            done = k
            if cfg.checkpoint_every and k % cfg.checkpoint_every == 0:
                save_checkpoint(ckpt_path, cfg, engine, series, extras, done)
            if stop_at is not None and t >= stop_at - 1e-9 and k < cfg.n_records:
                complete = False
                break
    except IntegrityError as exc:
        rep = _run_report(cfg, engine, series, extras, False)
        rep.update(status="integrity-failure", error=str(exc))
        write_csv(series, csv_path, _header_lines(cfg, engine.name, extras))
        write_report(rep, report_path, cfgmod.dump_lines(cfg))
        raise
    save_checkpoint(ckpt_path, cfg, engine, series, extras, done)
    write_csv(series, csv_path, _header_lines(cfg, engine.name, extras))
    rep = _run_report(cfg, engine, series, extras, complete)
    write_report(rep, report_path, cfgmod.dump_lines(cfg))
    if rep.get("wavefront_warning") and complete:
        log.warning("density reached within %d sites of a boundary at t=%g", WAVEFRONT_SITES, rep["wavefront_time"])
    if rep.get("alarm_steps"):
        log.warning("%d steps discarded more than %g weight", rep["alarm_steps"], rep["alarm_threshold"])
    return RunResult(cfg, engine.name, series, rep, complete, csv_path, report_path, ckpt_path)


def run_scenario(cfg: cfgmod.ScenarioConfig, stop_at: float | None = None) -> RunResult:
    """Run one mi-expansion or gs-quench config to ``t_max`` (or ``stop_at``)."""
    if cfg.scenario == "sweep":
        raise cfgmod.ConfigError("use run_sweep for sweep configs")
    engine, extras = build_engine(cfg)
    series = ObservableSeries(L=cfg.L, N=cfg.N, meta=_meta(cfg, engine.name))
    snap = engine.snapshot()
    _check_snapshot(cfg, snap, 0.0)
    series.record(0.0, snap)
    return _advance(cfg, engine, series, extras, 0, stop_at)


def run_mi_expansion(cfg) -> RunResult:
    if cfg.kind != "mi-expansion" or cfg.scenario == "sweep":
        raise cfgmod.ConfigError("config is not an mi-expansion run")
    return run_scenario(cfg)


def run_gs_quench(cfg) -> RunResult:
    if cfg.kind != "gs-quench" or cfg.scenario == "sweep":
        raise cfgmod.ConfigError("config is not a gs-quench run")
    return run_scenario(cfg)


def resume(path, stop_at: float | None = None) -> RunResult:
    cfg, engine, series, extras, done = load_checkpoint(path)
    return _advance(cfg, engine, series, extras, done, stop_at)


# --- sweeps --------------------------------------------------------------------


@dataclass
class SweepResult:
    points: list
    report: dict
    partial: bool
    failures: set = field(default_factory=set)
    report_path: str | None = None
    table_path: str | None = None


def _run_point(cfg) -> dict:
    row = {"L": cfg.L, "N": cfg.N, "W": cfg.W, "status": "ok", "error": ""}
    try:
        res = run_scenario(cfg)
    except IntegrityError as exc:
        row.update(status="integrity-failure", error=str(exc))
        return row
    except ConvergenceError as exc:
        row.update(status="non-convergence", error=str(exc))
        return row
    except HcbError as exc:
        row.update(status="error", error=str(exc))
        return row
    row["engine"] = res.engine
    row["velocity"] = res.report.get("velocity")
    row["r_squared"] = res.report.get("velocity_r_squared")
    row["melt_time"] = res.report.get("melt_time")
    if row["velocity"] is None:
        row.update(status="fit-failure", error=res.report.get("fit_error", ""))
    return row


def _group(rows, other):
    groups = {}
    for r in rows:
        groups.setdefault(tuple(r[o] for o in other), []).append(r)
    return groups


def aggregate(cfg, rows) -> dict:
    """Finite-size extrapolations and peak locations over completed points."""
    axes = [a[len("sweep_"):] for a in cfg.sweep_axes]
    ok = [r for r in rows if r["status"] == "ok"]
    rep = {}
    size_axes = [a for a in axes if a in ("N", "L")]
    if cfg.base == "gs-quench" and set(size_axes) == {"N", "L"}:
        size_axes = ["L"]
    if "W" in axes:
        other = [a for a in axes if a != "W"]
        peaks = []
        for key, grp in sorted(_group(ok, other).items()):
            tag = "".join(f"_{a}{v:g}" for a, v in zip(other, key))
            try:
                w, v = analysis.find_velocity_peak([(r["W"], r["velocity"]) for r in grp])
            except analysis.FitError as exc:
                rep[f"peak{tag}"] = None
                rep[f"peak_error{tag}"] = str(exc)
                continue
            rep[f"peak_W{tag}"] = w
            rep[f"peak_V{tag}"] = v
            if other:
                peaks.append((key[0], w))
        if other and other[0] in ("L", "N"):
            try:
                ex = analysis.extrapolate_inverse_size(peaks)
                rep.update(peak_limit=ex.limit_value, peak_coefficient=ex.coefficient, peak_limit_stderr=ex.limit_stderr)
            except analysis.FitError as exc:
                rep["peak_extrapolation_error"] = str(exc)
    else:
        for size in size_axes:
            other = [a for a in axes if a != size] + (["W"] if "W" not in axes else [])
            for key, grp in sorted(_group(ok, other).items()):
                tag = "".join(f"_{a}{v:g}" for a, v in zip(other, key))
                try:
                    ex = analysis.extrapolate_inverse_size([(r[size], r["velocity"]) for r in grp])
                except analysis.FitError as exc:
                    rep[f"extrapolation_error{tag}"] = str(exc)
                    continue
                rep[f"limit_velocity{tag}"] = ex.limit_value
                rep[f"limit_stderr{tag}"] = ex.limit_stderr
                rep[f"coefficient{tag}"] = ex.coefficient
    return rep


def run_sweep(cfg: cfgmod.ScenarioConfig) -> SweepResult:
    if cfg.scenario != "sweep":
        raise cfgmod.ConfigError("run_sweep needs scenario = sweep")
    points = cfg.points()
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(_run_point, points))
    else:
        rows = [_run_point(p) for p in points]
    failures = {r["status"] for r in rows} - {"ok"}
    partial = bool(failures)
    rep = {
        "format": SWEEP_FORMAT,
        "base": cfg.base,
        "axes": [a[len("sweep_"):] for a in cfg.sweep_axes],
        "points": len(rows),
        "status": "partial" if partial else "complete",
    }
    rep.update(aggregate(cfg, rows))
    out = cfgmod.output_dir(cfg)
    os.makedirs(out, exist_ok=True)
    table_path = os.path.join(out, "sweep.csv")
    with open(table_path, "w") as fh:
        for line in cfgmod.dump_lines(cfg):
            fh.write(f"# {line}\n")
        fh.write("L,N,W,velocity,r_squared,melt_time,status\n")
        for r in rows:
            vals = [r["L"], r["N"], r["W"], r.get("velocity"), r.get("r_squared"), r.get("melt_time"), r["status"]]
            fh.write(",".join(_fmt(v) for v in vals) + "\n")
    report_path = os.path.join(out, "sweep_report.txt")
    write_report(rep, report_path, cfgmod.dump_lines(cfg))
    return SweepResult(rows, rep, partial, failures, report_path, table_path)


def velocity_series(rows, axis):
    """(axis value, velocity) pairs of the successful points, sorted."""
    return sorted((r[axis], r["velocity"]) for r in rows if r["status"] == "ok")
