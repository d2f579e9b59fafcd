"""Dispatch configurations to solvers, run sweeps and compare records."""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .diagnostics import EntropyMonitor, LEPMonitor, entropy_change
from .errors import InvalidArgument, LayeredGasError, SolverAbort
from .fv import SolverConfig, solve_euler, solve_psystem
from .records import FieldState, RunRecord, config_hash, write_table_csv
from .scenarios import (ScenarioConfig, euler_initial_state, homog_initial_state, psystem_stiffness,
                        spectral_initial_state, with_parameter)

log = logging.getLogger(__name__)


@dataclass
class RunResult:
    config: ScenarioConfig
    record: RunRecord
    monitors: dict = field(default_factory=dict)
    wall_time: float = 0.0


def _fv_config(cfg: ScenarioConfig) -> SolverConfig:
    kw = {"bc": cfg.bc}
    if cfg.cfl is not None:
        kw["cfl"] = cfg.cfl
        kw["cfl_max"] = max(cfg.cfl, SolverConfig().cfl_max)
    if "weno" in cfg.options:
        kw["weno"] = cfg.options["weno"]
    return SolverConfig(**kw)


def run(cfg: ScenarioConfig, outdir=None) -> RunResult:
    """Run one configuration, attach diagnostics series and optionally write files.

    A solver abort still writes the partial record before re-raising.
    """
    cfg.validate()
    conf = cfg.to_dict()
    conf["delta"] = cfg.options.get("delta", 1.0)
    monitors = {}
    started = time.perf_counter()
    try:
        record = _dispatch(cfg, conf, monitors)
    except SolverAbort as exc:
        if outdir is not None and exc.record is not None:
            exc.record.config = conf
            exc.record.write(outdir)
        raise
    wall = time.perf_counter() - started
    record.provenance["wall_time"] = wall
    record.provenance["seed"] = cfg.seed
    if "entropy" in monitors:
        monitors["entropy"].attach(record)
    if "lep" in monitors:
        for t, v in monitors["lep"].history:
            record.add_series("lep_max", t, v)
    if outdir is not None:
        record.write(outdir)
    return RunResult(cfg, record, monitors, wall)


def _dispatch(cfg, conf, monitors) -> RunRecord:
    eos = cfg.eos
    opts = cfg.options
    outs = cfg.output_times or (cfg.t_end,)
    if cfg.solver in ("fv_euler", "fv_psystem"):
        ic = euler_initial_state(cfg)
        if opts.get("entropy_every"):
            monitors["entropy"] = EntropyMonitor(eos, int(opts["entropy_every"]))
        if opts.get("lep"):
            monitors["lep"] = LEPMonitor(eos, margin=int(opts.get("lep_margin", 5)))
        scfg = _fv_config(cfg)
        if cfg.solver == "fv_euler":
            return solve_euler(ic, scfg, cfg.t_end, outs, eos, list(monitors.values()), conf)
        K = psystem_stiffness(ic, eos)
        return solve_psystem(ic, K, scfg, cfg.t_end, outs, eos, list(monitors.values()), conf)
    if cfg.solver == "spectral_euler":
        from .spectral import solve_euler_primitive

        ic = spectral_initial_state(cfg)
        return solve_euler_primitive(ic, cfg.t_end, cfg.cfl or 0.9, outs, eos,
                                     use_dealias=bool(opts.get("dealias", False)), config=conf,
                                     entropy_every=int(opts.get("entropy_every", 0)))
    from .spectral import solve_homogenized

    ic = homog_initial_state(cfg)
    return solve_homogenized(ic, cfg.t_end, cfg.cfl or 0.5, None, outs,
                             use_dealias=bool(opts.get("dealias", True)), config=conf)


# --------------------------------------------------------------------------
# sweeps


def _sweep_member(args):
    cfg, outdir = args
    try:
        res = run(cfg, outdir)
        return res, None
    except LayeredGasError as exc:
        return None, f"{type(exc).__name__}: {exc}"


def default_summary(result: RunResult) -> dict:
    rec = result.record
    row = {"status": rec.status, "wall_time": result.wall_time}
    try:
        ec = entropy_change(rec, result.config.eos)
        row.update(delta_s=ec.delta, relative_delta_s=ec.relative)
    except LayeredGasError:
        pass
    if "lep" in result.monitors:
        row["max_lep"] = result.monitors["lep"].max_abs
    return row


def sweep(base: ScenarioConfig, parameter: str, values, outdir=None, workers: int = 1,
          summarize=default_summary):
    """Run ``base`` for every value of ``parameter``; failures become rows with status "failed".

    Returns (results, rows); ``results`` has None for failed members.
    """
    jobs, out = [], []
    for j, v in enumerate(values):
        target = None if outdir is None else Path(outdir) / f"{parameter}_{j:02d}"
        try:
            jobs.append((with_parameter(base, parameter, v), target))
            out.append(None)
        except LayeredGasError as exc:
            out.append((None, f"{type(exc).__name__}: {exc}"))
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            done = iter(pool.map(_sweep_member, jobs))
    else:
        done = (_sweep_member(a) for a in jobs)
    out = [o if o is not None else next(done) for o in out]
    rows, results = [], []
    for v, (res, err) in zip(values, out):
        row = {parameter: v}
        if res is None:
            row.update(status="failed", message=err)
        else:
            row.update(summarize(res))
        rows.append(row)
        results.append(res)
    if outdir is not None:
        write_table_csv(Path(outdir) / "summary.csv", rows,
                        {"config_hash": config_hash(base.to_dict()), "parameter": parameter,
                         **base.eos.as_dict(), "seed": base.seed})
    return results, rows


# --------------------------------------------------------------------------
# comparison in a common frame


def mass_coordinates(state: FieldState, origin: float = 0.0) -> np.ndarray:
    """Mass coordinate of the cell centres of an Eulerian state, measured from the left end.

    ``origin`` is the mass coordinate of the left boundary.
    """
    if state.frame == "lagrangian":
        return np.asarray(state.coord)
    dm = state.rho * state.dx
    return origin + np.cumsum(dm) - 0.5 * dm


def eulerian_positions(state: FieldState, origin: float = 0.0) -> np.ndarray:
    """Eulerian position of the cell centres of a Lagrangian state."""
    if state.frame == "eulerian":
        return np.asarray(state.coord)
    dchi = state.v * state.dx
    return origin + np.cumsum(dchi) - 0.5 * dchi


def _mass_origin(record: RunRecord) -> float:
    """Mass between the left boundary and chi = 0 in the first snapshot, negated."""
    s = record.snapshots[0]
    if s.frame == "lagrangian":
        return 0.0
    dm = s.rho * s.dx
    left = s.coord < 0
    return -float(np.sum(dm[left]))


def _common_coordinate(snap, frame, origin):
    return mass_coordinates(snap, origin) if frame == "lagrangian" else eulerian_positions(snap, 0.0)


@dataclass
class Difference:
    label: str
    t: float
    l1: float
    l2: float
    linf: float
    rel_l2: float


def compare(records: dict, reference: str, frame: str = "lagrangian", p_ambient: float = 1.0,
            window: Optional[tuple] = None, outdir=None):
    """Pressure differences of every record against ``records[reference]`` at shared times.

    Fields are interpolated onto the reference grid in the chosen frame.
    ``rel_l2`` divides the L2 difference by the L2 norm of the reference
    perturbation p_ref - p_ambient.  ``window`` restricts the comparison to
    an interval of the common coordinate.
    """
    if reference not in records:
        raise InvalidArgument(f"reference {reference!r} is not among the records")
    ref = records[reference]
    ref_times = ref.times
    ref_origin = _mass_origin(ref)
    results = []
    aligned = []
    for label, rec in records.items():
        if label == reference:
            continue
        origin = _mass_origin(rec)
        for s_ref in ref.snapshots:
            try:
                s = rec.at(s_ref.t)
            except InvalidArgument:
                raise InvalidArgument(f"record {label!r} has no snapshot at t={s_ref.t}") from None
            xr = _common_coordinate(s_ref, frame, ref_origin)
            xo = _common_coordinate(s, frame, origin)
            sel = (xr >= xo[0]) & (xr <= xo[-1])
            if window is not None:
                sel &= (xr >= window[0]) & (xr <= window[1])
            if sel.sum() < 0.5 * xr.size and window is None:
                raise InvalidArgument(f"record {label!r} covers an incompatible domain")
            pr = s_ref.p[sel]
            p = np.interp(xr[sel], xo, s.p)
            d = p - pr
            h = abs(xr[1] - xr[0])
            pert = np.sqrt(np.sum((pr - p_ambient) ** 2) * h)
            l2 = float(np.sqrt(np.sum(d * d) * h))
            results.append(Difference(label, float(s_ref.t), float(np.sum(np.abs(d)) * h), l2,
                                      float(np.max(np.abs(d))), l2 / pert if pert > 0 else float("inf")))
            aligned.append((label, float(s_ref.t), xr[sel], pr, p))
    if not ref_times.size:
        raise InvalidArgument("reference record has no snapshots")
    if outdir is not None:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        header = ref.header()
        write_table_csv(outdir / "differences.csv", [d.__dict__ for d in results], header)
        for label, t, x, pr, p in aligned:
            rows = [{"coordinate": float(a), "p_reference": float(b), "p": float(c)} for a, b, c in zip(x, pr, p)]
            write_table_csv(outdir / f"aligned_{label.replace('/', '_')}_t{t:g}.csv", rows, header)
    return results
