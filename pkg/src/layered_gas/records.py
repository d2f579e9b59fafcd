"""Solution snapshots, run records and their CSV/JSON serialization."""

from __future__ import annotations

import hashlib
import json
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import InvalidArgument


@dataclass
class FieldState:
    """Fields on a uniform grid at time ``t``.

    ``frame`` is ``"eulerian"`` (coordinate chi; fields rho, u, p) or
    ``"lagrangian"`` (mass coordinate x; fields v, u, p and, for p-system
    runs, the medium stiffness K).
    """

    t: float
    coord: np.ndarray
    frame: str
    fields: dict

    def __post_init__(self):
        if self.frame not in ("eulerian", "lagrangian"):
            raise InvalidArgument(f"unknown frame {self.frame!r}")
        for name, arr in self.fields.items():
            if np.shape(arr) != np.shape(self.coord):
                raise InvalidArgument(f"field {name!r} does not match the grid")

    @property
    def dx(self) -> float:
        return float(self.coord[1] - self.coord[0])

    @property
    def p(self):
        return self.fields["p"]

    @property
    def u(self):
        return self.fields["u"]

    @property
    def rho(self):
        if "rho" in self.fields:
            return self.fields["rho"]
        if "v" in self.fields:
            return 1.0 / self.fields["v"]
        return np.full(np.shape(self.coord), np.nan)

    @property
    def v(self):
        if "v" in self.fields:
            return self.fields["v"]
        if "rho" in self.fields:
            return 1.0 / self.fields["rho"]
        return np.full(np.shape(self.coord), np.nan)

    def copy(self) -> "FieldState":
        return FieldState(self.t, self.coord.copy(), self.frame,
                          {k: np.array(a, copy=True) for k, a in self.fields.items()})


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class RunRecord:
    config: dict = field(default_factory=dict)
    snapshots: list = field(default_factory=list)
    series: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    status: str = "ok"
    message: str = ""

    def add_series(self, name: str, t: float, value: float) -> None:
        ts = self.series.setdefault(name, ([], []))
        ts[0].append(float(t))
        ts[1].append(float(value))

    def series_arrays(self, name: str):
        t, v = self.series[name]
        return np.asarray(t), np.asarray(v)

    @property
    def times(self):
        return np.array([s.t for s in self.snapshots])

    def at(self, t: float, tol: float = 1e-9) -> FieldState:
        for s in self.snapshots:
            if abs(s.t - t) <= tol * max(1.0, abs(t)):
                return s
        raise InvalidArgument(f"no snapshot at t={t}")

    @property
    def final(self) -> FieldState:
        return self.snapshots[-1]

    def header(self) -> dict:
        eos = self.config.get("eos", {})
        return {
            "config_hash": config_hash(self.config),
            "gamma": eos.get("gamma"),
            "p_star": eos.get("p_star"),
            "v_star": eos.get("v_star"),
            "delta": self.config.get("delta", 1.0),
            "seed": self.config.get("seed"),
            "scheme": self.config.get("solver"),
        }

    # -- emission ----------------------------------------------------------

    def write(self, outdir, prefix: str = "snapshot") -> list:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        written = []
        for k, snap in enumerate(self.snapshots):
            path = outdir / f"{prefix}_{k:03d}.csv"
            write_snapshot_csv(path, snap, self.header())
            written.append(path)
        if self.series:
            path = outdir / "series.csv"
            write_series_csv(path, self.series, self.header())
            written.append(path)
        manifest = {
            "header": self.header(),
            "config": self.config,
            "status": self.status,
            "message": self.message,
            "provenance": self.provenance,
            "snapshot_times": [s.t for s in self.snapshots],
            "files": [p.name for p in written],
        }
        path = outdir / "manifest.json"
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str))
        written.append(path)
        return written


def provenance() -> dict:
    import numba
    import scipy

    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": numba.__version__,
        "started": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }


def _header_lines(header: dict) -> str:
    return "".join(f"# {k}: {v}\n" for k, v in header.items())


def write_snapshot_csv(path, snap: FieldState, header: Optional[dict] = None) -> None:
    header = dict(header or {})
    header.update(t=repr(float(snap.t)), frame=snap.frame)
    cols = {"coordinate": snap.coord, "rho": snap.rho, "u": snap.u, "p": snap.p}
    arr = np.column_stack(list(cols.values()))
    with open(path, "w") as fh:
        fh.write(_header_lines(header))
        fh.write(",".join(cols) + "\n")
        np.savetxt(fh, arr, delimiter=",", fmt="%.17g")


def read_snapshot_csv(path) -> FieldState:
    meta = {}
    with open(path) as fh:
        lines = fh.readlines()
    body_start = 0
    for i, line in enumerate(lines):
        if line.startswith("#"):
            key, _, val = line[1:].partition(":")
            meta[key.strip()] = val.strip()
        else:
            body_start = i
            break
    data = np.loadtxt(lines[body_start + 1:], delimiter=",", ndmin=2)
    frame = meta.get("frame", "eulerian")
    fields = {"u": data[:, 2], "p": data[:, 3]}
    if frame == "eulerian":
        fields["rho"] = data[:, 1]
    else:
        fields["v"] = 1.0 / data[:, 1]
    return FieldState(float(meta.get("t", 0.0)), data[:, 0], frame, fields)


def write_series_csv(path, series: dict, header: Optional[dict] = None) -> None:
    with open(path, "w") as fh:
        fh.write(_header_lines(header or {}))
        fh.write("name,t,value\n")
        for name, (ts, vs) in series.items():
            for t, v in zip(ts, vs):
                fh.write(f"{name},{t:.17g},{v:.17g}\n")


def write_table_csv(path, rows: list, header: Optional[dict] = None) -> None:
    """Write a list of dicts with a common key set."""
    if not rows:
        raise InvalidArgument("no rows to write")
    keys = list(rows[0].keys())
    for r in rows[1:]:
        for k in r:
            if k not in keys:
                keys.append(k)
    with open(path, "w") as fh:
        fh.write(_header_lines(header or {}))
        fh.write(",".join(keys) + "\n")
        for r in rows:
            fh.write(",".join(_fmt(r.get(k, "")) for k in keys) + "\n")


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def read_record(outdir) -> RunRecord:
    """Load a record written by :meth:`RunRecord.write`."""
    outdir = Path(outdir)
    manifest_path = outdir / "manifest.json"
    if not manifest_path.exists():
        raise InvalidArgument(f"no manifest.json in {outdir}")
    manifest = json.loads(manifest_path.read_text())
    snaps = [read_snapshot_csv(outdir / name) for name in manifest["files"]
             if name.startswith("snapshot_") and name.endswith(".csv")]
    rec = RunRecord(config=manifest.get("config", {}), snapshots=snaps,
                    provenance=manifest.get("provenance", {}), status=manifest.get("status", "ok"),
                    message=manifest.get("message", ""))
    series = outdir / "series.csv"
    if series.exists():
        with open(series) as fh:
            for line in fh:
                if line.startswith("#") or line.startswith("name,"):
                    continue
                name, t, v = line.rstrip("\n").split(",")
                rec.add_series(name, float(t), float(v))
    return rec
