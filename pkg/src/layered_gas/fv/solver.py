"""Finite-volume time integration: WENO5 + SSPRK(10,4).

Three systems share the driver:

* Eulerian Euler in conserved variables (rho, rho u, E), HLLC flux;
* Lagrangian Euler in (v, u, E) on the mass coordinate, acoustic flux;
* the variable-coefficient p-system in (v, u) with p = p*(v*/(K v))^gamma.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from ..eos import GasEOS
from ..errors import InvalidArgument, SolverAbort
from ..records import FieldState, RunRecord, provenance
from . import kernels as kn

log = logging.getLogger(__name__)

_BCS = {
    "periodic": (kn.BC_PERIODIC, kn.BC_PERIODIC),
    "wall_outflow": (kn.BC_WALL, kn.BC_OUTFLOW),
    "outflow": (kn.BC_OUTFLOW, kn.BC_OUTFLOW),
    "wall": (kn.BC_WALL, kn.BC_WALL),
}
_WENO = {"js": kn.WENO_JS, "z": kn.WENO_Z}


@dataclass(frozen=True)
class Grid1D:
    lo: float
    hi: float
    n: int
    coordinate_kind: str = "eulerian_chi"

    def __post_init__(self):
        if not self.hi > self.lo:
            raise InvalidArgument("grid needs hi > lo")
        if self.n < 2 * kn.NG:
            raise InvalidArgument(f"grid needs at least {2 * kn.NG} cells")
        if self.coordinate_kind not in ("eulerian_chi", "lagrangian_x"):
            raise InvalidArgument("coordinate_kind must be eulerian_chi or lagrangian_x")

    @classmethod
    def from_spacing(cls, lo, hi, dx, coordinate_kind="eulerian_chi"):
        return cls(lo, hi, int(round((hi - lo) / dx)), coordinate_kind)

    @property
    def dx(self) -> float:
        return (self.hi - self.lo) / self.n

    @property
    def centers(self) -> np.ndarray:
        return self.lo + (np.arange(self.n) + 0.5) * self.dx

    @property
    def edges(self) -> np.ndarray:
        return self.lo + np.arange(self.n + 1) * self.dx


@dataclass(frozen=True)
class SolverConfig:
    """Courant number, boundary conditions and reconstruction options.

    The default Courant number 2.4 suits the ten-stage integrator, whose
    SSP coefficient is 6; ``cfl_max`` is the admissible post-step value.
    """

    cfl: float = 2.4
    cfl_max: float = 2.5
    order: int = 5
    bc: str = "periodic"
    weno: str = "z"
    entropy_every: int = 1

    def __post_init__(self):
        if not 0 < self.cfl <= self.cfl_max:
            raise InvalidArgument("need 0 < cfl <= cfl_max")
        if self.order != 5:
            raise InvalidArgument("only fifth-order reconstruction is implemented")
        if self.bc not in _BCS:
            raise InvalidArgument(f"unknown boundary condition {self.bc!r}")
        if self.weno not in _WENO:
            raise InvalidArgument(f"unknown WENO variant {self.weno!r}")

    def as_dict(self):
        return {"cfl": self.cfl, "cfl_max": self.cfl_max, "order": self.order,
                "bc": self.bc, "weno": self.weno}


# --------------------------------------------------------------------------
# system adapters


class _System:
    ncomp = 3

    def __init__(self, eos: GasEOS, cfg: SolverConfig, dx: float):
        self.eos = eos
        self.gamma = eos.gamma
        self.dx = dx
        self.bcl, self.bcr = _BCS[cfg.bc]
        self.variant = _WENO[cfg.weno]
        self.fallbacks = 0


class _Eulerian(_System):
    frame = "eulerian"

    def to_conserved(self, st: FieldState):
        rho, u, p = st.rho, st.u, st.p
        return np.stack([rho, rho * u, self.eos.energy_density(rho, u, p)])

    def to_state(self, t, coord, q):
        rho = q[0].copy()
        u = q[1] / rho
        p = self.eos.pressure_from_conserved(rho, q[1], q[2])
        return FieldState(t, coord, "eulerian", {"rho": rho, "u": u, "p": p})

    def rhs(self, qp, dq):
        return kn.rhs_eulerian(qp[0], qp[1], qp[2], self.gamma, self.dx, self.bcl, self.bcr,
                               self.variant, dq[0], dq[1], dq[2])

    def max_speed(self, q):
        return kn.max_speed_eulerian(q[0], q[1], q[2], self.gamma)


class _Lagrangian(_System):
    frame = "lagrangian"

    def to_conserved(self, st: FieldState):
        v, u, p = st.v, st.u, st.p
        return np.stack([v, u, p * v / (self.gamma - 1.0) + 0.5 * u * u])

    def to_state(self, t, coord, q):
        v = q[0].copy()
        u = q[1].copy()
        p = (self.gamma - 1.0) * (q[2] - 0.5 * u * u) / v
        return FieldState(t, coord, "lagrangian", {"v": v, "u": u, "p": p})

    def rhs(self, qp, dq):
        return kn.rhs_lagrangian(qp[0], qp[1], qp[2], self.gamma, self.dx, self.bcl, self.bcr,
                                 self.variant, dq[0], dq[1], dq[2])

    def max_speed(self, q):
        return kn.max_speed_lagrangian(q[0], q[1], q[2], self.gamma)


class _PSystem(_System):
    frame = "lagrangian"
    ncomp = 2

    def __init__(self, eos, cfg, dx, K):
        super().__init__(eos, cfg, dx)
        self.K = np.asarray(K, dtype=float)
        self.Kpad = np.empty(self.K.size + 2 * kn.NG)
        self.Kpad[kn.NG:-kn.NG] = self.K

    def pressure(self, v, K=None):
        K = self.K if K is None else K
        return self.eos.p_star * (self.eos.v_star / (K * v)) ** self.gamma

    def to_conserved(self, st: FieldState):
        p, u = st.p, st.u
        v = self.eos.v_star / self.K * (self.eos.p_star / p) ** (1.0 / self.gamma)
        return np.stack([v, u])

    def to_state(self, t, coord, q):
        v = q[0].copy()
        return FieldState(t, coord, "lagrangian",
                          {"v": v, "u": q[1].copy(), "p": self.pressure(v), "K": self.K})

    def rhs(self, qp, dq):
        return kn.rhs_psystem(qp[0], qp[1], self.Kpad, self.gamma, self.eos.p_star, self.eos.v_star,
                              self.dx, self.bcl, self.bcr, self.variant, dq[0], dq[1])

    def max_speed(self, q):
        return kn.max_speed_psystem(q[0], self.K, self.gamma, self.eos.p_star, self.eos.v_star)


# --------------------------------------------------------------------------
# driver


class _NonPhysical(Exception):
    pass


def _ssprk104(system, Q, dt, work):
    """One low-storage SSPRK(10,4) step on padded arrays; returns the new padded state."""
    g = kn.NG
    q1 = Q.copy()
    q2 = Q.copy()
    dq = work

    def L(q):
        flag = system.rhs(q, dq)
        if flag < 0:
            raise _NonPhysical()
        system.fallbacks += flag
        return dq

    c = dt / 6.0
    for _ in range(5):
        q1[:, g:-g] += c * L(q1)
    q2[:, g:-g] = q2[:, g:-g] / 25.0 + 9.0 * q1[:, g:-g] / 25.0
    q1[:, g:-g] = 15.0 * q2[:, g:-g] - 5.0 * q1[:, g:-g]
    for _ in range(4):
        q1[:, g:-g] += c * L(q1)
    d = L(q1)
    q1[:, g:-g] = q2[:, g:-g] + 0.6 * q1[:, g:-g] + 0.1 * dt * d
    return q1


def _run(system, ic: FieldState, cfg: SolverConfig, t_end: float,
         output_times: Optional[Sequence[float]], monitors: Sequence[Callable],
         config: Optional[dict], max_steps: Optional[int]) -> RunRecord:
    if not t_end > ic.t:
        raise InvalidArgument("t_end must exceed the initial time")
    outs = sorted(float(t) for t in (output_times if output_times is not None else [t_end]))
    if outs and (outs[0] < ic.t or outs[-1] > t_end + 1e-12):
        raise InvalidArgument("output times must lie in [t0, t_end]")
    coord = np.asarray(ic.coord, dtype=float)
    dx = system.dx
    n = coord.size
    g = kn.NG
    Q = np.zeros((system.ncomp, n + 2 * g))
    Q[:, g:-g] = system.to_conserved(ic)
    if not np.all(np.isfinite(Q)):
        raise InvalidArgument("initial state is not finite")
    work = np.empty((system.ncomp, n))

    record = RunRecord(config=dict(config or {}), provenance=provenance())
    record.config.setdefault("solver_config", cfg.as_dict())
    t = float(ic.t)
    state = system.to_state(t, coord, Q[:, g:-g])
    _check_physical(state)
    if outs and abs(outs[0] - t) < 1e-14:
        record.snapshots.append(state)
        outs.pop(0)
    for m in monitors:
        m(t, 0.0, state)
    s0 = system.max_speed(Q[:, g:-g])
    if not np.isfinite(s0):
        raise InvalidArgument("non-physical initial state")
    steps = 0
    while t < t_end - 1e-12 * max(1.0, t_end):
        smax = system.max_speed(Q[:, g:-g])
        dt = cfg.cfl * dx / smax
        target = outs[0] if outs else t_end
        hit = False
        if t + dt >= target - 1e-12 * max(1.0, target):
            dt = target - t
            hit = True
        for attempt in range(2):
            try:
                Qn = _ssprk104(system, Q, dt, work)
                snew = system.max_speed(Qn[:, g:-g])
                if not np.isfinite(snew):
                    raise _NonPhysical()
                if dt * snew / dx <= cfg.cfl_max:
                    break
                reason = "CFL violation"
            except _NonPhysical:
                reason = "positivity loss"
            if attempt == 0:
                log.info("step at t=%g rejected (%s); retrying with dt/2", t, reason)
                dt *= 0.5
                hit = False
        else:
            last = system.to_state(t, coord, Q[:, g:-g])
            record.status = "aborted"
            record.message = f"{reason} at t={t:.6g}"
            raise SolverAbort(record.message, state=last, record=record)
        Q = Qn
        t = target if hit else t + dt
        steps += 1
        state = system.to_state(t, coord, Q[:, g:-g])
        for m in monitors:
            m(t, dt, state)
        if hit and outs:
            record.snapshots.append(state)
            outs.pop(0)
        if max_steps is not None and steps >= max_steps:
            break
    if not record.snapshots or record.snapshots[-1].t < t:
        if not outs or output_times is None:
            record.snapshots.append(state)
    record.provenance["steps"] = steps
    record.provenance["first_order_faces"] = system.fallbacks
    return record


def _check_physical(state: FieldState):
    if not (np.all(state.p > 0) and np.all(state.v > 0)):
        raise InvalidArgument("initial state must have positive density and pressure")


def solve_euler(ic: FieldState, cfg: SolverConfig = SolverConfig(), t_end: float = 1.0,
                output_times=None, eos: GasEOS = GasEOS(), monitors=(), config=None,
                max_steps=None) -> RunRecord:
    """Advance the Euler equations in the frame of ``ic``.

    Eulerian states carry (rho, u, p) on a chi grid; Lagrangian states carry
    (v, u, p) on a mass-coordinate grid.
    """
    dx = ic.dx
    if ic.frame == "eulerian":
        system = _Eulerian(eos, cfg, dx)
    else:
        system = _Lagrangian(eos, cfg, dx)
    return _run(system, ic, cfg, t_end, output_times, monitors, config, max_steps)


def solve_psystem(ic: FieldState, K, cfg: SolverConfig = SolverConfig(), t_end: float = 1.0,
                  output_times=None, eos: GasEOS = GasEOS(), monitors=(), config=None,
                  max_steps=None) -> RunRecord:
    """Advance the p-system for (p, u) on the Lagrangian grid with stiffness ``K``."""
    if ic.frame != "lagrangian":
        raise InvalidArgument("the p-system is posed on the Lagrangian grid")
    K = np.asarray(K, dtype=float)
    if K.shape != ic.coord.shape or np.any(K <= 0):
        raise InvalidArgument("K must be positive and match the grid")
    system = _PSystem(eos, cfg, ic.dx, K)
    return _run(system, ic, cfg, t_end, output_times, monitors, config, max_steps)


def conserved_totals(state: FieldState, eos: GasEOS = GasEOS()) -> np.ndarray:
    """Grid sums of the three conserved quantities, times the spacing."""
    dx = state.dx
    if state.frame == "eulerian":
        rho, u, p = state.rho, state.u, state.p
        q = (rho, rho * u, eos.energy_density(rho, u, p))
    else:
        v, u, p = state.v, state.u, state.p
        q = (v, u, p * v / (eos.gamma - 1.0) + 0.5 * u * u)
    return np.array([np.sum(a) * dx for a in q])


NO_FRONT = None


def front_position(record: RunRecord, threshold: float = 0.5, p_right: Optional[float] = None,
                   x_min: Optional[float] = None):
    """Rightmost location where p - p_r exceeds ``threshold`` times the maximal deviation.

    With ``x_min`` the maximal deviation is taken over ``coord >= x_min`` only,
    which isolates the right-going wave of a Riemann problem.

    Returns ``(times, positions)``; snapshots without a crossing give NaN, and a
    record with no crossing at all returns ``NO_FRONT``.
    """
    times, pos = [], []
    for snap in record.snapshots:
        times.append(snap.t)
        pos.append(_front_in_snapshot(snap.coord, snap.p, threshold, p_right, x_min))
    pos = np.array(pos, dtype=float)
    if np.all(np.isnan(pos)):
        return NO_FRONT
    return np.array(times), pos


def _front_in_snapshot(x, p, threshold, p_right, x_min=None):
    pr = p[-1] if p_right is None else p_right
    dev = p - pr
    if x_min is not None:
        x = np.asarray(x)
        keep = x >= x_min
        x, dev = x[keep], dev[keep]
        if x.size == 0:
            return np.nan
    amp = np.max(np.abs(dev))
    if amp <= 1e-12 * max(1.0, abs(pr)):
        return np.nan
    level = threshold * amp
    above = np.nonzero(np.abs(dev) > level)[0]
    if above.size == 0:
        return np.nan
    j = above[-1]
    if j + 1 >= x.size:
        return float(x[j])
    d0, d1 = abs(dev[j]), abs(dev[j + 1])
    return float(x[j] + (d0 - level) / (d0 - d1) * (x[j + 1] - x[j]))
