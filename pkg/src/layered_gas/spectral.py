"""Fourier pseudospectral solvers.

``solve_euler_primitive`` integrates the non-conservative primitive form of
the Euler equations with classical RK4.  ``solve_homogenized`` integrates the
stabilized dispersive effective-medium system with SSPRK3, inverting the
operator (1 - mu d^2 dxx + nu d^4 dxxxx) in Fourier space at every stage.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy import fft as sfft

from .eos import GasEOS
from .errors import DomainError, InvalidArgument, SolverAbort
from .medium import HomogCoeffs
from .records import FieldState, RunRecord, provenance

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpectralGrid:
    """Periodic grid on [-L, L) with nodes at cell centres, symmetric about 0."""

    L_half: float
    n: int

    def __post_init__(self):
        if self.n < 4 or self.n % 2:
            raise InvalidArgument("spectral grid needs an even number of points >= 4")
        if not self.L_half > 0:
            raise InvalidArgument("L_half must be positive")

    @classmethod
    def from_spacing(cls, L_half, dx):
        n = int(round(2 * L_half / dx))
        return cls(L_half, n + (n % 2))

    @property
    def dx(self) -> float:
        return 2 * self.L_half / self.n

    @property
    def x(self) -> np.ndarray:
        return -self.L_half + (np.arange(self.n) + 0.5) * self.dx

    @property
    def k(self) -> np.ndarray:
        return 2 * np.pi * sfft.rfftfreq(self.n, d=self.dx)


def wavenumbers(n: int, length: float) -> np.ndarray:
    return 2 * np.pi * sfft.rfftfreq(n, d=length / n)


def _deriv_symbol(n, length, m):
    k = wavenumbers(n, length)
    sym = (1j * k) ** m
    if m % 2 == 1 and n % 2 == 0:
        sym[-1] = 0.0
    return sym


def fourier_diff(f, m: int = 1, length: float = 2 * np.pi) -> np.ndarray:
    """m-th derivative of periodic samples over a period of the given length."""
    f = np.asarray(f, dtype=float)
    if m < 0:
        raise InvalidArgument("derivative order must be non-negative")
    if m == 0:
        return f.copy()
    return sfft.irfft(sfft.rfft(f) * _deriv_symbol(f.size, length, m), n=f.size)


def dealias(spectrum, n: Optional[int] = None, fraction: float = 2.0 / 3.0) -> np.ndarray:
    """Zero the modes above ``fraction`` of the Nyquist index (rfft layout)."""
    spec = np.array(spectrum, copy=True)
    n = n if n is not None else 2 * (spec.size - 1)
    kmax = int(fraction * (n // 2))
    spec[kmax + 1:] = 0.0
    return spec


def spectrum_dump(f, length):
    f = np.asarray(f, dtype=float)
    return wavenumbers(f.size, length), np.abs(sfft.rfft(f)) / f.size


def symmetry_defect(state: FieldState) -> float:
    """Largest departure from even rho, p and odd u on a grid symmetric about 0."""
    r = state.rho
    return float(max(np.max(np.abs(r - r[::-1])), np.max(np.abs(state.p - state.p[::-1])),
                     np.max(np.abs(state.u + state.u[::-1]))))


# --------------------------------------------------------------------------
# primitive-variable Euler


class _EulerPrimitiveRHS:
    def __init__(self, n, length, gamma, use_dealias):
        self.d1 = _deriv_symbol(n, length, 1)
        self.n = n
        self.gamma = gamma
        self.use_dealias = use_dealias

    def dx(self, f):
        fh = sfft.rfft(f)
        if self.use_dealias:
            fh = dealias(fh, self.n)
        return sfft.irfft(fh * self.d1, n=self.n)

    def __call__(self, rho, u, p):
        rho_u_x = self.dx(rho * u)
        u_x = self.dx(u)
        p_x = self.dx(p)
        return -rho_u_x, -u * u_x - p_x / rho, -u * p_x - self.gamma * p * u_x


def solve_euler_primitive(ic: FieldState, t_end: float, cfl: float = 0.9,
                          output_times: Optional[Sequence[float]] = None,
                          eos: GasEOS = GasEOS(), use_dealias: bool = False,
                          monitors=(), config=None, entropy_every: int = 0) -> RunRecord:
    """RK4 + Fourier collocation for rho_t = -(rho u)_x, u_t = -u u_x - p_x/rho, p_t = -u p_x - gamma p u_x.

    ``ic`` lives on a :class:`SpectralGrid`-style periodic grid.  When the
    initial data are even/odd about the origin the symmetry defect of every
    snapshot is recorded in the ``symmetry_defect`` series.
    """
    if ic.frame != "eulerian":
        raise InvalidArgument("primitive Euler solver works on the Eulerian grid")
    if not t_end > ic.t:
        raise InvalidArgument("t_end must exceed the initial time")
    rho, u, p = (np.array(a, dtype=float) for a in (ic.rho, ic.u, ic.p))
    if np.any(rho <= 0) or np.any(p <= 0):
        raise InvalidArgument("initial density and pressure must be positive")
    n = rho.size
    dx = ic.dx
    length = n * dx
    gamma = eos.gamma
    rhs = _EulerPrimitiveRHS(n, length, gamma, use_dealias)
    outs = sorted(float(t) for t in (output_times if output_times is not None else [t_end]))
    record = RunRecord(config=dict(config or {}), provenance=provenance())
    coord = np.asarray(ic.coord, dtype=float)
    symmetric = symmetry_defect(ic) < 1e-13 and np.allclose(coord, -coord[::-1], atol=1e-12)

    def snap(t):
        return FieldState(t, coord, "eulerian", {"rho": rho.copy(), "u": u.copy(), "p": p.copy()})

    def emit(t):
        s = snap(t)
        record.snapshots.append(s)
        if symmetric:
            record.add_series("symmetry_defect", t, symmetry_defect(s))

    t = float(ic.t)
    if outs and abs(outs[0] - t) < 1e-14:
        emit(t)
        outs.pop(0)
    if entropy_every:
        record.add_series("total_entropy", t, _total_entropy(rho, p, dx, gamma))
    for mon in monitors:
        mon(t, 0.0, snap(t))
    steps = 0
    while t < t_end - 1e-12 * max(1.0, t_end):
        c = np.sqrt(gamma * p / rho)
        dt = cfl * dx / np.max(np.abs(u) + c)
        target = outs[0] if outs else t_end
        hit = t + dt >= target - 1e-12 * max(1.0, target)
        if hit:
            dt = target - t
        k1 = rhs(rho, u, p)
        k2 = rhs(rho + 0.5 * dt * k1[0], u + 0.5 * dt * k1[1], p + 0.5 * dt * k1[2])
        k3 = rhs(rho + 0.5 * dt * k2[0], u + 0.5 * dt * k2[1], p + 0.5 * dt * k2[2])
        k4 = rhs(rho + dt * k3[0], u + dt * k3[1], p + dt * k3[2])
        rho = rho + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        u = u + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        p = p + dt / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        t = target if hit else t + dt
        steps += 1
        if not (np.all(np.isfinite(p)) and np.all(p > 0) and np.all(rho > 0)):
            record.status = "aborted"
            record.message = f"blow-up at t={t:.6g} (non-finite or non-positive fields)"
            k, amp = spectrum_dump(np.nan_to_num(p), length)
            raise SolverAbort(record.message, state=record.snapshots[-1] if record.snapshots else ic,
                              record=record, spectrum=np.column_stack([k, amp]))
        if entropy_every and steps % entropy_every == 0:
            record.add_series("total_entropy", t, _total_entropy(rho, p, dx, gamma))
        if monitors:
            s = snap(t)
            for mon in monitors:
                mon(t, dt, s)
        if hit and outs:
            emit(t)
            outs.pop(0)
    if entropy_every and steps % entropy_every:
        record.add_series("total_entropy", t, _total_entropy(rho, p, dx, gamma))
    record.provenance["steps"] = steps
    return record


def _total_entropy(rho, p, dx, gamma):
    return float(dx * np.sum(rho * np.log(p / rho**gamma)))


# --------------------------------------------------------------------------
# homogenized dispersive system


@dataclass
class HomogState:
    p: np.ndarray
    u: np.ndarray
    coord: np.ndarray
    coeffs: HomogCoeffs
    eos: GasEOS = field(default_factory=GasEOS)
    t: float = 0.0
    include_delta4: bool = True
    include_N: bool = False
    N_beta: float = 0.0
    freeze_Gprime: bool = False  # G'(p) -> G'(p*) in the delta^2 nonlinear term

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=float)
        self.u = np.asarray(self.u, dtype=float)
        if self.p.shape != self.u.shape or self.p.shape != np.shape(self.coord):
            raise InvalidArgument("p, u and coord must share a shape")
        if np.any(self.p <= 0):
            raise InvalidArgument("pressure must be positive")

    def field_state(self) -> FieldState:
        return FieldState(self.t, np.asarray(self.coord), "lagrangian",
                          {"p": self.p.copy(), "u": self.u.copy()})


def prefactor(k, coeffs: HomogCoeffs, include_delta4: bool = True):
    """Fourier symbol of 1 - mu d^2 dxx + nu d^4 dxxxx."""
    d2 = coeffs.delta**2
    out = 1.0 + coeffs.mu * d2 * k**2
    if include_delta4:
        out = out + coeffs.nu * d2**2 * k**4
    return out


def apply_operator(f, length, coeffs: HomogCoeffs, include_delta4=True):
    k = wavenumbers(np.size(f), length)
    return sfft.irfft(sfft.rfft(f) * prefactor(k, coeffs, include_delta4), n=np.size(f))


def invert_operator(f, length, coeffs: HomogCoeffs, include_delta4=True):
    k = wavenumbers(np.size(f), length)
    return sfft.irfft(sfft.rfft(f) / prefactor(k, coeffs, include_delta4), n=np.size(f))


def nonlinear_N(pd, ud, G, coeffs: HomogCoeffs, beta: float) -> np.ndarray:
    """The fourth-order nonlinear forcing, before the delta^4 factor.

    ``pd[j]`` and ``ud[j]`` are the j-th x-derivatives of p and u (j = 0..4);
    ``G[j]`` are the derivatives of the stiffness evaluated at p.
    """
    Km = coeffs.mean_Kinv
    g0, g1, g2, g3, g4 = G
    px, pxx, pxxx, pxxxx = pd[1], pd[2], pd[3], pd[4]
    ux, uxx, uxxx, uxxxx = ud[1], ud[2], ud[3], ud[4]
    br = (
        beta * (2 * g1 / g0 * pxx - g2 / g0 * px**2)
        - 6 * g1 * pxxx * uxx
        - g1 * pxx * uxxx
        - 6 * g1**2 / g0 * px**2 * uxxx
        - (8 * g1**2 / g0 + 6 * g2) * px * pxx * uxx
        - 6 * g2 * px * pxxx * ux
        - 6 * g1 * g2 / g0 * px**3 * uxx
        + beta / Km * (g2 / g0 - 2 * g1**2) * ux**2
        + (2 * g1**2 - 6 * g0 * g2) / Km * ux * uxx**2
        + (2 * g1**2 - g0 * g2) / Km * ux**2 * uxxx
        + (2 * g1**3 / g0 - g1 * g2) / Km * pxx * ux**3
        + (-9 * g1 * g2 / g0 - 3 * g3) * px**2 * pxx * ux
        - 2 * g1 * g3 / g0 * px**4 * ux
        + (4 * g1**3 / g0 - 4 * g1 * g2 - 6 * g0 * g3) / Km * px * ux**2 * uxx
        + (2 * g1**2 * g2 / g0 - 2 * g2**2 - 2 * g1 * g3 - g0 * g4) / Km * px**2 * ux**3
        + g1 * pxxxx * ux
        - 2 * g1 * px * uxxxx
        - 2 * g1**2 / g0 * pxx**2 * ux
    )
    return coeffs.nu / Km * br


class _HomogRHS:
    def __init__(self, state: HomogState, length: float, use_dealias: bool):
        self.n = state.p.size
        self.length = length
        self.coeffs = state.coeffs
        self.eos = state.eos
        self.include_delta4 = state.include_delta4
        self.include_N = state.include_N and state.include_delta4
        self.beta = state.N_beta
        self.freeze = state.freeze_Gprime
        k = wavenumbers(self.n, length)
        self.pref = prefactor(k, self.coeffs, self.include_delta4)
        if np.any(self.pref <= 0):
            raise SolverAbort("dispersive prefactor is non-positive for some wavenumber")
        self.sym = [_deriv_symbol(self.n, length, m) for m in range(5)]
        self.mask = np.ones(k.size)
        if use_dealias:
            self.mask = dealias(self.mask, self.n)
        self.nder = 4 if self.include_N else 2

    def derivs(self, f):
        fh = sfft.rfft(f) * self.mask
        return [f] + [sfft.irfft(fh * self.sym[m], n=self.n) for m in range(1, self.nder + 1)]

    def __call__(self, p, u):
        c = self.coeffs
        Km = c.mean_Kinv
        d2 = c.delta**2
        pd = self.derivs(p)
        ud = self.derivs(u)
        G0 = self.eos.G(p)
        G1 = self.eos.G_deriv(p, 1)
        G1_mu = float(self.eos.G_deriv(self.eos.p_star, 1)) if self.freeze else G1
        rhs = -G0 / Km * ud[1] + d2 * c.mu * G1_mu / Km * pd[2] * ud[1]
        if self.include_N:
            G = [G0, G1] + [self.eos.G_deriv(p, j) for j in (2, 3, 4)]
            rhs = rhs + d2**2 * nonlinear_N(pd, ud, G, c, self.beta)
        rh = sfft.rfft(rhs) * self.mask / self.pref
        p_t = sfft.irfft(rh, n=self.n)
        u_t = -pd[1]
        return p_t, u_t


def solve_homogenized(ic: HomogState, t_end: float, cfl: float = 0.5, dt: Optional[float] = None,
                      output_times: Optional[Sequence[float]] = None, use_dealias: bool = True,
                      config=None, monitors=()) -> RunRecord:
    """SSPRK3 (Shu-Osher) time stepping of the stabilized homogenized system."""
    if not t_end > ic.t:
        raise InvalidArgument("t_end must exceed the initial time")
    coord = np.asarray(ic.coord, dtype=float)
    dx = float(coord[1] - coord[0])
    length = coord.size * dx
    rhs = _HomogRHS(ic, length, use_dealias)
    outs = sorted(float(t) for t in (output_times if output_times is not None else [t_end]))
    record = RunRecord(config=dict(config or {}), provenance=provenance())
    record.config.setdefault("coeffs", ic.coeffs.as_dict())
    record.config.setdefault("include_delta4", ic.include_delta4)
    record.config.setdefault("include_N", ic.include_N)
    record.config.setdefault("N_beta", ic.N_beta)
    record.config.setdefault("freeze_Gprime", ic.freeze_Gprime)
    p, u = ic.p.copy(), ic.u.copy()
    t = float(ic.t)

    def snap(t):
        return FieldState(t, coord, "lagrangian", {"p": p.copy(), "u": u.copy()})

    if outs and abs(outs[0] - t) < 1e-14:
        record.snapshots.append(snap(t))
        outs.pop(0)
    for mon in monitors:
        mon(t, 0.0, snap(t))
    steps = 0
    Km = ic.coeffs.mean_Kinv
    while t < t_end - 1e-12 * max(1.0, t_end):
        if dt is None:
            c = np.sqrt(np.max(ic.eos.G(p)) / Km)
            h = cfl * dx / c
        else:
            h = dt
        target = outs[0] if outs else t_end
        hit = t + h >= target - 1e-12 * max(1.0, target)
        if hit:
            h = target - t
        p_prev = p
        try:
            with np.errstate(all="ignore"):
                a = rhs(p, u)
                p1, u1 = p + h * a[0], u + h * a[1]
                a = rhs(p1, u1)
                p2, u2 = 0.75 * p + 0.25 * (p1 + h * a[0]), 0.75 * u + 0.25 * (u1 + h * a[1])
                a = rhs(p2, u2)
                p = p / 3.0 + 2.0 / 3.0 * (p2 + h * a[0])
                u = u / 3.0 + 2.0 / 3.0 * (u2 + h * a[1])
        except DomainError:
            p = np.full_like(p, np.nan)
        t = target if hit else t + h
        steps += 1
        if not (np.all(np.isfinite(p)) and np.all(p > 0)):
            record.status = "aborted"
            record.message = f"homogenized solution lost positivity at t={t:.6g}"
            k, amp = spectrum_dump(p_prev, length)
            raise SolverAbort(record.message, record=record, spectrum=np.column_stack([k, amp]))
        if monitors:
            s = snap(t)
            for mon in monitors:
                mon(t, h, s)
        if hit and outs:
            record.snapshots.append(snap(t))
            outs.pop(0)
    record.provenance["steps"] = steps
    return record


def homog_state_like(state: HomogState, **changes) -> HomogState:
    return replace(state, **changes)
