"""Entropy accounting, local entropy production, shock criterion and linear stability."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .eos import GasEOS
from .errors import DomainError, InvalidArgument
from .medium import HomogCoeffs, MediumProfile, lagrangian_period
from .records import FieldState, RunRecord


# --------------------------------------------------------------------------
# total entropy


def entropy_density(state: FieldState, eos: GasEOS = GasEOS()):
    """Entropy per unit length of the grid coordinate.

    Eulerian grids give S = rho s; on the mass coordinate the entropy per
    unit mass s is already a density.
    """
    p = state.p
    dens = state.rho if state.frame == "eulerian" else state.v
    if not (np.all(p > 0) and np.all(dens > 0) and np.all(np.isfinite(dens))):
        raise DomainError("entropy needs positive pressure and density")
    v = state.v
    s = eos.entropy(p, v)
    return s / v if state.frame == "eulerian" else s


def total_entropy(state: FieldState, eos: GasEOS = GasEOS()) -> float:
    """Grid approximation of the integral of s over mass."""
    return float(state.dx * math.fsum(entropy_density(state, eos)))


@dataclass
class EntropyChange:
    delta: float
    relative: float
    times: np.ndarray
    values: np.ndarray


def entropy_change(record: RunRecord, eos: GasEOS = GasEOS()) -> EntropyChange:
    """Total entropy change between the first and last snapshot, with the full curve.

    ``relative`` divides by |S(0)|.  When the record carries a finer
    ``total_entropy`` series the curve is taken from it.
    """
    snaps = record.snapshots
    if len(snaps) < 2:
        raise InvalidArgument("entropy change needs at least two snapshots")
    ref = snaps[0].coord
    for s in snaps[1:]:
        if s.coord.shape != ref.shape or not np.allclose(s.coord, ref):
            raise InvalidArgument("snapshots are on different grids")
    S0 = total_entropy(snaps[0], eos)
    S1 = total_entropy(snaps[-1], eos)
    if "total_entropy" in record.series:
        t, v = record.series_arrays("total_entropy")
    else:
        t = np.array([s.t for s in snaps])
        v = np.array([total_entropy(s, eos) for s in snaps])
    d = S1 - S0
    rel = d / abs(S0) if S0 != 0 else float("inf") if d else 0.0
    return EntropyChange(d, rel, t, v - v[0])


# --------------------------------------------------------------------------
# local entropy production


def _entropy_pair(state: FieldState, eos: GasEOS):
    S = entropy_density(state, eos)
    psi = state.u * S if state.frame == "eulerian" else None
    return S, psi


def _eta(S_new, S_old, psi, dt, dx, rho=None):
    eta = (S_new - S_old) / dt
    if psi is not None:
        eta = eta[1:-1] + (psi[2:] - psi[:-2]) / (2 * dx)
    elif rho is not None:
        # production per unit mass times density = production per unit length
        eta = rho * eta
    return eta


def _density(state: FieldState):
    return None if state.frame == "eulerian" else 1.0 / state.v


@dataclass
class LEPResult:
    max_abs: float
    t_at_max: float
    x_at_max: float
    eta: Optional[list] = None


def local_entropy_production(record: RunRecord, eos: GasEOS = GasEOS(), keep_fields: bool = False,
                             rtol_dt: float = 1e-8) -> LEPResult:
    """eta = (S^n - S^{n-1})/dt + (psi_{j+1} - psi_{j-1})/(2 dx) over consecutive snapshots.

    On Eulerian grids S = rho s and psi = u S.  On the mass coordinate the
    entropy flux vanishes; the time difference of s is multiplied by rho so
    that both frames report production per unit length.
    """
    snaps = record.snapshots
    if len(snaps) < 2:
        raise InvalidArgument("local entropy production needs at least two snapshots")
    dts = np.diff([s.t for s in snaps])
    if np.any(dts <= 0) or np.ptp(dts) > rtol_dt * np.max(dts):
        raise InvalidArgument("snapshots must be equally spaced in time")
    best = LEPResult(0.0, snaps[0].t, float("nan"), [] if keep_fields else None)
    S_old, _ = _entropy_pair(snaps[0], eos)
    for dt, snap in zip(dts, snaps[1:]):
        S, psi = _entropy_pair(snap, eos)
        eta = _eta(S, S_old, psi, dt, snap.dx, _density(snap))
        _update(best, eta, snap, psi is not None)
        if keep_fields:
            best.eta.append(eta)
        S_old = S
    return best


def _update(best, eta, snap, trimmed):
    j = int(np.argmax(np.abs(eta)))
    if abs(eta[j]) > best.max_abs:
        best.max_abs = float(abs(eta[j]))
        best.t_at_max = float(snap.t)
        best.x_at_max = float(snap.coord[j + 1 if trimmed else j])


class LEPMonitor:
    """Streaming LEP evaluated after every time step of a solver.

    ``margin`` cells at each end of the grid are ignored so that boundary
    treatment does not pollute the maximum.
    """

    def __init__(self, eos: GasEOS = GasEOS(), margin: int = 0, t_min: float = 0.0):
        self.eos = eos
        self.margin = margin
        self.t_min = t_min
        self.result = LEPResult(0.0, 0.0, float("nan"))
        self._S = None
        self.history = []

    def __call__(self, t, dt, state: FieldState):
        S, psi = _entropy_pair(state, self.eos)
        if self._S is not None and dt > 0 and t > self.t_min:
            eta = _eta(S, self._S, psi, dt, state.dx, _density(state))
            if self.margin:
                eta = eta[self.margin:-self.margin]
                off = self.margin + (1 if psi is not None else 0)
            else:
                off = 1 if psi is not None else 0
            j = int(np.argmax(np.abs(eta)))
            self.history.append((t, float(abs(eta[j]))))
            if abs(eta[j]) > self.result.max_abs:
                self.result = LEPResult(float(abs(eta[j])), float(t), float(state.coord[j + off]))
        self._S = S

    @property
    def max_abs(self) -> float:
        return self.result.max_abs


class EntropyMonitor:
    """Total entropy after every ``every`` steps."""

    def __init__(self, eos: GasEOS = GasEOS(), every: int = 1):
        self.eos = eos
        self.every = every
        self.count = 0
        self.t = []
        self.S = []

    def __call__(self, t, dt, state):
        if self.count % self.every == 0:
            self.t.append(float(t))
            self.S.append(total_entropy(state, self.eos))
        self.count += 1

    def attach(self, record: RunRecord):
        for t, s in zip(self.t, self.S):
            record.add_series("total_entropy", t, s)


# --------------------------------------------------------------------------
# shock formation criterion


@dataclass(frozen=True)
class CMax:
    lagrangian: float
    eulerian: float


def c_max(profile: MediumProfile, eos: GasEOS = GasEOS(), p: Optional[float] = None,
          n_quad: int = 2**16) -> CMax:
    """Harmonic mean of the rest-state sound speed over one period, in both frames.

    With I = int sqrt(rho/(gamma p)) dchi over an Eulerian period, the
    Lagrangian value is (mass per period)/I and the Eulerian one is
    (length of the period)/I.
    """
    p = eos.p_star if p is None else p
    if not p > 0:
        raise DomainError("pressure must be positive")
    if profile.kind in ("random", "tabulated"):
        rho = np.asarray(profile.samples)
        h = profile.spacing
    else:
        h = profile.period / n_quad
        rho = profile.density((np.arange(n_quad) + 0.5) * h)
    if np.any(rho < 0):
        raise DomainError("density must be non-negative")
    if profile.frame == "eulerian":
        I = math.fsum(np.sqrt(rho / (eos.gamma * p))) * h
        mass = lagrangian_period(profile) if profile.kind not in ("random", "tabulated") else math.fsum(rho) * h
        length = profile.period
    else:
        if np.any(rho <= 0):
            raise DomainError("density must be positive")
        v = 1.0 / rho
        I = math.fsum(np.sqrt(v / (eos.gamma * p))) * h
        mass = profile.period
        length = math.fsum(v) * h
    return CMax(mass / I, length / I)


def harmonic_mean_speed(state: FieldState, eos: GasEOS = GasEOS(), frame: Optional[str] = None) -> float:
    """Harmonic mean of the local sound speed of a state (Lagrangian c or Eulerian c_E)."""
    c, cE = eos.sound_speeds(state.p, state.v)
    frame = frame or state.frame
    arr = c if frame == "lagrangian" else cE
    return float(arr.size / np.sum(1.0 / arr))


@dataclass
class ShockClassification:
    label: str
    front_speed: float
    c_max: float
    ratio: float


def front_speed(record: RunRecord, threshold: float = 0.5, p_right: Optional[float] = None,
                t_min: Optional[float] = None, x_min: Optional[float] = None) -> float:
    """Least-squares speed of the tracked front over the later half of the record."""
    from .fv.solver import front_position

    fp = front_position(record, threshold, p_right, x_min)
    if fp is None:
        raise InvalidArgument("no front found in the record")
    t, x = fp
    ok = np.isfinite(x)
    if t_min is None:
        t_min = 0.5 * t[ok][-1]
    ok &= t >= t_min
    if ok.sum() < 2:
        raise InvalidArgument("not enough front samples to fit a speed")
    return float(np.polyfit(t[ok], x[ok], 1)[0])


def shock_classifier(record: RunRecord, profile: MediumProfile, eos: GasEOS = GasEOS(),
                     threshold: float = 0.5, p_right: Optional[float] = None, margin: float = 0.05,
                     t_min: Optional[float] = None, x_min: Optional[float] = None) -> ShockClassification:
    """Compare the fitted front speed with c_max of the state ahead of the front."""
    speed = front_speed(record, threshold, p_right, t_min, x_min)
    pr = p_right if p_right is not None else float(record.snapshots[0].p[-1])
    cm = c_max(profile, eos, p=pr)
    ref = cm.lagrangian if record.snapshots[0].frame == "lagrangian" else cm.eulerian
    ratio = speed / ref
    if abs(ratio - 1.0) < margin:
        label = "ambiguous"
    elif ratio > 1.0:
        label = "shock-forming"
    else:
        label = "dispersive"
    return ShockClassification(label, speed, ref, ratio)


# --------------------------------------------------------------------------
# linear dispersion and stability


@dataclass
class Dispersion:
    omega: np.ndarray
    c: float
    c2: float
    c4: float
    valid: np.ndarray

    def expansion(self, k):
        """Small-k approximation c k (1 + c2 k^2 + c4 k^4)."""
        k = np.asarray(k, dtype=float)
        return self.c * k * (1 + self.c2 * k**2 + self.c4 * k**4)


def dispersion_omega(k, coeffs: HomogCoeffs, eos: GasEOS = GasEOS(), include_delta4: bool = True) -> Dispersion:
    """Non-negative branch omega = c k / sqrt(1 + mu d^2 k^2 + nu d^4 k^4) (for k >= 0).

    Wavenumbers where the prefactor is not positive are flagged invalid and
    get NaN.
    """
    k = np.asarray(k, dtype=float)
    d2 = coeffs.delta**2
    c = math.sqrt(coeffs.c_sq(eos))
    pref = 1 + coeffs.mu * d2 * k**2 + (coeffs.nu * d2**2 * k**4 if include_delta4 else 0.0)
    valid = pref > 0
    with np.errstate(invalid="ignore", divide="ignore"):
        om = np.where(valid, c * k / np.sqrt(np.where(valid, pref, 1.0)), np.nan)
    c2 = -0.5 * coeffs.mu * d2
    c4 = (3 * coeffs.mu**2 - 4 * (coeffs.nu if include_delta4 else 0.0)) / 8 * d2**2
    return Dispersion(om, c, c2, c4, valid)


@dataclass(frozen=True)
class StabilityParams:
    beta1: float
    beta2: float
    beta3: float
    beta_tilde: float

    def __post_init__(self):
        if not (self.beta1 > 0 and self.beta2 > 0 and self.beta3 >= 0 and self.beta_tilde > 0):
            raise InvalidArgument("need beta1, beta2, beta_tilde > 0 and beta3 >= 0")

    @classmethod
    def from_coeffs(cls, coeffs: HomogCoeffs, eos: GasEOS = GasEOS()):
        G = float(eos.G(eos.p_star))
        d = coeffs.delta
        Km = coeffs.mean_Kinv
        alpha7 = 1.0 / G**2
        return cls(beta1=G / Km, beta2=d**3 * coeffs.mu * Km / G,
                   beta3=d**4 * coeffs.zeta * alpha7 / Km, beta_tilde=d**2 * coeffs.mu * G)


@dataclass
class StabilityResult:
    k: float
    Y: np.ndarray
    omega: np.ndarray
    unstable: bool
    growth: float


def _poly_roots(coefs):
    """Roots of sum coefs[i] Y^(deg-i) via companion-matrix eigenvalues."""
    coefs = np.trim_zeros(np.asarray(coefs, dtype=float), "f")
    deg = coefs.size - 1
    if deg < 1:
        return np.array([], dtype=complex)
    comp = np.zeros((deg, deg))
    comp[0, :] = -coefs[1:] / coefs[0]
    comp[1:, :-1] = np.eye(deg - 1)
    return np.linalg.eigvals(comp).astype(complex)


def stability_delta4(k: float, params: StabilityParams) -> StabilityResult:
    """Temporal modes of the linearized high-time-derivative system.

    Solves Y + beta2 Y^2 + beta3 Y^3 = beta1 k^2 for Y = omega^2.  At k = 0
    only the acoustic branch Y = 0 is reported.
    """
    b1, b2, b3 = params.beta1, params.beta2, params.beta3
    if k == 0:
        Y = np.zeros(1, dtype=complex)
    else:
        Y = _poly_roots([b3, b2, 1.0, -b1 * k * k])
    roots = np.sqrt(Y)
    omega = np.concatenate([roots, -roots])
    growth = float(np.max(omega.imag)) if omega.size else 0.0
    return StabilityResult(k, Y, omega, growth > 0, max(growth, 0.0))


@dataclass
class LYResult:
    omega: np.ndarray
    cutoff: float


def stability_ly(k, params: StabilityParams) -> LYResult:
    """omega = +-|k| sqrt(beta1 - beta_tilde k^2); real below the cutoff sqrt(beta1/beta_tilde)."""
    k = np.asarray(k, dtype=float)
    rad = (params.beta1 - params.beta_tilde * k**2).astype(complex)
    w = np.abs(k) * np.sqrt(rad)
    return LYResult(np.stack([w, -w]), math.sqrt(params.beta1 / params.beta_tilde))


def dispersion_table(ks, coeffs: HomogCoeffs, eos: GasEOS = GasEOS()):
    """Rows for a dispersion-curve CSV."""
    d = dispersion_omega(ks, coeffs, eos)
    return [{"k": float(k), "omega": float(w), "phase_speed": float(w / k) if k else d.c}
            for k, w in zip(np.atleast_1d(ks), np.atleast_1d(d.omega))]
