"""Solitary traveling waves of the homogenized system.

With p = p* + V u and xi = x - V t, the second-order model reduces to

    u'' = alpha1/2 (u')^2 - alpha2 (Gp(p* + V u) - Gp(p*)) + alpha0 u,

where Gp is the primitive of G.  The origin is a saddle when beta_lin > 0,
and the solitary wave is its homoclinic orbit.  The fourth-order model adds
(delta^2 nu/mu) u''''.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy import sparse
from scipy.linalg import solve_banded

from .eos import GasEOS
from .errors import (AmbiguousMeasurement, ConstructionFailure, ConvergenceFailure, DomainError,
                     InvalidArgument, NoSaddleError)
from .medium import HomogCoeffs
from .records import RunRecord

LAUNCH_OFFSET = 1e-8
TAIL_LEVEL = 1e-12


@dataclass(frozen=True)
class TravelingWaveProblem:
    V: float
    coeffs: HomogCoeffs
    eos: GasEOS = field(default_factory=GasEOS)

    def __post_init__(self):
        if self.V == 0:
            raise InvalidArgument("wave speed must be non-zero")
        if not self.coeffs.mu > 0:
            raise InvalidArgument("traveling waves need mu > 0")

    @property
    def delta(self) -> float:
        return self.coeffs.delta

    @property
    def alpha0(self) -> float:
        return 1.0 / (self.delta**2 * self.coeffs.mu)

    @property
    def alpha1(self) -> float:
        return float(self.eos.G_deriv(self.eos.p_star, 1)) / (self.V * self.coeffs.mean_Kinv)

    @property
    def alpha2(self) -> float:
        c = self.coeffs
        return 1.0 / (self.delta**2 * c.mu * self.V**3 * c.mean_Kinv)

    @property
    def beta_lin(self) -> float:
        c = self.coeffs
        G = float(self.eos.G(self.eos.p_star))
        return (1.0 - G / (self.V**2 * c.mean_Kinv)) / (self.delta**2 * c.mu)

    @property
    def sonic_speed(self) -> float:
        return math.sqrt(float(self.eos.G(self.eos.p_star)) / self.coeffs.mean_Kinv)

    @property
    def dispersion_ratio(self) -> float:
        """Coefficient delta^2 nu/mu of u'''' in the fourth-order equation."""
        return self.delta**2 * self.coeffs.nu / self.coeffs.mu

    def potential(self, u):
        """Gp(p* + V u) - Gp(p*); evaluated in the precision of ``u``."""
        e = self.eos
        u = np.asarray(u)
        if u.dtype == np.longdouble:
            ld = np.longdouble
            b = ld(2) + ld(1) / ld(e.gamma)
            scale = ld(e.c_star_sq) * ld(e.p_star) ** (ld(1) - b) / b
            p = ld(e.p_star) + ld(self.V) * u
            return scale * (p**b - ld(e.p_star) ** b)
        r = self.V * u / e.p_star
        if np.any(r <= -1.0):
            raise DomainError("pressure must be positive")
        b = 2.0 + 1.0 / e.gamma
        return e.c_star_sq * e.p_star / b * np.expm1(b * np.log1p(r))

    def accel(self, u, up):
        return 0.5 * self.alpha1 * up**2 - self.alpha2 * self.potential(u) + self.alpha0 * u


@dataclass
class TravelingWaveSolution:
    xi: np.ndarray
    u: np.ndarray
    V: float
    model_order: str
    problem: TravelingWaveProblem
    residual_norm: float = float("nan")
    iterations: int = 0
    history: list = field(default_factory=list)
    u_extended: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def p(self) -> np.ndarray:
        return self.problem.eos.p_star + self.V * self.u

    @property
    def amplitude(self) -> float:
        return float(np.max(self.u))

    @property
    def h(self) -> float:
        return float(self.xi[1] - self.xi[0])

    def write(self, path_csv, path_json=None) -> None:
        path_csv = Path(path_csv)
        np.savetxt(path_csv, np.column_stack([self.xi, self.u, self.p]), delimiter=",",
                   header="xi,u,p", comments="", fmt="%.17g")
        meta = {"V": self.V, "residual": self.residual_norm, "iterations": self.iterations,
                "model_order": self.model_order, "coeffs": self.problem.coeffs.as_dict(),
                "eos": self.problem.eos.as_dict()}
        path_json = Path(path_json) if path_json else path_csv.with_suffix(".json")
        path_json.write_text(json.dumps(meta, indent=2))


# --------------------------------------------------------------------------
# phase-plane shooting


def default_half_width(problem: TravelingWaveProblem, peak: float = 1.0) -> float:
    """Half-width after which the linear tail has decayed below TAIL_LEVEL."""
    lam = math.sqrt(problem.beta_lin)
    return max(12.0, math.log(max(2.0 * abs(peak), 1e-300) / TAIL_LEVEL)) / lam


def separatrix_guess(problem: TravelingWaveProblem, xi_span: Optional[float] = None,
                     n: int = 4096, eps: float = LAUNCH_OFFSET) -> TravelingWaveSolution:
    """Shoot along the unstable manifold of the origin and mirror about the peak."""
    beta = problem.beta_lin
    if not beta > 0:
        raise NoSaddleError(
            f"V={problem.V} is below the sonic threshold {problem.sonic_speed:.6g}; "
            "the origin is not a saddle")
    lam = math.sqrt(beta)
    y0 = np.array([eps, eps * lam])

    # Scalar form of problem.accel. The potential difference is written with
    # expm1/log1p: near the launch point the direct difference loses half the
    # digits, and the resulting noise drives the step size down to nothing.
    e = problem.eos
    a0, a1, a2, V = problem.alpha0, problem.alpha1, problem.alpha2, problem.V
    b = 2.0 + 1.0 / e.gamma
    kpot = a2 * e.c_star_sq * e.p_star / b
    rate = V / e.p_star

    def rhs(_, y):
        u, up = y
        r = rate * u
        if r <= -1.0:
            return [up, math.nan]
        return [up, 0.5 * a1 * up * up - kpot * math.expm1(b * math.log1p(r)) + a0 * u]

    def peak(_, y):
        return y[1]

    peak.terminal = True
    peak.direction = -1

    def escape(_, y):
        return 1e6 - abs(y[0]) if problem.eos.p_star + problem.V * y[0] > 0 else -1.0

    escape.terminal = True
    span = 60.0 / lam + 50.0 if xi_span is None else xi_span
    sol = solve_ivp(rhs, (0.0, span), y0, method="DOP853", rtol=1e-12, atol=1e-14 * eps,
                    events=(peak, escape), dense_output=True)
    trace = np.column_stack([sol.t, sol.y[0], sol.y[1]])
    if sol.status != 1 or len(sol.t_events[0]) == 0:
        raise ConstructionFailure(f"no homoclinic return within span for V={problem.V}", trace=trace)
    xi_peak = float(sol.t_events[0][0])
    u_peak = float(sol.y_events[0][0][0])
    half = default_half_width(problem, u_peak)
    xi = np.linspace(-half, half, n)
    s = np.abs(xi)
    u = np.empty(n)
    inside = s <= xi_peak
    u[inside] = sol.sol(xi_peak - s[inside])[0]
    u[~inside] = eps * np.exp(-lam * (s[~inside] - xi_peak))
    u[0] = u[-1] = 0.0
    out = TravelingWaveSolution(xi, u, problem.V, "second", problem)
    out.residual_norm = float(np.max(np.abs(residual(out.u, out.h, problem))))
    return out


# --------------------------------------------------------------------------
# Newton iterations
#
# The wave is even about xi = 0, so the unknowns are the nodes with xi > 0.
# A mirror condition at the centre removes the translational null mode of
# the linearization, and u = 0 is imposed at the far end.


def _half_operators(m, h, centre_node):
    """Sparse D1, D2, D4 on the half grid with mirror ghosts at the centre."""
    # ghost map: index -1 -> mirror of 0 (staggered) or 1 (node-centred)
    def mirror(k):
        return -k - 1 if not centre_node else -k

    def build(stencil):
        rows, cols, vals = [], [], []
        for i in range(m):
            for off, w in stencil:
                k = i + off
                if k < 0:
                    k = mirror(k)
                if k >= m:
                    continue
                rows.append(i)
                cols.append(k)
                vals.append(w)
        return sparse.csr_matrix((vals, (rows, cols)), shape=(m, m))

    D1 = build([(-1, -0.5 / h), (1, 0.5 / h)])
    D2 = build([(-1, 1 / h**2), (0, -2 / h**2), (1, 1 / h**2)])
    D4 = build([(-2, 1 / h**4), (-1, -4 / h**4), (0, 6 / h**4), (1, -4 / h**4), (2, 1 / h**4)])
    return D1, D2, D4


class _HalfProblem:
    def __init__(self, xi, problem, order, nu_scale):
        n = xi.size
        self.centre_node = n % 2 == 1
        self.start = n // 2
        self.n = n
        self.h = float(xi[1] - xi[0])
        self.m = n - self.start - 1  # drop the Dirichlet end node
        self.problem = problem
        self.order = order
        self.a4 = nu_scale * problem.dispersion_ratio if order == "fourth" else 0.0
        self.D1, self.D2, self.D4 = _half_operators(self.m, self.h, self.centre_node)

    def restrict(self, u_full, dtype=float):
        return np.array(u_full[self.start:self.start + self.m], dtype=dtype)

    def extend(self, u):
        full = np.zeros(self.n, dtype=np.asarray(u).dtype)
        full[self.start:self.start + self.m] = u
        left = u[::-1] if not self.centre_node else u[:0:-1]
        full[self.start - left.size:self.start] = left
        return full

    def _ext(self, u, k):
        left = u[k - 1::-1] if not self.centre_node else u[k:0:-1]
        return np.concatenate((left, u, np.zeros(k)))

    def residual(self, u):
        # nested differences keep the rounding error proportional to the
        # differences rather than to u itself
        pr = self.problem
        h = self.h
        e1 = self._ext(u, 1)
        d2 = np.diff(e1, 2) / h**2
        d1 = (e1[2:] - e1[:-2]) / (2 * h)
        a0, a1, a2 = (np.asarray(a, dtype=u.dtype) for a in (pr.alpha0, pr.alpha1, pr.alpha2))
        F = -d2 + a0 * u + a1 / 2 * d1**2 - a2 * pr.potential(u)
        if self.a4:
            F = F + self.a4 * np.diff(self._ext(u, 2), 4) / h**4
        return F

    def jacobian(self, u, kind):
        pr = self.problem
        e = pr.eos
        d = pr.alpha0 - pr.alpha2 * pr.V * e.G(e.p_star + pr.V * u)
        J = -self.D2
        if kind == "exact":
            J = J + sparse.diags(pr.alpha1 * (self.D1 @ u)) @ self.D1
        else:
            d = d - pr.alpha1 * (self.D2 @ u)
        J = J + sparse.diags(d)
        if self.a4:
            J = J + self.a4 * self.D4
        return J

    def solve(self, J, rhs):
        bw = 2 if self.a4 else 1
        dia = J.todia()
        ab = np.zeros((2 * bw + 1, self.m))
        for off, row in zip(dia.offsets, dia.data):
            if abs(off) > bw:
                if np.any(row):
                    raise InvalidArgument("Jacobian bandwidth exceeds the expected stencil")
                continue
            ab[bw - off] += row
        return solve_banded((bw, bw), ab, rhs)

    def rounding_floor(self, u):
        scale = float(np.max(np.abs(u))) if np.size(u) else 0.0
        eps = float(np.finfo(np.asarray(u).dtype).eps)
        floor = 16 * eps * scale * (4.0 / self.h**2 + self.problem.alpha0 + 1.0)
        if self.a4:
            floor += 16 * eps * scale * 16.0 * abs(self.a4) / self.h**4
        return floor


def residual(u_full, h, problem: TravelingWaveProblem, order: str = "second", nu_scale: float = 1.0):
    """Discrete residual of the traveling-wave equation at every node of an even profile."""
    xi = (np.arange(np.size(u_full)) - (np.size(u_full) - 1) / 2) * h
    hp = _HalfProblem(xi, problem, order, nu_scale)
    return hp.residual(hp.restrict(u_full))


def _newton(sol: TravelingWaveSolution, order, tol, max_iter, jacobian, nu_scale) -> TravelingWaveSolution:
    """Newton iteration with the iterate and residual kept in extended precision.

    At n ~ 4096 a single rounding of u in double precision already produces a
    residual of order eps*|u|/h^2 ~ 1e-10, so the corrections are computed in
    double precision (banded solve) and accumulated in long double.
    """
    hp = _HalfProblem(sol.xi, sol.problem, order, nu_scale)
    u = hp.restrict(sol.u_extended if sol.u_extended is not None else sol.u, np.longdouble)
    F = hp.residual(u)
    res = float(np.max(np.abs(F)))
    history = [res]
    growth = 0
    it = 0
    # the fourth-difference operator amplifies rounding by h^-4; never ask for
    # a residual below that floor
    target = max(tol, hp.rounding_floor(u)) if order == "fourth" else tol
    while res >= target and it < max_iter:
        u64 = u.astype(float)
        du = hp.solve(hp.jacobian(u64, jacobian), -F.astype(float))
        u = u + du.astype(np.longdouble)
        F = hp.residual(u)
        new = float(np.max(np.abs(F)))
        growth = growth + 1 if new > res else 0
        res = new
        history.append(res)
        it += 1
        if not np.isfinite(res) or growth >= 3:
            raise ConvergenceFailure(f"Newton iteration diverged (residual {res:.3e})", history=history)
    if res >= target:
        raise ConvergenceFailure(f"Newton did not converge in {max_iter} iterations "
                                 f"(residual {res:.3e})", history=history)
    full = hp.extend(u)
    out = TravelingWaveSolution(sol.xi.copy(), full.astype(float), sol.V, order, sol.problem, res, it, history)
    out.u_extended = full
    return out


def newton_refine_2nd(guess: TravelingWaveSolution, tol: float = 1e-10, max_iter: int = 30,
                      jacobian: str = "exact") -> TravelingWaveSolution:
    """Newton iteration for the second-order traveling-wave equation.

    ``jacobian="exact"`` differentiates the discrete residual, including the
    (u')^2 term; ``jacobian="paper"`` uses the approximation u' du' ~ -u'' du,
    which converges linearly.
    """
    if jacobian not in ("exact", "paper"):
        raise InvalidArgument("jacobian must be 'exact' or 'paper'")
    return _newton(guess, "second", tol, max_iter, jacobian, 1.0)


def newton_solve_4th(guess: TravelingWaveSolution, tol: float = 1e-10, max_iter: int = 40,
                     nu_scale: float = 1.0, continuation_steps: int = 1) -> TravelingWaveSolution:
    """Newton iteration for the fourth-order equation, started from a 2nd-order wave.

    ``nu_scale`` multiplies nu (0 recovers the second-order equation);
    ``continuation_steps > 1`` ramps it up gradually.
    """
    if guess.problem.coeffs.nu < 0:
        raise InvalidArgument("fourth-order traveling waves need nu >= 0")
    sol = guess
    for j in range(1, continuation_steps + 1):
        sol = _newton(sol, "fourth", tol, max_iter, "exact", nu_scale * j / continuation_steps)
    return sol


def traveling_wave(V: float, coeffs: HomogCoeffs, eos: GasEOS = GasEOS(), order: str = "second",
                   n: int = 4096, tol: float = 1e-10) -> TravelingWaveSolution:
    """Solitary wave of speed V; a left-moving wave (V < 0) is the mirror u -> -u of speed |V|."""
    problem = TravelingWaveProblem(V, coeffs, eos)
    right = problem if V > 0 else TravelingWaveProblem(-V, coeffs, eos)
    sol = newton_refine_2nd(separatrix_guess(right, n=n), tol=tol)
    if order == "fourth":
        sol = newton_solve_4th(sol, tol=tol)
    if V < 0:
        sol = dataclasses.replace(sol, u=-sol.u, V=V, problem=problem,
                                  u_extended=None if sol.u_extended is None else -sol.u_extended)
    return sol


def center(sol: TravelingWaveSolution) -> float:
    """Sub-grid location of the peak by quadratic interpolation."""
    return _quad_peak(sol.xi, sol.u, int(np.argmax(sol.u)))[0]


def evenness_defect(sol: TravelingWaveSolution) -> float:
    """Max |u(c + s) - u(c - s)| after centring at the interpolated peak."""
    c = center(sol)
    s = np.linspace(0, min(sol.xi[-1] - c, c - sol.xi[0]), sol.xi.size // 2)
    return float(np.max(np.abs(np.interp(c + s, sol.xi, sol.u) - np.interp(c - s, sol.xi, sol.u))))


# --------------------------------------------------------------------------
# speed measurement in PDE runs


def _quad_peak(x, f, j):
    if j <= 0 or j >= f.size - 1:
        return float(x[j]), float(f[j])
    fm, f0, fp = f[j - 1], f[j], f[j + 1]
    den = fm - 2 * f0 + fp
    if den == 0:
        return float(x[j]), float(f0)
    s = 0.5 * (fm - fp) / den
    h = x[1] - x[0]
    return float(x[j] + s * h), float(f0 - 0.25 * (fm - fp) * s)


def leading_peak(x, p, window: Optional[float] = None, separation: float = 0.5):
    """Position and height of the rightmost dominant pressure maximum.

    Raises AmbiguousMeasurement when another local maximum within ``window``
    of the peak reaches ``separation`` times its excess over the ambient level.
    """
    x = np.asarray(x)
    p = np.asarray(p)
    base = np.median(p)
    j = int(np.argmax(p))
    xc, pc = _quad_peak(x, p, j)
    if window is not None:
        near = np.abs(x - xc) <= window
        idx = np.nonzero(near)[0]
        loc = idx[(idx > 0) & (idx < p.size - 1)]
        loc = loc[(p[loc] >= p[loc - 1]) & (p[loc] > p[loc + 1]) & (loc != j)]
        if loc.size and np.max(p[loc] - base) >= separation * (pc - base):
            raise AmbiguousMeasurement("leading pulse is not separated from its neighbours")
    return xc, pc


def measure_wave_speed(record: RunRecord, window: Optional[float] = None, t_min: float = -np.inf):
    """Least-squares speed of the tracked pressure maximum over the snapshots."""
    ts, xs = [], []
    for snap in record.snapshots:
        if snap.t < t_min:
            continue
        xc, _ = leading_peak(snap.coord, snap.p, window)
        ts.append(snap.t)
        xs.append(xc)
    if len(ts) < 2:
        raise InvalidArgument("need at least two snapshots to measure a speed")
    return float(np.polyfit(ts, xs, 1)[0])


def fixed_point_traces(record: RunRecord, positions):
    """Pressure time series p(x_i, t) at fixed positions (linear interpolation)."""
    t = record.times
    traces = np.array([[np.interp(x0, s.coord, s.p) for s in record.snapshots] for x0 in positions])
    return t, traces


def collapse_defect(t, traces, V, positions):
    """Max deviation between fixed-point traces after shifting by x_i/V, relative to amplitude."""
    base = np.median(traces)
    amp = np.max(traces) - base
    tau = [t - x0 / V for x0 in positions]
    lo = max(tt[0] for tt in tau)
    hi = min(tt[-1] for tt in tau)
    grid = np.linspace(lo, hi, 400)
    curves = np.array([np.interp(grid, tt, tr) for tt, tr in zip(tau, traces)])
    return float(np.max(np.ptp(curves, axis=0)) / amp)
