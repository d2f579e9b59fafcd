"""Background media, averaging operators and homogenized coefficients.

A profile prescribes the rest-state density either as a function of the
Eulerian position chi (``frame="eulerian"``) or of the Lagrangian mass
coordinate x (``frame="lagrangian"``).  The rest state has p = p*, u = 0 and
specific volume v0 = 1/rho0, so that ``K = v*/v0`` on the Lagrangian grid.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import fft as sfft
from scipy.signal import lfilter

from .eos import GasEOS
from .errors import DomainError, InvalidArgument, LayeredGasError

KINDS = ("piecewise_constant", "sinusoidal", "random", "tabulated")
FRAMES = ("eulerian", "lagrangian")

# density floor used only while inverting the mass map of profiles touching vacuum
RHO_MIN_INVERSION = 1e-8


class InternalError(LayeredGasError, RuntimeError):
    pass


# --------------------------------------------------------------------------
# averaging operators on uniform samples over one period


def _check_samples(samples):
    f = np.asarray(samples, dtype=float)
    if f.ndim != 1 or f.size == 0:
        raise InvalidArgument("expected a non-empty 1D array of periodic samples")
    if f.size < 2:
        raise InvalidArgument("need at least two samples per period")
    return f


def mean(samples) -> float:
    """Period average <f> of uniformly spaced samples (periodic trapezoid rule)."""
    f = _check_samples(samples)
    return float(math.fsum(f) / f.size)


def fluct(samples) -> np.ndarray:
    """Fluctuating part {f} = f - <f>."""
    f = _check_samples(samples)
    return f - mean(f)


def fluct_antideriv(samples, length: float = 1.0, piecewise: bool = False) -> np.ndarray:
    """Mean-free antiderivative of the fluctuation, [[f]].

    ``piecewise=False`` treats the samples as point values at ``j*h`` of a
    smooth periodic function and integrates spectrally.  ``piecewise=True``
    treats them as cell values on cells ``[j h, (j+1) h)`` and returns the
    exact piecewise-linear antiderivative at the cell midpoints.
    """
    f = _check_samples(samples)
    g = fluct(f)
    n = f.size
    h = length / n
    if piecewise:
        edges = np.concatenate(([0.0], np.cumsum(g) * h))
        mid = edges[:-1] + 0.5 * g * h
        # exact mean of a piecewise-linear function = mean of its midpoint values
        return mid - mid.mean()
    ghat = sfft.rfft(g)
    k = 2 * np.pi * sfft.rfftfreq(n, d=h)
    ahat = np.zeros_like(ghat)
    ahat[1:] = ghat[1:] / (1j * k[1:])
    if n % 2 == 0:
        ahat[-1] = 0.0
    return sfft.irfft(ahat, n=n)


# --------------------------------------------------------------------------
# profiles


@dataclass(frozen=True)
class RandomProfileParams:
    K_A: float = 1.0
    K_B: float = 1.0
    sigma_A: float = 0.24
    sigma_B: float = 0.015
    n_smooth: int = 20000
    seed: int = 0
    grid_n: int = 102400
    L: float = 256.0
    amplitude: float = 0.8
    rho_floor: float = 0.05
    clip: bool = True

    def __post_init__(self):
        if min(self.K_A, self.K_B) < 0 or min(self.sigma_A, self.sigma_B) < 0:
            raise InvalidArgument("decay rates and noise intensities must be non-negative")
        if self.n_smooth < 0 or self.grid_n < 4 or self.L <= 0:
            raise InvalidArgument("invalid random-profile grid parameters")


@dataclass(frozen=True)
class MediumProfile:
    kind: str
    frame: str = "eulerian"
    period: float = 1.0
    a_low: float = 1.0
    a_high: float = 1.0
    duty: float = 0.5
    mean_density: float = 1.0
    amplitude: float = 0.0
    random: Optional[RandomProfileParams] = None
    samples: Optional[np.ndarray] = field(default=None, compare=False, repr=False)
    lo: float = 0.0
    description: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgument(f"unknown profile kind {self.kind!r}")
        if self.frame not in FRAMES:
            raise InvalidArgument(f"unknown frame {self.frame!r}")
        if not self.period > 0:
            raise InvalidArgument("period must be positive")
        if self.kind == "piecewise_constant":
            if not (self.a_low > 0 and self.a_high > 0):
                raise DomainError("piecewise-constant densities must be positive")
            if not 0 < self.duty < 1:
                raise InvalidArgument("duty must lie in (0, 1)")
        if self.kind == "sinusoidal":
            if self.mean_density - abs(self.amplitude) < 0:
                raise DomainError("sinusoidal density becomes negative")
        if self.kind in ("random", "tabulated"):
            if self.samples is None:
                raise InvalidArgument("tabulated profiles need samples")
            if np.any(np.asarray(self.samples) <= 0):
                raise DomainError("tabulated density must be positive")

    # -- constructors ------------------------------------------------------

    @classmethod
    def piecewise_constant(cls, a_low, a_high, duty=0.5, period=1.0, frame="eulerian", description=""):
        return cls("piecewise_constant", frame=frame, period=period, a_low=a_low,
                   a_high=a_high, duty=duty, description=description)

    @classmethod
    def sinusoidal(cls, mean_density=1.0, amplitude=1.0, period=1.0, frame="eulerian", description=""):
        return cls("sinusoidal", frame=frame, period=period, mean_density=mean_density,
                   amplitude=amplitude, description=description)

    @classmethod
    def uniform(cls, rho=1.0, period=1.0):
        return cls.sinusoidal(rho, 0.0, period=period, description=f"uniform rho={rho}")

    @classmethod
    def tabulated(cls, density, lo, spacing, frame="eulerian", description=""):
        """Cell values ``density[j]`` on cells ``[lo + j*spacing, lo + (j+1)*spacing)``.

        The table is treated as one period of length ``len(density)*spacing``.
        """
        rho = np.asarray(density, dtype=float).copy()
        rho.setflags(write=False)
        return cls("tabulated", frame=frame, period=rho.size * spacing, samples=rho,
                   lo=lo, description=description)

    # -- evaluation in the native frame -----------------------------------

    @property
    def is_piecewise(self) -> bool:
        return self.kind in ("piecewise_constant", "random", "tabulated")

    @property
    def is_uniform(self) -> bool:
        if self.kind == "sinusoidal":
            return self.amplitude == 0
        if self.kind == "piecewise_constant":
            return self.a_low == self.a_high
        return bool(np.all(self.samples == self.samples[0]))

    @property
    def translation_even(self) -> bool:
        return self.kind in ("piecewise_constant", "sinusoidal")

    @property
    def spacing(self) -> float:
        return self.period / self.samples.size

    def density(self, s):
        """Rest density at native coordinate(s) s."""
        s = np.asarray(s, dtype=float)
        if self.kind == "piecewise_constant":
            frac = np.mod(s / self.period, 1.0)
            return np.where(frac < self.duty, self.a_low, self.a_high)
        if self.kind == "sinusoidal":
            return self.mean_density + self.amplitude * np.cos(2 * np.pi * s / self.period)
        idx = np.floor((s - self.lo) / self.spacing).astype(np.int64) % self.samples.size
        return self.samples[idx]

    @property
    def period_mass_native(self) -> float:
        """Integral of rho over one native period."""
        if self.kind == "piecewise_constant":
            return self.period * (self.duty * self.a_low + (1 - self.duty) * self.a_high)
        if self.kind == "sinusoidal":
            return self.period * self.mean_density
        return float(math.fsum(self.samples) * self.spacing)

    def integral(self, s):
        """Integral of rho from 0 to s along the native coordinate."""
        s = np.asarray(s, dtype=float)
        if self.kind == "piecewise_constant":
            n = np.floor(s / self.period)
            r = s - n * self.period
            cut = self.duty * self.period
            part = np.where(r < cut, self.a_low * r, self.a_low * cut + self.a_high * (r - cut))
            return n * self.period_mass_native + part
        if self.kind == "sinusoidal":
            w = 2 * np.pi / self.period
            return self.mean_density * s + self.amplitude * np.sin(w * s) / w
        return self._table_integral(s) - self._table_integral(np.zeros(()))

    def _table_integral(self, s):
        h = self.spacing
        cum = np.concatenate(([0.0], np.cumsum(self.samples) * h))
        t = s - self.lo
        n = np.floor(t / self.period)
        r = t - n * self.period
        return n * cum[-1] + np.interp(r, np.arange(self.samples.size + 1) * h, cum)

    def reciprocal_integral(self, s):
        """Integral of 1/rho from 0 to s along the native coordinate."""
        s = np.asarray(s, dtype=float)
        if self.kind == "piecewise_constant":
            inv = MediumProfile.piecewise_constant(1 / self.a_low, 1 / self.a_high, self.duty, self.period)
            return inv.integral(s)
        if self.kind in ("random", "tabulated"):
            inv = dataclasses.replace(self, samples=1.0 / self.samples)
            return inv.integral(s)
        # smooth: periodic part integrated spectrally on a fine grid
        n = 4096
        y = np.arange(n) * self.period / n
        vinv = 1.0 / np.maximum(self.density(y), RHO_MIN_INVERSION)
        per = vinv.mean() * self.period
        a = fluct_antideriv(vinv, self.period)
        a0 = a[0]
        frac = np.mod(s, self.period)
        nper = np.floor(s / self.period)
        return nper * per + vinv.mean() * frac + _periodic_interp(frac, y, a - a0, self.period)

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "frame": self.frame, "period": self.period,
             "description": self.description}
        if self.kind == "piecewise_constant":
            d.update(a_low=self.a_low, a_high=self.a_high, duty=self.duty)
        elif self.kind == "sinusoidal":
            d.update(mean=self.mean_density, amplitude=self.amplitude)
        elif self.kind == "random":
            d["random"] = dataclasses.asdict(self.random)
        else:
            d.update(lo=self.lo, spacing=self.spacing, samples=[float(v) for v in self.samples])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "MediumProfile":
        kind = d["kind"]
        frame = d.get("frame", "eulerian")
        period = float(d.get("period", 1.0))
        desc = d.get("description", "")
        if kind == "piecewise_constant":
            return cls.piecewise_constant(d["a_low"], d["a_high"], d.get("duty", 0.5), period, frame, desc)
        if kind == "sinusoidal":
            return cls.sinusoidal(d.get("mean", 1.0), d.get("amplitude", 1.0), period, frame, desc)
        if kind == "uniform":
            return cls.uniform(d.get("rho", 1.0), period)
        if kind == "random":
            return random_profile(RandomProfileParams(**d.get("random", {})))
        if kind == "tabulated":
            return cls.tabulated(d["samples"], d.get("lo", 0.0), d["spacing"], frame, desc)
        raise InvalidArgument(f"unknown profile kind {kind!r}")


def _periodic_interp(s, nodes, values, period):
    from scipy.interpolate import CubicSpline

    xs = np.concatenate((nodes, [period]))
    ys = np.concatenate((values, [values[0]]))
    return CubicSpline(xs, ys, bc_type="periodic")(s)


def write_profile_csv(path, profile: MediumProfile, coords) -> None:
    coords = np.asarray(coords, dtype=float)
    rho = profile.density(coords)
    with open(path, "w") as fh:
        fh.write(f"# profile: {profile.kind} frame={profile.frame} period={profile.period}\n")
        if profile.random is not None:
            fh.write(f"# seed: {profile.random.seed}\n")
        fh.write("coordinate,density\n")
        for c, r in zip(coords, rho):
            fh.write(f"{c:.17g},{r:.17g}\n")


# --------------------------------------------------------------------------
# random quasi-periodic background


def _smooth_periodic(a: np.ndarray, sweeps: int) -> np.ndarray:
    """Apply ``sweeps`` periodic sweeps of a <- a + 0.25*(a[i+1] - 2a[i] + a[i-1]).

    Each sweep multiplies Fourier mode k by cos^2(pi k/n), so the whole
    iteration is applied at once in spectral space.
    """
    if sweeps == 0:
        return a.copy()
    n = a.size
    theta = np.pi * np.arange(n // 2 + 1) / n
    c = np.abs(np.cos(theta))
    with np.errstate(divide="ignore"):
        gain = np.where(c > 0, np.exp(2.0 * sweeps * np.log(np.where(c > 0, c, 1.0))), 0.0)
    return sfft.irfft(sfft.rfft(a) * gain, n=n)


def _ou_path(rng, n, dx, K, sigma):
    xi = rng.random(n - 1)
    forcing = np.concatenate(([0.0], sigma * (xi - 0.5) * math.sqrt(dx)))
    return lfilter([1.0], [1.0, -(1.0 - K * dx)], forcing)


def random_modulations(params: RandomProfileParams):
    """Return cell centres and the amplitude/frequency modulations A, B."""
    n = params.grid_n
    dx = 2 * params.L / n
    chi = -params.L + (np.arange(n) + 0.5) * dx
    seq_a, seq_b = np.random.SeedSequence(params.seed).spawn(2)
    rng_a = np.random.Generator(np.random.Philox(seq_a))
    rng_b = np.random.Generator(np.random.Philox(seq_b))
    A = _smooth_periodic(_ou_path(rng_a, n, dx, params.K_A, params.sigma_A), params.n_smooth) + 1.0
    B = _smooth_periodic(_ou_path(rng_b, n, dx, params.K_B, params.sigma_B), params.n_smooth) + 1.0
    return chi, A, B


def random_profile(params: RandomProfileParams) -> MediumProfile:
    """Density 1 + amp*A(chi)*sin(2 pi B(chi) chi) on [-L, L), clipped and renormalized."""
    chi, A, B = random_modulations(params)
    rho = 1.0 + params.amplitude * A * np.sin(2 * np.pi * B * chi)
    if params.clip:
        rho = np.maximum(rho, params.rho_floor)
        rho = rho / rho.mean()
    elif np.any(rho <= 0):
        raise DomainError("random density is non-positive and clipping is disabled")
    dx = 2 * params.L / params.grid_n
    prof = MediumProfile.tabulated(rho, -params.L, dx, description=f"random seed={params.seed}")
    return dataclasses.replace(prof, kind="random", random=params)


# --------------------------------------------------------------------------
# coordinate maps


def _invert_increasing(fun, target, lo, hi, iters=200):
    """Vectorized bisection for fun(s) = target on [lo, hi] (fun non-decreasing)."""
    lo = np.broadcast_to(np.asarray(lo, dtype=float), target.shape).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), target.shape).copy()
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        below = fun(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= 4 * np.finfo(float).eps * np.maximum(1.0, np.abs(mid))):
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class CoordinateMap:
    """Rest-state map between Eulerian chi and Lagrangian mass x, anchored at x(0) = 0."""

    profile: MediumProfile
    chi_samples: np.ndarray
    x_samples: np.ndarray

    def to_lagrangian(self, chi):
        chi = np.asarray(chi, dtype=float)
        if self.profile.frame == "eulerian":
            return self.profile.integral(chi)
        return self._invert(self.profile.reciprocal_integral, chi)

    def to_eulerian(self, x):
        x = np.asarray(x, dtype=float)
        if self.profile.frame == "lagrangian":
            return self.profile.reciprocal_integral(x)
        return self._invert(self.profile.integral, x)

    def _invert(self, fun, target):
        prof = self.profile
        target = np.atleast_1d(target)
        per_native = prof.period
        per_image = float(fun(np.array(per_native)))
        n = np.floor(target / per_image)
        lo = n * per_native - per_native
        hi = (n + 1) * per_native + per_native
        return _invert_increasing(fun, target, lo, hi)


def mass_coordinate_map(profile: MediumProfile, chi_grid) -> CoordinateMap:
    chi = np.asarray(chi_grid, dtype=float)
    if profile.frame == "eulerian":
        x = profile.integral(chi)
    else:
        tmp = CoordinateMap(profile, chi, chi)
        x = tmp.to_lagrangian(chi)
    if np.any(np.diff(x) <= 0) and np.all(np.diff(chi) > 0):
        raise InternalError("mass coordinate is not strictly increasing (density sign violation)")
    return CoordinateMap(profile, chi, np.asarray(x))


def lagrangian_period(profile: MediumProfile) -> float:
    """Mass contained in one period of the profile."""
    if profile.frame == "eulerian":
        return profile.period_mass_native
    return profile.period


def specific_volume_cells(profile: MediumProfile, x_edges) -> np.ndarray:
    """Exact mass-cell averages of the rest specific volume v0 on Lagrangian cells."""
    x_edges = np.asarray(x_edges, dtype=float)
    if profile.frame == "lagrangian":
        chi = profile.reciprocal_integral(x_edges)
    else:
        chi = mass_coordinate_map(profile, np.array([0.0, 1.0])).to_eulerian(x_edges)
    return np.diff(chi) / np.diff(x_edges)


def sample_K(profile: MediumProfile, lagrangian_grid, eos: GasEOS | None = None, cell_average=False):
    """K = v*/v0 at Lagrangian points (or on cells when ``cell_average``)."""
    eos = eos or GasEOS()
    x = np.asarray(lagrangian_grid, dtype=float)
    if cell_average:
        return eos.v_star / specific_volume_cells(profile, x)
    if profile.frame == "lagrangian":
        rho = profile.density(x)
    else:
        cmap = mass_coordinate_map(profile, np.array([0.0, 1.0]))
        rho = profile.density(cmap.to_eulerian(x))
    rho = np.maximum(rho, RHO_MIN_INVERSION)
    if np.any(rho <= 0):
        raise DomainError("non-positive density")
    return eos.v_star * rho


# --------------------------------------------------------------------------
# homogenized coefficients


@dataclass(frozen=True)
class HomogCoeffs:
    mean_Kinv: float
    mu: float
    zeta: float
    nu: float
    delta: float = 1.0
    translation_even: bool = True

    @classmethod
    def from_values(cls, mean_Kinv, mu, zeta, delta=1.0):
        nu = zeta / mean_Kinv**3 - mu**2
        return cls(mean_Kinv, mu, zeta, nu, delta)

    def c_sq(self, eos: GasEOS) -> float:
        """Squared long-wave speed G(p*)/<K^-1>."""
        return float(eos.G(eos.p_star)) / self.mean_Kinv

    def with_delta(self, delta: float) -> "HomogCoeffs":
        return dataclasses.replace(self, delta=delta)

    def as_dict(self):
        return dataclasses.asdict(self)


def homog_coeffs(profile: MediumProfile, eos: GasEOS | None = None, n_quad: int = 2**14,
                 delta: float | None = None) -> HomogCoeffs:
    """Effective-medium constants <K^-1>, mu, zeta, nu of a profile.

    Integrals are taken over one period in the profile's native coordinate
    with the mass weight rho dchi for Eulerian profiles.  In that frame the
    integrand of the antiderivative, (v - <v>) rho, stays bounded even where
    the density touches zero.
    """
    eos = eos or GasEOS()
    if profile.kind in ("random", "tabulated"):
        rho = np.asarray(profile.samples, dtype=float)
        n = rho.size
        h = profile.spacing
    else:
        n = int(n_quad)
        h = profile.period / n
        offset = 0.5 if profile.is_piecewise else 0.0
        rho = profile.density((np.arange(n) + offset) * h)
    if np.any(rho < 0):
        raise DomainError("non-positive density in profile")
    vstar = eos.v_star
    if profile.frame == "eulerian":
        w = rho
        kinv = np.divide(1.0, rho, out=np.full_like(rho, np.inf), where=rho > 0) / vstar
        # K^-1 * weight, finite everywhere
        kinv_w = np.full_like(rho, 1.0 / vstar)
    else:
        if np.any(rho <= 0):
            raise DomainError("non-positive density in profile")
        w = np.ones_like(rho)
        kinv = 1.0 / (rho * vstar)
        kinv_w = kinv
    mass = math.fsum(w) * h
    mean_kinv = math.fsum(kinv_w) * h / mass
    g = kinv_w - mean_kinv * w  # {K^-1} dx/dnative
    if profile.is_piecewise:
        A_mid = np.concatenate(([0.0], np.cumsum(g)[:-1])) * h + 0.5 * g * h
        slope_var = (g * h) ** 2 / 12.0  # within-cell variance of the linear piece
        A_mean = math.fsum(w * A_mid) * h / mass
        F = A_mid - A_mean
        m2 = math.fsum(w * (F**2 + slope_var)) * h / mass
        m3 = math.fsum(kinv_w * (F**2 + slope_var)) * h / mass
    else:
        A = fluct_antideriv(g, length=profile.period)
        A_mean = math.fsum(w * A) * h / mass
        F = A - A_mean
        m2 = math.fsum(w * F**2) * h / mass
        m3 = math.fsum(kinv_w * F**2) * h / mass
    # averages above use x-units; the operators act on y = x/delta
    period = lagrangian_period(profile)
    mu = m2 / period**2 / mean_kinv**2
    zeta = m3 / period**2
    nu = zeta / mean_kinv**3 - mu**2
    if nu < 0:
        warnings.warn(f"nu = {nu:.3e} is negative for this profile", RuntimeWarning)
    d = period if delta is None else delta
    return HomogCoeffs(mean_kinv, mu, zeta, nu, d, profile.translation_even)
