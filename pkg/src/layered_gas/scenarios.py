"""Run configurations, initial-condition builders and the named scenario registry."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.polynomial.legendre import leggauss

from .eos import GasEOS
from .errors import InvalidArgument
from .medium import (MediumProfile, RandomProfileParams, homog_coeffs, mass_coordinate_map,
                     random_profile)
from .records import FieldState

SOLVERS = ("fv_euler", "fv_psystem", "spectral_euler", "spectral_homog")
IC_KINDS = ("gaussian_pulse", "smooth_ic", "shock_tube", "traveling_wave", "harmonic")

PAPER_MEDIUM = MediumProfile.piecewise_constant(0.25, 1.75, 0.5, 1.0, "eulerian",
                                                "two-phase layers 1/4 and 7/4")
MASS_LAYERS = MediumProfile.piecewise_constant(0.25, 1.75, 1 / 8, 1.0, "lagrangian",
                                               "two-phase layers 1/4 and 7/4 with masses 1/8 and 7/8")
COSINE_MEDIUM = MediumProfile.sinusoidal(1.0, 1.0, 1.0, "eulerian", "1 + cos(2 pi chi)")


@dataclass
class ScenarioConfig:
    """Everything needed to reproduce one solver run.

    ``frame`` selects the grid of ``fv_euler`` runs: the Eulerian position
    chi or the mass coordinate x.  Domain bounds are given in that
    coordinate.  Spectral runs need a symmetric periodic domain.
    """

    solver: str
    medium: MediumProfile
    ic: dict
    lo: float
    hi: float
    dx: float
    t_end: float
    output_times: tuple = ()
    frame: str = "eulerian"
    bc: str = "periodic"
    eos: GasEOS = field(default_factory=GasEOS)
    cfl: Optional[float] = None
    seed: Optional[int] = None
    options: dict = field(default_factory=dict)
    name: str = "custom"

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.solver not in SOLVERS:
            raise InvalidArgument(f"unknown solver {self.solver!r}")
        kind = self.ic.get("kind")
        if kind not in IC_KINDS:
            raise InvalidArgument(f"unknown initial condition {kind!r}")
        if not (self.hi > self.lo and self.dx > 0 and self.t_end > 0):
            raise InvalidArgument("need hi > lo, dx > 0 and t_end > 0")
        if self.frame not in ("eulerian", "lagrangian"):
            raise InvalidArgument(f"unknown frame {self.frame!r}")
        if self.solver == "fv_psystem" and self.frame != "lagrangian":
            raise InvalidArgument("the p-system runs on the Lagrangian grid")
        if self.solver.startswith("spectral"):
            if abs(self.lo + self.hi) > 1e-12 * self.hi or self.bc != "periodic":
                raise InvalidArgument("spectral runs need a periodic domain [-L, L]")
        amp = self.ic.get("amplitude", 0.0)
        ambient = self.ic.get("ambient", self.eos.p_star)
        if kind in ("gaussian_pulse", "smooth_ic") and not ambient + min(amp, 0.0) > 0:
            raise InvalidArgument("initial pressure must stay positive")
        if kind == "shock_tube" and not (self.ic["p_l"] > 0 and self.ic["p_r"] > 0):
            raise InvalidArgument("shock-tube pressures must be positive")
        for t in self.output_times:
            if not 0 <= t <= self.t_end:
                raise InvalidArgument("output times must lie in [0, t_end]")
        return self

    @property
    def n_cells(self) -> int:
        n = int(round((self.hi - self.lo) / self.dx))
        return n + (n % 2) if self.solver.startswith("spectral") else n

    @property
    def grid_spacing(self) -> float:
        return (self.hi - self.lo) / self.n_cells

    @property
    def centers(self) -> np.ndarray:
        return self.lo + (np.arange(self.n_cells) + 0.5) * self.grid_spacing

    @property
    def edges(self) -> np.ndarray:
        return self.lo + np.arange(self.n_cells + 1) * self.grid_spacing

    def to_dict(self) -> dict:
        return {
            "name": self.name, "solver": self.solver, "medium": self.medium.to_dict(),
            "ic": dict(self.ic), "lo": self.lo, "hi": self.hi, "dx": self.dx,
            "t_end": self.t_end, "output_times": list(self.output_times), "frame": self.frame,
            "bc": self.bc, "eos": self.eos.as_dict(), "cfl": self.cfl, "seed": self.seed,
            "options": dict(self.options),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        d = dict(d)
        d["medium"] = MediumProfile.from_dict(d["medium"])
        d["eos"] = GasEOS(**d.get("eos", {}))
        d["output_times"] = tuple(d.get("output_times", ()))
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise InvalidArgument(f"unknown configuration keys {sorted(unknown)}")
        return cls(**d)

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)


def with_parameter(cfg: ScenarioConfig, name: str, value) -> ScenarioConfig:
    """Return a copy with one addressable parameter changed.

    Addressable names: ``dx``, ``t_end``, ``cfl``, ``seed``, ``n_smooth``,
    any initial-condition key (``amplitude``, ``p_l``, ``V``, ...) and
    ``options.<key>``.
    """
    if name in ("dx", "t_end", "cfl"):
        return cfg.replace(**{name: float(value)})
    if name in ("seed", "n_smooth"):
        if cfg.medium.random is None:
            raise InvalidArgument(f"{name} only applies to random media")
        key = "seed" if name == "seed" else "n_smooth"
        params = dataclasses.replace(cfg.medium.random, **{key: int(value)})
        seed = int(value) if name == "seed" else cfg.seed
        return cfg.replace(medium=random_profile(params), seed=seed)
    if name.startswith("options."):
        opts = dict(cfg.options)
        opts[name.split(".", 1)[1]] = value
        return cfg.replace(options=opts)
    if name in cfg.ic or name in ("amplitude", "p_l", "p_r", "V", "width_sq"):
        ic = dict(cfg.ic)
        ic[name] = float(value)
        return cfg.replace(ic=ic)
    raise InvalidArgument(f"parameter {name!r} is not addressable")


# --------------------------------------------------------------------------
# initial conditions


def _gauss_cumulative(f, edges, sub: int = 8, order: int = 6):
    """Integral of f from edges[0] to every edge by composite Gauss-Legendre."""
    nodes, weights = leggauss(order)
    fine = np.linspace(edges[0], edges[-1], (edges.size - 1) * sub + 1)
    a, b = fine[:-1], fine[1:]
    half = 0.5 * (b - a)
    pts = 0.5 * (a + b)[:, None] + half[:, None] * nodes[None, :]
    cell = (f(pts) * weights).sum(axis=1) * half
    cum = np.concatenate(([0.0], np.cumsum(cell)))
    return cum[::sub]


def _pressure_function(ic: dict, eos: GasEOS):
    kind = ic["kind"]
    if kind in ("gaussian_pulse", "smooth_ic"):
        ambient = ic.get("ambient", eos.p_star)
        amp, w = ic["amplitude"], ic["width_sq"]
        return lambda s: ambient + amp * np.exp(-np.asarray(s) ** 2 / w)
    if kind == "shock_tube":
        pl, pr, sc = ic["p_l"], ic["p_r"], ic.get("scale", 2.0)
        return lambda s: 0.5 * (1 - np.tanh(np.asarray(s) / sc)) * pl + 0.5 * (1 + np.tanh(np.asarray(s) / sc)) * pr
    raise InvalidArgument(f"no pressure formula for {kind!r}")


def _invert_monotone(cum_edges, edges, targets):
    return np.interp(targets, cum_edges, edges)


def pulse_rest_coordinate(pfun, eos: GasEOS, X):
    """Rest mass coordinate x0 of the particles at true mass X for a pulse initial state.

    The pulse is prescribed on x0 with density scaled by p^(1/gamma), so the
    true mass is X = int_0^x0 p^(1/gamma) dx0'.
    """
    X = np.asarray(X, dtype=float)
    span = float(np.max(np.abs(X))) if X.size else 1.0
    pad = 0.25 * span + 10.0
    x0_nodes = np.linspace(-span - pad, span + pad, 8 * max(X.size, 1024) + 1)
    X_nodes = _gauss_cumulative(lambda s: pfun(s) ** (1.0 / eos.gamma), x0_nodes)
    X_nodes -= np.interp(0.0, x0_nodes, X_nodes)
    return _invert_monotone(X_nodes, x0_nodes, X)


def euler_initial_state(cfg: ScenarioConfig) -> FieldState:
    """Initial (rho, u, p) or (v, u, p) for Euler runs in the configured frame.

    ``gaussian_pulse`` prescribes p on the rest mass coordinate x0 and scales
    the background density by p^(1/gamma).  For media given on the mass
    coordinate the layering is attached to the particles, so x0 is the true
    mass coordinate itself.  ``smooth_ic`` and ``shock_tube``
    prescribe p on the Eulerian position and keep the background density.
    On the mass grid the coordinate is the true mass of the initial state,
    and cell values of v are exact mass averages.
    """
    prof, eos, ic = cfg.medium, cfg.eos, cfg.ic
    kind = ic["kind"]
    pfun = _pressure_function(ic, eos)
    edges, centers = cfg.edges, cfg.centers
    cmap = mass_coordinate_map(prof, np.array([0.0, 1.0]))
    pulse = kind == "gaussian_pulse"
    remap = pulse and prof.frame == "eulerian"
    if cfg.frame == "eulerian":
        rho_hat = np.diff(cmap.to_lagrangian(edges)) / np.diff(edges)
        if pulse:
            p = pfun(cmap.to_lagrangian(centers))
            rho = p ** (1.0 / eos.gamma) * rho_hat
        else:
            p = pfun(centers)
            rho = rho_hat
        return FieldState(0.0, centers, "eulerian", {"rho": rho, "u": np.zeros_like(p), "p": p})
    if pulse:
        x0 = pulse_rest_coordinate(pfun, eos, edges) if remap else edges
        x0_c = pulse_rest_coordinate(pfun, eos, centers) if remap else centers
        p = pfun(x0_c)
        v_hat = np.diff(cmap.to_eulerian(x0)) / np.diff(edges)
        v = v_hat * (p / eos.p_star) ** (-1.0 / eos.gamma) if not remap else v_hat
    else:
        chi = cmap.to_eulerian(edges)
        v = np.diff(chi) / np.diff(edges)
        p = pfun(cmap.to_eulerian(centers))
    return FieldState(0.0, centers, "lagrangian", {"v": v, "u": np.zeros_like(p), "p": p})


def psystem_stiffness(state: FieldState, eos: GasEOS) -> np.ndarray:
    """K matching the entropy of an initial Lagrangian state: p (K v / v*)^gamma = p*."""
    return eos.v_star / state.v * (eos.p_star / state.p) ** (1.0 / eos.gamma)


def spectral_initial_state(cfg: ScenarioConfig) -> FieldState:
    """Point values on the staggered periodic grid for the primitive solver."""
    x = cfg.centers
    ic, eos = cfg.ic, cfg.eos
    pfun = _pressure_function(ic, eos)
    rho = np.asarray(cfg.medium.density(x), dtype=float)
    if ic["kind"] == "gaussian_pulse":
        cmap = mass_coordinate_map(cfg.medium, np.array([0.0, 1.0]))
        p = pfun(cmap.to_lagrangian(x))
        rho = rho * p ** (1.0 / eos.gamma)
    else:
        p = pfun(x)
    return FieldState(0.0, x, "eulerian", {"rho": rho, "u": np.zeros_like(x), "p": p})


def homog_initial_state(cfg: ScenarioConfig):
    """Initial data of the homogenized system on the mass coordinate."""
    from .spectral import HomogState

    eos, ic, opts = cfg.eos, cfg.ic, cfg.options
    coeffs = homog_coeffs(cfg.medium, eos)
    if "delta" in opts:
        coeffs = coeffs.with_delta(float(opts["delta"]))
    x = cfg.centers
    kind = ic["kind"]
    if kind == "gaussian_pulse":
        pfun = _pressure_function(ic, eos)
        p = pfun(pulse_rest_coordinate(pfun, eos, x) if cfg.medium.frame == "eulerian" else x)
        u = np.zeros_like(x)
    elif kind in ("smooth_ic", "shock_tube"):
        p = _pressure_function(ic, eos)(x)
        u = np.zeros_like(x)
    elif kind == "harmonic":
        k = 2 * math.pi * ic.get("mode", 1) / (cfg.hi - cfg.lo)
        p = eos.p_star + ic["amplitude"] * np.cos(k * x)
        u = np.zeros_like(x)
    elif kind == "traveling_wave":
        p, u = traveling_wave_fields(cfg, coeffs, x)
    else:
        raise InvalidArgument(f"initial condition {kind!r} is not available for the homogenized solver")
    return HomogState(p, u, x, coeffs, eos, 0.0,
                      include_delta4=bool(opts.get("include_delta4", True)),
                      include_N=bool(opts.get("include_N", False)),
                      N_beta=float(opts.get("N_beta", 0.0)),
                      freeze_Gprime=bool(opts.get("freeze_Gprime", False)))


def traveling_wave_fields(cfg: ScenarioConfig, coeffs, x):
    """Second- or fourth-order traveling wave centred at ``ic['x0']``, sampled on x."""
    from scipy.interpolate import CubicSpline

    from .traveling_wave import traveling_wave

    ic = cfg.ic
    order = ic.get("order", "second")
    sol = traveling_wave(ic["V"], coeffs, cfg.eos, order=order)
    xi = sol.xi + ic.get("x0", 0.0)
    inside = (x >= xi[0]) & (x <= xi[-1])
    spl = CubicSpline(xi, sol.u)
    u = np.zeros_like(x)
    u[inside] = spl(x[inside])
    return cfg.eos.p_star + sol.V * u, u


# --------------------------------------------------------------------------
# the named scenarios


@dataclass
class Scenario:
    """A named experiment: one or more member runs and how to read them.

    ``sweep`` names a parameter and its values; every member is run for each
    value.  ``reference`` is the member the others are compared against.
    """

    name: str
    description: str
    members: dict
    sweep: Optional[tuple] = None
    reference: Optional[str] = None
    notes: str = ""


def _pulse(amplitude):
    return {"kind": "gaussian_pulse", "amplitude": amplitude, "width_sq": 25.0}


def _times(t_end, n=4):
    return tuple(t_end * (j + 1) / n for j in range(n))


def _comparison_members(amplitude, L, t_end, dx, outs):
    opts = {"frame_map": "wall"}
    return {
        "euler": ScenarioConfig("fv_euler", MASS_LAYERS, _pulse(amplitude), 0.0, L, dx, t_end,
                                outs, "lagrangian", "wall_outflow", options=opts),
        "psystem": ScenarioConfig("fv_psystem", MASS_LAYERS, _pulse(amplitude), 0.0, L, dx, t_end,
                                  outs, "lagrangian", "wall_outflow", options=opts),
        "homogenized": ScenarioConfig("spectral_homog", MASS_LAYERS, _pulse(amplitude), -L, L, 1 / 8,
                                      t_end, outs, "lagrangian", "periodic"),
    }


def scenario(name: str, paper_scale: bool = False) -> Scenario:
    """Build a registered scenario; desk scale unless ``paper_scale``."""
    if name not in SCENARIOS:
        raise InvalidArgument(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}")
    sc = SCENARIOS[name](paper_scale)
    for label, cfg in sc.members.items():
        cfg.name = f"{name}/{label}"
    return sc


def _motivating(paper):
    L, t_end = (800.0, 400.0) if paper else (400.0, 200.0)
    cfg = ScenarioConfig("fv_euler", PAPER_MEDIUM, _pulse(0.15), 0.0, L, 1 / 16, t_end,
                         _times(t_end), "eulerian", "wall_outflow", options={"frame_map": "wall"})
    return Scenario("motivating", "pulse in the two-phase layered medium; solitary-wave train",
                    {"euler": cfg})


def _constant(paper):
    sc = _motivating(paper)
    cfg = sc.members["euler"].replace(medium=MediumProfile.uniform(0.5))
    return Scenario("constant-background", "same pulse over uniform density 1/2; N-wave",
                    {"euler": cfg})


def _moderate(paper):
    L, t_end = (600.0, 400.0) if paper else (300.0, 200.0)
    return Scenario("moderate", "Euler, p-system and homogenized model for the 3/20 pulse",
                    _comparison_members(0.15, L, t_end, 1 / 32, _times(t_end)), reference="psystem")


def _large(paper):
    L, t_end = (600.0, 400.0) if paper else (300.0, 200.0)
    return Scenario("large-amplitude", "as moderate with pulse amplitude 1/2",
                    _comparison_members(0.5, L, t_end, 1 / 32, _times(t_end)), reference="psystem")


def _smooth_ic_members(L, t_end, dx):
    ic = {"kind": "smooth_ic", "amplitude": 0.15, "width_sq": 16.0, "ambient": 1.0}
    outs = (0.0,) + _times(t_end)
    return {
        "fv": ScenarioConfig("fv_euler", COSINE_MEDIUM, ic, -L, L, dx, t_end, outs, "eulerian",
                             "periodic", options={"entropy_every": 20}),
        "spectral": ScenarioConfig("spectral_euler", COSINE_MEDIUM, ic, -L, L, dx, t_end, outs,
                                   "eulerian", "periodic", cfl=0.9, options={"entropy_every": 200}),
    }


def _smooth_ic(paper):
    L, t_end = (256.0, 200.0) if paper else (128.0, 100.0)
    dxs = (1 / 16, 1 / 32, 1 / 50, 1 / 100, 1 / 200) if paper else (1 / 16, 1 / 32, 1 / 50, 1 / 100)
    return Scenario("smooth-ic-entropy", "total entropy change under refinement, FV and pseudospectral",
                    _smooth_ic_members(L, t_end, 1 / 16), sweep=("dx", dxs))


def _shock_tube_cfg(p_l, dx, t_end=15.0, L=40.0):
    ic = {"kind": "shock_tube", "p_l": p_l, "p_r": 1.0, "scale": 2.0}
    return ScenarioConfig("fv_euler", COSINE_MEDIUM, ic, -L, L, dx, t_end,
                          tuple(np.linspace(0, t_end, 31)), "lagrangian", "outflow",
                          options={"lep": True})


def _shock_sweep(paper):
    return Scenario("shock-tube-sweep", "smoothed shock tubes in the 1 + cos medium, t = 15",
                    {"fv": _shock_tube_cfg(1.25, 1 / 100 if paper else 1 / 50)},
                    sweep=("p_l", (1.25, 1.5, 1.75, 2.0, 2.25, 2.5)))


def _lep(paper):
    return Scenario("lep-refinement", "local entropy production maxima under mesh refinement",
                    {"weak": _shock_tube_cfg(1.25, 1 / 25), "strong": _shock_tube_cfg(2.5, 1 / 25)},
                    sweep=("dx", (1 / 25, 1 / 50, 1 / 100, 1 / 200)))


def _tw_compare(paper):
    L = 120.0 if paper else 60.0
    medium = MediumProfile.piecewise_constant(0.25, 1.75, 0.5, 1.0, "lagrangian",
                                              "two-phase layers on the mass coordinate")
    ic = {"kind": "traveling_wave", "V": 1.222, "order": "second", "x0": -L / 2}
    cfg = ScenarioConfig("spectral_homog", medium, ic, -L, L, 1 / 32, 50.0, tuple(np.linspace(0, 50, 26)),
                         "lagrangian", "periodic", options={"include_delta4": False})
    reduced = cfg.replace(options={"include_delta4": False, "freeze_Gprime": True})
    return Scenario("traveling-wave-compare",
                    "second-order traveling wave advanced by the delta^2 model, with G' as in the PDE "
                    "and frozen at p* as in the traveling-wave reduction",
                    {"delta2": cfg, "reduced": reduced})


def _random(paper):
    L, t_end = (256.0, 200.0) if paper else (64.0, 150.0)
    n = int(2 * L * 200)
    ic = {"kind": "smooth_ic", "amplitude": 0.15, "width_sq": 16.0, "ambient": 1.0}
    members = {}
    for label, seed, smooth in (("smooth", 0, 320000), ("rough", 1, 20000)):
        params = RandomProfileParams(1.0, 1.0, 0.24, 0.015, smooth, seed, n, L)
        members[label] = ScenarioConfig("fv_euler", random_profile(params), ic, -L, L, 1 / 200, t_end,
                                        (0.0, t_end), "lagrangian", "periodic", seed=seed,
                                        options={"entropy_every": 50})
    members["control"] = members["rough"].replace(medium=MediumProfile.uniform(1.0), seed=None)
    return Scenario("random-background", "pulse in quasi-periodic random media and a uniform control",
                    members)


SCENARIOS = {
    "motivating": _motivating,
    "constant-background": _constant,
    "moderate": _moderate,
    "large-amplitude": _large,
    "smooth-ic-entropy": _smooth_ic,
    "shock-tube-sweep": _shock_sweep,
    "lep-refinement": _lep,
    "traveling-wave-compare": _tw_compare,
    "random-background": _random,
}
