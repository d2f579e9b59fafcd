"""Polytropic gas: entropy relations and the nonlinear stiffness G(p).

With reference state (p*, v*) and s* = 0 the Lagrangian sound speed obeys
``c^2 = K(x) G(p)`` where ``G(p) = c*^2 (p/p*)^(1+1/gamma)`` and
``c*^2 = gamma p*/v*``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidArgument


def _positive(name, value):
    arr = np.asarray(value, dtype=float)
    if not np.all(arr > 0):
        raise DomainError(f"{name} must be positive")
    return arr if arr.ndim else float(arr)


@dataclass(frozen=True)
class GasEOS:
    gamma: float = 1.4
    p_star: float = 1.0
    v_star: float = 1.0

    def __post_init__(self):
        if not self.gamma > 1:
            raise InvalidArgument("gamma must exceed 1")
        if not (self.p_star > 0 and self.v_star > 0):
            raise InvalidArgument("reference pressure and volume must be positive")

    @property
    def c_star_sq(self) -> float:
        return self.gamma * self.p_star / self.v_star

    @property
    def exponent(self) -> float:
        """Power of p in G, 1 + 1/gamma."""
        return 1.0 + 1.0 / self.gamma

    def G(self, p):
        p = _positive("pressure", p)
        return self.c_star_sq * (p / self.p_star) ** self.exponent

    def G_deriv(self, p, k: int = 1):
        """k-th derivative of G, 0 <= k <= 4."""
        if not 0 <= k <= 4:
            raise InvalidArgument("derivative order must be in 0..4")
        p = _positive("pressure", p)
        a = self.exponent
        coef = 1.0
        for j in range(k):
            coef *= a - j
        return self.c_star_sq * self.p_star ** (-a) * coef * p ** (a - k)

    def G_primitive(self, p):
        """Primitive of G vanishing at p = 0."""
        p = _positive("pressure", p)
        b = 2.0 + 1.0 / self.gamma
        return self.c_star_sq * self.p_star ** (-self.exponent) * p**b / b

    def entropy(self, p, v):
        """s = log((p/p*) (v/v*)^gamma), with s* = 0."""
        p = _positive("pressure", p)
        v = _positive("specific volume", v)
        return np.log(p / self.p_star) + self.gamma * np.log(v / self.v_star)

    def pressure_from(self, v, s):
        v = _positive("specific volume", v)
        return self.p_star * np.exp(s) * (self.v_star / v) ** self.gamma

    def background_entropy(self, v0):
        """Entropy of the rest state p = p*, v = v0(x)."""
        return self.gamma * np.log(_positive("specific volume", v0) / self.v_star)

    def sound_speeds(self, p, v):
        """Return (Lagrangian c, Eulerian c_E = v c)."""
        p = _positive("pressure", p)
        v = _positive("specific volume", v)
        c = np.sqrt(self.gamma * p / v)
        return c, v * c

    def energy_density(self, rho, u, p):
        return p / (self.gamma - 1.0) + 0.5 * rho * u * u

    def pressure_from_conserved(self, rho, mom, energy):
        return (self.gamma - 1.0) * (energy - 0.5 * mom * mom / rho)

    def as_dict(self):
        return {"gamma": self.gamma, "p_star": self.p_star, "v_star": self.v_star}


def sonic_speed(eos: GasEOS, mean_Kinv: float) -> float:
    """Long-wave speed sqrt(G(p*)/<K^-1>) of the homogenized medium."""
    return math.sqrt(eos.G(eos.p_star) / mean_Kinv)
