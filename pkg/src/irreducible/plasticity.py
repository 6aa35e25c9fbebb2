"""Stress-gated slow dynamics of the structural parameters ``theta``.

Three modes share the radial potential ``U = k/2 (rho - rho0)^2``:

* ``GRADIENT_ONLY``   gate * (-eta grad U)
* ``CURL_AUGMENTED``  gate * (-eta grad U + omega (-theta2, theta1))
* ``EXTERNAL_SWEEP``  -eta grad U + omega_sweep (-theta2, theta1), stress ignored
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

RHO_EPS = 1e-9


class Mode(enum.Enum):
    GRADIENT_ONLY = "gradient"
    CURL_AUGMENTED = "curl"
    EXTERNAL_SWEEP = "sweep"


class StructParams(NamedTuple):
    theta1: float
    theta2: float

    @property
    def rho(self) -> float:
        return math.hypot(self.theta1, self.theta2)

    @property
    def phi(self) -> float:
        return math.atan2(self.theta2, self.theta1)

    @classmethod
    def from_polar(cls, rho: float, phi: float) -> "StructParams":
        return cls(rho * math.cos(phi), rho * math.sin(phi))


@dataclass(frozen=True)
class PlasticityConfig:
    mode: Mode = Mode.CURL_AUGMENTED
    eta: float = 0.05
    omega: float = 0.01
    k: float = 1.0
    rho0: float = 0.8
    s_c: float = 0.9
    # None selects the Heaviside gate; a positive value the logistic one.
    smooth_beta: Optional[float] = None
    omega_sweep: float = 0.0006

    def __post_init__(self):
        if self.eta <= 0 or self.k <= 0 or self.rho0 <= 0:
            raise ValueError("eta, k and rho0 must be positive")
        if self.smooth_beta is not None and self.smooth_beta <= 0:
            raise ValueError("smooth_beta must be positive")

    @property
    def effective_omega(self) -> float:
        if self.mode is Mode.GRADIENT_ONLY:
            return 0.0
        if self.mode is Mode.EXTERNAL_SWEEP:
            return self.omega_sweep
        return self.omega


def potential_U(t, k: float = 1.0, rho0: float = 0.8) -> float:
    rho = math.hypot(t[0], t[1])
    return 0.5 * k * (rho - rho0) ** 2


def grad_U(t, k: float = 1.0, rho0: float = 0.8, rho_eps: float = RHO_EPS) -> np.ndarray:
    rho = math.hypot(t[0], t[1])
    if rho < rho_eps:
        return np.zeros(2)
    c = k * (rho - rho0) / rho
    return np.array([c * t[0], c * t[1]])


def curl_field(t, omega: float) -> np.ndarray:
    return np.array([-omega * t[1], omega * t[0]])


def gate(s: float, cfg: PlasticityConfig) -> float:
    """Heaviside gate (closed at ``s == s_c``) or its logistic relaxation."""
    if cfg.smooth_beta is None:
        return 1.0 if s > cfg.s_c else 0.0
    z = cfg.smooth_beta * (s - cfg.s_c)
    # split branches keep exp() from overflowing
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def plasticity_rhs(t, s: float, cfg: PlasticityConfig, g: Optional[float] = None) -> np.ndarray:
    """Velocity of ``theta``.

    ``g`` overrides the gate value, which is how the coupled loop applies a
    gate sampled at the start of a step. It is ignored in sweep mode.
    """
    descent = -cfg.eta * grad_U(t, cfg.k, cfg.rho0)
    if cfg.mode is Mode.EXTERNAL_SWEEP:
        return descent + curl_field(t, cfg.omega_sweep)
    if g is None:
        g = gate(s, cfg)
    if cfg.mode is Mode.GRADIENT_ONLY:
        return g * descent
    return g * (descent + curl_field(t, cfg.omega))
