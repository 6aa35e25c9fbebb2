"""Windowed health indicators, badness and smoothed stress of the fast layer.

The window stores uniformly spaced samples of the fast state and its time
derivative. Three indicators in ``[0, 1]`` are read off it:

* freeze   ``exp(-kappa * mean |dx/dt|)``
* cycle    peak lagged autocorrelation of ``u`` scaled by ``1 - freeze``
* monotony ``exp(-gamma * R)`` with ``R`` the summed population variance

Their weighted sum is the badness ``B``; stress relaxes toward ``B`` with
time constant ``tau_s``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels


class EmptyWindowError(ValueError):
    pass


class HealthWindow:
    """Fixed-capacity ring buffer of ``(t, u, v, du, dv)`` samples.

    Samples are written twice into a buffer of length ``2 * capacity`` so the
    ordered window is always a contiguous slice (no copy per read).
    """

    def __init__(self, T_R: float = 100.0, dt_sample: float = 0.5):
        if not (T_R > 0 and dt_sample > 0):
            raise ValueError("T_R and dt_sample must be positive")
        self.T_R = float(T_R)
        self.dt_sample = float(dt_sample)
        self.capacity = int(math.ceil(self.T_R / self.dt_sample - 1e-9))
        self._buf = np.zeros((5, 2 * self.capacity))
        self._count = 0

    @classmethod
    def from_arrays(cls, t, u, v, du, dv, T_R=None, dt_sample=None) -> "HealthWindow":
        t = np.asarray(t, dtype=float)
        if dt_sample is None:
            dt_sample = float(t[1] - t[0]) if t.size > 1 else 1.0
        if T_R is None:
            T_R = dt_sample * max(t.size, 1)
        w = cls(T_R, dt_sample)
        for row in zip(t, u, v, du, dv):
            w.push(*row)
        return w

    def push(self, t: float, u: float, v: float, du: float, dv: float) -> None:
        i = self._count % self.capacity
        col = (t, u, v, du, dv)
        self._buf[:, i] = col
        self._buf[:, i + self.capacity] = col
        self._count += 1

    def __len__(self) -> int:
        return min(self._count, self.capacity)

    @property
    def full(self) -> bool:
        return self._count >= self.capacity

    def _view(self) -> np.ndarray:
        n = len(self)
        if self._count <= self.capacity:
            return self._buf[:, :n]
        start = self._count % self.capacity
        return self._buf[:, start : start + self.capacity]

    @property
    def t(self) -> np.ndarray:
        return self._view()[0]

    @property
    def u(self) -> np.ndarray:
        return self._view()[1]

    @property
    def v(self) -> np.ndarray:
        return self._view()[2]

    @property
    def du(self) -> np.ndarray:
        return self._view()[3]

    @property
    def dv(self) -> np.ndarray:
        return self._view()[4]

    def copy(self) -> "HealthWindow":
        w = HealthWindow.__new__(HealthWindow)
        w.T_R, w.dt_sample, w.capacity = self.T_R, self.dt_sample, self.capacity
        w._buf = self._buf.copy()
        w._count = self._count
        return w


@dataclass(frozen=True)
class Indicators:
    m_freeze: float
    m_cycle: float
    m_mono: float


@dataclass(frozen=True)
class BadnessWeights:
    # cyclic trapping dominates so that a persistent limit cycle scores worse
    # than the mixed windows that follow a regime switch
    w_f: float = 0.5
    w_c: float = 2.0
    w_m: float = 0.5

    def __post_init__(self):
        if min(self.w_f, self.w_c, self.w_m) < 0:
            raise ValueError("badness weights must be nonnegative")
        if self.w_f + self.w_c + self.w_m <= 0:
            raise ValueError("badness weights must not all be zero")

    @property
    def total(self) -> float:
        return self.w_f + self.w_c + self.w_m


@dataclass(frozen=True)
class StressState:
    s: float = 0.0
    tau_s: float = 50.0
    s_c: float = 0.9

    def __post_init__(self):
        if self.tau_s <= 0 or self.s_c <= 0:
            raise ValueError("tau_s and s_c must be positive")


@dataclass(frozen=True)
class HealthConfig:
    T_R: float = 100.0
    dt_sample: float = 0.5
    gamma: float = 1.0
    kappa: float = 2.0
    lag_min: float = 5.0
    lag_max: float = 50.0
    var_eps: float = 1e-8
    weights: BadnessWeights = BadnessWeights()

    def __post_init__(self):
        if not 0 < self.lag_min <= self.lag_max:
            raise ValueError("need 0 < lag_min <= lag_max")
        if self.gamma <= 0 or self.kappa <= 0:
            raise ValueError("gamma and kappa must be positive")

    @property
    def lag_samples(self):
        return (
            max(1, int(round(self.lag_min / self.dt_sample))),
            int(round(self.lag_max / self.dt_sample)),
        )


def _require(w: HealthWindow) -> None:
    if len(w) == 0:
        raise EmptyWindowError("health window is empty")


def activity_variance(w: HealthWindow) -> float:
    _require(w)
    return _kernels.pop_var(w.u) + _kernels.pop_var(w.v)


def monotony(r: float, gamma: float) -> float:
    if r < 0 or gamma <= 0:
        raise ValueError("need r >= 0 and gamma > 0")
    return math.exp(-gamma * r)


def mean_speed(w: HealthWindow) -> float:
    _require(w)
    return _kernels.mean_norm(w.du, w.dv)


def freeze_indicator(w: HealthWindow, kappa: float) -> float:
    return math.exp(-kappa * mean_speed(w))


def peak_autocorrelation(x, lag_min: int, lag_max: int) -> float:
    """Largest lagged correlation of the mean-removed series over a lag range.

    Each lag is normalised by the energies of the two overlapping segments,
    so a periodic signal scores close to 1 at its period.
    """
    x = np.ascontiguousarray(x, dtype=float)
    return float(_kernels.peak_autocorr(x, int(lag_min), int(lag_max)))


def cycle_indicator(
    w: HealthWindow,
    lag_min: int,
    lag_max: int,
    m_freeze: float | None = None,
    kappa: float = 2.0,
    var_eps: float = 1e-8,
) -> float:
    """Periodicity of ``u`` gated by activity; lags are in samples."""
    if len(w) < 2 * lag_max:
        return 0.0
    u = w.u
    if _kernels.pop_var(u) < var_eps:
        return 0.0
    if m_freeze is None:
        m_freeze = freeze_indicator(w, kappa)
    c = min(max(peak_autocorrelation(u, lag_min, lag_max), 0.0), 1.0)
    return c * (1.0 - m_freeze)


def indicators(w: HealthWindow, cfg: HealthConfig = HealthConfig()) -> Indicators:
    """All three indicators; before the window fills, ``m_cycle`` is 0."""
    mf = freeze_indicator(w, cfg.kappa)
    lo, hi = cfg.lag_samples
    mc = cycle_indicator(w, lo, hi, mf, var_eps=cfg.var_eps) if w.full else 0.0
    mm = monotony(activity_variance(w), cfg.gamma)
    return Indicators(mf, mc, mm)


def badness(m: Indicators, w: BadnessWeights = BadnessWeights()) -> float:
    return w.w_f * m.m_freeze + w.w_c * m.m_cycle + w.w_m * m.m_mono


def stress_step(st: StressState, b: float, dt: float) -> StressState:
    """Exact update of ``dS/dt = (B - S) / tau_s`` with ``B`` held over ``dt``."""
    if not 0 < dt < st.tau_s:
        raise ValueError(f"stress step needs 0 < dt < tau_s, got dt={dt}, tau_s={st.tau_s}")
    s = b + (st.s - b) * math.exp(-dt / st.tau_s)
    return StressState(s, st.tau_s, st.s_c)
