"""FitzHugh-Nagumo fast layer, regime labels and a brute-force bifurcation scan."""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from . import _kernels
from .integrator import integrate


class Regime(enum.Enum):
    QUIESCENT = "Q"
    OSCILLATORY = "O"
    TRANSITIONAL = "T"

    @property
    def code(self) -> str:
        return self.value

    @classmethod
    def from_code(cls, code: str) -> "Regime":
        return cls(code)


class FastState(NamedTuple):
    u: float
    v: float


@dataclass(frozen=True)
class FhnParams:
    a: float = 0.7
    b: float = 0.8
    epsilon: float = 0.08
    theta1: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.epsilon <= 0.2:
            raise ValueError(f"epsilon must lie in (0, 0.2], got {self.epsilon}")
        if not self.b > 0.0:
            raise ValueError(f"b must be positive, got {self.b}")

    def with_theta1(self, theta1: float) -> "FhnParams":
        return FhnParams(self.a, self.b, self.epsilon, float(theta1))


def fhn_rhs(s, p: FhnParams) -> FastState:
    u, v = s
    return FastState(u - u**3 / 3.0 - v + p.theta1, p.epsilon * (u + p.a - p.b * v))


@dataclass(frozen=True)
class ClassifierConfig:
    """Thresholds on the windowed standard deviation of ``u``.

    Values inside ``[sigma_lo, sigma_hi]`` are labelled transitional, so
    reaching the opposite regime always requires crossing the far threshold.
    """

    sigma_lo: float = 0.15
    sigma_hi: float = 0.35
    min_samples: int = 200

    def __post_init__(self):
        if not 0.0 <= self.sigma_lo < self.sigma_hi:
            raise ValueError("need 0 <= sigma_lo < sigma_hi")
        if self.min_samples < 1:
            raise ValueError("min_samples must be >= 1")


def classify_regime(window, cfg: ClassifierConfig = ClassifierConfig()) -> Regime:
    """Label a window of fast-layer samples.

    ``window`` is either a sequence of ``(u, v)`` pairs or a 1-D array of
    ``u`` values. Windows shorter than ``cfg.min_samples`` are warm-up and
    are labelled transitional.
    """
    arr = np.asarray(window, dtype=float)
    u = arr[:, 0] if arr.ndim == 2 else arr
    if u.size < cfg.min_samples:
        return Regime.TRANSITIONAL
    sd = math.sqrt(_kernels.pop_var(np.ascontiguousarray(u)))
    if sd < cfg.sigma_lo:
        return Regime.QUIESCENT
    if sd > cfg.sigma_hi:
        return Regime.OSCILLATORY
    return Regime.TRANSITIONAL


def simulate_fhn(
    p: FhnParams, x0=(0.0, 0.0), t_end: float = 1000.0, dt: float = 0.02, every: int = 1
) -> Tuple[np.ndarray, np.ndarray]:
    """Integrate the fast layer alone; return sample times and ``(n, 2)`` states."""
    n = int(round(t_end / dt))
    times: List[float] = []
    states: List[np.ndarray] = []

    def observe(i, t, x):
        if i % every == 0:
            times.append(t)
            states.append(x.copy())

    integrate(lambda x: np.array(fhn_rhs(x, p)), x0, dt, n, observe)
    return np.array(times), np.array(states).reshape(-1, 2)


@dataclass(frozen=True)
class ScanConfig:
    burn_in: float = 500.0
    measure: float = 500.0
    amp_th: float = 1.0
    dt: float = 0.05
    x0: Tuple[float, float] = (0.0, 0.0)


@dataclass
class ScanResult:
    theta1: np.ndarray
    amplitude: np.ndarray
    labels: List[Regime]
    # (left grid value, right grid value) where the label changes.
    onsets: List[Tuple[float, float]] = field(default_factory=list)
    offsets: List[Tuple[float, float]] = field(default_factory=list)

    @property
    def onset(self) -> Optional[float]:
        """Midpoint of the first quiescent-to-oscillatory interval, if any."""
        if not self.onsets:
            return None
        lo, hi = self.onsets[0]
        return 0.5 * (lo + hi)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["theta1", "label", "amplitude"])
            for th, lab, amp in zip(self.theta1, self.labels, self.amplitude):
                w.writerow([f"{th:.9g}", lab.code, f"{amp:.9g}"])


def asymptotic_amplitude(p: FhnParams, cfg: ScanConfig = ScanConfig()) -> float:
    """Peak-to-peak ``u`` after discarding ``cfg.burn_in`` time units."""
    n_burn = int(round(cfg.burn_in / cfg.dt))
    n_meas = int(round(cfg.measure / cfg.dt))
    return float(
        _kernels.fhn_amplitude(
            p.a, p.b, p.epsilon, p.theta1, cfg.x0[0], cfg.x0[1], cfg.dt, n_burn, n_meas
        )
    )


def bifurcation_scan(
    theta1_range: Tuple[float, float],
    n_points: int,
    p: FhnParams = FhnParams(),
    cfg: ScanConfig = ScanConfig(),
) -> ScanResult:
    """Label a uniform grid of ``theta1`` values by asymptotic amplitude."""
    lo, hi = float(theta1_range[0]), float(theta1_range[1])
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    if not hi > lo:
        raise ValueError(f"empty theta1 range [{lo}, {hi}]")
    grid = np.linspace(lo, hi, n_points)
    amps = np.array([asymptotic_amplitude(p.with_theta1(th), cfg) for th in grid])
    labels = [Regime.OSCILLATORY if a > cfg.amp_th else Regime.QUIESCENT for a in amps]
    res = ScanResult(grid, amps, labels)
    for i in range(n_points - 1):
        a, b = labels[i], labels[i + 1]
        if a is Regime.QUIESCENT and b is Regime.OSCILLATORY:
            res.onsets.append((float(grid[i]), float(grid[i + 1])))
        elif a is Regime.OSCILLATORY and b is Regime.QUIESCENT:
            res.offsets.append((float(grid[i]), float(grid[i + 1])))
    return res


def label_changes(labels: Sequence[Regime]) -> int:
    return sum(1 for a, b in zip(labels, labels[1:]) if a is not b)
