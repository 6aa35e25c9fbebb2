"""Numerical certificates for scalar descent and rotation of planar flows.

Descent of a *given* candidate ``V`` can be checked on a grid; that no such
``V`` exists cannot be decided by sampling. The curl grid is the positive
witness of a non-gradient component: a gradient field has zero planar curl.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .integrator import integrate


class NonFiniteFieldError(ValueError):
    def __init__(self, name: str, point: Tuple[float, float]):
        self.point = point
        super().__init__(f"{name} is not finite at {point}")


class Rectangle(NamedTuple):
    x1_lo: float
    x1_hi: float
    x2_lo: float
    x2_hi: float

    def grid(self, n: int) -> Tuple[np.ndarray, np.ndarray]:
        if n < 2:
            raise ValueError("grid resolution must be >= 2 per axis")
        if not (self.x1_hi > self.x1_lo and self.x2_hi > self.x2_lo):
            raise ValueError(f"empty domain {tuple(self)}")
        return np.meshgrid(
            np.linspace(self.x1_lo, self.x1_hi, n),
            np.linspace(self.x2_lo, self.x2_hi, n),
            indexing="ij",
        )


@dataclass(frozen=True)
class VectorField2D:
    fn: Callable[[float, float], Sequence[float]]
    name: str = "F"

    def __call__(self, x1: float, x2: float) -> Tuple[float, float]:
        f1, f2 = self.fn(x1, x2)
        if not (math.isfinite(f1) and math.isfinite(f2)):
            raise NonFiniteFieldError(self.name, (x1, x2))
        return float(f1), float(f2)


@dataclass(frozen=True)
class ScalarField2D:
    fn: Callable[[float, float], float]
    name: str = "V"

    def __call__(self, x1: float, x2: float) -> float:
        val = float(self.fn(x1, x2))
        if not math.isfinite(val):
            raise NonFiniteFieldError(self.name, (x1, x2))
        return val

    def gradient(self, x1: float, x2: float, h: float = 1e-5) -> Tuple[float, float]:
        g1 = (self(x1 + h, x2) - self(x1 - h, x2)) / (2 * h)
        g2 = (self(x1, x2 + h) - self(x1, x2 - h)) / (2 * h)
        return g1, g2


@dataclass
class DescentReport:
    field: str
    candidate: str
    n_samples: int
    max_inner_product: float
    violation_fraction: float
    worst_point: Tuple[float, float]

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def descent_check(
    F: VectorField2D,
    V: ScalarField2D,
    domain: Rectangle,
    n: int = 41,
    tol: float = 1e-8,
    h: float = 1e-5,
) -> DescentReport:
    """Sample ``grad V . F`` on an ``n x n`` grid; violations exceed ``tol``."""
    X1, X2 = domain.grid(n)
    best = -math.inf
    worst = (math.nan, math.nan)
    bad = 0
    for x1, x2 in zip(X1.ravel(), X2.ravel()):
        g1, g2 = V.gradient(x1, x2, h)
        f1, f2 = F(x1, x2)
        ip = g1 * f1 + g2 * f2
        if ip > tol:
            bad += 1
        if ip > best:
            best, worst = ip, (float(x1), float(x2))
    total = X1.size
    return DescentReport(F.name, V.name, total, float(best), bad / total, worst)


@dataclass
class CurlGrid:
    x1: np.ndarray
    x2: np.ndarray
    curl: np.ndarray

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x1", "x2", "curl"])
            for row in zip(self.x1.ravel(), self.x2.ravel(), self.curl.ravel()):
                w.writerow([f"{v:.9g}" for v in row])


def planar_curl(F: VectorField2D, domain: Rectangle, n: int = 21, h: float = 1e-3) -> CurlGrid:
    """Central-difference ``dF2/dx1 - dF1/dx2`` on an ``n x n`` grid."""
    X1, X2 = domain.grid(n)
    out = np.empty_like(X1)
    for idx in np.ndindex(X1.shape):
        x1, x2 = X1[idx], X2[idx]
        df2 = (F(x1 + h, x2)[1] - F(x1 - h, x2)[1]) / (2 * h)
        df1 = (F(x1, x2 + h)[0] - F(x1, x2 - h)[0]) / (2 * h)
        out[idx] = df2 - df1
    return CurlGrid(X1, X2, out)


@dataclass
class OjaTrajectory:
    t: np.ndarray
    w: np.ndarray  # shape (n_steps + 1, 2)
    V: np.ndarray

    def angle_to(self, direction) -> float:
        """Unsigned angle between the final weight and the line through ``direction``."""
        d = np.asarray(direction, dtype=float)
        wf = self.w[-1]
        c = abs(wf @ d) / (np.linalg.norm(wf) * np.linalg.norm(d))
        return math.acos(min(1.0, c))


def oja_simulate(C, w0, dt: float = 0.01, n_steps: int = 3000) -> OjaTrajectory:
    """Mean Oja dynamics ``dw/dt = C w - (w'Cw) w`` with ``V = -w'Cw / 2`` logged."""
    C = np.asarray(C, dtype=float)
    if C.shape != (2, 2):
        raise ValueError("C must be 2x2")
    if np.max(np.abs(C - C.T)) > 1e-12:
        raise ValueError("C must be symmetric")
    if np.min(np.linalg.eigvalsh(C)) < -1e-12:
        raise ValueError("C must be positive semi-definite")
    w0 = np.asarray(w0, dtype=float)
    if not np.any(w0):
        raise ValueError("w0 must be nonzero")

    def field(w):
        cw = C @ w
        return cw - (w @ cw) * w

    ws = [w0.copy()]
    integrate(field, w0, dt, n_steps, lambda i, t, w: ws.append(w.copy()))
    W = np.array(ws)
    V = -0.5 * np.einsum("ij,jk,ik->i", W, C, W)
    return OjaTrajectory(dt * np.arange(n_steps + 1), W, V)


@dataclass
class MinimaxTrajectory:
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray

    @property
    def radius_sq(self) -> np.ndarray:
        return self.x**2 + self.y**2

    @property
    def max_drift(self) -> float:
        r2 = self.radius_sq
        return float(np.max(np.abs(r2 - r2[0])))


def minimax_simulate(
    x0: float, y0: float, dt: float = 0.01, n_steps: Optional[int] = None,
    t_end: Optional[float] = None,
) -> MinimaxTrajectory:
    """Gradient play on ``L(x, y) = x y``: ``dx/dt = -y``, ``dy/dt = x``.

    Give either ``n_steps`` or ``t_end``; with ``t_end`` the step is shrunk
    to ``t_end / ceil(t_end / dt)`` so the run ends exactly at ``t_end``.
    """
    if (n_steps is None) == (t_end is None):
        raise ValueError("give exactly one of n_steps and t_end")
    if t_end is not None:
        n_steps = int(math.ceil(t_end / dt - 1e-12))
        dt = t_end / n_steps
    pts = [(float(x0), float(y0))]
    integrate(lambda z: np.array([-z[1], z[0]]), [x0, y0], dt, n_steps,
              lambda i, t, z: pts.append((z[0], z[1])))
    arr = np.array(pts)
    return MinimaxTrajectory(dt * np.arange(n_steps + 1), arr[:, 0], arr[:, 1])


@dataclass
class MonotonicityReport:
    max_increase: float
    first_violation_time: Optional[float]
    n_violations: int

    @property
    def monotone(self) -> bool:
        return self.first_violation_time is None


def descent_along_trajectory(series, tol: float = 1e-9, times=None) -> MonotonicityReport:
    """Check that a logged scalar never rises by more than ``tol`` per step."""
    v = np.asarray(series, dtype=float)
    if v.size == 0:
        raise ValueError("series is empty")
    t = np.arange(v.size, dtype=float) if times is None else np.asarray(times, dtype=float)
    inc = np.diff(v)
    if inc.size == 0:
        return MonotonicityReport(0.0, None, 0)
    viol = np.flatnonzero(inc > tol)
    first = float(t[viol[0] + 1]) if viol.size else None
    return MonotonicityReport(float(max(inc.max(), 0.0)), first, int(viol.size))


def transition_budget(V_series, times, events) -> List[dict]:
    """Change of ``V`` and duration across each logged transition interval."""
    v = np.asarray(V_series, dtype=float)
    t = np.asarray(times, dtype=float)
    out = []
    for ev in events:
        i0 = int(np.searchsorted(t, ev.t_minus))
        i1 = min(int(np.searchsorted(t, ev.t_plus)), v.size - 1)
        out.append({
            "t_minus": ev.t_minus,
            "t_plus": ev.t_plus,
            "duration": ev.t_plus - ev.t_minus,
            "delta_V": float(v[i1] - v[min(i0, v.size - 1)]),
        })
    return out


def quadratic_potential() -> ScalarField2D:
    return ScalarField2D(lambda a, b: 0.5 * (a * a + b * b), "quadratic")


def plasticity_field(cfg, gate_open: bool = True) -> VectorField2D:
    """``plasticity_rhs`` as a planar field with the gate forced open or shut."""
    from .plasticity import plasticity_rhs

    g = 1.0 if gate_open else 0.0
    return VectorField2D(lambda a, b: plasticity_rhs((a, b), 0.0, cfg, g=g), f"plasticity[{cfg.mode.value}]")


def named_field(name: str, omega: float = 1.0, cfg=None) -> Tuple[VectorField2D, float]:
    """Catalogue of planar test fields with their analytic curl.

    ``gradient`` is ``-grad`` of the quadratic potential, ``rotation`` is
    ``omega (-x2, x1)``, ``plasticity`` the curl-augmented slow flow with the
    gate open and ``plasticity-gradient`` its gradient-only counterpart.
    """
    from .plasticity import Mode, PlasticityConfig

    if name == "gradient":
        return VectorField2D(lambda a, b: (-a, -b), "gradient"), 0.0
    if name == "rotation":
        return VectorField2D(lambda a, b: (-omega * b, omega * a), "rotation"), 2.0 * omega
    cfg = cfg or PlasticityConfig()
    if name == "plasticity":
        cfg = PlasticityConfig(**{**cfg.__dict__, "mode": Mode.CURL_AUGMENTED})
        return plasticity_field(cfg), 2.0 * cfg.omega
    if name == "plasticity-gradient":
        cfg = PlasticityConfig(**{**cfg.__dict__, "mode": Mode.GRADIENT_ONLY})
        return plasticity_field(cfg), 0.0
    raise ValueError(f"unknown field {name!r}")
