"""Closed loop of fast layer, health evaluation and gated plasticity.

Per integration step the joint state ``(u, v, theta1, theta2)`` is advanced by
RK4 with the gate held at its value from the last sampling tick. Every
``dt_sample`` a tick pushes a window sample, recomputes indicators, badness
and stress, relabels the regime and re-evaluates the gate.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import _kernels
from .config import RunConfig
from .fast_layer import Regime, classify_regime, fhn_rhs
from .health import HealthWindow, activity_variance, StressState, badness, indicators, stress_step
from .integrator import IntegrationError, rk4_step
from .plasticity import Mode, RHO_EPS, StructParams, gate, plasticity_rhs, potential_U

CSV_COLUMNS = (
    "t", "u", "v", "theta1", "theta2", "rho", "phi", "R",
    "m_freeze", "m_cycle", "m_mono", "B", "S", "gate", "regime",
)


@dataclass
class SystemState:
    t: float
    fast: tuple
    theta: StructParams
    stress: StressState
    label: Regime
    gate: float
    window: HealthWindow


@dataclass(frozen=True)
class SwitchEvent:
    t_minus: float
    t_plus: float
    from_: Regime
    to: Regime

    @property
    def time(self) -> float:
        """Midpoint of the transition interval."""
        return 0.5 * (self.t_minus + self.t_plus)

    def to_record(self) -> dict:
        return {
            "t_minus": self.t_minus,
            "t_plus": self.t_plus,
            "from": self.from_.code,
            "to": self.to.code,
        }


@dataclass
class RunSummary:
    scenario: str
    horizon: float
    n_switches: int
    n_switches_final_third: int
    mean_B_post_burnin: float
    final_theta_speed: float
    inter_switch_cv: Optional[float]
    gate_open_fraction: float
    time_fraction: Dict[str, float] = field(default_factory=dict)
    wall_time: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class RunResult:
    config: RunConfig
    # one entry per sampling tick; the CSV thins these to dt_out
    samples: Dict[str, np.ndarray]
    labels: List[Regime]
    events: List[SwitchEvent]
    summary: RunSummary

    def output_rows(self) -> Dict[str, np.ndarray]:
        every = self.config.samples_per_output
        return {k: v[every - 1 :: every] for k, v in self.samples.items()}

    def write_csv(self, path) -> None:
        rows = self.output_rows()
        codes = [lab.code for lab in self.labels][self.config.samples_per_output - 1 :: self.config.samples_per_output]
        numeric = CSV_COLUMNS[:-1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_COLUMNS)
            for i, code in enumerate(codes):
                w.writerow([f"{rows[c][i]:.9g}" for c in numeric] + [code])

    def write_events(self, path) -> None:
        with open(path, "w") as fh:
            for ev in self.events:
                fh.write(json.dumps(ev.to_record()) + "\n")

    def write_summary(self, path) -> None:
        Path(path).write_text(json.dumps(self.summary.to_dict(), indent=2) + "\n")


class CoupledSystem:
    """Mutable simulation of one scenario.

    ``step()`` advances one integration step through the generic RK4 path;
    ``tick()`` advances a whole sampling interval through the compiled kernel.
    Both apply the same update rules.
    """

    def __init__(self, cfg: RunConfig):
        cfg.validate()
        self.cfg = cfg
        self.fhn = cfg.fhn_params()
        self.health = cfg.health_config()
        self.plast = cfg.plasticity_config()
        self.classifier = cfg.classifier_config()
        self.x = np.array([cfg.u0, cfg.v0, cfg.theta1_0, cfg.theta2_0], dtype=float)
        self.window = HealthWindow(cfg.T_R, cfg.dt_sample)
        self.stress = StressState(cfg.s0, cfg.tau_s, cfg.s_c)
        self.label = Regime.TRANSITIONAL
        self.gate = self._gate_value()
        self.n_steps = 0
        self.n_ticks = 0
        self.last_indicators = None
        self.last_B = math.nan
        self.last_R = math.nan

    @property
    def t(self) -> float:
        return self.n_steps * self.cfg.dt

    @property
    def state(self) -> SystemState:
        return SystemState(
            self.t, (float(self.x[0]), float(self.x[1])),
            StructParams(float(self.x[2]), float(self.x[3])),
            self.stress, self.label, self.gate, self.window.copy(),
        )

    def _gate_value(self) -> float:
        if self.plast.mode is Mode.EXTERNAL_SWEEP:
            return 1.0
        if not self.window.full:
            return 0.0
        return gate(self.stress.s, self.plast)

    def field(self, x: np.ndarray) -> np.ndarray:
        """Joint vector field with the currently held gate."""
        du, dv = fhn_rhs((x[0], x[1]), self.fhn.with_theta1(x[2]))
        dth = plasticity_rhs(x[2:], self.stress.s, self.plast, g=self.gate)
        return np.array([du, dv, dth[0], dth[1]])

    def step(self) -> bool:
        """One RK4 step; runs the sampling tick when due. Returns True on a tick."""
        self.x = rk4_step(self.field, self.x, self.cfg.dt, step_index=self.n_steps + 1)
        self.n_steps += 1
        if self.n_steps % self.cfg.steps_per_sample == 0:
            self._sample()
            return True
        return False

    def tick(self) -> None:
        """Advance to the next sampling tick with the compiled integrator."""
        todo = self.cfg.steps_per_sample - self.n_steps % self.cfg.steps_per_sample
        p = self.plast
        bad = _kernels.advance_coupled(
            self.x, todo, self.cfg.dt, self.fhn.a, self.fhn.b, self.fhn.epsilon,
            self.gate, p.eta, p.k, p.rho0, p.effective_omega, RHO_EPS,
        )
        if bad >= 0:
            comp = int(np.flatnonzero(~np.isfinite(self.x))[0])
            raise IntegrationError(self.n_steps + bad + 1, comp, "update")
        self.n_steps += todo
        self._sample()

    def _sample(self) -> None:
        u, v = float(self.x[0]), float(self.x[1])
        du, dv = fhn_rhs((u, v), self.fhn.with_theta1(self.x[2]))
        self.window.push(self.t, u, v, du, dv)
        ind = indicators(self.window, self.health)
        b = badness(ind, self.health.weights)
        self.stress = stress_step(self.stress, b, self.cfg.dt_sample)
        self.label = classify_regime(self.window.u, self.classifier)
        self.gate = self._gate_value()
        self.last_indicators = ind
        self.last_B = b
        self.last_R = activity_variance(self.window)
        self.n_ticks += 1

    def theta_velocity(self) -> np.ndarray:
        return plasticity_rhs(self.x[2:], self.stress.s, self.plast, g=self.gate)


def _runs(labels: Sequence[Regime], times: np.ndarray, spacing: float):
    """Maximal constant-label runs as ``(label, start, end)``."""
    out = []
    start = 0
    n = len(labels)
    for i in range(1, n + 1):
        if i == n or labels[i] is not labels[start]:
            end = times[i] if i < n else times[-1] + spacing
            out.append((labels[start], float(times[start]), float(end)))
            start = i
    return out


def detect_switches(labels: Sequence[Regime], times, dwell_min: float) -> List[SwitchEvent]:
    """Regime transitions with persistent dwells on both sides.

    A quiescent or oscillatory run counts as a regime only if it lasts at
    least ``dwell_min``; shorter runs are treated as part of the surrounding
    transition. An event joins two consecutive regime runs with different
    labels: ``t_minus`` is where the earlier regime ends and ``t_plus`` where
    the later one begins. Excursions that return to the same regime emit
    nothing.
    """
    times = np.asarray(times, dtype=float)
    if len(labels) == 0:
        return []
    if len(labels) != times.size:
        raise ValueError("labels and times differ in length")
    spacing = float(np.median(np.diff(times))) if times.size > 1 else 1.0
    regimes = [
        r for r in _runs(labels, times, spacing)
        if r[0] is not Regime.TRANSITIONAL and r[2] - r[1] >= dwell_min - 1e-9
    ]
    events = []
    for prev, nxt in zip(regimes, regimes[1:]):
        if prev[0] is not nxt[0]:
            events.append(SwitchEvent(prev[2], nxt[1], prev[0], nxt[0]))
    return events


def inter_switch_cv(events: Sequence[SwitchEvent]) -> Optional[float]:
    """Coefficient of variation of intervals between switches of the same kind.

    Intervals are pooled over the two directions; ``None`` with fewer than
    three events.
    """
    if len(events) < 3:
        return None
    intervals = []
    for kind in {(e.from_, e.to) for e in events}:
        ts = [e.time for e in events if (e.from_, e.to) == kind]
        intervals.extend(np.diff(ts))
    if len(intervals) < 1:
        return None
    arr = np.asarray(intervals)
    return float(arr.std() / arr.mean())


def sweep_crossings(cfg: RunConfig, onset: float, horizon: Optional[float] = None):
    """Predicted onset crossings of ``theta1 = rho cos(phi0 + omega_sweep t)``.

    Returns ``(time, direction)`` pairs, direction ``"QO"`` for upward
    crossings. Assumes ``rho`` stays at its initial value.
    """
    horizon = cfg.horizon if horizon is None else horizon
    rho = math.hypot(cfg.theta1_0, cfg.theta2_0)
    phi0 = math.atan2(cfg.theta2_0, cfg.theta1_0)
    w = cfg.omega_sweep
    if w == 0 or rho <= abs(onset):
        return []
    alpha = math.acos(onset / rho)
    out = []
    # theta1 drops through the onset at phi = alpha and rises at phi = -alpha (mod 2 pi)
    for target, direction in ((alpha, "OQ"), (-alpha, "QO")):
        if w < 0:
            target, direction = -target, direction
        n0 = math.floor((phi0 - target) / (2 * math.pi)) - 1
        for n in range(n0, n0 + int(abs(w) * horizon / (2 * math.pi)) + 4):
            tc = (target + 2 * math.pi * n - phi0) / w
            if 0 < tc <= horizon:
                out.append((tc, direction))
    return sorted(out)


def run_scenario(cfg: RunConfig) -> RunResult:
    cfg.validate()
    wall = time.perf_counter()
    sys_ = CoupledSystem(cfg)
    n_ticks = int(round(cfg.horizon / cfg.dt_sample))
    cols = {c: np.empty(n_ticks) for c in CSV_COLUMNS[:-1]}
    labels: List[Regime] = []
    for i in range(n_ticks):
        gate_held = sys_.gate
        sys_.tick()
        ind = sys_.last_indicators
        th1, th2 = sys_.x[2], sys_.x[3]
        row = (
            sys_.t, sys_.x[0], sys_.x[1], th1, th2, math.hypot(th1, th2),
            math.atan2(th2, th1), sys_.last_R, ind.m_freeze, ind.m_cycle, ind.m_mono,
            sys_.last_B, sys_.stress.s, gate_held,
        )
        for c, val in zip(CSV_COLUMNS, row):
            cols[c][i] = val
        labels.append(sys_.label)
    events = detect_switches(labels, cols["t"], cfg.dwell_min)
    summary = summarize(cfg, cols, labels, events, np.linalg.norm(sys_.theta_velocity()))
    summary.wall_time = time.perf_counter() - wall
    return RunResult(cfg, cols, labels, events, summary)


def summarize(cfg: RunConfig, cols, labels, events, final_speed: float) -> RunSummary:
    t = cols["t"]
    post = t >= 0.1 * cfg.horizon
    final_third = sum(1 for e in events if e.t_plus >= 2.0 * cfg.horizon / 3.0)
    frac = {r.code: float(np.mean([lab is r for lab in labels])) for r in Regime}
    return RunSummary(
        scenario=cfg.scenario,
        horizon=cfg.horizon,
        n_switches=len(events),
        n_switches_final_third=final_third,
        mean_B_post_burnin=float(cols["B"][post].mean()),
        final_theta_speed=float(final_speed),
        inter_switch_cv=inter_switch_cv(events),
        gate_open_fraction=float(np.mean(cols["gate"] > 0.5)),
        time_fraction=frac,
    )


def potential_series(result: RunResult) -> np.ndarray:
    """``U(theta(t))`` along the logged trajectory."""
    cfg = result.config
    th = np.column_stack([result.samples["theta1"], result.samples["theta2"]])
    return np.array([potential_U(p, cfg.k, cfg.rho0) for p in th])
