"""Fixed-step classical Runge-Kutta (order 4) integration.

Fields are callables mapping a 1-D float array to an array of the same
shape. Gated right-hand sides should close over a gate value computed once
per step (sample-and-hold) so all four stages see the same gate.
"""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

Field = Callable[[np.ndarray], np.ndarray]
Observer = Callable[[int, float, np.ndarray], None]


class IntegrationError(FloatingPointError):
    """Raised when a stage or the updated state contains NaN or Inf."""

    def __init__(self, step: int, component: int, stage: str):
        self.step = step
        self.component = component
        self.stage = stage
        super().__init__(
            f"non-finite value at step {step}, component {component} ({stage})"
        )


def _check(arr: np.ndarray, step: int, stage: str) -> None:
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise IntegrationError(step, bad, stage)


def rk4_step(field: Field, x, dt: float, step_index: int = 0) -> np.ndarray:
    """Return ``x + dt/6 (k1 + 2 k2 + 2 k3 + k4)``; ``x`` is not modified."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    x = np.asarray(x, dtype=float)
    k1 = np.asarray(field(x), dtype=float)
    _check(k1, step_index, "k1")
    k2 = np.asarray(field(x + 0.5 * dt * k1), dtype=float)
    _check(k2, step_index, "k2")
    k3 = np.asarray(field(x + 0.5 * dt * k2), dtype=float)
    _check(k3, step_index, "k3")
    k4 = np.asarray(field(x + dt * k3), dtype=float)
    _check(k4, step_index, "k4")
    out = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    _check(out, step_index, "update")
    return out


def integrate(
    field: Field,
    x0,
    dt: float,
    n_steps: int,
    observer: Optional[Observer] = None,
    t0: float = 0.0,
) -> np.ndarray:
    """Advance ``x0`` by ``n_steps`` RK4 steps and return the final state.

    ``observer(i, t, x)`` is called after every step with the 1-based step
    index, the time reached and the new state.
    """
    if n_steps < 0:
        raise ValueError("n_steps must be non-negative")
    x = np.array(x0, dtype=float)
    _check(x, 0, "initial state")
    for i in range(1, n_steps + 1):
        x = rk4_step(field, x, dt, step_index=i)
        if observer is not None:
            observer(i, t0 + i * dt, x)
    return x
