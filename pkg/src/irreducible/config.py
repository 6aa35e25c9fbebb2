"""Flat run configuration shared by the coupled system and the CLI."""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from .fast_layer import ClassifierConfig, FhnParams
from .health import BadnessWeights, HealthConfig
from .plasticity import Mode, PlasticityConfig

SCENARIO_MODES = {
    "reducible": Mode.GRADIENT_ONLY,
    "irreducible": Mode.CURL_AUGMENTED,
    "swept": Mode.EXTERNAL_SWEEP,
}


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending key."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


@dataclass
class RunConfig:
    scenario: str = "irreducible"
    horizon: float = 20000.0
    dt: float = 0.02
    dt_sample: float = 0.5
    dt_out: float = 0.5
    # fast layer
    a: float = 0.7
    b: float = 0.8
    epsilon: float = 0.08
    # health
    T_R: float = 100.0
    gamma: float = 1.0
    kappa: float = 2.0
    lag_min: float = 5.0
    lag_max: float = 50.0
    w_f: float = 0.5
    w_c: float = 2.0
    w_m: float = 0.5
    tau_s: float = 50.0
    s_c: float = 0.9
    # plasticity
    eta: float = 0.05
    omega: float = 0.01
    k: float = 1.0
    rho0: float = 0.8
    gate_kind: str = "hard"
    gate_beta: float = 20.0
    omega_sweep: float = 0.0006
    # classifier and events
    sigma_lo: float = 0.15
    sigma_hi: float = 0.35
    dwell_min: float = 300.0
    # initial conditions
    u0: float = 0.0
    v0: float = 0.0
    theta1_0: float = 0.8
    theta2_0: float = 0.0
    s0: float = 0.0
    output_dir: str = "out"

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RunConfig":
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, value in data.items():
            if key not in known:
                raise ConfigError(key, "unknown configuration key")
            if value is None:
                continue
            typ = known[key].type
            try:
                kwargs[key] = str(value) if typ == "str" else float(value)
            except (TypeError, ValueError):
                raise ConfigError(key, f"expected a number, got {value!r}") from None
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path, overrides: Optional[Mapping[str, Any]] = None) -> "RunConfig":
        data = json.loads(Path(path).read_text())
        if not isinstance(data, dict):
            raise ConfigError("<file>", "config must be a flat JSON object")
        data.update(overrides or {})
        return cls.from_dict(data)

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)

    def dump(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    def replace(self, **changes) -> "RunConfig":
        cfg = dataclasses.replace(self, **changes)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.scenario not in SCENARIO_MODES:
            raise ConfigError("scenario", f"must be one of {sorted(SCENARIO_MODES)}")
        for name in ("horizon", "dt", "dt_sample", "dt_out", "T_R", "tau_s", "s_c",
                     "eta", "k", "rho0", "gamma", "kappa", "dwell_min"):
            val = getattr(self, name)
            if not (math.isfinite(val) or (name == "s_c" and val == math.inf)) or val <= 0:
                raise ConfigError(name, f"must be positive, got {val}")
        for name in ("u0", "v0", "theta1_0", "theta2_0", "s0", "omega", "omega_sweep"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(name, "must be finite")
        if self.dt >= self.tau_s or self.dt_sample >= self.tau_s:
            raise ConfigError("dt", "dt and dt_sample must be smaller than tau_s")
        if not _is_multiple(self.dt_sample, self.dt):
            raise ConfigError("dt_sample", "must be an integer multiple of dt")
        if not _is_multiple(self.dt_out, self.dt_sample):
            raise ConfigError("dt_out", "must be an integer multiple of dt_sample")
        if self.sigma_lo >= self.sigma_hi or self.sigma_lo < 0:
            raise ConfigError("sigma_lo", "need 0 <= sigma_lo < sigma_hi")
        if self.gate_kind not in ("hard", "smooth"):
            raise ConfigError("gate_kind", "must be 'hard' or 'smooth'")
        if self.gate_kind == "smooth" and self.gate_beta <= 0:
            raise ConfigError("gate_beta", "must be positive")
        if self.lag_max * 2 > self.T_R + 1e-9:
            raise ConfigError("lag_max", "window must hold at least two maximal lags")
        # delegate remaining invariants to the component dataclasses
        for build in (self.fhn_params, self.health_config, self.plasticity_config,
                      self.classifier_config):
            try:
                build()
            except ValueError as exc:
                raise ConfigError(build.__name__, str(exc)) from None

    @property
    def mode(self) -> Mode:
        return SCENARIO_MODES[self.scenario]

    @property
    def steps_per_sample(self) -> int:
        return int(round(self.dt_sample / self.dt))

    @property
    def samples_per_output(self) -> int:
        return int(round(self.dt_out / self.dt_sample))

    def fhn_params(self) -> FhnParams:
        return FhnParams(self.a, self.b, self.epsilon, self.theta1_0)

    def health_config(self) -> HealthConfig:
        return HealthConfig(
            T_R=self.T_R, dt_sample=self.dt_sample, gamma=self.gamma, kappa=self.kappa,
            lag_min=self.lag_min, lag_max=self.lag_max,
            weights=BadnessWeights(self.w_f, self.w_c, self.w_m),
        )

    def plasticity_config(self) -> PlasticityConfig:
        return PlasticityConfig(
            mode=self.mode, eta=self.eta, omega=self.omega, k=self.k, rho0=self.rho0,
            s_c=self.s_c, smooth_beta=self.gate_beta if self.gate_kind == "smooth" else None,
            omega_sweep=self.omega_sweep,
        )

    def classifier_config(self) -> ClassifierConfig:
        capacity = int(math.ceil(self.T_R / self.dt_sample - 1e-9))
        return ClassifierConfig(self.sigma_lo, self.sigma_hi, capacity)


def _is_multiple(x: float, step: float) -> bool:
    r = x / step
    return r >= 1 - 1e-9 and abs(r - round(r)) < 1e-9
