import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from irreducible.config import ConfigError, RunConfig
from irreducible.coupled import (
    CSV_COLUMNS, CoupledSystem, SwitchEvent, detect_switches, inter_switch_cv,
    potential_series, run_scenario, sweep_crossings,
)
from irreducible.fast_layer import Regime

GOLDEN = json.loads((Path(__file__).parent / "golden" / "reference_runs.json").read_text())
Q, O, T = Regime.QUIESCENT, Regime.OSCILLATORY, Regime.TRANSITIONAL

# small windows so the gate opens within a few hundred steps
FAST = dict(T_R=10.0, lag_min=2, lag_max=5, s_c=0.01, tau_s=5.0, horizon=50.0)


def test_step_and_tick_paths_agree():
    cfg = RunConfig(scenario="irreducible", **FAST)
    a, b = CoupledSystem(cfg), CoupledSystem(cfg)
    for _ in range(60):
        while not a.step():
            pass
        b.tick()
        assert a.n_steps == b.n_steps
        np.testing.assert_allclose(a.x, b.x, rtol=0, atol=1e-12)
        assert a.gate == b.gate and a.label is b.label
        assert a.stress.s == pytest.approx(b.stress.s, abs=1e-12)
    assert a.gate == 1.0  # the comparison covered open-gate plasticity


def test_gate_closed_during_warmup():
    sys_ = CoupledSystem(RunConfig(scenario="irreducible", s_c=0.0 + 1e-9, T_R=10.0, lag_min=2, lag_max=5))
    for _ in range(19):
        sys_.tick()
        assert sys_.gate == 0.0
    sys_.tick()
    assert sys_.window.full and sys_.gate == 1.0


def test_infinite_threshold_freezes_theta():
    res = run_scenario(RunConfig(scenario="irreducible", s_c=math.inf, horizon=500.0))
    assert np.all(res.samples["theta1"] == 0.8) and np.all(res.samples["theta2"] == 0.0)
    assert np.all(res.samples["gate"] == 0.0)


def test_gradient_mode_at_target_radius_stays_put():
    res = run_scenario(RunConfig(scenario="reducible", horizon=500.0, s_c=0.0 + 1e-9))
    assert np.all(res.samples["theta1"] == 0.8) and np.all(res.samples["theta2"] == 0.0)


def test_irreducible_theta_sweeps_across_onset(default_runs):
    th1 = default_runs["irreducible"].samples["theta1"]
    assert th1.min() < 0.25 and th1.max() > 0.45


def test_detect_switches_example():
    times = 0.5 * np.arange(2000)
    labels = [Q] * 800 + [T] * 10 + [O] * 1190
    (ev,) = detect_switches(labels, times, 300.0)
    assert (ev.t_minus, ev.t_plus, ev.from_, ev.to) == (400.0, 405.0, Q, O)
    assert ev.time == 402.5


def test_short_dwell_is_not_a_regime():
    times = 0.5 * np.arange(3000)
    labels = [Q] * 1000 + [O] * 100 + [Q] * 1900
    assert detect_switches(labels, times, 300.0) == []


def test_excursion_returning_to_same_regime_emits_nothing():
    times = 0.5 * np.arange(2000)
    labels = [O] * 900 + [T] * 200 + [O] * 900
    assert detect_switches(labels, times, 300.0) == []


def test_detect_switches_length_mismatch():
    with pytest.raises(ValueError):
        detect_switches([Q, O], [0.0], 1.0)


def test_inter_switch_cv():
    assert inter_switch_cv([SwitchEvent(0, 1, Q, O)] * 2) is None
    evs = [SwitchEvent(t, t, Q if i % 2 == 0 else O, O if i % 2 == 0 else Q)
           for i, t in enumerate([0.0, 10.0, 20.0, 30.0, 40.0, 50.0])]
    assert inter_switch_cv(evs) == pytest.approx(0.0)
    evs = [SwitchEvent(t, t, Q, O) for t in (0.0, 10.0, 30.0)]
    assert inter_switch_cv(evs) == pytest.approx(np.std([10, 20]) / 15)


label_st = st.lists(st.tuples(st.sampled_from([Q, O, T]), st.integers(1, 900)), min_size=1, max_size=12)


@settings(max_examples=200, deadline=None)
@given(label_st)
def test_event_wellformedness_on_clean_series(blocks):
    # only persistent regimes or transitional gaps, so every gap is a transition
    labels = []
    for lab, n in blocks:
        labels.extend([lab] * (n if lab is T else max(n, 600)))
    times = 0.5 * np.arange(len(labels))
    evs = detect_switches(labels, times, 300.0)
    for a, b in zip(evs, evs[1:]):
        assert a.t_plus <= b.t_minus
        assert a.to is b.from_
    codes = np.array([l.code for l in labels])
    for e in evs:
        assert e.from_ is not e.to
        inside = (times >= e.t_minus) & (times < e.t_plus)
        assert set(codes[inside]) <= {"T"}


def test_default_runs_events_wellformed(default_runs):
    for res in default_runs.values():
        t = res.samples["t"]
        codes = np.array([l.code for l in res.labels])
        for a, b in zip(res.events, res.events[1:]):
            assert a.t_plus <= b.t_minus and a.to is b.from_
        for e in res.events:
            inside = (t > e.t_minus) & (t < e.t_plus)
            assert set(codes[inside]) <= {"T"}


def test_closed_loop_causality(default_runs):
    s = default_runs["irreducible"].samples
    closed = s["gate"][1:] == 0.0
    assert closed.any()
    assert np.all(s["phi"][1:][closed] == s["phi"][:-1][closed])
    assert np.all(s["theta1"][1:][closed] == s["theta1"][:-1][closed])


def test_rho_bound(default_runs):
    for name, res in default_runs.items():
        cfg = res.config
        bound = max(math.hypot(cfg.theta1_0, cfg.theta2_0), cfg.rho0) + 1e-6
        assert res.samples["rho"].max() <= bound, name


def test_baseline_potential_monotone(default_runs):
    U = potential_series(default_runs["reducible"])
    assert np.max(np.diff(U)) <= 1e-9


def test_curl_run_potential_also_monotone(default_runs):
    U = potential_series(default_runs["irreducible"])
    assert np.max(np.diff(U)) <= 1e-9


def test_determinism():
    cfg = RunConfig(scenario="irreducible", horizon=1500.0)
    a, b = run_scenario(cfg), run_scenario(cfg)
    for c in CSV_COLUMNS[:-1]:
        assert np.array_equal(a.samples[c], b.samples[c])
    assert a.labels == b.labels and a.events == b.events


def test_runs_match_golden(default_runs):
    for name, res in default_runs.items():
        gold = GOLDEN[name]
        got = res.summary.to_dict()
        for key in ("n_switches", "n_switches_final_third"):
            assert got[key] == gold["summary"][key], (name, key)
        assert got["mean_B_post_burnin"] == pytest.approx(gold["summary"]["mean_B_post_burnin"], rel=1e-6)
        assert [e.to_record() for e in res.events] == gold["events"]


def test_sweep_crossings_closed_form():
    cfg = RunConfig(scenario="swept")
    cr = sweep_crossings(cfg, 0.325, 20000.0)
    alpha = math.acos(0.325 / 0.8)
    period = 2 * math.pi / cfg.omega_sweep
    assert cr[0] == (pytest.approx(alpha / cfg.omega_sweep), "OQ")
    assert cr[1] == (pytest.approx((2 * math.pi - alpha) / cfg.omega_sweep), "QO")
    assert cr[2][0] == pytest.approx(cr[0][0] + period)
    assert sweep_crossings(cfg, 0.9) == []


def test_output_files(tmp_path, default_runs):
    res = default_runs["swept"]
    res.write_csv(tmp_path / "run.csv")
    res.write_events(tmp_path / "events.jsonl")
    res.write_summary(tmp_path / "summary.json")
    lines = (tmp_path / "run.csv").read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 1 + int(res.config.horizon / res.config.dt_out)
    assert lines[-1].split(",")[-1] in {"Q", "O", "T"}
    recs = [json.loads(l) for l in (tmp_path / "events.jsonl").read_text().splitlines()]
    assert recs == [e.to_record() for e in res.events]
    assert set(recs[0]) == {"t_minus", "t_plus", "from", "to"}
    summ = json.loads((tmp_path / "summary.json").read_text())
    assert summ["n_switches"] == res.summary.n_switches


def test_smooth_gate_logged_as_real():
    res = run_scenario(RunConfig(scenario="irreducible", gate_kind="smooth", horizon=400.0))
    g = res.samples["gate"]
    assert np.all((0.0 <= g) & (g <= 1.0))
    assert np.any((g > 0.0) & (g < 1.0))


@pytest.mark.parametrize("bad", [
    dict(dt=0.0), dict(horizon=-1.0), dict(dt_sample=0.3), dict(dt_out=0.75),
    dict(sigma_lo=0.4), dict(gate_kind="fuzzy"), dict(scenario="nope"), dict(lag_max=60),
    dict(tau_s=0.01),
])
def test_invalid_config_rejected_before_run(bad):
    with pytest.raises(ConfigError):
        run_scenario(RunConfig(**bad))
