import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from irreducible.plasticity import (
    Mode, PlasticityConfig, StructParams, curl_field, gate, grad_U,
    plasticity_rhs, potential_U,
)

coords = st.floats(-3, 3, allow_nan=False)


def test_potential_values():
    assert potential_U((0.8, 0.0), 1.0, 0.8) == 0.0
    assert potential_U((0.0, 0.0), 1.0, 0.8) == pytest.approx(0.32)
    assert potential_U((1.6, 0.0), 2.0, 0.8) == pytest.approx(0.64)


def test_grad_values():
    assert np.allclose(grad_U((0.0, 0.8), 1.0, 0.8), 0.0)
    assert np.allclose(grad_U((1.6, 0.0), 1.0, 0.8), [0.8, 0.0])
    assert grad_U((0.0, 0.0)).tolist() == [0.0, 0.0]


def test_grad_matches_central_differences():
    rng = np.random.default_rng(7)
    h = 1e-5
    for _ in range(100):
        rho, phi = rng.uniform(0.1, 3.0), rng.uniform(-math.pi, math.pi)
        k, rho0 = rng.uniform(0.5, 2.0), rng.uniform(0.3, 1.5)
        p = np.array([rho * math.cos(phi), rho * math.sin(phi)])
        fd = np.array([
            (potential_U(p + h * e, k, rho0) - potential_U(p - h * e, k, rho0)) / (2 * h)
            for e in np.eye(2)
        ])
        g = grad_U(p, k, rho0)
        assert np.linalg.norm(g - fd) <= 1e-6 * max(np.linalg.norm(g), 1e-3)


def test_curl_field():
    assert curl_field((1.0, 0.0), 1.0).tolist() == [0.0, 1.0]
    assert curl_field((0.0, 0.0), 3.0).tolist() == [0.0, 0.0]


def test_gate_conventions():
    hard = PlasticityConfig(s_c=0.9)
    assert gate(0.9, hard) == 0.0
    assert gate(0.91, hard) == 1.0
    smooth = PlasticityConfig(s_c=0.9, smooth_beta=10.0)
    assert gate(0.9, smooth) == 0.5
    assert gate(-1e6, smooth) == 0.0 and gate(1e6, smooth) == 1.0


@pytest.mark.parametrize("mode", [Mode.GRADIENT_ONLY, Mode.CURL_AUGMENTED])
def test_closed_gate_freezes(mode):
    cfg = PlasticityConfig(mode=mode, s_c=0.9)
    assert plasticity_rhs((1.3, -0.4), 0.5, cfg).tolist() == [0.0, 0.0]
    assert plasticity_rhs((1.3, -0.4), 0.9, cfg).tolist() == [0.0, 0.0]


def test_gradient_vanishes_on_circle():
    cfg = PlasticityConfig(mode=Mode.GRADIENT_ONLY)
    assert np.allclose(plasticity_rhs((0.8, 0.0), 2.0, cfg), 0.0)


def test_curl_on_circle_is_tangential():
    cfg = PlasticityConfig(mode=Mode.CURL_AUGMENTED, omega=0.01, rho0=0.8)
    assert np.allclose(plasticity_rhs((0.8, 0.0), 2.0, cfg), [0.0, 0.008])


def test_sweep_ignores_stress():
    cfg = PlasticityConfig(mode=Mode.EXTERNAL_SWEEP, omega_sweep=0.002)
    assert np.allclose(plasticity_rhs((0.8, 0.0), -5.0, cfg), [0.0, 0.0016])


def test_polar_view():
    p = StructParams(0.0, -2.0)
    assert p.rho == 2.0 and p.phi == pytest.approx(-math.pi / 2)
    q = StructParams.from_polar(0.8, 1.0)
    assert q.rho == pytest.approx(0.8) and q.phi == pytest.approx(1.0)


@settings(max_examples=200, deadline=None)
@given(coords, coords)
def test_curl_term_does_not_change_radius(t1, t2):
    """d(rho^2)/dt = -2 eta k (rho - rho0) rho with the gate open."""
    cfg = PlasticityConfig(mode=Mode.CURL_AUGMENTED, omega=0.3, eta=0.05, k=1.0, rho0=0.8)
    th = np.array([t1, t2])
    rho = math.hypot(t1, t2)
    if rho < 1e-6:
        return
    rate = 2 * th @ plasticity_rhs(th, 10.0, cfg)
    assert rate == pytest.approx(-2 * cfg.eta * cfg.k * (rho - cfg.rho0) * rho, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(coords, coords)
def test_gradient_mode_descends_potential(t1, t2):
    cfg = PlasticityConfig(mode=Mode.GRADIENT_ONLY)
    th = (t1, t2)
    assert grad_U(th) @ plasticity_rhs(th, 10.0, cfg) <= 1e-15
