"""Tests for the shape-preserving pulse families and window classification."""

import numpy as np
import pytest

from tripodsim.families import (
    FamilyError,
    FamilyParams,
    classify,
    fit_constants,
    generate_family,
)


def _stencil_mu_derivatives(params, mu, h=1e-3):
    # 5-point central stencil in the mixing angle, O(h^4).
    theta = {}
    phi = {}
    for k in (-2, -1, 0, 1, 2):
        theta[k], phi[k] = generate_family(params, mu + k * h)
    d_theta = (theta[-2] - 8 * theta[-1] + 8 * theta[1] - theta[2]) / (12 * h)
    d_phi = (phi[-2] - 8 * phi[-1] + 8 * phi[1] - phi[2]) / (12 * h)
    return theta[0], phi[0], d_theta, d_phi


def test_slow_members_satisfy_characteristic_relation():
    # A slow member is frozen along the zeroth characteristic:
    # cos(mu) theta'(mu) + sin(mu)/cos(phi) phi'(mu) = 0.
    rng = np.random.default_rng(41)
    for _ in range(12):
        c_amp = rng.uniform(0.2, 0.7)
        c_shift = rng.uniform(-0.6, 0.6)
        # keep |sin mu| >= c_amp + 0.1 so all stencil points stay admissible
        lo = np.arcsin(c_amp + 0.1) + 0.01
        mu = np.linspace(lo, np.pi - lo, 200)
        params = FamilyParams("slow", c_amp, c_shift)
        theta, phi, d_theta, d_phi = _stencil_mu_derivatives(params, mu)
        residual = np.cos(mu) * d_theta + np.sin(mu) / np.cos(phi) * d_phi
        # stencil truncation grows near the admissibility margin; 5e-9 covers it
        assert np.max(np.abs(residual)) <= 5e-9


def test_fast_members_satisfy_characteristic_relation():
    # A fast member rides the unit-speed characteristic:
    # sin(mu) theta'(mu) - cos(mu)/cos(phi) phi'(mu) = 0.
    rng = np.random.default_rng(42)
    for _ in range(12):
        c_amp = rng.uniform(0.2, 0.7)
        c_shift = rng.uniform(-0.6, 0.6)
        hi = np.arccos(c_amp + 0.1) - 0.01
        mu = np.linspace(-hi, hi, 200)
        params = FamilyParams("fast", c_amp, c_shift)
        theta, phi, d_theta, d_phi = _stencil_mu_derivatives(params, mu)
        residual = np.sin(mu) * d_theta - np.cos(mu) / np.cos(phi) * d_phi
        assert np.max(np.abs(residual)) <= 5e-9


def test_family_invariant_products_are_constant():
    rng = np.random.default_rng(43)
    for _ in range(20):
        c_amp = rng.uniform(0.15, 0.8)
        c_shift = rng.uniform(-0.7, 0.7)
        lo = np.arcsin(min(c_amp + 0.05, 0.999))
        mu = np.linspace(lo + 0.01, np.pi - lo - 0.01, 150)
        _, phi = generate_family(FamilyParams("slow", c_amp, c_shift), mu)
        assert np.max(np.abs(np.abs(np.cos(phi)) * np.abs(np.sin(mu)) - c_amp)) <= 1e-12

        hi = np.arccos(min(c_amp + 0.05, 0.999))
        mu = np.linspace(-hi + 0.01, hi - 0.01, 150)
        _, phi = generate_family(FamilyParams("fast", c_amp, c_shift), mu)
        assert np.max(np.abs(np.abs(np.cos(phi)) * np.abs(np.cos(mu)) - c_amp)) <= 1e-12


def test_trivial_members_are_constant_profiles():
    # At the extremal mixing angle the member degenerates to flat angles.
    mu = np.full(7, np.pi / 2)
    theta, phi = generate_family(FamilyParams("slow", 0.5, 0.3), mu)
    assert np.max(np.abs(theta - 0.3)) <= 1e-15
    assert np.max(np.abs(phi - np.arccos(0.5))) <= 1e-15

    theta, phi = generate_family(FamilyParams("fast", 0.5, 0.1), np.zeros(7))
    assert np.max(np.abs(theta - 0.1)) <= 1e-15
    assert np.max(np.abs(phi - np.arccos(0.5))) <= 1e-15


def test_inadmissible_mixing_angle_raises():
    with pytest.raises(FamilyError, match="does not exist at mu"):
        generate_family(FamilyParams("slow", 0.5, 0.0), np.array([0.1]))
    with pytest.raises(FamilyError, match="does not exist at mu"):
        generate_family(FamilyParams("fast", 0.5, 0.0), np.array([1.5]))


def test_family_params_validated():
    for bad in (0.0, 1.0, -0.2, 1.3):
        with pytest.raises(FamilyError, match="c_amp"):
            FamilyParams("slow", bad, 0.0)
    with pytest.raises(FamilyError, match="unknown family"):
        FamilyParams("warp", 0.5, 0.0)


def test_fit_roundtrip_recovers_constants():
    rng = np.random.default_rng(44)
    for _ in range(40):
        family = "slow" if rng.uniform() < 0.5 else "fast"
        c_amp = rng.uniform(0.2, 0.8)
        c_shift = rng.uniform(-0.7, 0.7)
        if family == "slow":
            lo = np.arcsin(min(c_amp + 0.15, 0.99))
            mu = np.linspace(max(lo + 0.05, 1.0), min(np.pi - lo - 0.05, 2.0), 300)
        else:
            hi = np.arccos(min(c_amp + 0.15, 0.99))
            mu = np.linspace(-hi + 0.02, hi - 0.02, 300) * 0.8
        theta, phi = generate_family(FamilyParams(family, c_amp, c_shift), mu)
        fit = fit_constants(theta, phi, mu, family, check=False)
        assert abs(fit.c_amp - c_amp) <= 1e-6
        assert abs(fit.c_shift - c_shift) <= 1e-6
        assert fit.rel_rms <= 1e-8


def test_classify_labels_pure_windows():
    mu = np.linspace(1.2, 1.9, 240)
    theta, phi = generate_family(FamilyParams("slow", 0.45, 0.2), mu)
    cls = classify(theta, phi, mu)
    assert cls.label == "slow"
    assert cls.slow_spread <= 1e-12
    assert cls.fast_spread > 0.02

    mu = np.linspace(2.4, 2.9, 240)
    theta, phi = generate_family(FamilyParams("fast", 0.3, -0.1), mu)
    cls = classify(theta, phi, mu)
    assert cls.label == "fast"
    assert cls.fast_spread <= 1e-12
    assert cls.slow_spread > 0.02


def test_classify_mixed_and_indeterminate():
    w = np.linspace(0.0, 6.0, 400)
    theta = 0.4 + 0.3 * np.sin(w)
    phi = 0.6 + 0.2 * np.cos(1.3 * w)
    mu = 0.9 + 0.25 * np.sin(0.7 * w + 0.4)
    cls = classify(theta, phi, mu)
    assert cls.label == "mixed"
    assert cls.slow_spread > 0.02 and cls.fast_spread > 0.02

    # a structureless window carries no family signature at all
    flat = classify(np.full(50, 0.4), np.full(50, 0.7), np.full(50, 1.1))
    assert flat.label == "indeterminate"


def test_classification_stable_under_window_perturbations():
    mu = np.linspace(1.2, 1.9, 240)
    theta, phi = generate_family(FamilyParams("slow", 0.45, 0.2), mu)
    assert classify(theta, phi, mu).label == "slow"
    # coarser sampling of the same window
    assert classify(theta[::2], phi[::2], mu[::2]).label == "slow"
    # small additive noise, well under the 2% spread threshold
    rng = np.random.default_rng(45)
    noisy = classify(
        theta + rng.normal(0.0, 1e-6, theta.shape),
        phi + rng.normal(0.0, 1e-6, phi.shape),
        mu,
    )
    assert noisy.label == "slow"
    # dropping the trailing 20% of the window
    n = int(0.8 * len(mu))
    assert classify(theta[:n], phi[:n], mu[:n]).label == "slow"


def test_fit_refuses_mixed_window():
    w = np.linspace(0.0, 6.0, 400)
    theta = 0.4 + 0.3 * np.sin(w)
    phi = 0.6 + 0.2 * np.cos(1.3 * w)
    mu = 0.9 + 0.25 * np.sin(0.7 * w + 0.4)
    with pytest.raises(FamilyError, match="not a pure slow pulse") as excinfo:
        fit_constants(theta, phi, mu, "slow")
    assert excinfo.value.classification.label == "mixed"
    # the escape hatch still produces a (bad) least-squares fit
    fit = fit_constants(theta, phi, mu, "slow", check=False)
    assert fit.rel_rms > 0.1
