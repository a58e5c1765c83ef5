from dataclasses import replace

import numpy as np
import pytest

from optobec.utils.dynamics import (
    MODE_ORDERING,
    Mode,
    build_diffusion,
    build_drift,
    characteristic_polynomial,
    hurwitz_determinants,
    hurwitz_matrix,
    stability,
)
from optobec.utils.meanfield import steady_state_given_delta
from optobec.utils.params import derive_constants


def _system(params):
    dp = derive_constants(params)
    mf = steady_state_given_delta(dp, dp.delta)
    return dp, mf, build_drift(dp, mf)


def test_mode_ordering():
    assert MODE_ORDERING == ("q_m", "p_m", "q_a", "p_a", "x", "y")
    assert Mode.X == 4


def test_drift_entries(base_params):
    dp, mf, M = _system(base_params)
    expected = np.zeros((6, 6))
    expected[0, 1] = dp.mirror_freq
    expected[1, 0] = -dp.mirror_freq
    expected[1, 1] = -dp.mirror_damping
    expected[1, 4] = mf.chi_mc
    expected[2, 3] = dp.atom_freq
    expected[3, 2] = -dp.atom_freq
    expected[3, 4] = -mf.chi_ac
    expected[4, 4] = -dp.kappa
    expected[4, 5] = dp.delta
    expected[5, 4] = -dp.delta
    expected[5, 5] = -dp.kappa
    expected[5, 0] = mf.chi_mc
    expected[5, 2] = -mf.chi_ac
    np.testing.assert_array_equal(M, expected)
    assert np.count_nonzero(M) == 13


def test_atom_damping_entry(base_params):
    dp, _, M = _system(replace(base_params, atom_damping=5.0))
    assert M[Mode.P_A, Mode.P_A] == -5.0
    assert build_diffusion(dp)[Mode.P_A, Mode.P_A] == 5.0


def test_uncoupled_drift_is_block_diagonal(base_params):
    _, _, M = _system(replace(base_params, zeta_mc=0.0, zeta_ac=0.0))
    mask = np.zeros((6, 6), dtype=bool)
    for k in range(3):
        mask[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = True
    assert not np.any(M[~mask])


def test_diffusion(base_params):
    dp = derive_constants(base_params)
    D = build_diffusion(dp)
    expected = np.diag([0.0, dp.mirror_damping * (2 * dp.n_thermal + 1), 0.0, 0.0, dp.kappa, dp.kappa])
    np.testing.assert_array_equal(D, expected)
    assert D[1, 1] == pytest.approx(dp.mirror_damping * (2 * 207.85 + 1), rel=1e-3)

    cold = build_diffusion(derive_constants(replace(base_params, temperature=0.0)))
    np.testing.assert_array_equal(np.diag(cold), [0, dp.mirror_damping, 0, 0, dp.kappa, dp.kappa])

    undamped = build_diffusion(derive_constants(replace(base_params, mirror_damping=0.0)))
    np.testing.assert_array_equal(np.diag(undamped), [0, 0, 0, 0, dp.kappa, dp.kappa])


def test_characteristic_polynomial_matches_numpy(rng):
    for _ in range(20):
        M = rng.normal(size=(6, 6))
        np.testing.assert_allclose(characteristic_polynomial(M), np.poly(M), atol=1e-9)


def test_hurwitz_matrix_cubic():
    H = hurwitz_matrix(np.array([1.0, 2.0, 3.0, 4.0]))
    np.testing.assert_array_equal(H, [[2, 1, 0], [4, 3, 2], [0, 0, 4]])
    assert hurwitz_determinants(np.array([1.0, 2.0, 3.0, 4.0])) == [2.0, 2.0, 8.0]


def test_hurwitz_minors_with_zero_pivot():
    # a1 = 0 时一阶主子式为零，二阶以上需要行交换
    assert hurwitz_determinants(np.array([1.0, 0.0, 2.0, 3.0])) == [0.0, -3.0, -9.0]
    assert hurwitz_determinants(np.array([1.0, 0.0, 0.0, 0.0])) == [0.0, 0.0, 0.0]


def test_hurwitz_minors_match_float_determinants(rng):
    for _ in range(50):
        coeffs = np.concatenate([[1.0], rng.normal(size=6)])
        coeffs[rng.integers(1, 7)] = 0.0
        H = hurwitz_matrix(coeffs)
        expected = [np.linalg.det(H[:k, :k]) for k in range(1, 7)]
        np.testing.assert_allclose(hurwitz_determinants(coeffs), expected, rtol=1e-9, atol=1e-9)


def test_diagonal_stable():
    kappa = 3.0
    report = stability(-kappa * np.eye(6), tol=1e-6)
    assert report.eigen_stable and report.hurwitz_stable
    assert report.max_real_part == pytest.approx(-kappa)
    assert report.label == "stable"


def test_undamped_atom_is_marginal(base_params):
    _, _, M = _system(replace(base_params, zeta_mc=0.0, zeta_ac=0.0))
    report = stability(M, tol=1e-6)
    assert not report.eigen_stable
    assert report.marginal
    assert report.label == "marginal"


def test_strong_coupling_unstable(base_params):
    _, _, M = _system(replace(base_params, zeta_mc=5000.0, zeta_ac=0.0, atom_damping=1.0))
    report = stability(M, tol=1e-6 * base_params.mirror_freq)
    assert report.label == "unstable"
    assert not report.hurwitz_stable


def test_criteria_agree_on_random_matrices(rng):
    checked = 0
    for _ in range(200):
        M = rng.normal(size=(6, 6)) - rng.uniform(0.0, 3.0) * np.eye(6)
        report = stability(M, tol=1e-6)
        if abs(report.max_real_part) < 0.05:
            continue
        assert report.eigen_stable == report.hurwitz_stable
        checked += 1
    assert checked > 100


def test_criteria_agree_on_fig1_grid(base_params):
    for delta in np.linspace(0.0, 2.0, 9):
        for zeta in (10.0, 100.0, 300.0, 1000.0):
            params = replace(base_params, delta=delta * base_params.mirror_freq, zeta_mc=zeta, zeta_ac=0.7 * zeta)
            _, _, M = _system(params)
            report = stability(M, tol=1e-6 * base_params.mirror_freq)
            if not report.marginal:
                assert report.eigen_stable == report.hurwitz_stable


def test_detuning_reflection(base_params):
    _, _, M = _system(base_params)
    flip = np.diag([1.0, 1.0, 1.0, 1.0, 1.0, -1.0])
    mirrored = flip @ M @ flip
    assert mirrored[4, 5] == -M[4, 5]
    a, b = stability(M, 1.0), stability(mirrored, 1.0)
    assert a.label == b.label
    scale = np.max(np.abs(M))
    for part in (np.real, np.imag):
        np.testing.assert_allclose(
            np.sort(part(a.eigenvalues)), np.sort(part(b.eigenvalues)), atol=1e-9 * scale
        )


def test_rejects_bad_tol():
    with pytest.raises(ValueError):
        stability(-np.eye(6), tol=0.0)
