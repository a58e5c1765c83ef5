import math

import numpy as np
import pytest
from scipy import linalg

from optobec.utils.gaussian import (
    BipartitePartition,
    OddDimension,
    UnphysicalState,
    blocks,
    check_physicality,
    log_negativity,
    partial_transpose,
    ppt_epsilon,
    reduce,
    seralian,
    simon_criterion,
    symplectic_eigenvalues,
    symplectic_form,
)


def two_mode_squeezed(r: float) -> np.ndarray:
    c, s = math.cosh(2 * r), math.sinh(2 * r)
    Z = np.diag([1.0, -1.0])
    return 0.5 * np.block([[c * np.eye(2), s * Z], [s * Z, c * np.eye(2)]])


def random_physical(rng, n_modes=2, squeeze=0.6):
    sigma = symplectic_form(n_modes)
    H = rng.normal(scale=squeeze, size=(2 * n_modes, 2 * n_modes))
    S = linalg.expm(sigma @ (H + H.T) / 2)
    nu = 0.5 + rng.exponential(0.5, size=n_modes)
    return S @ np.diag(np.repeat(nu, 2)) @ S.T


def test_partition_indices():
    assert BipartitePartition.MIRROR_FIELD.indices == (0, 1, 4, 5)
    assert BipartitePartition.ATOM_FIELD.indices == (2, 3, 4, 5)
    assert BipartitePartition.MIRROR_ATOM.indices == (0, 1, 2, 3)
    assert [p.label for p in BipartitePartition] == ["mc", "ac", "ma"]


def test_reduce_vacuum():
    for partition in BipartitePartition:
        np.testing.assert_array_equal(reduce(0.5 * np.eye(6), partition), 0.5 * np.eye(4))


def test_reduce_uncoupled_has_no_correlations(rng):
    V = linalg.block_diag(*[random_physical(rng, 1) for _ in range(3)])
    for partition in BipartitePartition:
        _, _, Z = blocks(reduce(V, partition))
        assert not np.any(Z)


def test_reduce_keeps_retained_entries(rng):
    A = rng.normal(size=(6, 6))
    V = A + A.T
    for partition in BipartitePartition:
        Vr = reduce(V, partition)
        embedded = np.zeros_like(V)
        idx = np.array(partition.indices)
        embedded[np.ix_(idx, idx)] = Vr
        np.testing.assert_array_equal(embedded[np.ix_(idx, idx)], V[np.ix_(idx, idx)])


def test_vacuum_not_entangled():
    value, epsilon = log_negativity(0.5 * np.eye(4))
    assert value == 0.0
    assert epsilon == pytest.approx(0.5)
    assert not simon_criterion(0.5 * np.eye(4))


@pytest.mark.parametrize("r", [0.1, 0.5, 1.0, 2.0])
def test_two_mode_squeezed(r):
    V = two_mode_squeezed(r)
    value, epsilon = log_negativity(V)
    assert epsilon == pytest.approx(math.exp(-2 * r) / 2, rel=1e-9)
    assert value == pytest.approx(2 * r, rel=1e-9)
    assert simon_criterion(V)


def test_two_mode_squeezed_half():
    assert log_negativity(two_mode_squeezed(0.5)).value == pytest.approx(1.0)


def test_physicality():
    ok, nu_min = check_physicality(0.5 * np.eye(6))
    assert ok and nu_min == pytest.approx(0.5)
    ok, nu_min = check_physicality(0.25 * np.eye(6))
    assert not ok and nu_min == pytest.approx(0.25)


def test_thermal_mirror_block():
    V = linalg.block_diag(208.35 * np.eye(2), 0.5 * np.eye(2), 0.5 * np.eye(2))
    ok, nu_min = check_physicality(V)
    assert ok
    assert nu_min == pytest.approx(0.5)
    np.testing.assert_allclose(symplectic_eigenvalues(V), [0.5, 0.5, 208.35])


def test_unphysical_rejected():
    with pytest.raises(UnphysicalState):
        log_negativity(0.25 * np.eye(4))
    with pytest.raises(UnphysicalState):
        simon_criterion(0.25 * np.eye(4))


def test_odd_dimension():
    with pytest.raises(OddDimension):
        symplectic_eigenvalues(np.eye(3))


def test_epsilon_paths_agree(rng):
    for _ in range(300):
        V = random_physical(rng)
        value, epsilon = log_negativity(V)
        assert epsilon == pytest.approx(ppt_epsilon(V), rel=1e-9, abs=1e-12)
        assert simon_criterion(V) == (value > 0)


def test_simon_matches_determinant_form(rng):
    for _ in range(300):
        V = random_physical(rng)
        lhs = 4 * np.linalg.det(V)
        rhs = seralian(V) - 0.25
        if abs(lhs - rhs) < 1e-6 * max(1.0, abs(rhs)):
            continue
        assert simon_criterion(V) == (lhs < rhs)


def test_partial_transpose_flips_last_momentum():
    V = np.arange(16, dtype=float).reshape(4, 4)
    T = partial_transpose(V)
    assert T[3, 0] == -V[3, 0]
    assert T[0, 3] == -V[0, 3]
    assert T[3, 3] == V[3, 3]
    assert T[1, 2] == V[1, 2]


def _rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def test_log_negativity_invariant_under_local_rotations(rng):
    for _ in range(50):
        V = random_physical(rng)
        S = linalg.block_diag(_rotation(rng.uniform(0, 2 * math.pi)), _rotation(rng.uniform(0, 2 * math.pi)))
        assert log_negativity(S @ V @ S.T).value == pytest.approx(log_negativity(V).value, rel=1e-9, abs=1e-9)


def test_no_correlations_no_entanglement(rng):
    for _ in range(50):
        V = linalg.block_diag(random_physical(rng, 1), random_physical(rng, 1))
        value, epsilon = log_negativity(V)
        assert value == pytest.approx(0.0, abs=1e-12)
        assert epsilon >= 0.5 - 1e-12
        assert not simon_criterion(V)
