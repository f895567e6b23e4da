"""Eigensolver oracle checks, MAC, cost, mode pairing and FRF synthesis."""

import numpy as np
import pytest

from femupdate.beam import SystemMatrices
from femupdate.modal import (
    CostWeights, EigenSolveError, ModalData, cost, frf_inertance, mac,
    pair_modes, solve_modes,
)


def make_system(K, M):
    K = np.asarray(K, dtype=float)
    M = np.asarray(M, dtype=float)
    return SystemMatrices(mass=M, stiffness=K, dof_count=K.shape[0])


def random_spd(rng, n, diag_boost=1.0):
    A = rng.standard_normal((n, n))
    return A @ A.T + diag_boost * n * np.eye(n)


def oracle_eigenvalues(K, M):
    """Characteristic-polynomial roots of det(K - lam M) = 0 via M^-1 K."""
    A = np.linalg.inv(M) @ K
    return np.sort(np.roots(np.poly(A)).real)


def oracle_eigenvectors(K, M):
    """Dense QR eigendecomposition of M^-1 K with explicit inverse."""
    lam, vec = np.linalg.eig(np.linalg.inv(M) @ K)
    order = np.argsort(lam.real)
    return lam.real[order], vec.real[:, order]


def test_two_dof_hand_oracle():
    # det(K - lam I) = lam^2 - 3 lam + 1 -> lam = (3 -+ sqrt(5)) / 2
    sys = make_system([[2.0, -1.0], [-1.0, 1.0]], np.eye(2))
    modes = solve_modes(sys, 2)
    lam = modes.frequencies**2
    np.testing.assert_allclose(lam, [(3 - np.sqrt(5)) / 2, (3 + np.sqrt(5)) / 2],
                               rtol=1e-12)


def test_identity_pencil():
    rng = np.random.default_rng(3)
    M = random_spd(rng, 4)
    modes = solve_modes(make_system(M, M), 4)
    np.testing.assert_allclose(modes.frequencies**2, np.ones(4), rtol=1e-10)


def test_solver_matches_brute_force_oracle():
    rng = np.random.default_rng(2024)
    for trial in range(25):
        n = int(rng.integers(2, 7))
        K = random_spd(rng, n)
        M = random_spd(rng, n)
        modes = solve_modes(make_system(K, M), n)
        lam_oracle = oracle_eigenvalues(K, M)
        np.testing.assert_allclose(modes.frequencies**2, lam_oracle, rtol=1e-8)
        _, vec_oracle = oracle_eigenvectors(K, M)
        m = mac(modes.mode_shapes, vec_oracle)
        np.testing.assert_allclose(np.diag(m), np.ones(n), atol=1e-8)


def test_mass_orthogonality_and_residual():
    rng = np.random.default_rng(7)
    K = random_spd(rng, 6)
    M = random_spd(rng, 6)
    modes = solve_modes(make_system(K, M), 6)
    gram = modes.mode_shapes.T @ M @ modes.mode_shapes
    np.testing.assert_allclose(gram, np.eye(6), atol=1e-8)
    for i in range(6):
        phi = modes.mode_shapes[:, i]
        res = K @ phi - modes.frequencies[i]**2 * (M @ phi)
        assert np.linalg.norm(res) / np.linalg.norm(K @ phi) <= 1e-8


def test_mass_not_positive_definite():
    sys = SystemMatrices(mass=np.diag([1.0, 0.0]), stiffness=np.eye(2), dof_count=2)
    with pytest.raises(EigenSolveError, match="positive definite"):
        solve_modes(sys, 1)


def test_n_modes_bounds():
    sys = make_system(np.eye(2), np.eye(2))
    with pytest.raises(ValueError):
        solve_modes(sys, 3)
    with pytest.raises(ValueError):
        solve_modes(sys, 0)


# ---------------------------------------------------------------- MAC


def test_mac_identity_for_orthonormal_set():
    q, _ = np.linalg.qr(np.random.default_rng(5).standard_normal((6, 3)))
    np.testing.assert_allclose(mac(q, q), np.eye(3), atol=1e-12)


def test_mac_scale_invariance():
    phi = np.array([1.0, -2.0, 0.5])
    assert mac(phi, -3.7 * phi)[0, 0] == pytest.approx(1.0)


def test_mac_hand_value():
    assert mac(np.array([1.0, 0.0]), np.array([1.0, 1.0]))[0, 0] == pytest.approx(0.5)


def test_mac_bounds_and_unit_diagonal():
    rng = np.random.default_rng(11)
    for _ in range(10):
        A = rng.standard_normal((8, 4))
        B = rng.standard_normal((8, 5))
        m = mac(A, B)
        assert np.all(m >= 0.0) and np.all(m <= 1.0 + 1e-12)
        np.testing.assert_allclose(np.diag(mac(A, A)), np.ones(4), atol=1e-12)
        scale = rng.uniform(0.5, 2.0, 4)
        np.testing.assert_allclose(mac(A * scale, B), m, rtol=1e-10)


def test_mac_zero_norm_rejected():
    with pytest.raises(ValueError, match="zero-norm"):
        mac(np.zeros(3), np.ones(3))


# ---------------------------------------------------------------- cost


def modal_from(freqs, shapes, **kw):
    shapes = np.asarray(shapes, dtype=float)
    return ModalData(frequencies=np.asarray(freqs, dtype=float),
                     mode_shapes=shapes,
                     coordinate_map=np.arange(shapes.shape[0] if shapes.ndim > 1
                                              else len(shapes)),
                     **kw)


def test_cost_zero_for_identical_data():
    shapes = np.array([[1.0, 0.2], [0.3, -1.0], [0.5, 0.4]])
    d = modal_from([10.0, 25.0], shapes)
    w = CostWeights(gamma=[1.0, 1.0], beta=0.75)
    assert cost(d, d, w) == pytest.approx(0.0, abs=1e-15)


def test_cost_single_mode_hand_value():
    calc = modal_from([90.0], [1.0, 0.0])
    meas = modal_from([100.0], [1.0, 0.0])
    assert cost(calc, meas, CostWeights(gamma=[1.0], beta=0.0)) == pytest.approx(0.01)


def test_cost_zero_gamma_identical_shapes():
    shapes = np.array([[1.0], [2.0]])
    calc = modal_from([90.0], shapes)
    meas = modal_from([100.0], shapes)
    assert cost(calc, meas, CostWeights(gamma=[0.0], beta=0.75)) == pytest.approx(0.0)


def test_cost_scale_invariant_in_shapes_and_monotone_in_frequency():
    rng = np.random.default_rng(13)
    shapes = rng.standard_normal((5, 3))
    meas = modal_from([10.0, 20.0, 30.0], shapes)
    w = CostWeights(gamma=[1.0, 2.0, 0.5], beta=0.75)
    scaled = modal_from([9.0, 21.0, 30.0], shapes * np.array([2.0, -1.0, 0.3]))
    plain = modal_from([9.0, 21.0, 30.0], shapes)
    assert cost(scaled, meas, w) == pytest.approx(cost(plain, meas, w), rel=1e-12)
    worse = modal_from([8.0, 21.0, 30.0], shapes)
    assert cost(worse, meas, w) > cost(plain, meas, w)


def test_cost_errors():
    calc = modal_from([1.0], [1.0, 0.0])
    meas2 = modal_from([1.0, 2.0], np.array([[1.0, 0.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        cost(calc, meas2, CostWeights(gamma=[1.0, 1.0], beta=0.0))
    zero = modal_from([0.0], [1.0, 0.0])
    with pytest.raises(ValueError, match="non-zero"):
        cost(calc, zero, CostWeights(gamma=[1.0], beta=0.0))


# ---------------------------------------------------------------- pairing


def test_pair_modes_unswaps_columns():
    rng = np.random.default_rng(17)
    shapes = rng.standard_normal((6, 3))
    meas = modal_from([10.0, 20.0, 30.0], shapes)
    calc = modal_from([10.0, 20.0, 30.0], shapes[:, [2, 0, 1]])
    np.testing.assert_array_equal(pair_modes(calc, meas), [1, 2, 0])


def test_pair_modes_identity():
    rng = np.random.default_rng(19)
    shapes = rng.standard_normal((6, 4))
    d = modal_from([1.0, 2.0, 3.0, 4.0], shapes)
    np.testing.assert_array_equal(pair_modes(d, d), np.arange(4))


def test_pair_modes_skips_rigid():
    rng = np.random.default_rng(23)
    elastic = rng.standard_normal((8, 5))
    measured = modal_from(np.arange(1.0, 6.0), elastic)
    full_shapes = np.column_stack([rng.standard_normal((8, 2)), elastic, rng.standard_normal((8, 1))])
    calc = ModalData(frequencies=np.concatenate([[0.0, 0.0], np.arange(1.0, 6.0), [9.0]]),
                     mode_shapes=full_shapes,
                     coordinate_map=np.arange(8),
                     rigid=np.array([True, True, False, False, False, False, False, False]))
    pairing = pair_modes(calc, measured)
    assert np.all(pairing >= 2)
    np.testing.assert_array_equal(pairing, [2, 3, 4, 5, 6])


def test_pair_modes_insufficient_elastic():
    d = modal_from([1.0], [1.0, 0.0])
    meas = modal_from([1.0, 2.0], np.array([[1.0, 0.0], [0.0, 1.0]]))
    with pytest.raises(ValueError, match="elastic"):
        pair_modes(d, meas)


# ---------------------------------------------------------------- FRF


def test_frf_zero_at_zero_frequency():
    d = modal_from([1.0, 3.0], np.array([[1.0, 0.5], [0.2, -1.0]]))
    h = frf_inertance(d, 0, 1, np.array([0.0]))
    assert h[0] == 0.0


def test_frf_single_mode_hand_value():
    d = modal_from([1.0], [1.0, 1.0])
    h = frf_inertance(d, 0, 1, np.array([np.sqrt(2.0)]))
    # -omega^2 / (1 - omega^2) = -2 / -1 = 2
    assert h[0] == pytest.approx(2.0 + 0.0j)


def test_frf_peak_near_resonance():
    d = ModalData(frequencies=np.array([10.0]),
                  mode_shapes=np.array([[1.0], [0.8]]),
                  coordinate_map=np.arange(2),
                  damping_ratios=np.array([0.01]))
    grid = np.linspace(5.0, 15.0, 4001)
    h = np.abs(frf_inertance(d, 0, 0, grid))
    w_peak = grid[np.argmax(h)]
    assert abs(w_peak - 10.0) / 10.0 < 0.02
    assert np.all(np.isfinite(h))


def test_frf_singular_point_reported():
    d = modal_from([2.0], [1.0, 1.0])
    with pytest.warns(RuntimeWarning, match="resonance"):
        h = frf_inertance(d, 0, 0, np.array([1.0, 2.0, 3.0]))
    assert np.isnan(h[1])
    assert np.isfinite(h[0]) and np.isfinite(h[2])
