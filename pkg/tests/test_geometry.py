import math

import numpy as np
import pytest

from tfzak.geometry import (
    LatticeSequence,
    OrderedBasis,
    as_basis,
    cell_volume_monte_carlo,
    dual_basis,
    is_phase_split,
    lattice_points,
    product_basis,
    rotate_half,
    to_basis_coords,
)

TWO_PI = 2 * math.pi


def random_basis(rng, d):
    while True:
        m = rng.normal(size=(d, d))
        if np.linalg.cond(m) < 50:
            return OrderedBasis(m)


def test_dual_of_scalar_basis():
    assert np.allclose(dual_basis(OrderedBasis(2.0)).matrix, [[math.pi]])


def test_dual_of_standard_basis():
    assert np.allclose(dual_basis(OrderedBasis.standard(2)).matrix, TWO_PI * np.eye(2))


def test_dual_pairing_random():
    rng = np.random.default_rng(1)
    for _ in range(20):
        E = random_basis(rng, 2)
        Ed = dual_basis(E)
        assert np.max(np.abs(Ed.matrix - TWO_PI * np.linalg.inv(E.matrix).T)) <= 1e-12 * np.max(np.abs(Ed.matrix))
        assert np.allclose(E.matrix.T @ Ed.matrix, TWO_PI * np.eye(2), atol=1e-12)


def test_singular_and_ill_conditioned_rejected():
    with pytest.raises(ValueError, match="singular"):
        OrderedBasis([[1, 2], [2, 4]])
    with pytest.raises(ValueError, match="near-singular"):
        OrderedBasis([[1, 0], [0, 1e-9]])
    with pytest.raises(ValueError):
        OrderedBasis([[1, 0, 0], [0, 1, 0]])


def test_as_basis_dimension_check():
    assert as_basis(None, 3).is_standard
    with pytest.raises(ValueError, match="dimension"):
        as_basis(OrderedBasis.standard(2), 3)


def test_product_basis_examples():
    E = product_basis(OrderedBasis(1.0), OrderedBasis(1.0))
    assert np.array_equal(E.matrix, np.eye(2))
    E = product_basis(OrderedBasis(2.0), OrderedBasis(math.pi))
    assert np.allclose(E.matrix, np.diag([2.0, math.pi]))


def test_dual_commutes_with_product():
    rng = np.random.default_rng(2)
    E1, E2 = random_basis(rng, 2), random_basis(rng, 2)
    lhs = dual_basis(product_basis(E1, E2))
    rhs = product_basis(dual_basis(E1), dual_basis(E2))
    assert np.allclose(lhs.matrix, rhs.matrix, rtol=0, atol=1e-12 * np.max(np.abs(rhs.matrix)))


def test_phase_split_accepts_product_with_dual():
    rng = np.random.default_rng(3)
    E1 = random_basis(rng, 2)
    desc = is_phase_split(product_basis(E1, dual_basis(E1)), [True, True, False, False])
    assert desc and desc.strongly
    assert desc.E1.allclose(E1)


def test_phase_split_rejects_identity():
    desc = is_phase_split(OrderedBasis.standard(4), [True, True, False, False])
    assert not desc
    assert "dual" in desc.reason


def test_phase_split_scalar_case():
    assert is_phase_split(OrderedBasis(np.diag([1.0, TWO_PI])), [True, False])


def test_phase_split_odd_dimension():
    assert not is_phase_split(OrderedBasis.standard(3), [True, False, False])


def test_rotate_half():
    E = OrderedBasis(np.diag([2.0, 3.0]))
    assert np.allclose(rotate_half(E).matrix, [[0, 2], [3, 0]])
    rng = np.random.default_rng(4)
    F = random_basis(rng, 4)
    assert rotate_half(rotate_half(F)) == F
    E1, E2 = random_basis(rng, 2), random_basis(rng, 2)
    R = rotate_half(product_basis(E1, E2)).matrix
    assert np.allclose(R[2:, :2], E2.matrix) and np.allclose(R[:2, 2:], E1.matrix)
    with pytest.raises(ValueError):
        rotate_half(OrderedBasis.standard(3))


def test_lattice_points_examples():
    pts = lattice_points(OrderedBasis(1.0), -1.5, 1.5).points[:, 0]
    assert sorted(pts) == [-1, 0, 1]
    pts = lattice_points(OrderedBasis(2.0), -3, 3).points[:, 0]
    assert sorted(pts) == [-1, 0, 1]


def test_lattice_points_complete_and_inside():
    rng = np.random.default_rng(5)
    E = random_basis(rng, 2)
    lo, hi = np.array([-2.0, -1.5]), np.array([2.5, 3.0])
    patch = lattice_points(E, lo, hi)
    std = patch.standard_points()
    assert np.all((std >= lo - 1e-12) & (std <= hi + 1e-12))
    brute = {
        (i, j) for i in range(-30, 31) for j in range(-30, 31)
        if np.all((E.from_coords(np.array([i, j], float)) >= lo) & (E.from_coords(np.array([i, j], float)) <= hi))
    }
    assert {tuple(p) for p in patch.points} == brute


def test_lattice_points_unbounded_rejected():
    with pytest.raises(ValueError):
        lattice_points(OrderedBasis(1.0), -np.inf, 1)


def test_to_basis_coords():
    assert np.allclose(to_basis_coords([0.3, -2.0], OrderedBasis.standard(2)), [0.3, -2.0])
    assert np.allclose(to_basis_coords(3.0, OrderedBasis(2.0)), [1.5])
    rng = np.random.default_rng(6)
    E = random_basis(rng, 3)
    x = rng.normal(size=(10, 3))
    assert np.allclose(E.from_coords(to_basis_coords(x, E)), x, atol=1e-12)
    with pytest.raises(ValueError):
        to_basis_coords([1.0, 2.0], OrderedBasis.standard(3))


def test_cell_volume_monte_carlo():
    E = OrderedBasis([[2.0, 1.0], [0.5, 1.5]])
    est = cell_volume_monte_carlo(E, 400_000)
    assert abs(est - E.volume) < 0.02 * E.volume


def test_basis_json_round_trip():
    E = OrderedBasis([[2.0, 1.0], [0.5, 1.5]])
    assert OrderedBasis.from_json(E.to_json()) == E
    assert OrderedBasis.from_dict(E.to_dict()) == E


def test_lattice_sequence_dense_round_trip():
    E = OrderedBasis.standard(2)
    arr = np.arange(6, dtype=complex).reshape(2, 3)
    a = LatticeSequence.from_dense(E, arr, [-1, 2])
    back, lo = a.dense()
    assert np.array_equal(lo, [-1, 2])
    assert np.array_equal(back, arr)
    d = LatticeSequence.delta(E, [1, -1], 2.0)
    dense, lo = d.dense()
    assert dense.sum() == 2.0 and np.array_equal(lo, [1, -1])
