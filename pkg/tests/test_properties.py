"""Property-based checks of the algebraic invariants."""
import math

import numpy as np
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from tfzak.experiments import cell_holder_ratios, wiener_lebesgue_ratio
from tfzak.fields import INF, Axis, SampledField, gaussian_window, polynomial_weight, check_moderate, sample
from tfzak.geometry import LatticeSequence, OrderedBasis, dual_basis, lattice_points, product_basis
from tfzak.norms import mixed_lebesgue_norm, sequence_norm, wiener_norm
from tfzak.transforms import (
    FourierCoefficients,
    finite_zak,
    fourier_coefficients,
    quasi_periodicity_defect,
    stft,
    synthesize_periodic,
    zak,
)

TWO_PI = 2 * math.pi
SETTINGS = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
exponent = st.sampled_from([0.5, 1.0, 1.5, 2.0, 3.0, INF])
exponent_ge1 = st.sampled_from([1.0, 1.5, 2.0, 3.0, INF])


@st.composite
def bases(draw, d=2):
    m = draw(arrays(float, (d, d), elements=st.floats(-3, 3, allow_nan=False)))
    assume(abs(np.linalg.det(m)) > 0.1 and np.linalg.cond(m) < 100)
    return OrderedBasis(m)


@st.composite
def complex_vectors(draw, n):
    re = draw(arrays(float, n, elements=finite))
    im = draw(arrays(float, n, elements=finite))
    return re + 1j * im


@st.composite
def grid_fields(draw, shape=(16, 12)):
    vals = draw(arrays(float, shape, elements=st.floats(-5, 5, allow_nan=False)))
    axes = tuple(Axis(0.0, 0.25, n) for n in shape)
    return SampledField(axes, vals.astype(complex))


# geometry

@SETTINGS
@given(bases())
def test_dual_is_involution_and_pairs_to_two_pi(E):
    Ed = dual_basis(E)
    assert np.allclose(E.matrix.T @ Ed.matrix, TWO_PI * np.eye(2), atol=1e-9)
    assert np.allclose(dual_basis(Ed).matrix, E.matrix, atol=1e-9)


@SETTINGS
@given(bases(), bases())
def test_dual_of_product_is_product_of_duals(E1, E2):
    lhs = dual_basis(product_basis(E1, E2)).matrix
    rhs = product_basis(dual_basis(E1), dual_basis(E2)).matrix
    assert np.allclose(lhs, rhs, atol=1e-9)


@SETTINGS
@given(bases(), arrays(float, (5, 2), elements=finite))
def test_coordinate_round_trip(E, x):
    assert np.allclose(E.from_coords(E.to_coords(x)), x, atol=1e-9)


@SETTINGS
@given(bases(), st.floats(0.5, 4), st.floats(0.5, 4))
def test_lattice_points_lie_in_region(E, a, b):
    patch = lattice_points(E, [-a, -b], [a, b])
    pts = patch.standard_points()
    assert np.all(np.abs(pts[:, 0]) <= a + 1e-9) and np.all(np.abs(pts[:, 1]) <= b + 1e-9)
    assert any((p == 0).all() for p in patch.points)


# finite Zak transform

@SETTINGS
@given(st.integers(2, 12), st.integers(2, 12), st.data())
def test_finite_zak_parseval_and_inversion(M, N, data):
    f = data.draw(complex_vectors(M * N))
    Z = finite_zak(f, M, N)
    ref = N * np.sum(np.abs(f) ** 2)
    assert abs(np.sum(np.abs(Z) ** 2) - ref) <= 1e-10 * max(ref, 1.0)
    # f(n - m M) is the m-th coefficient of k -> Z(n, k)
    coef = np.fft.fft(Z, axis=1) / N
    n, m = np.meshgrid(np.arange(M), np.arange(N), indexing="ij")
    assert np.allclose(coef, f[(n - m * M) % (M * N)], atol=1e-9)


# norms

@SETTINGS
@given(grid_fields(), exponent, exponent, st.complex_numbers(max_magnitude=100, allow_nan=False, allow_infinity=False))
def test_mixed_norm_homogeneous(F, q1, q2, lam):
    a = mixed_lebesgue_norm(F, None, (q1, q2)).value
    b = mixed_lebesgue_norm(F.scaled(lam), None, (q1, q2)).value
    assert math.isclose(b, abs(lam) * a, rel_tol=1e-10, abs_tol=1e-12)


@SETTINGS
@given(grid_fields(), grid_fields(), exponent_ge1, exponent_ge1)
def test_mixed_norm_triangle_inequality(F, G, q1, q2):
    s = F.with_values(F.values + G.values)
    lhs = mixed_lebesgue_norm(s, None, (q1, q2)).value
    rhs = mixed_lebesgue_norm(F, None, (q1, q2)).value + mixed_lebesgue_norm(G, None, (q1, q2)).value
    assert lhs <= rhs * (1 + 1e-12) + 1e-12


@SETTINGS
@given(grid_fields(), st.sampled_from([0.5, 1.0, 2.0, 3.0]))
def test_equal_exponents_give_plain_lebesgue(F, p):
    direct = (np.sum(np.abs(F.values) ** p) * 0.25**2) ** (1 / p)
    assert math.isclose(mixed_lebesgue_norm(F, None, (p, p)).value, direct, rel_tol=1e-12, abs_tol=1e-300)


@SETTINGS
@given(arrays(float, (4, 5), elements=st.floats(-5, 5, allow_nan=False)),
       st.sampled_from([0.5, 1.0, 2.0]), st.sampled_from([1.0, 2.0, 3.0, INF]))
def test_sequence_norms_nest(arr, p, q):
    assume(p <= q)
    a = LatticeSequence.from_dense(OrderedBasis.standard(2), arr, [0, 0])
    assert sequence_norm(a, None, q).value <= sequence_norm(a, None, p).value * (1 + 1e-12) + 1e-300


@SETTINGS
@given(grid_fields((16, 16)), st.sampled_from([1.0, 1.5, 2.0, INF]))
def test_wiener_with_unit_local_exponent_below_lebesgue(F, p):
    # cells of the standard basis have measure 1, so W^1(l^p) <= L^p with constant 1
    assert wiener_lebesgue_ratio(F, p, 1.0) <= 1 + 1e-12


@SETTINGS
@given(grid_fields((16, 16)), exponent, exponent)
def test_wiener_local_exponent_at_most_sup(F, r, p):
    assert wiener_norm(F, None, r, p).value <= wiener_norm(F, None, INF, p).value * (1 + 1e-12) + 1e-300


@SETTINGS
@given(grid_fields((16, 16)), st.sampled_from([0.5, 1.0]), st.sampled_from([0.5, 1.0, 2.0]))
def test_cellwise_holder(F, a, r):
    E = OrderedBasis.diagonal([a, 1.0])
    assert np.all(cell_holder_ratios(F, E, r) <= 1 + 1e-12)


@SETTINGS
@given(grid_fields((16, 16)), st.sampled_from([0.5, 1.0, 2.0, 3.0]))
def test_wiener_equal_exponents_is_lebesgue(F, p):
    assert math.isclose(wiener_norm(F, None, p, p).value, mixed_lebesgue_norm(F, None, p).value, rel_tol=1e-10, abs_tol=1e-300)


@SETTINGS
@given(st.floats(-3, 3))
def test_polynomial_weight_peetre(t):
    grid = np.linspace(-5, 5, 21)[:, None]
    rep = check_moderate(polynomial_weight(t), polynomial_weight(abs(t)), grid, grid)
    assert rep.constant <= 2 ** (abs(t) / 2) * (1 + 1e-12)


# transforms

@SETTINGS
@given(st.dictionaries(st.integers(-6, 6), st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
                       min_size=1, max_size=9))
def test_periodic_coefficient_round_trip(coefs):
    planted = FourierCoefficients.from_dict(OrderedBasis(TWO_PI), coefs, 8)
    f = synthesize_periodic(planted, (0, TWO_PI), TWO_PI / 32)
    f = SampledField(tuple(Axis(a.origin, a.step, a.count, "torus") for a in f.axes), f.values)
    c = fourier_coefficients(f, OrderedBasis(TWO_PI), 8)
    assert np.allclose(c.table, planted.table, atol=1e-10)


@settings(max_examples=15, deadline=None)
@given(st.floats(-2, 2), st.floats(0.7, 1.5), st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False))
def test_stft_linear(shift, width, lam):
    phi = gaussian_window(1.0)
    f = sample(lambda x: np.exp(-((x - shift) ** 2) / (2 * width**2)), (-16, 16), 1 / 8)
    g = sample(lambda x: np.exp(-x**2) * np.cos(2 * x), (-16, 16), 1 / 8)
    Vf = stft(f, phi, x_range=(-4, 4))
    Vg = stft(g, phi, x_range=(-4, 4))
    Vs = stft(f.with_values(lam * f.values + g.values), phi, x_range=(-4, 4))
    assert np.allclose(Vs.values, lam * Vf.values + Vg.values, atol=1e-10)


@settings(max_examples=10, deadline=None)
@given(st.lists(st.tuples(st.floats(-3, 3), st.floats(0.5, 2), st.floats(-3, 3)), min_size=1, max_size=3))
def test_zak_quasi_periodic_for_gaussian_mixtures(bumps):
    expr = lambda x: sum(np.exp(-((x - c) ** 2) / (2 * w * w) + 1j * m * x) for c, w, m in bumps)
    f = sample(expr, (-24, 24), 1 / 16)
    Z = zak(f, OrderedBasis(1.0), 32, x_cells=2, xi_cells=2)
    assert quasi_periodicity_defect(Z) <= 1e-9
