import math

import numpy as np
import pytest

from tfzak.fields import INF, Window, exponential_weight, gaussian_window, polynomial_weight, sample
from tfzak.geometry import LatticeSequence, OrderedBasis, dual_basis
from tfzak.norms import (
    NormSpec,
    evaluate,
    mixed_lebesgue_norm,
    modulation_norm,
    periodic_coefficient_norm,
    reduce_axes,
    script_norm,
    sequence_norm,
    wiener_norm,
    wiener_phase_norm,
)
from tfzak.transforms import FourierCoefficients, stft

TWO_PI = 2 * math.pi


def indicator(*x):
    out = np.ones(np.broadcast(*x).shape)
    for c in x:
        out = out * ((c >= 0) & (c < 1))
    return out


def gauss(x):
    return np.exp(-np.asarray(x) ** 2 / 2)


@pytest.mark.parametrize("q", [0.5, 1, 2, INF, (1, 2), (INF, 0.5)])
def test_lebesgue_indicator(q):
    d = 1 if np.ndim(q) == 0 else 2
    box = (-1.0, 2.0) if d == 1 else ((-1.0, -1.0), (2.0, 2.0))
    f = sample(indicator, box, 1 / 8)
    assert abs(mixed_lebesgue_norm(f, None, q).value - 1) <= 1e-12


def test_lebesgue_separable():
    g = lambda x: np.exp(-x**2) * (1 + x**2)
    h = lambda y: 1 / (1 + y**2)
    box, step = ((-6.0, -40.0), (6.0, 40.0)), 1 / 16
    F = sample(lambda x, y: g(x) * h(y), box, step)
    ng = mixed_lebesgue_norm(sample(g, (-6.0, 6.0), step), None, 1).value
    nh = mixed_lebesgue_norm(sample(h, (-40.0, 40.0), step), None, 2).value
    assert abs(mixed_lebesgue_norm(F, None, (1, 2)).value / (ng * nh) - 1) <= 1e-10


@pytest.mark.parametrize("p", [0.5, 1, 1.5, 3])
def test_lebesgue_equal_exponents(p):
    rng = np.random.default_rng(0)
    F = sample(lambda x, y: 0 * x + 0 * y, ((0, 0), (2, 2)), 1 / 8).with_values(rng.normal(size=(16, 16)))
    direct = (np.sum(np.abs(F.values) ** p) / 64) ** (1 / p)
    assert abs(mixed_lebesgue_norm(F, None, (p, p)).value / direct - 1) <= 1e-12


def test_lebesgue_axis_order():
    # first axis integrated first: q=(1, inf) takes the max over y of the x-integral
    F = sample(lambda x, y: indicator(x) * (1 + y), ((-1.0, 0.0), (2.0, 2.0)), 1 / 8)
    assert abs(mixed_lebesgue_norm(F, None, (1, INF)).value - (1 + 15 / 8)) <= 1e-12


def test_lebesgue_non_standard_basis():
    f = sample(lambda x: ((x >= 0) & (x < 2)).astype(float), (-2.0, 4.0), 1 / 8)
    assert abs(mixed_lebesgue_norm(f, OrderedBasis(2.0), 1).value - 1) <= 1e-12


def test_reduce_axes_infinity_is_max():
    arr = np.array([[1.0, 5.0], [2.0, 3.0]])
    assert reduce_axes(arr, [0, 1], [INF, INF], [1, 1]) == 5.0


def test_inf_flag():
    f = sample(gauss, (-8, 8), 1 / 8)
    assert mixed_lebesgue_norm(f, None, INF).meta["inf-handled"] == "max"
    assert "inf-handled" not in mixed_lebesgue_norm(f, None, 2).meta


def test_sequence_norms():
    E = OrderedBasis.standard(2)
    w = polynomial_weight(2.0)
    a = LatticeSequence.delta(E, [1, 2], 1.0)
    assert abs(sequence_norm(a, E, 2, w).value - w(np.array([1.0, 2.0]))) <= 1e-12
    rng = np.random.default_rng(1)
    arr = rng.normal(size=(3, 4)) + 1j * rng.normal(size=(3, 4))
    b = LatticeSequence.from_dense(E, arr, [-1, 0])
    assert abs(sequence_norm(b, E, 1).value - np.sum(np.abs(arr))) <= 1e-12


@pytest.mark.parametrize("p", [(1, 2), (0.5, INF), (2, 2)])
def test_sequence_matches_step_function(p):
    rng = np.random.default_rng(2)
    E = OrderedBasis.standard(2)
    arr = rng.normal(size=(3, 4))
    a = LatticeSequence.from_dense(E, arr, [0, 0])
    step = sample(lambda x, y: arr[np.clip(np.floor(x).astype(int), 0, 2), np.clip(np.floor(y).astype(int), 0, 3)]
                  * (x >= 0) * (x < 3) * (y >= 0) * (y < 4), ((-1, -1), (4, 5)), 1 / 4)
    assert abs(sequence_norm(a, E, p).value / mixed_lebesgue_norm(step, E, p).value - 1) <= 1e-12


@pytest.mark.parametrize("r, p", [(1, 1), (0.5, 2), (2, INF), (INF, 0.5)])
def test_wiener_single_cell(r, p):
    f = sample(lambda x: ((x >= 0) & (x < 2)).astype(float), (-4.0, 4.0), 1 / 4)
    assert abs(wiener_norm(f, OrderedBasis(2.0), r, p).value - 1) <= 1e-12


@pytest.mark.parametrize("p", [0.5, 1, 2, 3])
def test_wiener_equal_exponents_is_lebesgue(p):
    f = sample(lambda x: gauss(x) * (1 + np.sin(3 * x)), (-10, 10), 1 / 16)
    assert abs(wiener_norm(f, None, p, p).value / mixed_lebesgue_norm(f, None, p).value - 1) <= 1e-10


def test_wiener_holder_direction():
    rng = np.random.default_rng(3)
    E = OrderedBasis(0.5)
    for _ in range(10):
        f = sample(lambda x: 0 * x, (-4, 4), 1 / 16).with_values(rng.normal(size=128))
        for r in (0.5, 1, 2):
            for p in (1, 2, INF):
                # cell integrals in the standard measure pick up |cell|^(1/r)
                lhs = E.volume ** (1 / r) * wiener_norm(f, E, r, p).value
                rhs = E.volume ** (1 / r) * wiener_norm(f, E, INF, p).value
                assert lhs <= rhs * (1 + 1e-12)


def test_wiener_unresolved_cells():
    f = sample(gauss, (-4, 4), 1 / 2)
    with pytest.raises(ValueError, match="resolved"):
        wiener_norm(f, None, 1, 1)


def phase_indicator():
    return sample(lambda x, xi: indicator(x) * indicator(xi / TWO_PI), ((-2.0, -TWO_PI), (3.0, 2 * TWO_PI)),
                  (1 / 8, TWO_PI / 16))


@pytest.mark.parametrize("which", [1, 2])
def test_wiener_phase_single_cell(which):
    E = OrderedBasis(1.0)
    B0 = NormSpec("mixed-lebesgue", [1], dual_basis(E))
    assert abs(wiener_phase_norm(phase_indicator(), which, E, 1, INF, None, B0).value - 1) <= 1e-12


@pytest.mark.parametrize("r, p, q", [(1, 1, 2), (0.5, 2, 1), (2, INF, 0.5)])
def test_wiener_phase_separable_agree(r, p, q):
    F = sample(lambda x, xi: gauss(x) * (1 + x**2) * np.exp(-xi**2 / 8), ((-8.0, -12.0), (8.0, 12.0)), (1 / 8, 1 / 8))
    E = OrderedBasis(1.0)
    B0 = NormSpec("mixed-lebesgue", [q], OrderedBasis.standard(1))
    a = wiener_phase_norm(F, 1, E, r, p, None, B0).value
    b = wiener_phase_norm(F, 2, E, r, p, None, B0).value
    assert abs(a / b - 1) <= 1e-10


def test_modulation_moyal():
    f = sample(gauss, (-16, 16), 1 / 16)
    val = modulation_norm(f, gaussian_window(1.0), "M", p=2, q=2, x_range=(-8, 8)).value
    assert abs(val - math.sqrt(math.pi)) <= 1e-4


def test_modulation_zero_and_homogeneity():
    f = sample(lambda x: gauss(x) * np.exp(1j * x), (-16, 16), 1 / 16)
    phi = gaussian_window(1.0)
    assert modulation_norm(f.scaled(0), phi, "W", p=1, q=2, x_range=(-8, 8)).value == 0
    lam = 2.5 - 1.5j
    for kind, p, q in (("M", 1, 2), ("W", 0.5, INF)):
        a = modulation_norm(f, phi, kind, p=p, q=q, x_range=(-8, 8)).value
        b = modulation_norm(f.scaled(lam), phi, kind, p=p, q=q, x_range=(-8, 8)).value
        assert abs(b / (abs(lam) * a) - 1) <= 1e-12


def test_script_norm_periodic_reduction():
    E = OrderedBasis(TWO_PI)
    expr = lambda x: np.exp(2j * x) + 0.5 * np.exp(-1j * x)
    f = sample(expr, (-8 * math.pi, 8 * math.pi), TWO_PI / 64)
    phi = gaussian_window(1.0)
    V = stft(f, phi, x_range=(0, 2 * TWO_PI))
    B0 = NormSpec("mixed-lebesgue", [1], OrderedBasis(1.0))
    val = script_norm(f, phi, "M", E, 2, None, B0, V=V).value
    cell = np.abs(V.values[:64]) ** 2
    g = np.sqrt(np.sum(cell, axis=0) / 64)
    direct = np.sum(g) * V.steps[1]
    assert abs(val / direct - 1) <= 1e-9


def test_periodic_coefficient_norms():
    E = OrderedBasis(TWO_PI)
    w = exponential_weight(0.5, 1.0)
    c = FourierCoefficients.from_dict(E, {3: 3.0}, 4)
    assert abs(periodic_coefficient_norm(c, E, 1, w).value - 3 * w(np.array([3.0]))) <= 1e-12
    coefs = {-2: 1 + 1j, 0: 2.0, 5: -0.5j}
    c = FourierCoefficients.from_dict(E, coefs, 6)
    euclid = math.sqrt(sum(abs(v) ** 2 for v in coefs.values()))
    assert abs(periodic_coefficient_norm(c, E, 2).value - euclid) <= 1e-12
    lam = -1.5 + 2j
    assert periodic_coefficient_norm(c.scaled(lam), E, 0.5).value == pytest.approx(
        abs(lam) * periodic_coefficient_norm(c, E, 0.5).value, rel=1e-14)


def test_norm_spec_round_trip():
    spec = NormSpec("wiener-phase-2", [1, INF], OrderedBasis(np.diag([2.0, 3.0])), polynomial_weight(1.0),
                    local=[0.5, 2], inner=NormSpec("mixed-lebesgue", [2, 1]), window=Window(1.5), transform="stft")
    back = NormSpec.from_dict(spec.to_dict())
    assert back.to_dict() == spec.to_dict()
    assert "wiener-phase-2" in back.label()


def test_norm_spec_validation():
    with pytest.raises(ValueError, match="unknown"):
        NormSpec.from_dict({"family": "mixed-lebesgue", "colour": "red"})
    with pytest.raises(ValueError):
        NormSpec("sobolev")
    with pytest.raises(ValueError, match="arity"):
        NormSpec("mixed-lebesgue", [1, 2, 3], OrderedBasis.standard(2))


def test_evaluate_dispatch():
    f = sample(gauss, (-16, 16), 1 / 16)
    assert abs(evaluate(NormSpec("mixed-lebesgue", [2]), f).value - math.pi**0.25) <= 1e-12
    spec = NormSpec("modulation-M", [2], second=[2], window=Window(1.0))
    assert abs(evaluate(spec, f, x_range=(-8, 8)).value - math.sqrt(math.pi)) <= 1e-4
    m2 = evaluate(NormSpec("mixed-lebesgue", [2], transform="stft", window=Window(1.0)), f, x_range=(-8, 8))
    assert abs(m2.value / evaluate(spec, f, x_range=(-8, 8)).value - 1) <= 1e-10
    with pytest.raises(ValueError):
        evaluate(NormSpec("sequence", [1]), f)
