import math

import numpy as np
import pytest

from tfzak.experiments import (
    CHECKS,
    EquivalenceReport,
    Signal,
    SignalFamily,
    check_echo_periodicity,
    check_embedding,
    check_factorial_bound,
    check_quasiperiodicity,
    check_window_independence,
    check_young_semidiscrete,
    check_zak_parseval,
    corrupt_zak,
    echo_field,
    factorial_ratios,
    fit_gs_decay,
    h_periodicity_defect,
    periodic_norms,
    plant_phase_error,
    run_equivalence,
    stft_fields,
    wiener_chain,
    young_constant,
    zak_lebesgue_norm,
    zak_modulation_profile,
)
from tfzak.fields import INF, SampledField, Window, exponential_weight, gaussian_window, sample
from tfzak.geometry import LatticeSequence, OrderedBasis
from tfzak.norms import NormSpec
from tfzak.transforms import ZakGrid, stft, zak

TWO_PI = 2 * math.pi
STD = OrderedBasis(1.0)


def gauss(x):
    return np.exp(-np.asarray(x) ** 2 / 2)


@pytest.fixture(scope="module")
def g():
    return sample(gauss, (-16, 16), 1 / 32)


@pytest.fixture(scope="module")
def echo():
    return echo_field()


# signal families

def test_families_are_deterministic():
    a = SignalFamily("trig-polynomials", seed=7).signals()
    b = SignalFamily("trig-polynomials", seed=7).signals()
    x = np.linspace(0, TWO_PI, 17)
    assert [s.id for s in a] == [s.id for s in b]
    assert all(np.array_equal(s(x), t(x)) for s, t in zip(a, b))
    assert len(a) == 20 and all(s.periodic for s in a)
    assert max(len(s.coefficients) for s in a) <= 9


def test_family_round_trip_and_validation():
    fam = SignalFamily("gaussian-dilates", (0.5, 2.0))
    assert SignalFamily.from_dict(fam.to_dict()) == fam
    with pytest.raises(ValueError):
        SignalFamily("white-noise")
    with pytest.raises(ValueError, match="unknown"):
        SignalFamily.from_dict({"id": "gaussian-dilates", "size": 3, "shape": 1})


# identities

def test_quasi_periodicity_detects_corruption(g):
    Z = zak(g, STD, 64, x_cells=2, xi_cells=2)
    assert check_quasiperiodicity(Z) <= 1e-9
    assert 5e-3 <= check_quasiperiodicity(corrupt_zak(Z)) <= 2e-2
    assert check_quasiperiodicity(Z.with_values(0 * Z.values)) == 0.0


def test_echo_periodicity(echo):
    assert echo.shape == (32, 32, 64, 64)
    assert check_echo_periodicity(echo) <= 1e-8
    assert check_echo_periodicity(plant_phase_error(echo)) >= 5e-3
    assert check_echo_periodicity(echo.with_values(0 * echo.values)) == 0.0


def test_zak_parseval_constants(g):
    assert abs(check_zak_parseval(g) / math.sqrt(TWO_PI) - 1) <= 0.01
    c2 = check_zak_parseval(g, OrderedBasis(2.0))
    assert math.isfinite(c2) and c2 > 0
    with pytest.raises(ValueError):
        check_zak_parseval(g.scaled(0))


# equivalences

def test_m2_equals_stft_l2():
    fam = SignalFamily("gaussian-dilates", (0.5, 1.0, 2.0))
    A = NormSpec("modulation-M", [2], second=[2], window=Window(1.0))
    B = NormSpec("mixed-lebesgue", [2, 2], transform="stft", window=Window(1.0))
    rep = run_equivalence(fam, A, B)
    assert np.max(np.abs(rep.ratios - 1)) <= 1e-10
    assert rep.passed and rep.drift <= 1e-10


def test_wiener_inf_vs_half_finite():
    fam = SignalFamily("gaussian-dilates", (0.5, 1.0, 2.0))
    E = OrderedBasis.diagonal([1.0, TWO_PI])
    A = NormSpec("wiener", [1, 1], E, local=[INF, INF], transform="stft", window=Window(1.0))
    B = NormSpec("wiener", [1, 1], E, local=[0.5, 0.5], transform="stft", window=Window(1.0))
    rep = run_equivalence(fam, A, B)
    assert math.isfinite(rep.spread) and rep.drift <= 0.05


def test_same_window_ratio_one():
    fam = SignalFamily("gaussian-dilates", (0.5, 2.0))
    spec = NormSpec("modulation-M", [1], second=[2])
    rep = check_window_independence(fam, gaussian_window(1.0), gaussian_window(1.0), spec)
    assert np.all(rep.ratios == 1.0) and rep.spread == 1.0


def test_equivalence_report_degenerate():
    rep = EquivalenceReport("x", "A", "B", ["s1", "s2"], [[1.0, 0.0], [1.0, 0.0]], [[1.0, 1.0], [1.0, 1.0]])
    assert rep.degenerate and not rep.passed and rep.spread == math.inf
    rep = EquivalenceReport("x", "A", "B", ["s1", "s2"], [[1.0, 2.0], [1.0, 2.1]], [[1.0, 1.0], [1.0, 1.0]], 4.0)
    assert rep.spread == pytest.approx(2.1) and rep.drift == pytest.approx(0.05)


def test_embedding_identity_constant_one():
    fam = SignalFamily("gaussian-dilates", (0.5, 1.0))
    fields = stft_fields(fam)
    spec = NormSpec("wiener", [1, 2], OrderedBasis.diagonal([1.0, TWO_PI]), local=[1, 1])
    res = check_embedding(fields, spec, spec, hard_bound=1.0)
    assert res.passed and res.metrics["C"] == 1.0


def test_wiener_chain_first_inclusion_bound():
    fam = SignalFamily("gaussian-dilates", (0.5, 1.0, 2.0))
    fields = stft_fields(fam)
    src, mid, _ = wiener_chain(STD, 1.0, 1.0, 1.0)
    res = check_embedding(fields, src, mid, hard_bound=1.0)
    assert res.passed


def test_wiener_chain_rejects_large_r1():
    with pytest.raises(ValueError):
        wiener_chain(STD, 1.0, 1.0, 1.0, r1=2.0)


# hard inequalities

def test_young_delta_is_one():
    f = sample(lambda x: 1 + np.sin(x) ** 2, (-8, 8), 1 / 8)
    assert young_constant(LatticeSequence.delta(STD), f, STD, 1, 1) == pytest.approx(1.0, abs=1e-14)


def test_young_l1_constant():
    res = check_young_semidiscrete(pairs=20)
    assert res.passed and res.metrics["C"] <= 1 + 1e-9


def test_young_hypothesis_enforced():
    with pytest.raises(ValueError, match="r_k"):
        check_young_semidiscrete(p=0.5, r=1.0, pairs=2)


# periodic characterization

def test_single_frequency_coefficient_norm():
    w = exponential_weight(0.25, 1.0)
    sig = Signal("e3", "trig-polynomials", {}, lambda x: np.exp(3j * np.asarray(x)), coefficients=((3, 1.0),))
    out = periodic_norms(sig, 0, 2.0, [2.0], gaussian_window(3.0), w)
    assert abs(out["coefficients"] - float(w(np.array([3.0])))) <= 1e-12
    assert out[("restricted", 2.0)] > 0


# Zak characterizations

def test_h_periodic_and_zero(g):
    grid = ZakGrid(x_per_cell=16, t_per_cell=64, x_cells=2, xi_cells=2, x_stride=2, xi_stride=4,
                   eta_step=0.25, n_eta=160, n_y=400)
    Phi = Window(1.0, (0.0, 0.0), (0.0, 0.0))
    f = sample(gauss, (-24, 24), 1 / 16)
    H = zak_modulation_profile(f, STD, Phi, grid, (1.0, 2.0))
    for p in (1.0, 2.0):
        assert h_periodicity_defect(H[p]) <= 1e-8
    H0 = zak_modulation_profile(f.scaled(0), STD, Phi, grid, (2.0,))
    assert not np.any(H0[2.0].values)


def test_zak_lebesgue_homogeneous():
    grid = ZakGrid(x_per_cell=16, t_per_cell=64, xi_stride=2, n_y=400)
    f = sample(gauss, (-24, 24), 1 / 16)
    phi = gaussian_window(1.0)
    a = zak_lebesgue_norm(f, STD, phi, 2.0, 2.0, grid)
    b = zak_lebesgue_norm(f.scaled(-3j), STD, phi, 2.0, 2.0, grid)
    assert abs(b / (3 * a) - 1) <= 1e-12
    assert zak_lebesgue_norm(f.scaled(0), STD, phi, 1.0, 1.0, grid) == 0.0


# decay

def test_gs_decay_fit():
    phi = gaussian_window(1.0)
    V = stft(sample(phi, (-16, 16), 1 / 16), phi, x_range=(-8, 8))
    fit = fit_gs_decay(V, 0.5, 0.5)
    assert abs(fit.r / 0.25 - 1) <= 0.05 and fit.member
    assert len(fit.envelope) > 10
    assert fit_gs_decay(V, 1.0, 1.0).rate_increasing


def test_gs_decay_constant_field():
    V = stft(sample(gauss, (-10, 10), 1 / 4), gaussian_window(1.0), x_range=(-2, 2))
    F = V.with_values(np.ones(V.shape))
    fit = fit_gs_decay(F, 0.5, 0.5)
    assert fit.r == 0 and not fit.member


def test_factorial_ratios():
    assert factorial_ratios(1.0, 1.0, 5)[0] == 1.0
    for r, s in ((1.0, 1.0), (2.0, 1.0), (1.0, 0.5)):
        res = check_factorial_bound(r, s)
        assert res.passed
        assert abs(res.metrics["scaling"] / 2 ** (-s) - 1) <= 0.05


# registry

def test_registry_entry_points():
    assert len(CHECKS) == 16
    for name in ("finite-zak-parseval", "stft-closed-form", "factorial-bound"):
        res = CHECKS[name](seed=0, quick=True)
        assert res.passed, res.failures
    assert not CHECKS["quasi-periodicity"](plant_defect=0.01).passed
