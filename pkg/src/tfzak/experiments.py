"""Verification harness: equivalence ratios, hard inequalities and identity checks.

Equivalences ``A ~ B`` are tested as ratio families: every signal of a
family is measured with both norms at a coarse and a fine resolution. A
report passes when the spread ``max/min`` of the fine ratios stays below a
configured bound and no ratio moves by more than 5% between resolutions.
Identities are tested as relative defects, and inequalities with explicit
constants are asserted directly.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .fields import (
    INF,
    MixedExponent,
    SampledField,
    Weight,
    Window,
    gaussian_window,
    sample,
)
from .geometry import LatticeSequence, OrderedBasis, as_basis, dual_basis
from .norms import (
    NormSpec,
    evaluate,
    mixed_lebesgue_norm,
    modulation_norm,
    reduce_axes,
    sequence_norm,
    wiener_norm,
)
from .transforms import (
    FourierCoefficients,
    ZakField,
    ZakGrid,
    cellify,
    finite_zak,
    fourier_coefficients,
    iter_stft_of_zak,
    partial_stft_zak,
    plan_stft_of_zak,
    quasi_periodicity_defect,
    semidiscrete_convolve,
    stft,
    stft_of_zak,
    zak,
)

TWO_PI = 2.0 * math.pi
DRIFT_BOUND = 0.05

_THREADS = 1


def set_threads(n: int) -> None:
    """Cap the worker pool used for per-signal evaluations."""
    global _THREADS
    if n < 1:
        raise ValueError(f"thread count must be positive, got {n}")
    _THREADS = int(n)


def _map(fn: Callable, items: Sequence) -> list:
    """Order-preserving map over independent items, threaded when allowed."""
    items = list(items)
    if _THREADS <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=_THREADS) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# signal families

FAMILY_IDS = (
    "gaussian-dilates",
    "modulated-gaussians",
    "trig-polynomials",
    "hermite-like",
    "random-bandlimited",
    "cell-indicator",
)

_DEFAULT_GRIDS = {
    "gaussian-dilates": (0.5, 2**-0.5, 1.0, 2**0.5, 2.0),
    "modulated-gaussians": (0.0, 1.0, 2.0, 3.0),
    "trig-polynomials": (9, 6),
    "hermite-like": (0, 1, 2, 3, 4),
    "random-bandlimited": (4,),
    "cell-indicator": (1.0,),
}
_DEFAULT_SIZES = {"trig-polynomials": 20, "random-bandlimited": 5}


@dataclass(frozen=True)
class Signal:
    """One test signal on the real line.

    ``coefficients`` holds ``(frequency, coefficient)`` pairs for
    2 pi-periodic trigonometric polynomials.
    """

    id: str
    family: str
    params: dict
    func: Callable = field(compare=False, repr=False)
    scale: complex = 1.0
    coefficients: tuple = ()

    def __call__(self, x):
        return self.scale * self.func(x)

    @property
    def periodic(self) -> bool:
        return bool(self.coefficients)

    def sample(self, box, step) -> SampledField:
        return sample(self, box, step)

    def scaled(self, lam: complex) -> "Signal":
        return replace(self, scale=self.scale * lam)

    def fourier_table(self, cutoff: int) -> FourierCoefficients:
        """Exact coefficients on the lattice of ``2 pi``."""
        table = {int(m): self.scale * c for m, c in self.coefficients}
        return FourierCoefficients.from_dict(OrderedBasis.diagonal([TWO_PI]), table, cutoff)


def _trig(freqs, coefs):
    def f(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for m, c in zip(freqs, coefs):
            out = out + c * np.exp(1j * m * x)
        return out

    return f


@dataclass(frozen=True)
class SignalFamily:
    """Deterministic generator of test signals from ``(id, grid, seed)``."""

    id: str
    grid: tuple = ()
    seed: int = 0
    size: int | None = None

    def __post_init__(self):
        if self.id not in FAMILY_IDS:
            raise ValueError(f"unknown signal family {self.id!r}")
        if not self.grid:
            object.__setattr__(self, "grid", _DEFAULT_GRIDS[self.id])
        object.__setattr__(self, "grid", tuple(self.grid))

    def signals(self) -> list[Signal]:
        gid = self.id
        if gid == "gaussian-dilates":
            return [
                Signal(f"gauss-w{w:.4g}", gid, {"width": w}, lambda x, w=w: np.exp(-np.asarray(x) ** 2 / (2 * w * w)))
                for w in self.grid
            ]
        if gid == "modulated-gaussians":
            return [
                Signal(f"modgauss-m{m:.4g}", gid, {"modulation": m}, lambda x, m=m: np.exp(1j * m * np.asarray(x) - np.asarray(x) ** 2 / 2))
                for m in self.grid
            ]
        if gid == "hermite-like":
            out = []
            for n in self.grid:
                c = np.zeros(int(n) + 1)
                c[-1] = 1.0 / math.sqrt(2.0**n * math.factorial(int(n)))
                out.append(
                    Signal(f"hermite-{int(n)}", gid, {"order": int(n)},
                           lambda x, c=c: np.polynomial.hermite.hermval(np.asarray(x), c) * np.exp(-np.asarray(x) ** 2 / 2))
                )
            return out
        if gid == "cell-indicator":
            return [
                Signal(f"cell-{a:.4g}", gid, {"length": a},
                       lambda x, a=a: ((np.asarray(x) >= min(0, a)) & (np.asarray(x) < max(0, a))).astype(float))
                for a in self.grid
            ]
        rng = np.random.default_rng(self.seed)
        size = self.size if self.size is not None else _DEFAULT_SIZES[gid]
        out = []
        if gid == "trig-polynomials":
            max_terms, max_freq = int(self.grid[0]), int(self.grid[1])
            for i in range(size):
                n = int(rng.integers(1, max_terms + 1))
                freqs = np.sort(rng.choice(np.arange(-max_freq, max_freq + 1), size=n, replace=False))
                coefs = rng.normal(size=n) + 1j * rng.normal(size=n)
                out.append(
                    Signal(f"trig-{i:02d}", gid, {"terms": n}, _trig(freqs, coefs),
                           coefficients=tuple((int(m), complex(c)) for m, c in zip(freqs, coefs)))
                )
            return out
        # random-bandlimited: Gaussian-windowed random trigonometric sums
        half = int(self.grid[0])
        for i in range(size):
            coefs = rng.normal(size=2 * half + 1) + 1j * rng.normal(size=2 * half + 1)
            inner = _trig(np.arange(-half, half + 1) / 2.0, coefs)
            out.append(Signal(f"bandlim-{i:02d}", gid, {"half": half},
                              lambda x, g=inner: g(x) * np.exp(-np.asarray(x) ** 2 / 8)))
        return out

    def to_dict(self) -> dict:
        return {"id": self.id, "grid": list(self.grid), "seed": self.seed, "size": self.size}

    @classmethod
    def from_dict(cls, doc: dict) -> "SignalFamily":
        unknown = set(doc) - {"id", "grid", "seed", "size"}
        if unknown:
            raise ValueError(f"unknown family keys: {sorted(unknown)}")
        return cls(doc["id"], tuple(doc.get("grid", ())), int(doc.get("seed", 0)), doc.get("size"))


# ---------------------------------------------------------------------------
# reports


@dataclass
class CheckResult:
    """Verdict of one check with scalar metrics and CSV rows."""

    name: str
    passed: bool
    metrics: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def summary(self) -> dict:
        return {
            "name": self.name,
            "verdict": self.verdict,
            "metrics": self.metrics,
            "failures": self.failures,
            "provenance": self.provenance,
        }


@dataclass
class EquivalenceReport:
    """Ratios ``A/B`` per signal at two resolutions (row 0 coarse, row 1 fine)."""

    name: str
    spec_a: str
    spec_b: str
    signal_ids: list
    a: np.ndarray
    b: np.ndarray
    spread_bound: float = 4.0
    drift_bound: float = DRIFT_BOUND

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=float).reshape(2, -1)
        self.b = np.asarray(self.b, dtype=float).reshape(2, -1)

    @property
    def degenerate(self) -> bool:
        """A norm vanished (or blew up) where the other did not."""
        a, b = self.a, self.b
        return bool(np.any((a == 0) != (b == 0)) or not np.all(np.isfinite(a)) or not np.all(np.isfinite(b)))

    def _ratios(self, row: int) -> np.ndarray:
        a, b = self.a[row], self.b[row]
        both_zero = (a == 0) & (b == 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(b != 0, a / np.where(b != 0, b, 1.0), np.inf)
        return r[~both_zero]

    @property
    def ratios(self) -> np.ndarray:
        return self._ratios(1)

    @property
    def ratios_coarse(self) -> np.ndarray:
        return self._ratios(0)

    @property
    def min(self) -> float:
        return float(np.min(self.ratios)) if self.ratios.size else 1.0

    @property
    def max(self) -> float:
        return float(np.max(self.ratios)) if self.ratios.size else 1.0

    @property
    def spread(self) -> float:
        if self.degenerate:
            return math.inf
        return self.max / self.min if self.min > 0 else math.inf

    @property
    def drift(self) -> float:
        if self.degenerate:
            return math.inf
        rc, rf = self.ratios_coarse, self.ratios
        if not rf.size:
            return 0.0
        return float(np.max(np.abs(rf / rc - 1.0)))

    @property
    def passed(self) -> bool:
        return (not self.degenerate) and self.spread <= self.spread_bound and self.drift <= self.drift_bound

    def rows(self) -> list[dict]:
        out = []
        for k, res in enumerate(("coarse", "fine")):
            for sid, a, b in zip(self.signal_ids, self.a[k], self.b[k]):
                out.append({
                    "report": self.name, "signal": sid, "resolution": res,
                    "norm_a": float(a), "norm_b": float(b),
                    "ratio": float(a / b) if b != 0 else math.inf,
                })
        return out

    def summary(self) -> dict:
        return {
            "report": self.name, "spec_a": self.spec_a, "spec_b": self.spec_b,
            "min": self.min, "max": self.max, "spread": self.spread, "drift": self.drift,
            "spread_bound": self.spread_bound, "drift_bound": self.drift_bound,
            "degenerate": self.degenerate, "verdict": "PASS" if self.passed else "FAIL",
        }


def _equivalence(name, signals, eval_a, eval_b, spread_bound, spec_a="A", spec_b="B") -> EquivalenceReport:
    """Evaluate ``eval_x(signal, level)`` for levels 0 (coarse) and 1 (fine)."""
    jobs = [(s, lvl) for lvl in (0, 1) for s in signals]
    vals = _map(lambda job: (float(eval_a(*job)), float(eval_b(*job))), jobs)
    n = len(signals)
    a = np.array([v[0] for v in vals]).reshape(2, n)
    b = np.array([v[1] for v in vals]).reshape(2, n)
    return EquivalenceReport(name, spec_a, spec_b, [s.id for s in signals], a, b, spread_bound)


def _merge(name: str, reports: Sequence[EquivalenceReport], extra_failures=(), metrics=None, provenance=None) -> CheckResult:
    rows = [r for rep in reports for r in rep.rows()]
    failures = [f"{rep.name}: spread {rep.spread:.4g} (bound {rep.spread_bound}), drift {rep.drift:.3g}"
                for rep in reports if not rep.passed]
    failures += list(extra_failures)
    m = {rep.name: {"spread": rep.spread, "drift": rep.drift, "min": rep.min, "max": rep.max} for rep in reports}
    if metrics:
        m.update(metrics)
    return CheckResult(name, not failures, m, rows, failures, provenance or {})


# ---------------------------------------------------------------------------
# identities


def check_quasiperiodicity(F: ZakField) -> float:
    """Largest relative defect of both quasi-periodicity identities (0 for F = 0)."""
    return quasi_periodicity_defect(F)


def corrupt_zak(F: ZakField, factor: float = 1.01) -> ZakField:
    """Scale the fundamental cell block by ``factor`` (planted defect)."""
    vals = F.field.values.copy()
    sl = tuple(slice(0, n) for n in F.per_cell) + tuple(slice(0, n) for n in F.xi_per_cell)
    vals[sl] *= factor
    return F.with_values(vals)


def _overlap(arr: np.ndarray, axis: int, s: int):
    """Views ``(A[i + s], A[i])`` over all ``i`` where both exist."""
    n = arr.shape[axis]
    if s >= 0:
        hi = np.take(arr, np.arange(s, n), axis=axis)
        lo = np.take(arr, np.arange(0, n - s), axis=axis)
    else:
        hi = np.take(arr, np.arange(0, n + s), axis=axis)
        lo = np.take(arr, np.arange(-s, n), axis=axis)
    return hi, lo


def check_echo_periodicity(G: SampledField) -> float:
    """Relative defect of the echo-periodicity identities of ``V_Phi(Z f)`` (d = 1).

    Line 1: ``V(x + k, xi, eta, y) = e^{-i k eta} V(x, xi, eta, y - k)``.
    Line 2: ``V(x, xi + kappa, eta, y) = e^{-i y kappa} V(x, xi, eta, y)``.
    Every lattice shift that fits inside the sampled x- and xi-ranges is used.
    """
    V = G.values
    scale = float(np.max(np.abs(V))) if V.size else 0.0
    if scale == 0.0:
        return 0.0
    a = float(G.meta["basis"][0][0])
    kappa = TWO_PI / a
    sx, sxi = int(G.meta["x_shift_steps"]), int(G.meta["xi_shift_steps"])
    _, _, eta_ax, y_ax = G.axes
    eta, y = eta_ax.coords, y_ax.coords
    m = a / y_ax.step
    if abs(m - round(m)) > 1e-9 * max(1.0, abs(m)):
        raise ValueError("y-grid step does not divide the lattice step")
    m = int(round(m))
    worst = 0.0
    for c in range(1, (V.shape[0] - 1) // sx + 1):
        hi, lo = _overlap(V, 0, c * sx)
        hi, _ = _overlap(hi, 3, c * m)
        _, lo = _overlap(lo, 3, c * m)
        phase = np.exp(-1j * c * a * eta)[None, None, :, None]
        worst = max(worst, float(np.max(np.abs(hi - phase * lo))))
    for c in range(1, (V.shape[1] - 1) // sxi + 1):
        hi, lo = _overlap(V, 1, c * sxi)
        phase = np.exp(-1j * c * kappa * y)[None, None, None, :]
        worst = max(worst, float(np.max(np.abs(hi - phase * lo))))
    return worst / scale


def plant_phase_error(G: SampledField, phase: float = 0.01) -> SampledField:
    """Multiply the first half of the xi-axis by ``e^{i phase}`` (planted defect)."""
    vals = G.values.copy()
    vals[:, : vals.shape[1] // 2] *= np.exp(1j * phase)
    return G.with_values(vals)


def check_zak_parseval(f: SampledField, E: OrderedBasis | None = None, xi_per_cell: int = 64) -> float:
    """``||Z_E f||_{L^2(cell x dual cell)} / ||f||_{L^2}`` in standard measure."""
    nf = f.l2_norm()
    if nf == 0:
        raise ValueError("zero signal: the Parseval constant is undefined")
    Z = zak(f, E, xi_per_cell=xi_per_cell)
    return Z.l2_norm() / nf


def finite_zak_parseval_defect(f, M: int, N: int) -> float:
    """``| sum |Zf|^2 - N sum |f|^2 | / (N sum |f|^2)``."""
    f = np.asarray(f, dtype=complex)
    ref = N * float(np.sum(np.abs(f) ** 2))
    Z = finite_zak(f, M, N)
    return abs(float(np.sum(np.abs(Z) ** 2)) - ref) / ref if ref else 0.0


def stft_closed_form_error(step: float = 1 / 16, half_width: float = 16.0) -> float:
    """Max error of ``|V_phi phi|`` against ``2^{-1/2} e^{-(x^2 + xi^2)/4}`` (unit Gaussian)."""
    phi = gaussian_window(1.0)
    f = sample(phi, (-half_width, half_width), step)
    V = stft(f, phi, x_range=(-half_width / 2, half_width / 2))
    x, xi = np.meshgrid(V.coords(0), V.coords(1), indexing="ij")
    ref = 2**-0.5 * np.exp(-(x**2 + xi**2) / 4)
    return float(np.max(np.abs(np.abs(V.values) - ref)))


# ---------------------------------------------------------------------------
# hard inequalities


def wiener_lebesgue_ratio(f: SampledField, p, r=1.0, E: OrderedBasis | None = None) -> float:
    """``||f||_{W^r(l^p)} / ||f||_{L^p}``; at most 1 when ``r <= min(p)`` and cells have measure 1."""
    p_ = MixedExponent.of(p, f.ndim)
    if MixedExponent.of(r, f.ndim).min() > p_.min():
        raise ValueError("the Wiener estimate needs r <= min(p)")
    den = mixed_lebesgue_norm(f, E, p_).value
    return wiener_norm(f, E, r, p_).value / den if den else 0.0


def cell_holder_ratios(f: SampledField, E: OrderedBasis, r: float) -> np.ndarray:
    """Per-cell ``||f||_{L^r(j + cell)} / (|cell|^{1/r} sup_cell |f|)`` in standard measure."""
    from .norms import _block_axes

    E = as_basis(E, f.ndim)
    axes = _block_axes(f, 0, f.ndim, E)
    cells, _ = cellify(np.abs(f.values), axes, range(f.ndim))
    d = f.ndim
    order = [2 * k + 1 for k in range(d)] + [2 * k for k in range(d)]
    cells = np.transpose(cells, order)
    flat = cells.reshape((-1,) + cells.shape[d:])
    h = math.prod(a.step for a in axes) * E.volume
    sup = flat.max(axis=0)
    local = (np.sum(flat**r, axis=0) * h) ** (1.0 / r) if not math.isinf(r) else sup
    bound = E.volume ** (1.0 / r if not math.isinf(r) else 0.0) * sup
    keep = sup > 0
    return local[keep] / bound[keep]


def _young_hypothesis(p: MixedExponent, r: MixedExponent) -> None:
    for k in range(len(r)):
        cap = min([1.0] + list(p.entries[: k + 1]))
        if r[k] > cap:
            raise ValueError(
                f"semi-discrete Young estimate requires r_k <= min(1, p_1..p_k): r_{k + 1}={r[k]} > {cap}"
            )


def _bump_field(rng, d: int, E: OrderedBasis, half: float, step: float, bumps: int = 4, spread: float = 1.5):
    centers = rng.uniform(-spread, spread, size=(bumps, d))
    amps = rng.uniform(0.1, 1.0, size=bumps)
    widths = rng.uniform(0.25, 0.5, size=bumps)

    def g(*u):
        out = 0.0
        for c, a, w in zip(centers, amps, widths):
            out = out + a * np.exp(-sum((ui - ci) ** 2 for ui, ci in zip(u, c)) / (2 * w * w))
        return out

    return sample(g, ((-half,) * d, (half,) * d), step, basis=E)


def young_constant(a: LatticeSequence, f: SampledField, E: OrderedBasis, p, r, omega: Weight | None = None, v: Weight | None = None) -> float:
    """``||a *_E f||_{L^p_omega} / (||a||_{l^r_v} ||f||_{L^p_omega})``."""
    d = f.ndim
    p_ = MixedExponent.of(p, d)
    r_ = MixedExponent.of(r, d)
    _young_hypothesis(p_, r_)
    conv = semidiscrete_convolve(a, f, E)
    num = mixed_lebesgue_norm(conv, E, p_, omega).value
    den = sequence_norm(a, E, r_, v).value * mixed_lebesgue_norm(f, E, p_, omega).value
    return num / den


def check_young_semidiscrete(
    E: OrderedBasis | None = None,
    p=1.0,
    r=1.0,
    omega: Weight | None = None,
    v: Weight | None = None,
    pairs: int = 50,
    seed: int = 0,
    d: int = 1,
    steps=(1 / 8, 1 / 16),
) -> CheckResult:
    """Empirical constant of the semi-discrete Young estimate over random nonnegative pairs.

    For ``p = r = 1`` with trivial weights the triangle inequality forces
    ``C <= 1``; that case is asserted as a hard bound.
    """
    E = OrderedBasis.standard(d) if E is None else E
    d = E.dim
    p_ = MixedExponent.of(p, d)
    r_ = MixedExponent.of(r, d)
    _young_hypothesis(p_, r_)
    consts = np.zeros((2, pairs))
    rows = []
    for i in range(pairs):
        rng = np.random.default_rng([seed, i])
        support = 2
        pts = np.stack(np.meshgrid(*[np.arange(-support, support + 1)] * d, indexing="ij"), -1).reshape(-1, d)
        vals = rng.uniform(0, 1, size=len(pts)) * (rng.uniform(size=len(pts)) < 0.6)
        vals[len(pts) // 2] += 0.1
        a = LatticeSequence(E, pts, vals)
        state = rng.bit_generator.state
        for lvl, h in enumerate(steps):
            rng.bit_generator.state = state
            f = _bump_field(rng, d, E, 6.0, h)
            consts[lvl, i] = young_constant(a, f, E, p_, r_, omega, v)
        rows.append({"pair": i, "C_coarse": consts[0, i], "C_fine": consts[1, i]})
    C = float(consts[1].max())
    drift = abs(C / float(consts[0].max()) - 1.0)
    failures = []
    hard = all(x == 1.0 for x in p_) and all(x == 1.0 for x in r_) and E.is_standard and (omega is None or omega.is_trivial) and (v is None or v.is_trivial)
    if hard and C > 1 + 1e-9:
        failures.append(f"L1 Young constant {C!r} exceeds 1 + 1e-9")
    if not math.isfinite(C):
        failures.append("Young constant is not finite")
    if drift > DRIFT_BOUND:
        failures.append(f"Young constant drift {drift:.3g} exceeds {DRIFT_BOUND}")
    metrics = {"C": C, "C_coarse": float(consts[0].max()), "drift": drift, "hard_bound": 1.0 if hard else None}
    return CheckResult("young-semidiscrete", not failures, metrics, rows, failures,
                       {"p": p_.to_list(), "r": r_.to_list(), "basis": E.to_dict()})


def check_hard_inequalities(fields: int = 50, seed: int = 0) -> CheckResult:
    """Wiener-vs-Lebesgue with constant 1, per-cell Hoelder and the L^1 Young bound."""
    rows, failures = [], []
    worst_w = 0.0
    rng = np.random.default_rng(seed)
    for i in range(fields):
        vals = rng.normal(size=256) + 1j * rng.normal(size=256)
        vals *= rng.uniform(size=256) < rng.uniform(0.2, 1.0)
        f = SampledField((sample(lambda x: x, (-8, 8), 1 / 16).axes[0],), vals)
        for p in (1.0, 1.5, 2.0, INF):
            ratio = wiener_lebesgue_ratio(f, p, 1.0)
            worst_w = max(worst_w, ratio)
            rows.append({"test": "wiener-vs-lebesgue", "field": i, "param": str(p), "ratio": ratio})
    if worst_w > 1.0 + 1e-12:
        failures.append(f"W^1(l^p) exceeded L^p: ratio {worst_w!r}")
    worst_h = 0.0
    bases = [OrderedBasis.diagonal([2.0]), OrderedBasis([[1.0, 0.5], [0.0, 1.5]])]
    for i in range(10):
        for E in bases:
            d = E.dim
            box = ((-3.0,) * d, (3.0,) * d)
            shape = (96,) * d
            vals = rng.normal(size=shape) + 1j * rng.normal(size=shape)
            f = SampledField(sample(lambda *u: 0 * u[0], box, 1 / 16, basis=E).axes, vals, E)
            for r in (0.5, 1.0, 2.0):
                ratio = float(np.max(cell_holder_ratios(f, E, r)))
                worst_h = max(worst_h, ratio)
                rows.append({"test": "cell-holder", "field": i, "param": f"d={d},r={r}", "ratio": ratio})
    if worst_h > 1.0 + 1e-12:
        failures.append(f"per-cell Hoelder bound exceeded: ratio {worst_h!r}")
    young = check_young_semidiscrete(None, 1.0, 1.0, pairs=fields, seed=seed)
    for row in young.rows:
        rows.append({"test": "young-l1", "field": row["pair"], "param": "p=r=1", "ratio": row["C_fine"]})
    failures += young.failures
    metrics = {"wiener_vs_lebesgue_max": worst_w, "cell_holder_max": worst_h, "young_l1_max": young.metrics["C"]}
    return CheckResult("hard-inequalities", not failures, metrics, rows, failures, {"fields": fields, "seed": seed})


# ---------------------------------------------------------------------------
# equivalences


_LEVEL_STEPS = (1 / 8, 1 / 16)
_LINE_BOX = (-24.0, 24.0)
_LINE_X = (-16.0, 16.0)


def _line_stft(sig: Signal, level: int, phi: Window) -> SampledField:
    f = sig.sample(_LINE_BOX, _LEVEL_STEPS[level])
    return stft(f, phi, x_range=_LINE_X)


def run_equivalence(
    family: SignalFamily | Sequence[Signal],
    A: NormSpec,
    B: NormSpec,
    spread_bound: float = 4.0,
    name: str = "equivalence",
) -> EquivalenceReport:
    """Ratios ``A/B`` on every signal of the family at two resolutions.

    Non-periodic signals are sampled with steps 1/8 and 1/16 and
    transformed for x in ``[-16, 16)``; periodic ones with 64 and 128
    samples per period and x in ``[0, 2 pi)``. The sampling box leaves a
    margin of at least seven window widths around the transformed range.
    """
    signals = family.signals() if isinstance(family, SignalFamily) else list(family)

    def ev(spec):
        def run(sig: Signal, level: int) -> float:
            width = spec.window.width if spec.window is not None else 1.0
            if sig.periodic:
                margin = max(3, math.ceil(7 * width / TWO_PI))
                f = sig.sample((-margin * TWO_PI, (margin + 1) * TWO_PI), TWO_PI / (64 * 2**level))
                kw = {"x_range": (0.0, TWO_PI)}
            else:
                half = _LINE_X[1] + max(8, math.ceil(7 * width))
                f = sig.sample((-half, half), _LEVEL_STEPS[level])
                kw = {"x_range": _LINE_X}
            if spec.family == "periodic-coefficient":
                kw = {}
            return evaluate(spec, f, **kw).value

        return run

    return _equivalence(name, signals, ev(A), ev(B), spread_bound, A.label(), B.label())


def check_window_independence(family, phi1: Window, phi2: Window, spec: NormSpec, spread_bound: float = 4.0) -> EquivalenceReport:
    """Ratio of ``spec`` evaluated with two windows across the family."""
    return run_equivalence(family, replace(spec, window=phi1), replace(spec, window=phi2), spread_bound, "window-independence")


def check_embedding(
    fields: Sequence[tuple[str, SampledField, SampledField]],
    source: NormSpec,
    target: NormSpec,
    hard_bound: float | None = None,
    name: str = "embedding",
) -> CheckResult:
    """Empirical embedding constant ``max target/source`` over (id, coarse, fine) fields.

    ``hard_bound`` asserts ``target <= hard_bound * source`` on every field.
    """
    a = np.zeros((2, len(fields)))
    b = np.zeros((2, len(fields)))
    for i, (_, Fc, Ff) in enumerate(fields):
        for lvl, F in enumerate((Fc, Ff)):
            a[lvl, i] = evaluate(target, F).value
            b[lvl, i] = evaluate(source, F).value
    rep = EquivalenceReport(name, target.label(), source.label(), [fid for fid, _, _ in fields], a, b, math.inf)
    C = rep.max
    failures = []
    if not math.isfinite(C):
        failures.append("embedding constant is not finite")
    drift = abs(C / float(np.max(rep.ratios_coarse)) - 1.0) if rep.ratios.size else 0.0
    if drift > DRIFT_BOUND:
        failures.append(f"embedding constant drift {drift:.3g} exceeds {DRIFT_BOUND}")
    if hard_bound is not None:
        worst = float(max(np.max(rep.ratios), np.max(rep.ratios_coarse)))
        if worst > hard_bound * (1 + 1e-12):
            failures.append(f"hard bound {hard_bound} violated: ratio {worst!r}")
    metrics = {"C": C, "drift": drift, "hard_bound": hard_bound}
    return CheckResult(name, not failures, metrics, rep.rows(), failures,
                       {"source": source.to_dict(), "target": target.to_dict()})


def wiener_chain(E1: OrderedBasis, p=1.0, q=1.0, r=1.0, r1=None) -> tuple[NormSpec, NormSpec, NormSpec]:
    """Specs of the three members of the phase-space Wiener inclusion chain (d = 1).

    ``E1`` is the x-basis; the xi-basis is its dual. Returns the spaces with
    local exponents ``(r, inf)``, the mixed variant (Wiener in x for every
    xi, then ``L^q`` in xi) and the one with a single local exponent
    ``r1 <= min(p, q, r)``.
    """
    E1 = as_basis(E1, 1)
    E2 = dual_basis(E1)
    E = OrderedBasis.diagonal([E1.matrix[0, 0], E2.matrix[0, 0]])
    r1 = min(p, q, r) if r1 is None else r1
    if r1 > min(p, q, r):
        raise ValueError(f"r1={r1} must not exceed min(p, q, r)={min(p, q, r)}")
    src = NormSpec("wiener", MixedExponent((p, q)), E, local=MixedExponent((r, INF)))
    mid = NormSpec("wiener-phase-1", MixedExponent((p,)), E1, local=MixedExponent((r,)),
                   inner=NormSpec("mixed-lebesgue", MixedExponent((q,)), E2))
    tgt = NormSpec("wiener", MixedExponent((p, q)), E, local=MixedExponent((r1, r1)))
    return src, mid, tgt


def stft_fields(family: SignalFamily, phi: Window | None = None) -> list[tuple[str, SampledField, SampledField]]:
    """Coarse and fine STFTs of every signal of a non-periodic family."""
    phi = phi or gaussian_window(1.0)
    sigs = family.signals()
    out = _map(lambda s: (s.id, _line_stft(s, 0, phi), _line_stft(s, 1, phi)), sigs)
    return out


def check_wiener_r_independence(
    family: SignalFamily | None = None,
    ps=(0.5, 1.0, 2.0),
    rs=(0.5, 1.0, 2.0),
    phi: Window | None = None,
    spread_bound: float = 4.0,
) -> CheckResult:
    """``||V f||_{W^r(l^p)} / ||V f||_{W^inf(l^p)}`` across signals, per ``(p, r)``.

    Cells are those of the phase-split basis ``diag(1, 2 pi)``.
    """
    family = family or SignalFamily("gaussian-dilates")
    E = OrderedBasis.diagonal([1.0, TWO_PI])
    fields = stft_fields(family, phi)
    reports = []
    for p in ps:
        ref = {}
        for fid, Fc, Ff in fields:
            ref[fid] = [wiener_norm(F, E, INF, p).value for F in (Fc, Ff)]
        for r in rs:
            a = np.zeros((2, len(fields)))
            b = np.zeros((2, len(fields)))
            for i, (fid, Fc, Ff) in enumerate(fields):
                for lvl, F in enumerate((Fc, Ff)):
                    a[lvl, i] = wiener_norm(F, E, r, p).value
                    b[lvl, i] = ref[fid][lvl]
            reports.append(EquivalenceReport(f"p={p},r={r}", f"W^{r}(l^{p})", f"W^inf(l^{p})",
                                             [f[0] for f in fields], a, b, spread_bound))
    return _merge("wiener-r-independence", reports, provenance={"family": family.to_dict(), "basis": E.to_dict()})


# ---------------------------------------------------------------------------
# periodic characterization


def periodic_profile(V: SampledField, r: float, E0: float = TWO_PI) -> np.ndarray:
    """``xi -> ||V(., xi)||_{L^r}`` over one period in E-coordinates (unit cell measure)."""
    steps_u = V.axes[0].step / E0
    n = int(round(1.0 / steps_u))
    if abs(n * steps_u - 1.0) > 1e-9 or V.axes[0].count < n:
        raise ValueError("the x-grid must cover one full period with an integer number of samples")
    return reduce_axes(V.values[:n], [0], [r], [steps_u])


def periodic_norms(
    sig: Signal, level: int, q: float, rs: Sequence[float], phi: Window,
    omega0: Weight | None = None, noise_floor: float = 1e-10,
) -> dict:
    """Coefficient-side and STFT-side norms of a 2 pi-periodic signal.

    Trigonometric polynomials use their exact coefficients; other signals
    get FFT coefficients over one period. STFT values below
    ``noise_floor`` times the peak are set to zero.
    """
    per = 64 * 2**level
    margin = max(3, math.ceil(7 * phi.width / TWO_PI))
    f = sig.sample((-margin * TWO_PI, (margin + 1) * TWO_PI), TWO_PI / per)
    V = stft(f, phi, x_range=(0.0, TWO_PI))
    # FFT round-off would otherwise dominate quasi-norms with exponents below 1
    mag = np.abs(V.values)
    V = V.with_values(np.where(mag > noise_floor * mag.max(), V.values, 0.0))
    xi = V.coords(1)
    w = omega0(xi[:, None]) if omega0 is not None and not omega0.is_trivial else 1.0
    dxi = V.axes[1].step
    out = {}
    for r in rs:
        g = periodic_profile(V, r) * w
        out[("restricted", r)] = float(reduce_axes(g, [0], [q], [dxi]))
    sup = np.max(np.abs(V.values), axis=0) * w
    out["sup"] = float(reduce_axes(sup, [0], [q], [dxi]))
    cutoff = min(per // 2 - 1, 24)
    if sig.periodic:
        c = sig.fourier_table(cutoff)
    else:
        c = fourier_coefficients(f, OrderedBasis.diagonal([TWO_PI]), cutoff=cutoff)
    seq_vals = c.table.reshape(-1)
    if omega0 is not None and not omega0.is_trivial:
        seq_vals = seq_vals * omega0(c.frequencies())
    out["coefficients"] = float(reduce_axes(seq_vals, [0], [q], [1.0]))
    return out


def check_periodic_modulation(
    family: SignalFamily | None = None,
    pairs=((0.5, 0.5), (1.0, 1.0), (2.0, 0.5), (2.0, 2.0)),
    phi: Window | None = None,
    omega0: Weight | None = None,
    spread_bound: float = 3.0,
    r_family=(0.5, 1.0, 2.0, INF),
) -> CheckResult:
    """Coefficient norms against restricted STFT norms of trigonometric polynomials.

    For each ``(q, r)`` the report compares the weighted ``l^q`` norm of the
    Fourier coefficients with the ``L^q`` norm of
    ``xi -> ||V f(., xi)||_{L^r(period)}``. The sup-over-x member and the
    r-independence over ``r_family`` are reported as well. Homogeneity under
    ``f -> lambda f`` is asserted to 1e-12.
    """
    family = family or SignalFamily("trig-polynomials", seed=0)
    # a wide window separates neighbouring integer frequencies in xi
    phi = phi or gaussian_window(3.0)
    sigs = family.signals()
    qs = sorted({q for q, _ in pairs})
    rs_all = sorted(set(r for _, r in pairs) | set(r_family))
    cache = {}
    jobs = [(s, lvl, q) for s in sigs for lvl in (0, 1) for q in qs]
    for (s, lvl, q), val in zip(jobs, _map(lambda j: periodic_norms(j[0], j[1], j[2], rs_all, phi, omega0), jobs)):
        cache[(s.id, lvl, q)] = val
    reports = []

    def rep(name, key_a, key_b, q, bound):
        a = np.array([[cache[(s.id, lvl, q)][key_a] for s in sigs] for lvl in (0, 1)])
        b = np.array([[cache[(s.id, lvl, q)][key_b] for s in sigs] for lvl in (0, 1)])
        return EquivalenceReport(name, str(key_a), str(key_b), [s.id for s in sigs], a, b, bound)

    for q, r in pairs:
        reports.append(rep(f"q={q},r={r}", "coefficients", ("restricted", r), q, spread_bound))
    for q in qs:
        reports.append(rep(f"q={q},sup", "coefficients", "sup", q, spread_bound))
        for r in r_family:
            reports.append(rep(f"q={q},r={r},vs-sup", ("restricted", r), "sup", q, spread_bound))
    # exact homogeneity
    lam = 2.5 - 1.5j
    hom = 0.0
    for s in sigs[: min(5, len(sigs))]:
        for q, r in pairs:
            base = periodic_norms(s, 0, q, [r], phi, omega0)
            scaled = periodic_norms(s.scaled(lam), 0, q, [r], phi, omega0)
            for key in ("coefficients", ("restricted", r)):
                ratio = base[key] / scaled[key] * abs(lam)
                hom = max(hom, abs(ratio - 1.0))
    extra = [] if hom <= 1e-12 else [f"homogeneity defect {hom:.3g} exceeds 1e-12"]
    return _merge("periodic-modulation", reports, extra, {"homogeneity_defect": hom},
                  {"family": family.to_dict(), "window": phi.to_dict()})


# ---------------------------------------------------------------------------
# Zak characterizations


_ZAK_GRIDS = (
    ZakGrid(x_per_cell=16, t_per_cell=64, x_stride=1, xi_stride=2, eta_step=0.25, n_eta=160, n_y=400),
    ZakGrid(x_per_cell=32, t_per_cell=128, x_stride=2, xi_stride=4, eta_step=0.25, n_eta=160, n_y=400),
)


def zak_modulation_profile(
    f: SampledField,
    E: OrderedBasis | None,
    Phi: Window,
    grid: ZakGrid,
    ps=(2.0,),
    omega0: Weight | None = None,
    decay_tol: float = 1e-12,
) -> dict:
    """``H(x, xi) = ||V_Phi(Z f)(x, xi, .) omega||_{L^p}`` over the (eta, y) plane.

    The weight is ``omega(x, xi, eta, y) = omega0(x - y, eta)``. Returns a
    dict mapping each ``p`` to a field on the sampled (x, xi) grid; the
    first exponent acts on eta, the second on y.
    """
    plan = plan_stft_of_zak(f, E, Phi, grid, decay_tol)
    H = {p: np.zeros((len(plan.x_out), len(plan.xi_out))) for p in ps}
    eta_ax = y_ax = None
    for ix, v, eta_ax, y_ax in iter_stft_of_zak(plan, Phi):
        g = np.abs(v)
        if omega0 is not None and not omega0.is_trivial:
            eta, y = eta_ax.coords, y_ax.coords
            pts = np.stack(np.broadcast_arrays((plan.x_out[ix] - y)[None, :], eta[:, None]), -1)
            g = g * omega0(pts)[None]
        for p in ps:
            pe = MixedExponent.of(p, 2)
            H[p][ix] = reduce_axes(g, [1, 2], pe, [eta_ax.step, y_ax.step])
    a = plan.a
    from .fields import Axis

    axes = (
        Axis(0.0, a * grid.x_stride / grid.x_per_cell, len(plan.x_out)),
        Axis(0.0, TWO_PI / a * grid.xi_stride / grid.t_per_cell, len(plan.xi_out)),
    )
    meta = {
        "x_shift_steps": grid.x_per_cell // grid.x_stride,
        "xi_shift_steps": grid.t_per_cell // grid.xi_stride,
        "basis": [[a]],
        "eta_range": [eta_ax.origin, eta_ax.origin + eta_ax.length],
        "y_range": [y_ax.origin, y_ax.origin + y_ax.length],
    }
    return {p: SampledField(axes, H[p], None, dict(meta, p=MixedExponent.of(p, 2).to_list())) for p in ps}


def h_periodicity_defect(H: SampledField) -> float:
    """Relative defect of ``H(x + k, xi + kappa) = H(x, xi)`` on the sampled cells."""
    vals = H.values.real
    scale = float(np.max(np.abs(vals)))
    if scale == 0:
        return 0.0
    worst = 0.0
    for axis, key in ((0, "x_shift_steps"), (1, "xi_shift_steps")):
        s = int(H.meta[key])
        for c in range(1, (vals.shape[axis] - 1) // s + 1):
            hi, lo = _overlap(vals, axis, c * s)
            worst = max(worst, float(np.max(np.abs(hi - lo))))
    return worst / scale


def _cell_norm(H: SampledField, r: float) -> float:
    """``||H||_{L^r}`` over the fundamental cell in E x E' coordinates."""
    sx, sxi = int(H.meta["x_shift_steps"]), int(H.meta["xi_shift_steps"])
    vals = H.values[:sx, :sxi]
    return float(reduce_axes(vals, [0, 1], [r, r], [1.0 / sx, 1.0 / sxi]))


def _zak_sample(sig: Signal, level: int, x_per_cell: int) -> SampledField:
    return sig.sample(_LINE_BOX, 1.0 / x_per_cell)


def check_zak_modulation(
    family: Sequence[Signal] | SignalFamily | None = None,
    E: OrderedBasis | None = None,
    ps=(1.0, 2.0),
    Phi: Window | None = None,
    phi: Window | None = None,
    rs=(0.5, 1.0, 2.0, INF),
    grids: tuple[ZakGrid, ZakGrid] = _ZAK_GRIDS,
    spread_bound: float = 4.0,
    omega0: Weight | None = None,
) -> CheckResult:
    """Modulation norms against STFTs of Zak transforms (d = 1).

    Compares ``||V_Phi(Z f)||_{L^p(cell x R^2)}`` with ``||f||_{M^p}``,
    verifies the periodicity of ``H`` on two lattice cells in each of x
    and xi, and compares ``||H||_{L^r(cell)}`` with ``||f||_{M^p}`` for every
    ``r`` in ``rs``.
    """
    if family is None:
        signals = SignalFamily("gaussian-dilates", (0.5, 1.0, 2.0)).signals() + SignalFamily("modulated-gaussians", (1.0, 2.5)).signals()
    elif isinstance(family, SignalFamily):
        signals = family.signals()
    else:
        signals = list(family)
    E = as_basis(E, 1)
    Phi = Phi or Window(1.0, (0.0, 0.0), (0.0, 0.0))
    phi = phi or gaussian_window(1.0)

    def work(job):
        sig, lvl = job
        grid = grids[lvl]
        f = _zak_sample(sig, lvl, grid.x_per_cell * (2 if lvl == 0 else 1))
        H = zak_modulation_profile(f, E, Phi, grid, ps, omega0)
        out = {}
        for p in ps:
            out[("cor", p)] = _cell_norm_standard(H[p], p)
            for r in rs:
                out[("H", p, r)] = _cell_norm(H[p], r)
        V = _line_stft(sig, lvl, phi)
        for p in ps:
            out[("M", p)] = modulation_norm(sig.sample(_LINE_BOX, _LEVEL_STEPS[lvl]), phi, "M", None, None, p, p, V=V).value
        return out

    jobs = [(s, lvl) for lvl in (0, 1) for s in signals]
    res = dict(zip([(s.id, lvl) for s, lvl in jobs], _map(work, jobs)))
    reports = []
    for p in ps:
        a = np.array([[res[(s.id, lvl)][("cor", p)] for s in signals] for lvl in (0, 1)])
        b = np.array([[res[(s.id, lvl)][("M", p)] for s in signals] for lvl in (0, 1)])
        reports.append(EquivalenceReport(f"p={p},stft-of-zak", f"L^{p}(V_Phi Zf)", f"M^{p}", [s.id for s in signals], a, b, spread_bound))
        for r in rs:
            a = np.array([[res[(s.id, lvl)][("H", p, r)] for s in signals] for lvl in (0, 1)])
            reports.append(EquivalenceReport(f"p={p},H-L^{r}", f"L^{r}(H)", f"M^{p}", [s.id for s in signals], a, b, spread_bound))
    # periodicity of H on a 2 x 2 block of cells (coarse grid)
    per_grid = replace(grids[0], x_cells=2, xi_cells=2)
    per = 0.0
    for sig in signals[:2]:
        f = _zak_sample(sig, 0, per_grid.x_per_cell * 2)
        for p, H in zak_modulation_profile(f, E, Phi, per_grid, ps, omega0).items():
            per = max(per, h_periodicity_defect(H))
    extra = [] if per <= 1e-8 else [f"H periodicity defect {per:.3g} exceeds 1e-8"]
    return _merge("zak-modulation", reports, extra, {"h_periodicity_defect": per},
                  {"basis": E.to_dict(), "window": Phi.to_dict()})


def _cell_norm_standard(H: SampledField, p: float) -> float:
    """``||H||_{L^p}`` over the fundamental cell in standard measure."""
    sx, sxi = int(H.meta["x_shift_steps"]), int(H.meta["xi_shift_steps"])
    vals = H.values[:sx, :sxi]
    return float(reduce_axes(vals, [0, 1], [p, p], [H.axes[0].step, H.axes[1].step]))


def zak_lebesgue_norm(
    f: SampledField,
    E: OrderedBasis | None,
    phi: Window,
    p: float,
    r: float,
    grid: ZakGrid,
    omega: Weight | None = None,
) -> float:
    """``||G||_{L^p(cell x R)}`` with ``G(x, y) = ||ZV^(2) f(x, ., y) omega(-y)||_{L^r(dual cell)}``.

    The xi-integral uses E'-coordinates (unit cell measure); x and y use
    the standard measure.
    """
    E = as_basis(E, 1)
    W = partial_stft_zak(f, E, phi, 2, grid)
    a = float(E.matrix[0, 0])
    g = np.abs(W.values)
    if omega is not None and not omega.is_trivial:
        g = g * omega(-W.coords(2)[:, None])[None, None, :]
    dxi_u = W.axes[1].step / abs(TWO_PI / a)
    G = reduce_axes(g, [1], [r], [dxi_u])  # (x, y)
    return float(reduce_axes(G, [0, 1], [p, p], [W.axes[0].step, W.axes[2].step]))


# the y-span of the transform equals t_per_cell (in units of 1/|a|), so it
# must exceed the support of the signal plus the window
_LEB_GRIDS = (
    ZakGrid(x_per_cell=16, t_per_cell=64, xi_stride=2, n_y=400),
    ZakGrid(x_per_cell=32, t_per_cell=128, xi_stride=4, n_y=400),
)


def check_zak_lebesgue(
    family: Sequence[Signal] | SignalFamily | None = None,
    E: OrderedBasis | None = None,
    ps=(1.0, 2.0),
    rs=(1.0, 2.0),
    phi: Window | None = None,
    omega: Weight | None = None,
    spread_bound: float = 4.0,
    grids: tuple[ZakGrid, ZakGrid] = _LEB_GRIDS,
) -> CheckResult:
    """``||f||_{L^p_omega}`` against the Zak-side ``||G||_{L^p(cell x R)}`` (d = 1)."""
    if family is None:
        signals = SignalFamily("gaussian-dilates").signals()
    elif isinstance(family, SignalFamily):
        signals = family.signals()
    else:
        signals = list(family)
    E = as_basis(E, 1)
    phi = phi or gaussian_window(1.0)

    def work(job):
        sig, lvl = job
        f = _zak_sample(sig, lvl, grids[lvl].x_per_cell * 2)
        out = {}
        for p in ps:
            out[("L", p)] = mixed_lebesgue_norm(f, None, p, omega).value
            for r in rs:
                out[("G", p, r)] = zak_lebesgue_norm(f, E, phi, p, r, grids[lvl], omega)
        return out

    jobs = [(s, lvl) for lvl in (0, 1) for s in signals]
    res = dict(zip([(s.id, lvl) for s, lvl in jobs], _map(work, jobs)))
    reports = []
    for p in ps:
        b = np.array([[res[(s.id, lvl)][("L", p)] for s in signals] for lvl in (0, 1)])
        for r in rs:
            a = np.array([[res[(s.id, lvl)][("G", p, r)] for s in signals] for lvl in (0, 1)])
            reports.append(EquivalenceReport(f"p={p},r={r}", f"L^{p}(G_r)", f"L^{p}", [s.id for s in signals], a, b, spread_bound))
    return _merge("zak-lebesgue", reports, provenance={"basis": E.to_dict(), "window": phi.to_dict()})


# ---------------------------------------------------------------------------
# decay fits and the factorial bound


@dataclass(frozen=True)
class DecayModel:
    """Envelope fit ``log F <= C - r (|x|^{1/s} + |xi|^{1/sigma})`` (or ``>= C + r ...`` in growth mode)."""

    s: float
    sigma: float
    r: float
    C: float
    residual: float
    mode: str = "decay"
    local_rates: tuple = ()
    envelope: tuple = field(default=(), compare=False, repr=False)

    @property
    def member(self) -> bool:
        """Membership verdict: a positive fitted rate."""
        return self.r > 0

    @property
    def rate_increasing(self) -> bool:
        """Outer shells decay faster than inner ones (super-exponential relative to the model)."""
        return len(self.local_rates) == 2 and self.local_rates[1] > 1.05 * self.local_rates[0]


def _line_fit(rho, y):
    A = np.stack([np.ones_like(rho), rho], -1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    return float(coef[0]), float(coef[1]), resid


def fit_gs_decay(F: SampledField, s: float, sigma: float, mode: str = "decay", shells: int = 40, floor: float = 1e-12) -> DecayModel:
    """Fit the Gelfand-Shilov envelope of ``|F|`` over radial shells.

    ``rho = |x|^{1/s} + |xi|^{1/sigma}`` (norms over the x- and xi-halves of
    the axes). In decay mode the upper envelope (shell maximum) of
    ``log |F|`` is fitted by ``C - r rho``; in growth mode the lower
    envelope by ``C + r rho``. Values below ``floor`` times the peak are
    ignored.
    """
    if s <= 0 or sigma <= 0:
        raise ValueError("Gelfand-Shilov indices must be positive")
    if mode not in ("decay", "growth"):
        raise ValueError(f"mode must be 'decay' or 'growth', got {mode!r}")
    mag = np.abs(F.values)
    peak = float(mag.max()) if mag.size else 0.0
    if peak == 0:
        raise ValueError("degenerate field: all values are zero")
    d = F.ndim // 2
    pts = F.points().reshape(-1, F.ndim)
    x = np.linalg.norm(pts[:, :d], axis=1)
    xi = np.linalg.norm(pts[:, d:], axis=1)
    rho = x ** (1.0 / s) + xi ** (1.0 / sigma)
    vals = mag.reshape(-1)
    keep = vals > floor * peak
    rho, logv = rho[keep], np.log(vals[keep])
    edges = np.linspace(rho.min(), rho.max(), shells + 1)
    idx = np.clip(np.searchsorted(edges, rho, side="right") - 1, 0, shells - 1)
    env_r, env_v = [], []
    for k in range(shells):
        sel = idx == k
        if not sel.any():
            continue
        j = np.argmax(logv[sel]) if mode == "decay" else np.argmin(logv[sel])
        env_r.append(rho[sel][j])
        env_v.append(logv[sel][j])
    env_r, env_v = np.array(env_r), np.array(env_v)
    envelope = tuple(zip(env_r.tolist(), env_v.tolist()))
    if len(env_r) < 2:
        return DecayModel(s, sigma, 0.0, float(env_v.mean()) if len(env_v) else 0.0, 0.0, mode, (), envelope)
    C, slope, resid = _line_fit(env_r, env_v)
    r = -slope if mode == "decay" else slope
    half = len(env_r) // 2
    local = ()
    if half >= 2:
        _, s1, _ = _line_fit(env_r[:half], env_v[:half])
        _, s2, _ = _line_fit(env_r[half:], env_v[half:])
        local = (-s1, -s2) if mode == "decay" else (s1, s2)
    return DecayModel(s, sigma, max(r, 0.0) if abs(r) > 1e-12 else 0.0, C, resid, mode, local, envelope)


def factorial_ratios(r: float, s: float, beta_max: int = 60, samples: int = 20001) -> np.ndarray:
    """``(sup_t |t|^b e^{-r |t|^{1/s}} / b!^s)^{1/b}`` for ``b = 1..beta_max`` (index 0 holds b = 0)."""
    if r <= 0 or s <= 0:
        raise ValueError("r and s must be positive")
    out = np.ones(beta_max + 1)
    for b in range(1, beta_max + 1):
        t_star = (b * s / r) ** s
        t = t_star * np.exp(np.linspace(-3.0, 3.0, samples))
        logsup = float(np.max(b * np.log(t) - r * t ** (1.0 / s)))
        out[b] = math.exp((logsup - s * math.lgamma(b + 1)) / b)
    return out


def check_factorial_bound(r: float, s: float, beta_max: int = 60) -> CheckResult:
    """Measured ``h`` against the threshold ``(r/(s e))^{-s}`` and the substitution scaling in ``r``."""
    h = float(np.max(factorial_ratios(r, s, beta_max)[1:]))
    h2 = float(np.max(factorial_ratios(2 * r, s, beta_max)[1:]))
    bound = (r / (s * math.e)) ** (-s)
    scaling = h2 / h
    failures = []
    if not (math.isfinite(h) and h <= bound * 1.10):
        failures.append(f"h={h:.6g} exceeds (r/(se))^(-s) * 1.1 = {bound * 1.1:.6g}")
    if abs(scaling / 2 ** (-s) - 1) > 0.05:
        failures.append(f"h(2r)/h(r)={scaling:.6g} differs from 2^(-s)={2 ** (-s):.6g} by more than 5%")
    metrics = {"h": h, "threshold": bound, "limit": (s / r) ** s, "scaling": scaling}
    rows = [{"r": r, "s": s, "beta": b, "ratio": float(v)} for b, v in enumerate(factorial_ratios(r, s, beta_max))]
    return CheckResult(f"factorial-bound(r={r},s={s})", not failures, metrics, rows, failures, {"beta_max": beta_max})


# ---------------------------------------------------------------------------
# suite entry points used by the command line


def verify_finite_zak_parseval(seed: int = 0, quick: bool = False, plant_defect: float | None = None) -> CheckResult:
    rng = np.random.default_rng(seed)
    lengths = (64, 1024) if quick else (64, 1024, 4096)
    count = 10 if quick else 100
    worst = 0.0
    rows = []
    for L in lengths:
        facs = [(M, L // M) for M in range(2, L // 2 + 1) if L % M == 0]
        sig = rng.normal(size=(count, L)) + 1j * rng.normal(size=(count, L))
        for M, N in facs:
            w = 0.0
            for f in sig:
                if plant_defect:
                    Z = finite_zak(f, M, N)
                    Z[0] *= 1 + plant_defect
                    ref = N * float(np.sum(np.abs(f) ** 2))
                    w = max(w, abs(float(np.sum(np.abs(Z) ** 2)) - ref) / ref)
                else:
                    w = max(w, finite_zak_parseval_defect(f, M, N))
            worst = max(worst, w)
            rows.append({"L": L, "M": M, "N": N, "max_rel_defect": w})
    passed = worst <= 1e-10
    return CheckResult("finite-zak-parseval", passed, {"max_rel_defect": worst}, rows,
                       [] if passed else [f"Parseval defect {worst:.3g} exceeds 1e-10"], {"signals": count, "seed": seed})


def verify_zak_parseval(seed: int = 0, quick: bool = False, plant_defect: float | None = None) -> CheckResult:
    g = lambda x: np.exp(-x**2 / 2)
    consts = []
    for step in (2.0**-6, 2.0**-7):
        f = sample(g, (-16, 16), step)
        consts.append(check_zak_parseval(f, None) * (1 + (plant_defect or 0.0)))
    ref = math.sqrt(TWO_PI)
    err = abs(consts[0] / ref - 1)
    drift = abs(consts[1] / consts[0] - 1)
    f2 = sample(g, (-16, 16), 2.0**-6)
    c2 = check_zak_parseval(f2, OrderedBasis.diagonal([2.0]))
    failures = []
    if err > 0.01:
        failures.append(f"Parseval constant {consts[0]:.6g} is not within 1% of {ref:.6g}")
    if drift > 0.005:
        failures.append(f"Parseval drift {drift:.3g} exceeds 0.5%")
    rows = [{"basis": "standard", "step": s, "constant": c} for s, c in zip((2.0**-6, 2.0**-7), consts)]
    rows.append({"basis": "diag(2)", "step": 2.0**-6, "constant": c2})
    return CheckResult("zak-parseval", not failures,
                       {"constant": consts[0], "reference": ref, "rel_error": err, "drift": drift, "constant_E2": c2},
                       rows, failures, {})


def verify_quasi_periodicity(seed: int = 0, quick: bool = False, plant_defect: float | None = None) -> CheckResult:
    f = sample(lambda x: np.exp(-x**2 / 2), (-16, 16), 1 / 32)
    F = zak(f, None, xi_per_cell=64, x_cells=2, xi_cells=2)
    if plant_defect:
        F = corrupt_zak(F, 1 + plant_defect)
    d = check_quasiperiodicity(F)
    passed = d <= 1e-9
    return CheckResult("quasi-periodicity", passed, {"defect": d}, [{"signal": "gaussian", "defect": d}],
                       [] if passed else [f"quasi-periodicity defect {d:.3g} exceeds 1e-9"], {"planted": plant_defect})


def echo_field(quick: bool = False) -> SampledField:
    """STFT of the Gaussian's Zak transform on 2 x 2 cells: a 32 x 32 x 64 x 64 field."""
    f = sample(lambda x: np.exp(-x**2 / 2), (-16, 16), 1 / 32)
    grid = ZakGrid(x_per_cell=16, t_per_cell=32, x_cells=2, xi_cells=2, xi_stride=2, n_eta=64, n_y=64)
    return stft_of_zak(f, None, Window(1.0, (0.0, 0.0), (0.0, 0.0)), grid)


def verify_echo_periodicity(seed: int = 0, quick: bool = False, plant_defect: float | None = None) -> CheckResult:
    G = echo_field(quick)
    if plant_defect:
        G = plant_phase_error(G, plant_defect)
    d = check_echo_periodicity(G)
    passed = d <= 1e-8
    return CheckResult("echo-periodicity", passed, {"defect": d, "shape": list(G.shape)}, [{"signal": "gaussian", "defect": d}],
                       [] if passed else [f"echo-periodicity defect {d:.3g} exceeds 1e-8"], {"planted": plant_defect})


def verify_stft_closed_form(seed: int = 0, quick: bool = False, plant_defect: float | None = None) -> CheckResult:
    err = stft_closed_form_error()
    if plant_defect:
        err = max(err, plant_defect * 2**-0.5)
    passed = err <= 1e-6
    return CheckResult("stft-closed-form", passed, {"max_error": err}, [{"signal": "gaussian", "max_error": err}],
                       [] if passed else [f"STFT closed-form error {err:.3g} exceeds 1e-6"], {})


def verify_hard_inequalities(seed: int = 0, quick: bool = False, plant_defect: float | None = None) -> CheckResult:
    return check_hard_inequalities(10 if quick else 50, seed)


def verify_wiener_r_independence(seed: int = 0, quick: bool = False, plant_defect: float | None = None) -> CheckResult:
    fam = SignalFamily("gaussian-dilates", (0.5, 1.0, 2.0) if quick else ())
    return check_wiener_r_independence(fam)


def verify_periodic_modulation(seed: int = 0, quick: bool = False, plant_defect: float | None = None) -> CheckResult:
    return check_periodic_modulation(SignalFamily("trig-polynomials", seed=seed, size=5 if quick else 20))


def verify_zak_modulation(seed: int = 0, quick: bool = False, plant_defect: float | None = None) -> CheckResult:
    fam = None
    if quick:
        fam = SignalFamily("gaussian-dilates", (0.5, 2.0)).signals() + SignalFamily("modulated-gaussians", (2.0,)).signals()
    return check_zak_modulation(fam)


def verify_zak_lebesgue(seed: int = 0, quick: bool = False, plant_defect: float | None = None) -> CheckResult:
    fam = SignalFamily("gaussian-dilates", (0.5, 1.0, 2.0)) if quick else None
    return check_zak_lebesgue(fam)


def verify_gs_decay(seed: int = 0, quick: bool = False, plant_defect: float | None = None) -> CheckResult:
    phi = gaussian_window(1.0)
    V = stft(sample(phi, (-16, 16), 1 / 16), phi, x_range=(-8, 8))
    fit = fit_gs_decay(V, 0.5, 0.5)
    fit1 = fit_gs_decay(V, 1.0, 1.0)
    err = abs(fit.r / 0.25 - 1)
    failures = []
    if err > 0.05:
        failures.append(f"fitted rate {fit.r:.6g} is not within 5% of 1/4")
    if not fit.member:
        failures.append("membership verdict negative for the Gaussian")
    rows = [
        {"kind": "fit", "s": m.s, "sigma": m.sigma, "r": m.r, "C": m.C, "residual": m.residual}
        for m in (fit, fit1)
    ]
    rows += [
        {"kind": "envelope", "s": m.s, "sigma": m.sigma, "rho": rho, "log_abs": v}
        for m in (fit, fit1) for rho, v in m.envelope
    ]
    metrics = {"r": fit.r, "rel_error": err, "residual": fit.residual, "s1_local_rates": list(fit1.local_rates),
               "s1_rate_increasing": fit1.rate_increasing}
    return CheckResult("gs-decay", not failures, metrics, rows, failures, {})


def verify_factorial_bound(seed: int = 0, quick: bool = False, plant_defect: float | None = None) -> CheckResult:
    results = [check_factorial_bound(r, s) for r, s in ((1.0, 1.0), (2.0, 1.0), (1.0, 0.5))]
    rows = [row for res in results for row in res.rows]
    failures = [f"{res.name}: {msg}" for res in results for msg in res.failures]
    metrics = {res.name: res.metrics for res in results}
    return CheckResult("factorial-bound", not failures, metrics, rows, failures, {})


def verify_window_independence(seed: int = 0, quick: bool = False, plant_defect: float | None = None) -> CheckResult:
    fam = SignalFamily("gaussian-dilates", (0.5, 1.0, 2.0) if quick else ())
    spec = NormSpec("modulation-M", MixedExponent((2.0,)), second=MixedExponent((2.0,)))
    rep = check_window_independence(fam, gaussian_window(1.0), gaussian_window(2.0), spec)
    return _merge("window-independence", [rep], provenance={"family": fam.to_dict()})


def verify_equivalence(seed: int = 0, quick: bool = False, plant_defect: float | None = None) -> CheckResult:
    """M^2 norm against the L^2 norm of the STFT (same window) and the Wiener pair with p = 1."""
    fam = SignalFamily("gaussian-dilates", (0.5, 1.0, 2.0))
    phi = gaussian_window(1.0)
    A = NormSpec("modulation-M", MixedExponent((2.0,)), second=MixedExponent((2.0,)), window=phi)
    B = NormSpec("mixed-lebesgue", MixedExponent((2.0, 2.0)), window=phi, transform="stft")
    rep1 = run_equivalence(fam, A, B, 1 + 1e-10, "M2-vs-L2-stft")
    E = OrderedBasis.diagonal([1.0, TWO_PI])
    W_inf = NormSpec("wiener", MixedExponent((1.0, 1.0)), E, local=MixedExponent((INF, INF)), window=phi, transform="stft")
    W_half = NormSpec("wiener", MixedExponent((1.0, 1.0)), E, local=MixedExponent((0.5, 0.5)), window=phi, transform="stft")
    rep2 = run_equivalence(fam, W_inf, W_half, 4.0, "W-inf-vs-W-half")
    return _merge("equivalence", [rep1, rep2], provenance={"family": fam.to_dict()})


def verify_embedding(seed: int = 0, quick: bool = False, plant_defect: float | None = None) -> CheckResult:
    """Inclusion chain of phase-space Wiener spaces on STFTs of Gaussian dilates."""
    fam = SignalFamily("gaussian-dilates", (0.5, 1.0, 2.0))
    fields = stft_fields(fam)
    src, mid, tgt = wiener_chain(OrderedBasis.standard(1), p=1.0, q=2.0, r=1.0)
    first = check_embedding(fields, src, mid, hard_bound=1.0, name="first-inclusion")
    second = check_embedding(fields, mid, tgt, name="second-inclusion")
    same = check_embedding(fields, src, src, hard_bound=1.0, name="identity")
    parts = (first, second, same)
    failures = [f"{p.name}: {m}" for p in parts for m in p.failures]
    if abs(same.metrics["C"] - 1.0) > 0:
        failures.append(f"identity embedding constant {same.metrics['C']!r} != 1")
    rows = [row for p in parts for row in p.rows]
    return CheckResult("embedding", not failures, {p.name: p.metrics for p in parts}, rows, failures,
                       {"family": fam.to_dict()})


def verify_young_semidiscrete(seed: int = 0, quick: bool = False, plant_defect: float | None = None) -> CheckResult:
    pairs = 10 if quick else 50
    l1 = check_young_semidiscrete(None, 1.0, 1.0, pairs=pairs, seed=seed)
    mixed = check_young_semidiscrete(OrderedBasis.standard(2), (2.0, 2.0), (1.0, 1.0), pairs=max(5, pairs // 5), seed=seed)
    failures = [f"l1: {m}" for m in l1.failures] + [f"mixed: {m}" for m in mixed.failures]
    rows = [dict(row, case="p=r=1") for row in l1.rows] + [dict(row, case="p=(2,2),r=(1,1)") for row in mixed.rows]
    return CheckResult("young-semidiscrete", not failures, {"l1": l1.metrics, "mixed": mixed.metrics}, rows, failures, {})


CHECKS: dict[str, Callable[..., CheckResult]] = {
    "finite-zak-parseval": verify_finite_zak_parseval,
    "zak-parseval": verify_zak_parseval,
    "quasi-periodicity": verify_quasi_periodicity,
    "echo-periodicity": verify_echo_periodicity,
    "stft-closed-form": verify_stft_closed_form,
    "hard-inequalities": verify_hard_inequalities,
    "wiener-r-independence": verify_wiener_r_independence,
    "periodic-modulation": verify_periodic_modulation,
    "zak-modulation": verify_zak_modulation,
    "zak-lebesgue": verify_zak_lebesgue,
    "gs-decay": verify_gs_decay,
    "factorial-bound": verify_factorial_bound,
    "window-independence": verify_window_independence,
    "equivalence": verify_equivalence,
    "embedding": verify_embedding,
    "young-semidiscrete": verify_young_semidiscrete,
}
