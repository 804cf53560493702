"""Mixed quasi-norms of sampled fields and lattice sequences.

Every norm here is an iterated one-axis reduction. For a finite exponent
``q`` an axis is reduced to ``(sum |g|^q * step)^{1/q}``, for ``q = inf`` to
``max |g|``. The first axis is reduced first. Reductions run in the power
domain: the running array holds ``g^q`` and only the final result takes a
root, so exponents below one need no special casing.

Norms with respect to a basis ``E`` are evaluated in ``E``-coordinates with
the Lebesgue measure of those coordinates (no Jacobian), so a unit lattice
cell always has measure one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fields import INF, Axis, MixedExponent, SampledField, Weight, Window
from .geometry import LatticeSequence, OrderedBasis, as_basis, dual_basis
from .transforms import FourierCoefficients, cellify, fourier_coefficients, stft

FAMILIES = (
    "mixed-lebesgue",
    "sequence",
    "wiener",
    "wiener-phase-1",
    "wiener-phase-2",
    "modulation-M",
    "modulation-W",
    "script-M",
    "script-W",
    "periodic-coefficient",
)


# ---------------------------------------------------------------------------
# specs and values


@dataclass(frozen=True)
class NormSpec:
    """Declarative description of one quasi-norm.

    ``exponents`` is the main exponent vector (``q`` for Lebesgue and
    coefficient norms, the outer ``p`` for Wiener norms, the x-exponent for
    modulation norms). ``local`` is the cell exponent of Wiener norms,
    ``second`` the xi-exponent of modulation norms and ``inner`` the
    xi-space norm of the phase-space Wiener families. ``transform="stft"``
    applies the STFT with ``window`` before measuring.
    """

    family: str
    exponents: MixedExponent | None = None
    basis: OrderedBasis | None = None
    weight: Weight | None = None
    local: MixedExponent | None = None
    second: MixedExponent | None = None
    basis2: OrderedBasis | None = None
    inner: "NormSpec | None" = None
    window: Window | None = None
    transform: str | None = None
    domain: tuple | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown norm family {self.family!r}")
        for name in ("exponents", "local", "second"):
            val = getattr(self, name)
            if val is not None and not isinstance(val, MixedExponent):
                object.__setattr__(self, name, MixedExponent.of(val, None if np.ndim(val) else 1))
        if self.transform not in (None, "stft"):
            raise ValueError(f"unknown transform {self.transform!r}")
        if self.basis is not None and self.exponents is not None and self.family in ("mixed-lebesgue", "sequence"):
            if len(self.exponents) not in (1, self.basis.dim):
                raise ValueError(
                    f"exponent arity {len(self.exponents)} does not match basis dimension {self.basis.dim}"
                )

    def label(self) -> str:
        parts = [self.family]
        if self.transform:
            parts.insert(0, self.transform)
        if self.exponents is not None:
            parts.append(f"p={self.exponents}")
        if self.local is not None:
            parts.append(f"r={self.local}")
        if self.second is not None:
            parts.append(f"q={self.second}")
        if self.inner is not None:
            parts.append(f"inner=[{self.inner.label()}]")
        if self.window is not None:
            parts.append(f"window={self.window.width:g}")
        return " ".join(parts)

    def to_dict(self) -> dict:
        doc: dict = {"family": self.family}
        for name in ("exponents", "local", "second"):
            val = getattr(self, name)
            if val is not None:
                doc[name] = val.to_list()
        for name in ("basis", "basis2"):
            val = getattr(self, name)
            if val is not None:
                doc[name] = val.to_dict()
        if self.weight is not None:
            doc["weight"] = self.weight.to_dict()
        if self.inner is not None:
            doc["inner"] = self.inner.to_dict()
        if self.window is not None:
            doc["window"] = self.window.to_dict()
        if self.transform is not None:
            doc["transform"] = self.transform
        if self.domain is not None:
            doc["domain"] = [list(self.domain[0]), list(self.domain[1])]
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "NormSpec":
        allowed = {"family", "exponents", "local", "second", "basis", "basis2", "weight", "inner", "window", "transform", "domain"}
        unknown = set(doc) - allowed
        if unknown:
            raise ValueError(f"unknown norm spec keys: {sorted(unknown)}")
        kw: dict = {"family": doc["family"]}
        for name in ("exponents", "local", "second"):
            if name in doc:
                val = doc[name]
                kw[name] = MixedExponent(tuple(val) if isinstance(val, list) else (val,))
        for name in ("basis", "basis2"):
            if name in doc:
                kw[name] = OrderedBasis.from_dict(doc[name])
        if "weight" in doc:
            kw["weight"] = Weight.from_dict(doc["weight"])
        if "inner" in doc:
            kw["inner"] = cls.from_dict(doc["inner"])
        if "window" in doc:
            w = dict(doc["window"])
            w.pop("kind", None)
            kw["window"] = Window(float(w.get("width", 1.0)), tuple(w.get("center", (0.0,))), tuple(w.get("modulation", (0.0,))))
        if "transform" in doc:
            kw["transform"] = doc["transform"]
        if "domain" in doc:
            kw["domain"] = (tuple(doc["domain"][0]), tuple(doc["domain"][1]))
        return cls(**kw)


@dataclass(frozen=True)
class NormValue:
    value: float
    spec: NormSpec | None = None
    meta: dict = field(default_factory=dict)

    def __float__(self) -> float:
        return float(self.value)


# ---------------------------------------------------------------------------
# reductions


def reduce_axes(arr: np.ndarray, positions, exps, steps) -> np.ndarray:
    """Reduce ``|arr|`` over ``positions`` in order with the given exponents and steps.

    The remaining axes keep their relative order.
    """
    positions = list(positions)
    if len(positions) != len(exps) or len(positions) != len(steps):
        raise ValueError("positions, exponents and steps must have equal length")
    acc = np.moveaxis(np.abs(arr), positions, list(range(len(positions))))
    pw = 1.0
    for q, h in zip(exps, steps):
        if math.isinf(q):
            acc = acc.max(axis=0) if acc.shape[0] else np.zeros(acc.shape[1:])
        else:
            acc = (acc if q == pw else acc ** (q / pw)).sum(axis=0) * h
            pw = q
    return acc if pw == 1.0 else acc ** (1.0 / pw)


def _inf_flags(*exps) -> dict:
    flags = {}
    if any(math.isinf(q) for e in exps if e is not None for q in e):
        flags["inf-handled"] = "max"
    return flags


def _block_axes(F: SampledField, start: int, stop: int, E: OrderedBasis) -> tuple[Axis, ...]:
    """Axes ``start..stop-1`` of ``F`` expressed in coordinates of ``E``."""
    axes = F.axes[start:stop]
    d = stop - start
    if F.basis is not None:
        block = F.basis.matrix[start:stop, start:stop]
        off = np.delete(F.basis.matrix[start:stop, :], range(start, stop), axis=1)
        if off.size and np.any(off != 0):
            raise ValueError("field basis is not block diagonal")
        if not OrderedBasis(block).allclose(E):
            raise ValueError("field is sampled in a different basis for this block")
        return axes
    if E.is_standard:
        return axes
    if not E.is_diagonal:
        raise ValueError("non-diagonal basis: sample the field in basis coordinates")
    diag = np.diag(E.matrix)
    if np.any(diag < 0):
        raise ValueError("negative diagonal basis on a standard grid: resample in basis coordinates")
    return tuple(Axis(a.origin / e, a.step / e, a.count, a.kind) for a, e in zip(axes, diag[:d]))


def _weighted_abs(F: SampledField, omega: Weight | None) -> np.ndarray:
    g = np.abs(F.values)
    if omega is not None and not omega.is_trivial:
        g = g * omega(F.points())
    return g


def _domain_mask(axes: tuple[Axis, ...], domain) -> np.ndarray:
    lo, hi = domain
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (len(axes),))
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (len(axes),))
    masks = []
    for ax, a, b in zip(axes, lo, hi):
        u = ax.coords
        eps = 1e-9 * ax.step
        masks.append((u >= a - eps) & (u < b - eps))
    mask = masks[0]
    for m in masks[1:]:
        mask = np.multiply.outer(mask, m)
    return mask


# ---------------------------------------------------------------------------
# Lebesgue and sequence norms


def mixed_lebesgue_norm(F: SampledField, E: OrderedBasis | None = None, q=2.0, omega: Weight | None = None, domain=None) -> NormValue:
    """E-split mixed Lebesgue quasi-norm, first axis integrated first.

    ``domain`` is an optional half-open box ``(lo, hi)`` in E-coordinates
    outside of which ``F`` is replaced by zero.
    """
    E = as_basis(E if E is not None else F.basis, F.ndim)
    q = MixedExponent.of(q, F.ndim)
    axes = _block_axes(F, 0, F.ndim, E)
    g = _weighted_abs(F, omega)
    if domain is not None:
        g = g * _domain_mask(axes, domain)
    val = reduce_axes(g, range(F.ndim), q, [a.step for a in axes])
    meta = {"steps": [a.step for a in axes], **_inf_flags(q)}
    return NormValue(float(val), NormSpec("mixed-lebesgue", q, E, omega, domain=domain), meta)


def sequence_norm(a: LatticeSequence, E: OrderedBasis | None = None, p=2.0, omega: Weight | None = None) -> NormValue:
    """Weighted mixed ``l^p`` norm of a lattice sequence, first index summed first."""
    E = as_basis(E if E is not None else a.basis, a.basis.dim)
    p = MixedExponent.of(p, E.dim)
    arr, lo = a.dense()
    g = np.abs(arr)
    if omega is not None and not omega.is_trivial:
        idx = np.stack(np.meshgrid(*[lo[k] + np.arange(s) for k, s in enumerate(arr.shape)], indexing="ij"), -1)
        g = g * omega(E.from_coords(idx.astype(float)))
    val = reduce_axes(g, range(E.dim), p, [1.0] * E.dim)
    return NormValue(float(val), NormSpec("sequence", p, E, omega), _inf_flags(p))


# ---------------------------------------------------------------------------
# Wiener amalgam norms


def wiener_reduce(g: np.ndarray, positions, axes_u, E: OrderedBasis, r, p, omega0: Weight | None = None, min_samples: int = 4) -> np.ndarray:
    """Cellwise ``L^r`` norms over the listed axes, weighted by ``omega0(j)``, then ``l^p`` over cells.

    ``axes_u`` are the listed axes in E-coordinates; cells are
    ``j + [0, 1)^d``.
    """
    d = len(positions)
    r = MixedExponent.of(r, d)
    p = MixedExponent.of(p, d)
    g = np.moveaxis(g, list(positions), list(range(d)))
    for ax in axes_u:
        if 1.0 / ax.step < min_samples - 1e-9:
            raise ValueError(f"cells are not resolved: {1.0 / ax.step:.3g} samples per cell axis (need {min_samples})")
    cells, cell_lo = cellify(g, axes_u, range(d))
    # (C1, n1, ..., Cd, nd, rest) -> (n1..nd, C1..Cd, rest)
    order = [2 * k + 1 for k in range(d)] + [2 * k for k in range(d)] + list(range(2 * d, cells.ndim))
    cells = np.transpose(cells, order)
    local = reduce_axes(cells, range(d), r, [a.step for a in axes_u])
    if omega0 is not None and not omega0.is_trivial:
        idx = np.stack(
            np.meshgrid(*[cell_lo[k] + np.arange(local.shape[k]) for k in range(d)], indexing="ij"), -1
        )
        w = omega0(E.from_coords(idx.astype(float)))
        local = local * w.reshape(w.shape + (1,) * (local.ndim - d))
    return reduce_axes(local, range(d), p, [1.0] * d)


def wiener_norm(f: SampledField, E: OrderedBasis | None = None, r=1.0, p=1.0, omega0: Weight | None = None) -> NormValue:
    """Wiener amalgam quasi-norm: local ``L^r`` on lattice cells, then weighted ``l^p``."""
    E = as_basis(E if E is not None else f.basis, f.ndim)
    axes = _block_axes(f, 0, f.ndim, E)
    r_ = MixedExponent.of(r, f.ndim)
    p_ = MixedExponent.of(p, f.ndim)
    val = wiener_reduce(np.abs(f.values), range(f.ndim), axes, E, r_, p_, omega0)
    spec = NormSpec("wiener", p_, E, omega0, local=r_)
    return NormValue(float(val), spec, {"steps": [a.step for a in axes], **_inf_flags(r_, p_)})


def wiener_phase_norm(
    F: SampledField,
    which: int,
    E: OrderedBasis,
    r,
    p,
    omega: Weight | None = None,
    B0: NormSpec | None = None,
) -> NormValue:
    """Wiener norms on phase space with a Lebesgue norm in the frequency variable.

    ``which=1``: for each xi the Wiener norm of ``x -> F(x, xi) omega`` with
    cells of ``E``, then the ``B0`` norm in xi. ``which=2``: the ``B0`` norm
    in xi first, then the Wiener norm in x.
    """
    if F.ndim % 2:
        raise ValueError(f"phase-space field needs an even number of axes, got {F.ndim}")
    d = F.ndim // 2
    E = as_basis(E, d)
    if B0 is None:
        B0 = NormSpec("mixed-lebesgue", MixedExponent.of(2.0, d), dual_basis(E))
    if B0.family != "mixed-lebesgue":
        raise ValueError("the frequency norm must be a mixed Lebesgue spec")
    EB = as_basis(B0.basis, d)
    q = MixedExponent.of(B0.exponents, d)
    r_ = MixedExponent.of(r, d)
    p_ = MixedExponent.of(p, d)
    x_axes = _block_axes(F, 0, d, E)
    xi_axes = _block_axes(F, d, 2 * d, EB)
    g = _weighted_abs(F, omega)
    if which == 1:
        inner = wiener_reduce(g, range(d), x_axes, E, r_, p_)
        val = reduce_axes(inner, range(d), q, [a.step for a in xi_axes])
    elif which == 2:
        inner = reduce_axes(g, range(d, 2 * d), q, [a.step for a in xi_axes])
        val = wiener_reduce(inner, range(d), x_axes, E, r_, p_)
    else:
        raise ValueError(f"which must be 1 or 2, got {which}")
    spec = NormSpec(f"wiener-phase-{which}", p_, E, omega, local=r_, inner=B0)
    return NormValue(float(val), spec, _inf_flags(r_, p_, q))


# ---------------------------------------------------------------------------
# modulation norms


def modulation_norm(
    f: SampledField,
    phi: Window,
    kind: str = "M",
    E1: OrderedBasis | None = None,
    E2: OrderedBasis | None = None,
    p=2.0,
    q=2.0,
    omega: Weight | None = None,
    V: SampledField | None = None,
    **stft_kw,
) -> NormValue:
    """Mixed Lebesgue norm of the STFT: ``M`` reduces x then xi, ``W`` reduces xi then x.

    A precomputed STFT may be passed as ``V``.
    """
    d = f.ndim
    E1 = as_basis(E1, d)
    E2 = as_basis(E2, d)
    p_ = MixedExponent.of(p, d)
    q_ = MixedExponent.of(q, d)
    V = stft(f, phi, **stft_kw) if V is None else V
    x_axes = _block_axes(V, 0, d, E1)
    xi_axes = _block_axes(V, d, 2 * d, E2)
    g = _weighted_abs(V, omega)
    if kind == "M":
        pos = list(range(2 * d))
        exps = list(p_) + list(q_)
        steps = [a.step for a in x_axes] + [a.step for a in xi_axes]
    elif kind == "W":
        pos = list(range(d, 2 * d)) + list(range(d))
        exps = list(q_) + list(p_)
        steps = [a.step for a in xi_axes] + [a.step for a in x_axes]
    else:
        raise ValueError(f"kind must be 'M' or 'W', got {kind!r}")
    val = reduce_axes(g, pos, exps, steps)
    spec = NormSpec(f"modulation-{kind}", p_, E1, omega, second=q_, basis2=E2, window=phi)
    return NormValue(float(val), spec, _inf_flags(p_, q_))


def script_norm(
    f: SampledField,
    phi: Window,
    kind: str = "M",
    E: OrderedBasis | None = None,
    r=1.0,
    omega: Weight | None = None,
    B0: NormSpec | None = None,
    V: SampledField | None = None,
    **stft_kw,
) -> NormValue:
    """Phase-space Wiener norm of the STFT with outer ``l^inf`` over x-cells."""
    d = f.ndim
    E = as_basis(E, d)
    V = stft(f, phi, **stft_kw) if V is None else V
    which = {"M": 1, "W": 2}.get(kind)
    if which is None:
        raise ValueError(f"kind must be 'M' or 'W', got {kind!r}")
    out = wiener_phase_norm(V, which, E, r, INF, omega, B0)
    spec = NormSpec(f"script-{kind}", out.spec.exponents, E, omega, local=out.spec.local, inner=out.spec.inner, window=phi)
    return NormValue(out.value, spec, out.meta)


def periodic_coefficient_norm(
    f: SampledField | FourierCoefficients,
    E: OrderedBasis | None = None,
    q=2.0,
    omega0: Weight | None = None,
    cutoff: int = 8,
) -> NormValue:
    """Weighted mixed ``l^q`` norm of the Fourier coefficients of an E-periodic function.

    ``omega0`` is evaluated at the frequencies ``alpha`` (dual lattice points).
    """
    c = f if isinstance(f, FourierCoefficients) else fourier_coefficients(f, E, cutoff)
    E = c.basis if E is None else as_basis(E, c.basis.dim)
    seq = LatticeSequence(dual_basis(E), c.indices(), c.table.reshape(-1))
    out = sequence_norm(seq, dual_basis(E), q, omega0)
    return NormValue(out.value, NormSpec("periodic-coefficient", out.spec.exponents, E, omega0), out.meta)


# ---------------------------------------------------------------------------
# dispatch


def evaluate(spec: NormSpec, f: SampledField, **stft_kw) -> NormValue:
    """Evaluate ``spec`` on a sampled signal (or on its STFT for ``transform='stft'``)."""
    fam = spec.family
    if fam in ("modulation-M", "modulation-W"):
        return modulation_norm(
            f, spec.window or Window(), fam[-1], spec.basis, spec.basis2,
            spec.exponents if spec.exponents is not None else 2.0,
            spec.second if spec.second is not None else 2.0, spec.weight, **stft_kw,
        )
    if fam in ("script-M", "script-W"):
        return script_norm(f, spec.window or Window(), fam[-1], spec.basis, spec.local or 1.0, spec.weight, spec.inner, **stft_kw)
    if fam == "periodic-coefficient":
        return periodic_coefficient_norm(f, spec.basis, spec.exponents or 2.0, spec.weight)
    F = stft(f, spec.window or Window(), **stft_kw) if spec.transform == "stft" else f
    if fam == "mixed-lebesgue":
        out = mixed_lebesgue_norm(F, spec.basis, spec.exponents or 2.0, spec.weight, spec.domain)
    elif fam == "wiener":
        out = wiener_norm(F, spec.basis, spec.local or 1.0, spec.exponents or 1.0, spec.weight)
    elif fam in ("wiener-phase-1", "wiener-phase-2"):
        d = F.ndim // 2
        E = spec.basis if spec.basis is not None else OrderedBasis.standard(d)
        out = wiener_phase_norm(F, int(fam[-1]), E, spec.local or 1.0, spec.exponents or 1.0, spec.weight, spec.inner)
    elif fam == "sequence":
        raise ValueError("sequence norms take lattice sequences, not sampled fields")
    else:  # pragma: no cover - guarded by NormSpec
        raise ValueError(fam)
    return NormValue(out.value, spec, out.meta)


__all__ = [
    "NormSpec",
    "NormValue",
    "reduce_axes",
    "mixed_lebesgue_norm",
    "sequence_norm",
    "wiener_reduce",
    "wiener_norm",
    "wiener_phase_norm",
    "modulation_norm",
    "script_norm",
    "periodic_coefficient_norm",
    "evaluate",
]
