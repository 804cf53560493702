"""Sampled functions on uniform grids, Gaussian windows and weight functions.

A :class:`SampledField` is a complex array together with one :class:`Axis`
per dimension. Axes are either ``"line"`` segments (the function is treated
as zero outside) or ``"torus"`` periods (the function repeats). When
``basis`` is set the axes are coordinates with respect to that basis rather
than standard coordinates.
"""

from __future__ import annotations

import csv
import io
import json
import math
import struct
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .geometry import OrderedBasis

INF = math.inf


# ---------------------------------------------------------------------------
# exponents


def parse_exponent(value) -> float:
    """Parse one exponent; ``"inf"``/``"∞"``/``math.inf`` become ``INF``."""
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "infinity", "∞", "+inf"):
            return INF
        if "/" in text:
            num, den = text.split("/", 1)
            value = float(num) / float(den)
        else:
            value = float(text)
    value = float(value)
    if not value > 0:
        raise ValueError(f"exponents must lie in (0, inf], got {value}")
    return value


def format_exponent(value: float) -> str | float:
    return "inf" if math.isinf(value) else value


@dataclass(frozen=True)
class MixedExponent:
    """Vector of exponents in ``(0, inf]``; infinity is stored as ``INF``."""

    entries: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(parse_exponent(v) for v in self.entries))
        if not self.entries:
            raise ValueError("empty exponent vector")

    @classmethod
    def of(cls, value, dim: int | None = None) -> "MixedExponent":
        """Coerce a scalar (broadcast to ``dim``), sequence or ``MixedExponent``."""
        if isinstance(value, MixedExponent):
            exp = value
        elif isinstance(value, (list, tuple, np.ndarray)):
            exp = cls(tuple(value))
        else:
            if dim is None:
                raise ValueError("dimension needed to broadcast a scalar exponent")
            exp = cls((value,) * dim)
        if dim is not None and len(exp) == 1 and dim > 1:
            exp = cls(exp.entries * dim)
        if dim is not None and len(exp) != dim:
            raise ValueError(
                f"exponent arity {len(exp)} does not match the {dim} axes of the mixed norm"
            )
        return exp

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, k):
        return self.entries[k]

    def min(self) -> float:
        return min(self.entries)

    @property
    def is_scalar(self) -> bool:
        return len(set(self.entries)) == 1

    def to_list(self) -> list:
        return [format_exponent(v) for v in self.entries]

    def __str__(self) -> str:
        return "(" + ",".join(str(format_exponent(v)) for v in self.entries) + ")"


# ---------------------------------------------------------------------------
# sampled fields


@dataclass(frozen=True)
class Axis:
    """Uniform grid ``origin + step * arange(count)``."""

    origin: float
    step: float
    count: int
    kind: str = "line"

    def __post_init__(self):
        if not (self.step > 0 and math.isfinite(self.step)):
            raise ValueError(f"axis step must be positive, got {self.step}")
        if int(self.count) != self.count or self.count < 1:
            raise ValueError(f"axis count must be a positive integer, got {self.count}")
        if self.kind not in ("line", "torus"):
            raise ValueError(f"axis kind must be 'line' or 'torus', got {self.kind!r}")
        object.__setattr__(self, "count", int(self.count))
        object.__setattr__(self, "origin", float(self.origin))
        object.__setattr__(self, "step", float(self.step))

    @property
    def coords(self) -> np.ndarray:
        return self.origin + self.step * np.arange(self.count)

    @property
    def length(self) -> float:
        return self.step * self.count

    def to_dict(self) -> dict:
        return {"origin": self.origin, "step": self.step, "count": self.count, "kind": self.kind}


@dataclass(frozen=True, eq=False)
class SampledField:
    """Complex samples on a product of uniform axes.

    Parameters
    ----------
    axes : tuple of Axis
    values : ndarray
        Complex array of shape ``tuple(a.count for a in axes)``.
    basis : OrderedBasis, optional
        When set, axis coordinates are coordinates in this basis.
    meta : dict
        Provenance (transform name, window, truncation, ...).
    """

    axes: tuple[Axis, ...]
    values: np.ndarray
    basis: OrderedBasis | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        axes = tuple(self.axes)
        vals = np.asarray(self.values)
        if not np.iscomplexobj(vals):
            vals = vals.astype(complex)
        shape = tuple(a.count for a in axes)
        if vals.shape != shape:
            raise ValueError(f"values have shape {vals.shape}, axes imply {shape}")
        if self.basis is not None and self.basis.dim != len(axes):
            raise ValueError(f"basis of dimension {self.basis.dim} for a {len(axes)}-axis field")
        vals = vals.view()
        vals.setflags(write=False)
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "values", vals)

    @property
    def ndim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def steps(self) -> tuple[float, ...]:
        return tuple(a.step for a in self.axes)

    def coords(self, k: int) -> np.ndarray:
        return self.axes[k].coords

    def grid(self) -> list[np.ndarray]:
        return np.meshgrid(*[a.coords for a in self.axes], indexing="ij")

    def points(self) -> np.ndarray:
        """Standard-coordinate points, shape ``shape + (ndim,)``."""
        pts = np.stack(self.grid(), axis=-1)
        if self.basis is not None:
            pts = self.basis.from_coords(pts)
        return pts

    @property
    def cell_weight(self) -> float:
        """Product of the steps (basis-coordinate measure)."""
        return math.prod(self.steps)

    @property
    def quadrature_weight(self) -> float:
        """Standard-coordinate measure of one grid cell."""
        w = self.cell_weight
        if self.basis is not None:
            w *= self.basis.volume
        return w

    def integral(self) -> complex:
        return complex(self.values.sum() * self.quadrature_weight)

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.quadrature_weight))

    def with_values(self, values, **changes) -> "SampledField":
        return replace(self, values=values, **changes)

    def scaled(self, lam: complex) -> "SampledField":
        return self.with_values(self.values * lam)

    def header(self) -> dict:
        return {
            "dim": self.ndim,
            "axes": [a.to_dict() for a in self.axes],
            "basis": None if self.basis is None else self.basis.to_dict(),
            "meta": self.meta,
        }


def _box_axes(box, step, kind: str = "line") -> tuple[Axis, ...]:
    lo, hi = box
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    lo, hi = np.broadcast_arrays(lo, hi)
    steps = np.broadcast_to(np.atleast_1d(np.asarray(step, dtype=float)), lo.shape)
    axes = []
    for a, b, h in zip(lo, hi, steps):
        if not (np.isfinite(a) and np.isfinite(b)) or b <= a:
            raise ValueError(f"box [{a}, {b}) is empty or unbounded")
        count = int(round((b - a) / h))
        if count < 1 or abs(count * h - (b - a)) > 1e-9 * max(1.0, abs(b - a)):
            raise ValueError(f"step {h} does not tile [{a}, {b})")
        axes.append(Axis(a, h, count, kind))
    return tuple(axes)


def sample(expr: Callable, box, step, basis: OrderedBasis | None = None, kind: str = "line") -> SampledField:
    """Sample ``expr`` on the half-open box ``[lo, hi)`` with the given step.

    ``expr`` receives one broadcastable coordinate array per axis and must
    return complex values. With ``basis`` set the box and step are in basis
    coordinates and ``expr`` is evaluated at ``T_E u`` (standard
    coordinates), so the field holds ``f_E = f o T_E``.

    Raises
    ------
    ValueError
        If ``expr`` produces a non-finite value; the message names the
        first offending grid point.
    """
    axes = _box_axes(box, step, kind)
    grids = np.meshgrid(*[a.coords for a in axes], indexing="ij")
    if basis is not None:
        pts = basis.from_coords(np.stack(grids, axis=-1))
        args = [pts[..., k] for k in range(basis.dim)]
    else:
        args = grids
    vals = np.asarray(expr(*args), dtype=complex)
    vals = np.broadcast_to(vals, grids[0].shape).copy() if vals.shape != grids[0].shape else vals
    bad = ~np.isfinite(vals)
    if bad.any():
        idx = tuple(int(i[0]) for i in np.nonzero(bad))
        point = tuple(float(g[idx]) for g in grids)
        raise ValueError(f"non-finite value at grid index {idx}, point {point}")
    return SampledField(axes, vals, basis)


# ---------------------------------------------------------------------------
# windows


@dataclass(frozen=True)
class Window:
    """Gaussian window ``e^{i<x,mod>} e^{-|x - center|^2 / (2 width^2)}``."""

    width: float = 1.0
    center: tuple[float, ...] = (0.0,)
    modulation: tuple[float, ...] = (0.0,)
    kind: str = "gaussian"

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError(f"window width must be positive, got {self.width}")
        if self.kind != "gaussian":
            raise ValueError(f"unsupported window kind {self.kind!r}")
        c = tuple(float(v) for v in np.atleast_1d(self.center))
        m = tuple(float(v) for v in np.atleast_1d(self.modulation))
        if len(c) != len(m):
            if len(c) == 1 and c[0] == 0.0:
                c = (0.0,) * len(m)
            elif len(m) == 1 and m[0] == 0.0:
                m = (0.0,) * len(c)
            else:
                raise ValueError("center and modulation dimensions differ")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "modulation", m)

    @property
    def dim(self) -> int:
        return len(self.center)

    def for_dim(self, d: int) -> "Window":
        if self.dim == d:
            return self
        if self.dim == 1 and self.center == (0.0,) and self.modulation == (0.0,):
            return Window(self.width, (0.0,) * d, (0.0,) * d)
        raise ValueError(f"window of dimension {self.dim} used in dimension {d}")

    def __call__(self, *coords) -> np.ndarray:
        win = self.for_dim(len(coords))
        r2 = sum((np.asarray(x) - c) ** 2 for x, c in zip(coords, win.center))
        out = np.exp(-r2 / (2.0 * self.width**2)).astype(complex)
        if any(win.modulation):
            out = out * np.exp(1j * sum(np.asarray(x) * m for x, m in zip(coords, win.modulation)))
        return out

    def l2_norm(self, d: int | None = None) -> float:
        """Closed form ``pi^{d/4} width^{d/2}``."""
        d = self.dim if d is None else d
        return math.pi ** (d / 4) * self.width ** (d / 2)

    def support_radius(self, tol: float = 1e-16) -> float:
        """Distance from the center beyond which ``|phi| < tol``."""
        return self.width * math.sqrt(2.0 * math.log(1.0 / tol))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "width": self.width, "center": list(self.center), "modulation": list(self.modulation)}


def gaussian_window(width: float = 1.0, center=0.0, modulation=0.0) -> Window:
    return Window(float(width), tuple(np.atleast_1d(center)), tuple(np.atleast_1d(modulation)))


# ---------------------------------------------------------------------------
# weights


@dataclass(frozen=True)
class Weight:
    """Positive weight function evaluated in log space.

    Kinds: ``constant`` (params ``(c,)``), ``polynomial`` (``(t,)``, giving
    ``(1 + |x|^2)^{t/2}``), ``exponential`` (``(r, s)``, giving
    ``e^{r |x|^{1/s}}``), ``tensor`` (``parts`` act on consecutive blocks of
    coordinates), ``phase`` (``parts[0]`` applied to the second half of the
    coordinates) and ``product`` (pointwise product of ``parts``).
    """

    kind: str = "constant"
    params: tuple[float, ...] = (1.0,)
    parts: tuple["Weight", ...] = ()
    dim: int | None = None
    majorant: "Weight | None" = None

    def __post_init__(self):
        if self.kind not in ("constant", "polynomial", "exponential", "tensor", "phase", "product"):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.kind == "constant" and not self.params[0] > 0:
            raise ValueError("constant weight must be positive")
        if self.kind == "exponential" and not self.params[1] > 0:
            raise ValueError("exponential weight needs s > 0")
        if self.kind == "tensor" and any(p.dim is None for p in self.parts):
            raise ValueError("tensor weight parts need explicit dimensions")

    @property
    def is_trivial(self) -> bool:
        if self.kind == "constant":
            return self.params[0] == 1.0
        if self.kind in ("tensor", "product", "phase"):
            return all(p.is_trivial for p in self.parts)
        return self.params[0] == 0.0

    def log(self, points) -> np.ndarray:
        """``log w`` at points whose last axis holds the coordinates."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 0:
            pts = pts.reshape(1)
        if self.dim is not None and pts.shape[-1] != self.dim:
            raise ValueError(f"weight of dimension {self.dim} evaluated at {pts.shape[-1]}-dim points")
        if self.kind == "constant":
            return np.full(pts.shape[:-1], math.log(self.params[0]))
        if self.kind == "polynomial":
            return 0.5 * self.params[0] * np.log1p(np.sum(pts**2, axis=-1))
        if self.kind == "exponential":
            r, s = self.params
            return r * np.sqrt(np.sum(pts**2, axis=-1)) ** (1.0 / s)
        if self.kind == "tensor":
            out = np.zeros(pts.shape[:-1])
            start = 0
            for part in self.parts:
                out = out + part.log(pts[..., start : start + part.dim])
                start += part.dim
            if start != pts.shape[-1]:
                raise ValueError("tensor weight blocks do not cover the point dimension")
            return out
        if self.kind == "phase":
            half = pts.shape[-1] // 2
            return self.parts[0].log(pts[..., half:])
        out = np.zeros(pts.shape[:-1])
        for part in self.parts:
            out = out + part.log(pts)
        return out

    def __call__(self, points) -> np.ndarray:
        return np.exp(self.log(points))

    def to_dict(self) -> dict:
        doc = {"kind": self.kind, "params": list(self.params), "dim": self.dim}
        if self.parts:
            doc["parts"] = [p.to_dict() for p in self.parts]
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "Weight":
        unknown = set(doc) - {"kind", "params", "dim", "parts"}
        if unknown:
            raise ValueError(f"unknown weight keys: {sorted(unknown)}")
        parts = tuple(cls.from_dict(p) for p in doc.get("parts", ()))
        params = tuple(float(v) for v in doc.get("params", (1.0,)))
        return cls(doc.get("kind", "constant"), params, parts, doc.get("dim"))


def constant_weight(c: float = 1.0) -> Weight:
    return Weight("constant", (float(c),))


def polynomial_weight(t: float, dim: int | None = None) -> Weight:
    return Weight("polynomial", (float(t),), dim=dim)


def exponential_weight(r: float, s: float, dim: int | None = None) -> Weight:
    return Weight("exponential", (float(r), float(s)), dim=dim)


def tensor_weight(*parts: Weight) -> Weight:
    return Weight("tensor", (), tuple(parts), sum(p.dim for p in parts))


def phase_weight(omega0: Weight, d: int) -> Weight:
    """``w(x, xi) = omega0(xi)`` on R^{2d}."""
    return Weight("phase", (), (omega0,), 2 * d)


def theta_weight(v: Weight, rho: float, r: float, strict: bool = False, dim: int | None = None) -> Weight:
    """``v(x, xi) <(x, xi)>^rho`` on phase space.

    The admissible range is ``rho >= 2d (1/r - 1)``; with ``strict`` (used
    when ``r < 1``) equality is excluded as well.
    """
    dim = v.dim if v.dim is not None else dim
    if dim is None or dim % 2:
        raise ValueError("theta weight needs an even phase-space dimension")
    if not 0 < r <= 1:
        raise ValueError(f"local exponent r must lie in (0, 1], got {r}")
    d = dim // 2
    bound = 2 * d * (1.0 / r - 1.0)
    if rho < bound or (strict and r < 1 and rho <= bound):
        rel = ">" if strict and r < 1 else ">="
        raise ValueError(f"rho={rho} violates rho {rel} 2d(1/r - 1) = {bound} (d={d}, r={r})")
    if rho == 0:
        return replace(v, dim=dim)
    return Weight("product", (), (replace(v, dim=dim), polynomial_weight(rho, dim)), dim)


@dataclass(frozen=True)
class ModerateReport:
    constant: float
    worst_pair: tuple
    lower_ratio: float  # min over sample of omega(x) v(-x)
    upper_ratio: float  # max over sample of omega(x) / v(x)
    bounded: bool  # constant stable when the sample radius is halved

    @property
    def moderate(self) -> bool:
        return self.bounded and math.isfinite(self.constant)


def check_moderate(omega: Weight, v: Weight, xs, ys) -> ModerateReport:
    """Empirical constant ``C = max omega(x+y) / (omega(x) v(y))`` over all pairs.

    ``xs`` and ``ys`` are point arrays of shape ``(n, dim)``. The constant is
    also computed on the pairs inside half the sample radius; if it grows by
    more than 5% when the full sample is used, the weight is flagged as not
    moderate with respect to ``v`` on this evidence.
    """
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    ys = np.atleast_2d(np.asarray(ys, dtype=float))
    if xs.size == 0 or ys.size == 0:
        raise ValueError("empty sample")
    log_ratio = omega.log(xs[:, None, :] + ys[None, :, :]) - omega.log(xs)[:, None] - v.log(ys)[None, :]
    i, j = np.unravel_index(np.argmax(log_ratio), log_ratio.shape)
    const = float(np.exp(log_ratio[i, j]))
    rx = np.linalg.norm(xs, axis=1)
    ry = np.linalg.norm(ys, axis=1)
    radius = max(rx.max(), ry.max())
    inner = (rx[:, None] <= radius / 2) & (ry[None, :] <= radius / 2)
    const_inner = float(np.exp(log_ratio[inner].max())) if inner.any() else const
    lower = float(np.exp(np.min(omega.log(xs) + v.log(-xs))))
    upper = float(np.exp(np.max(omega.log(xs) - v.log(xs))))
    return ModerateReport(const, (tuple(xs[i]), tuple(ys[j])), lower, upper, const <= 1.05 * const_inner)


# ---------------------------------------------------------------------------
# serialization

_MAGIC = b"TFZK"
_VERSION = 1


def write_field(path, fld: SampledField, kind: str = "field") -> Path:
    """Binary container: magic, version, header length, JSON header, complex64 LE payload."""
    path = Path(path)
    head = fld.header()
    head["kind"] = kind
    head["dtype"] = "<c8"
    blob = json.dumps(head, sort_keys=True).encode("utf-8")
    payload = np.ascontiguousarray(fld.values, dtype="<c8").tobytes()
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", _VERSION, len(blob)))
        fh.write(blob)
        fh.write(payload)
    return path


def read_field(path) -> tuple[SampledField, dict]:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != _MAGIC:
        raise ValueError(f"{path} is not a field container")
    version, hlen = struct.unpack("<II", data[4:12])
    if version != _VERSION:
        raise ValueError(f"unsupported container version {version}")
    head = json.loads(data[12 : 12 + hlen].decode("utf-8"))
    axes = tuple(Axis(**a) for a in head["axes"])
    shape = tuple(a.count for a in axes)
    vals = np.frombuffer(data[12 + hlen :], dtype="<c8").reshape(shape).astype(complex)
    basis = None if head["basis"] is None else OrderedBasis.from_dict(head["basis"])
    return SampledField(axes, vals, basis, head.get("meta", {})), head


def field_to_csv(fld: SampledField, path=None, names: Sequence[str] | None = None) -> str:
    """Long-format CSV: one index and one coordinate column per axis, then re, im."""
    names = list(names) if names else [f"x{k}" for k in range(fld.ndim)]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"i_{n}" for n in names] + names + ["re", "im"])
    coords = [a.coords for a in fld.axes]
    for idx in np.ndindex(*fld.shape):
        v = fld.values[idx]
        writer.writerow(
            [*idx, *(repr(float(c[i])) for c, i in zip(coords, idx)), repr(float(v.real)), repr(float(v.imag))]
        )
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
