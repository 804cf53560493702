"""Ordered bases, dual bases, lattices and phase-split constructions.

An ordered basis ``E = {e_1, ..., e_d}`` of R^d is stored as the matrix
``T_E`` whose columns are the basis vectors. The dual basis ``E'`` is fixed
by ``<e_j, e'_k> = 2*pi*delta_jk``, i.e. ``T_E' = 2*pi * inv(T_E).T``. The
lattice generated by ``E`` is ``{T_E n : n in Z^d}`` and the fundamental cell
is ``T_E [0, 1)^d`` (half-open, so translated cells tile without overlap).
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi

# Bases with a worse condition number than this are rejected at construction.
MAX_CONDITION = 1e8


class OrderedBasis:
    """Ordered basis of R^d stored as a column matrix.

    Parameters
    ----------
    matrix : array_like, shape (d, d)
        Column ``k`` is the basis vector ``e_{k+1}``. A scalar or a length-1
        sequence is accepted for ``d = 1``.

    Raises
    ------
    ValueError
        If the matrix is not square, not finite, or numerically singular
        (condition number above ``MAX_CONDITION``).
    """

    __slots__ = ("_matrix", "_inverse")

    def __init__(self, matrix):
        mat = np.array(matrix, dtype=float)
        if mat.ndim == 0:
            mat = mat.reshape(1, 1)
        elif mat.ndim == 1 and mat.size == 1:
            mat = mat.reshape(1, 1)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] == 0:
            raise ValueError(f"basis matrix must be square and non-empty, got shape {mat.shape}")
        if not np.all(np.isfinite(mat)):
            raise ValueError("basis matrix has non-finite entries")
        scale = np.max(np.abs(mat))
        if scale == 0.0 or abs(np.linalg.det(mat / scale)) <= 1e-12:
            raise ValueError("basis matrix is singular")
        cond = np.linalg.cond(mat)
        if not cond < MAX_CONDITION:
            raise ValueError(f"basis matrix is near-singular (condition number {cond:.3g})")
        mat.setflags(write=False)
        inv = np.linalg.inv(mat)
        inv.setflags(write=False)
        self._matrix = mat
        self._inverse = inv

    @classmethod
    def from_vectors(cls, vectors) -> "OrderedBasis":
        """Build a basis from a sequence of vectors ``e_1, ..., e_d``."""
        return cls(np.array(vectors, dtype=float).reshape(len(vectors), -1).T)

    @classmethod
    def standard(cls, d: int) -> "OrderedBasis":
        return cls(np.eye(d))

    @classmethod
    def diagonal(cls, scales) -> "OrderedBasis":
        return cls(np.diag(np.atleast_1d(np.asarray(scales, dtype=float))))

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def inverse(self) -> np.ndarray:
        return self._inverse

    @property
    def dim(self) -> int:
        return self._matrix.shape[0]

    @property
    def vectors(self) -> list[np.ndarray]:
        return [self._matrix[:, k] for k in range(self.dim)]

    @property
    def volume(self) -> float:
        """Lebesgue measure of the fundamental cell, ``|det T_E|``."""
        return float(abs(np.linalg.det(self._matrix)))

    @property
    def is_diagonal(self) -> bool:
        return bool(np.all(self._matrix == np.diag(np.diag(self._matrix))))

    @property
    def is_standard(self) -> bool:
        return bool(np.array_equal(self._matrix, np.eye(self.dim)))

    def dual(self) -> "OrderedBasis":
        return dual_basis(self)

    def to_coords(self, x) -> np.ndarray:
        """Coordinates ``u`` with ``x = T_E u``; the last axis of ``x`` holds the point."""
        return to_basis_coords(x, self)

    def from_coords(self, u) -> np.ndarray:
        """Standard coordinates ``T_E u``; the last axis of ``u`` holds the coordinates."""
        return np.asarray(u, dtype=float) @ self._matrix.T

    def allclose(self, other: "OrderedBasis", rtol: float = 1e-12) -> bool:
        if not isinstance(other, OrderedBasis) or other.dim != self.dim:
            return False
        scale = max(np.max(np.abs(self._matrix)), np.max(np.abs(other._matrix)))
        return bool(np.max(np.abs(self._matrix - other._matrix)) <= rtol * scale)

    def to_dict(self) -> dict:
        return {"dim": self.dim, "columns": [[float(v) for v in col] for col in self.vectors]}

    @classmethod
    def from_dict(cls, doc: dict) -> "OrderedBasis":
        unknown = set(doc) - {"dim", "columns"}
        if unknown:
            raise ValueError(f"unknown basis keys: {sorted(unknown)}")
        dim = int(doc["dim"])
        columns = doc["columns"]
        if len(columns) != dim or any(len(c) != dim for c in columns):
            raise ValueError(f"basis document declares dim={dim} but columns do not match")
        return cls.from_vectors(columns)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "OrderedBasis":
        return cls.from_dict(json.loads(text))

    def __eq__(self, other) -> bool:
        return isinstance(other, OrderedBasis) and np.array_equal(self._matrix, other._matrix)

    def __hash__(self) -> int:
        return hash(self._matrix.tobytes())

    def __repr__(self) -> str:
        return f"OrderedBasis({self._matrix.tolist()!r})"


def as_basis(E, dim: int | None = None) -> OrderedBasis:
    """Coerce ``None`` (standard basis), a scalar, a matrix or a basis to ``OrderedBasis``."""
    if isinstance(E, OrderedBasis):
        basis = E
    elif E is None:
        if dim is None:
            raise ValueError("dimension required for the default standard basis")
        basis = OrderedBasis.standard(dim)
    else:
        basis = OrderedBasis(E)
    if dim is not None and basis.dim != dim:
        raise ValueError(f"basis has dimension {basis.dim}, expected {dim}")
    return basis


def dual_basis(E: OrderedBasis) -> OrderedBasis:
    """Dual basis ``E'`` with ``<e_j, e'_k> = 2 pi delta_jk``."""
    return OrderedBasis(TWO_PI * E.inverse.T)


def product_basis(E1: OrderedBasis, E2: OrderedBasis) -> OrderedBasis:
    """Basis ``E1 x E2`` of R^{2d}: first ``d`` vectors in the x-block, last ``d`` in the xi-block."""
    if E1.dim != E2.dim:
        raise ValueError(f"dimension mismatch: {E1.dim} and {E2.dim}")
    d = E1.dim
    mat = np.zeros((2 * d, 2 * d))
    mat[:d, :d] = E1.matrix
    mat[d:, d:] = E2.matrix
    return OrderedBasis(mat)


def rotate_half(E: OrderedBasis) -> OrderedBasis:
    """Reorder ``e_1..e_2d`` as ``e_{d+1}..e_{2d}, e_1..e_d``."""
    if E.dim % 2:
        raise ValueError(f"rotate_half needs an even dimension, got {E.dim}")
    d = E.dim // 2
    return OrderedBasis(np.concatenate([E.matrix[:, d:], E.matrix[:, :d]], axis=1))


def to_basis_coords(x, E: OrderedBasis) -> np.ndarray:
    """Solve ``T_E u = x``; the last axis of ``x`` is the point."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1)
    if x.shape[-1] != E.dim:
        raise ValueError(f"point has {x.shape[-1]} coordinates, basis has dimension {E.dim}")
    return x @ E.inverse.T


@dataclass(frozen=True)
class LatticePatch:
    """Finite set of lattice points ``T_E n`` selected by a box."""

    basis: OrderedBasis
    points: np.ndarray  # integer coordinate vectors, shape (n, d)
    selection: tuple = field(default=())  # (lo, hi) box in standard coordinates

    def __len__(self) -> int:
        return len(self.points)

    def standard_points(self) -> np.ndarray:
        return self.basis.from_coords(self.points.astype(float))


def lattice_points(E: OrderedBasis, lo, hi) -> LatticePatch:
    """All ``n`` in Z^d with ``T_E n`` inside the closed box ``[lo, hi]``.

    The search scans the integer box spanned by the images of the region's
    corners under ``inv(T_E)``, which contains every candidate.
    """
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (E.dim,)).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (E.dim,)).copy()
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise ValueError("lattice region must be bounded")
    if np.any(hi < lo):
        raise ValueError("lattice region has hi < lo")
    corners = np.array(list(itertools.product(*zip(lo, hi))))
    coords = to_basis_coords(corners, E)
    nlo = np.floor(coords.min(axis=0) - 1e-9).astype(int)
    nhi = np.ceil(coords.max(axis=0) + 1e-9).astype(int)
    axes = [np.arange(a, b + 1) for a, b in zip(nlo, nhi)]
    cand = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, E.dim)
    pts = E.from_coords(cand.astype(float))
    tol = 1e-12 * max(1.0, float(np.max(np.abs(np.concatenate([lo, hi])))))
    inside = np.all((pts >= lo - tol) & (pts <= hi + tol), axis=1)
    return LatticePatch(E, cand[inside], (tuple(lo), tuple(hi)))


@dataclass(frozen=True)
class PhaseSplitDescriptor:
    """Outcome of testing a 2d-dimensional basis for the phase-split property.

    ``accepted`` is False for a rejection; ``reason`` then says which
    condition failed. On acceptance ``E1`` and ``E2`` are the induced bases
    of R^d carried by the mask subset (x-block) and its complement
    (xi-block), in the order inherited from ``basis2d``.
    """

    basis2d: OrderedBasis
    mask: tuple[bool, ...]
    accepted: bool
    E1: OrderedBasis | None = None
    E2: OrderedBasis | None = None
    permutation: tuple[int, ...] | None = None
    strongly: bool = False
    reason: str = ""

    def __bool__(self) -> bool:
        return self.accepted


def _permuted_dual(E1: OrderedBasis, E2: OrderedBasis, tol: float):
    """Return ``perm`` with ``E2[perm[k]] == dual(E1)[k]`` or ``None``."""
    target = dual_basis(E1).matrix
    cand = E2.matrix
    d = E1.dim
    scale = max(np.max(np.abs(target)), np.max(np.abs(cand)))
    if d <= 4:
        for perm in itertools.permutations(range(d)):
            if np.max(np.abs(cand[:, perm] - target)) <= tol * scale:
                return tuple(perm)
        return None
    # greedy nearest match for larger dimensions
    left = list(range(d))
    perm = []
    for k in range(d):
        dist = [np.max(np.abs(cand[:, j] - target[:, k])) for j in left]
        best = int(np.argmin(dist))
        if dist[best] > tol * scale:
            return None
        perm.append(left.pop(best))
    return tuple(perm)


def is_phase_split(E: OrderedBasis, mask, tol: float = 1e-10) -> PhaseSplitDescriptor:
    """Test whether ``E`` is phase split with respect to the vector subset ``mask``.

    The subset must span the x-block ``R^d x {0}``, the remaining vectors
    must span ``{0} x R^d``, and the induced bases must be duals of each
    other up to a permutation. Rejection is returned as a value.
    """
    if E.dim % 2:
        return PhaseSplitDescriptor(E, tuple(), False, reason=f"odd dimension {E.dim}")
    d = E.dim // 2
    mask = np.asarray(mask)
    if mask.dtype != bool:
        idx = mask.astype(int)
        mask = np.zeros(E.dim, dtype=bool)
        mask[idx] = True
    mask_t = tuple(bool(m) for m in mask)
    if mask.shape != (E.dim,) or mask.sum() != d:
        return PhaseSplitDescriptor(E, mask_t, False, reason=f"mask must select {d} of {E.dim} vectors")
    mat = E.matrix
    scale = np.max(np.abs(mat))
    first, second = mat[:, mask], mat[:, ~mask]
    if np.max(np.abs(first[d:, :])) > tol * scale:
        return PhaseSplitDescriptor(E, mask_t, False, reason="masked vectors leave the x-block")
    if np.max(np.abs(second[:d, :])) > tol * scale:
        return PhaseSplitDescriptor(E, mask_t, False, reason="unmasked vectors leave the xi-block")
    try:
        E1 = OrderedBasis(first[:d, :])
        E2 = OrderedBasis(second[d:, :])
    except ValueError as exc:
        return PhaseSplitDescriptor(E, mask_t, False, reason=str(exc))
    perm = _permuted_dual(E1, E2, tol)
    if perm is None:
        return PhaseSplitDescriptor(E, mask_t, False, E1, E2, reason="induced bases are not permuted duals")
    strongly = all(mask_t[:d])
    return PhaseSplitDescriptor(E, mask_t, True, E1, E2, perm, strongly)


def cell_volume_monte_carlo(E: OrderedBasis, samples: int = 200_000, seed: int = 0) -> float:
    """Estimate ``|cell(E)|`` by sampling the bounding box of the cell.

    Independent of the determinant: membership is decided by solving for
    basis coordinates and checking ``[0, 1)^d``.
    """
    rng = np.random.default_rng(seed)
    corners = E.from_coords(np.array(list(itertools.product([0.0, 1.0], repeat=E.dim))))
    lo, hi = corners.min(axis=0), corners.max(axis=0)
    pts = lo + (hi - lo) * rng.random((samples, E.dim))
    u = to_basis_coords(pts, E)
    inside = np.all((u >= 0.0) & (u < 1.0), axis=1)
    return float(inside.mean() * math.prod(hi - lo))


@dataclass(frozen=True, eq=False)
class LatticeSequence:
    """Finitely supported sequence on the lattice generated by ``basis``.

    ``points`` holds integer coordinate vectors ``n`` (the lattice point is
    ``T_E n``) and ``values`` the complex value at each point.
    """

    basis: OrderedBasis
    points: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=int))
        if pts.shape[-1] != self.basis.dim:
            pts = pts.reshape(-1, self.basis.dim)
        vals = np.asarray(self.values, dtype=complex).reshape(-1)
        if len(vals) != len(pts):
            raise ValueError(f"{len(pts)} lattice points but {len(vals)} values")
        if len({tuple(p) for p in pts.tolist()}) != len(pts):
            raise ValueError("duplicate lattice points")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", vals)

    @classmethod
    def delta(cls, basis: OrderedBasis, at=None, value: complex = 1.0) -> "LatticeSequence":
        at = np.zeros(basis.dim, dtype=int) if at is None else np.atleast_1d(at)
        return cls(basis, at.reshape(1, -1), [value])

    @classmethod
    def from_dense(cls, basis: OrderedBasis, array, lo) -> "LatticeSequence":
        """Sequence whose value at ``lo + idx`` is ``array[idx]``."""
        array = np.asarray(array)
        idx = np.stack(np.meshgrid(*[np.arange(s) for s in array.shape], indexing="ij"), -1)
        idx = idx.reshape(-1, array.ndim)
        return cls(basis, idx + np.asarray(lo, dtype=int), array.reshape(-1))

    def dense(self) -> tuple[np.ndarray, np.ndarray]:
        """Dense array over the bounding box and its lowest index vector."""
        if len(self.points) == 0:
            return np.zeros((1,) * self.basis.dim, dtype=complex), np.zeros(self.basis.dim, dtype=int)
        lo = self.points.min(axis=0)
        hi = self.points.max(axis=0)
        out = np.zeros(tuple(hi - lo + 1), dtype=complex)
        out[tuple((self.points - lo).T)] = self.values
        return out, lo

    def scaled(self, lam: complex) -> "LatticeSequence":
        return LatticeSequence(self.basis, self.points, self.values * lam)
