"""Fourier, short-time Fourier and Zak transforms on sampled grids.

Conventions
-----------
Fourier transform: ``f^(xi) = (2 pi)^{-d/2} int f(x) e^{-i<x,xi>} dx``.

STFT with window ``phi``:
``V f(x, xi) = (2 pi)^{-d/2} int f(y) conj(phi(y - x)) e^{-i<y,xi>} dy``.

Zak transform with respect to the lattice of an ordered basis ``E``:
``Z f(x, xi) = sum_{j in lattice} f(x - j) e^{i<j,xi>}``. It is handled in
basis coordinates ``x = T_E u`` and ``xi = T_E' v`` where the phase becomes
``e^{2 pi i n.v}``.

All integrals are rectangle-rule sums on uniform grids. Every DFT is taken
with explicit pre- and post-phases, so the discrete sums equal
``sum_m g(y_m) e^{-i y_m w_k} dy`` exactly for the reported grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .fields import Axis, SampledField, Window
from .geometry import LatticeSequence, OrderedBasis, as_basis, dual_basis, product_basis

TWO_PI = 2.0 * np.pi


# ---------------------------------------------------------------------------
# helpers


def _is_int(x: float, tol: float = 1e-9) -> bool:
    return abs(x - round(x)) <= tol * max(1.0, abs(x))


def centered_dft(values: np.ndarray, axis: int, y0: float, dy: float, length: int | None = None, keep: int | None = None):
    """Riemann sum ``sum_m v[m] e^{-i y_m w_k} dy`` on a centred frequency grid.

    ``y_m = y0 + m dy``. The transform length ``length`` (zero padding, at
    least the number of samples) fixes ``dw = 2 pi / (length dy)``; the
    frequency grid is ``w_k = (k - length // 2) dw``. Only the central
    ``keep`` bins are returned.

    Returns
    -------
    out : ndarray
    axis_out : Axis
        The frequency grid of ``out`` along ``axis``.
    """
    values = np.moveaxis(values, axis, -1)
    m = values.shape[-1]
    length = m if length is None else int(length)
    if length < m:
        raise ValueError(f"transform length {length} shorter than {m} samples")
    dw = TWO_PI / (length * dy)
    w0 = -(length // 2) * dw
    idx = np.arange(m)
    pre = np.exp(-1j * (y0 + idx * dy) * w0)
    spec = np.fft.fft(values * pre, n=length, axis=-1)
    keep = length if keep is None else int(keep)
    if keep > length:
        raise ValueError(f"cannot keep {keep} of {length} frequency bins")
    start = length // 2 - keep // 2
    k = np.arange(start, start + keep)
    post = np.exp(-1j * y0 * k * dw) * dy
    out = spec[..., start : start + keep] * post
    return np.moveaxis(out, -1, axis), Axis(w0 + start * dw, dw, keep)


def basis_samples(f: SampledField, E: OrderedBasis) -> tuple[tuple[Axis, ...], np.ndarray]:
    """Axes and values of ``f`` in ``E``-coordinates.

    Works when ``f`` is already sampled in ``E``-coordinates, or when ``f``
    is on a standard grid and ``E`` is diagonal (a rescaling of the axes).
    """
    if f.basis is not None:
        if not f.basis.allclose(E):
            raise ValueError("field is sampled in a different basis")
        return f.axes, f.values
    if E.is_standard:
        return f.axes, f.values
    if not E.is_diagonal:
        raise ValueError("non-diagonal basis: sample the field in basis coordinates (sample(..., basis=E))")
    axes = []
    vals = f.values
    for k, (ax, e) in enumerate(zip(f.axes, np.diag(E.matrix))):
        if e > 0:
            axes.append(Axis(ax.origin / e, ax.step / e, ax.count, ax.kind))
        else:
            vals = np.flip(vals, axis=k)
            axes.append(Axis((ax.origin + (ax.count - 1) * ax.step) / e, ax.step / abs(e), ax.count, ax.kind))
    return tuple(axes), vals


def _cell_layout(ax: Axis) -> tuple[int, int]:
    """Samples per unit cell and global index of the first sample."""
    n = 1.0 / ax.step
    if not _is_int(n):
        raise ValueError(f"grid step {ax.step} does not divide the unit cell")
    g0 = ax.origin / ax.step
    if not _is_int(g0):
        raise ValueError(f"grid origin {ax.origin} is not aligned with the cell boundaries")
    return int(round(n)), int(round(g0))


def cellify(values: np.ndarray, axes: tuple[Axis, ...], positions) -> tuple[np.ndarray, list[int]]:
    """Reshape the listed axes into (cell, sample-in-cell) pairs.

    Each listed axis of length ``N`` becomes two axes ``(C, n)``, inserted
    in place; samples are padded with zeros so that cells are complete.
    Returns the reshaped array and the lowest cell index per listed axis.
    """
    out = values
    cell_lo = []
    offset = 0
    for pos, ax in zip(positions, axes):
        n, g0 = _cell_layout(ax)
        c0 = g0 // n
        front = g0 - c0 * n
        total = front + ax.count
        C = -(-total // n)
        back = C * n - total
        p = pos + offset
        pad = [(0, 0)] * out.ndim
        pad[p] = (front, back)
        if front or back:
            out = np.pad(out, pad)
        out = out.reshape(out.shape[:p] + (C, n) + out.shape[p + 1 :])
        cell_lo.append(c0)
        offset += 1
    return out, cell_lo


# ---------------------------------------------------------------------------
# Fourier transform


def fourier(f: SampledField) -> SampledField:
    """Fourier transform on the dual grid ``xi_k = 2 pi k / (count step)``, centred at 0."""
    if f.basis is not None:
        raise ValueError("fourier expects standard coordinates")
    if any(a.kind != "line" for a in f.axes):
        raise ValueError("fourier expects line-segment axes")
    out = f.values
    axes = []
    for k, ax in enumerate(f.axes):
        out, xi = centered_dft(out, k, ax.origin, ax.step)
        axes.append(xi)
    out = out * TWO_PI ** (-f.ndim / 2)
    return SampledField(tuple(axes), out, None, {"transform": "fourier"})


# ---------------------------------------------------------------------------
# STFT


def _gaussian_outside_fraction(distances, width: float) -> float:
    """Fraction of ``|phi|^2`` mass beyond the given one-sided distances."""
    frac = 0.0
    for dist in distances:
        frac += 0.5 * math.erfc(dist / width) if dist > 0 else 0.5 + 0.5 * math.erf(-dist / width)
    return frac


def _check_window_fit(phi: Window, axes, x_lo, x_hi):
    dist = []
    for ax, lo, hi, c in zip(axes, x_lo, x_hi, phi.center):
        dist.append(lo + c - ax.origin)
        dist.append(ax.origin + ax.length - (hi + c))
    frac = _gaussian_outside_fraction(dist, phi.width)
    if math.sqrt(frac) > 1e-10:
        raise ValueError(
            f"window too wide for the box: boundary mass {math.sqrt(frac):.3g} of the window norm exceeds 1e-10"
        )


def stft(f: SampledField, phi: Window, x_range=None, xi_range=None, max_block: int = 1 << 22) -> SampledField:
    """Short-time Fourier transform of ``f`` with the window ``phi``.

    Parameters
    ----------
    f : SampledField
        Standard-coordinate samples on line axes; treated as zero outside.
    phi : Window
    x_range : (lo, hi), optional
        Restrict the output x-grid to grid points in ``[lo, hi)`` per axis.
        By default every grid point of ``f`` is used.
    xi_range : (lo, hi), optional
        Keep only dual-grid frequencies in ``[lo, hi)``.

    Returns
    -------
    SampledField
        Axes ``x_1..x_d, xi_1..xi_d``.
    """
    if f.basis is not None or any(a.kind != "line" for a in f.axes):
        raise ValueError("stft expects standard coordinates on line axes")
    d = f.ndim
    phi = phi.for_dim(d)
    ys = [a.coords for a in f.axes]
    if x_range is None:
        x_idx = [np.arange(a.count) for a in f.axes]
        _check_window_fit(phi, f.axes, [0.0] * d, [0.0] * d)
    else:
        lo = np.broadcast_to(np.asarray(x_range[0], dtype=float), (d,))
        hi = np.broadcast_to(np.asarray(x_range[1], dtype=float), (d,))
        eps = [1e-9 * a.step for a in f.axes]
        x_idx = [np.nonzero((y >= l - e) & (y < h - e))[0] for y, l, h, e in zip(ys, lo, hi, eps)]
        if any(len(i) == 0 for i in x_idx):
            raise ValueError("x_range selects no grid points")
        _check_window_fit(phi, f.axes, [y[i[0]] for y, i in zip(ys, x_idx)], [y[i[-1]] for y, i in zip(ys, x_idx)])

    # frequency grid and phases per axis
    xi_axes, pres, posts, keeps = [], [], [], []
    for ax in f.axes:
        n = ax.count
        dxi = TWO_PI / (n * ax.step)
        xi0 = -(n // 2) * dxi
        k = np.arange(n)
        sel = k
        if xi_range is not None:
            xi = xi0 + k * dxi
            lo_xi = np.broadcast_to(np.asarray(xi_range[0], dtype=float), (d,))[len(xi_axes)]
            hi_xi = np.broadcast_to(np.asarray(xi_range[1], dtype=float), (d,))[len(xi_axes)]
            sel = k[(xi >= lo_xi - 1e-9 * dxi) & (xi < hi_xi - 1e-9 * dxi)]
            if len(sel) == 0:
                raise ValueError("xi_range selects no frequencies")
            sel = np.arange(sel[0], sel[-1] + 1)
        keeps.append(sel)
        xi_axes.append(Axis(xi0 + sel[0] * dxi, dxi, len(sel)))
        pres.append(np.exp(-1j * ax.coords * xi0))
        posts.append(np.exp(-1j * ax.origin * sel * dxi) * ax.step)

    x_axes = tuple(Axis(a.coords[i[0]], a.step, len(i)) for a, i in zip(f.axes, x_idx))
    out_shape = tuple(len(i) for i in x_idx) + tuple(len(s) for s in keeps)
    out = np.empty(out_shape, dtype=complex)

    pre = pres[0]
    for p in pres[1:]:
        pre = np.multiply.outer(pre, p)
    g = f.values * pre
    post = posts[0]
    for p in posts[1:]:
        post = np.multiply.outer(post, p)
    post = post * TWO_PI ** (-d / 2)

    xpts = np.stack(np.meshgrid(*[y[i] for y, i in zip(ys, x_idx)], indexing="ij"), -1).reshape(-1, d)
    flat = out.reshape((-1,) + out_shape[d:])
    block = max(1, max_block // max(1, g.size))
    fft_axes = tuple(range(1, d + 1))
    for start in range(0, len(xpts), block):
        xs = xpts[start : start + block]
        args = []
        for a in range(d):
            shape = [len(xs)] + [1] * d
            shape[a + 1] = len(ys[a])
            args.append((ys[a][None, :] - xs[:, a : a + 1]).reshape(shape))
        win = np.conj(phi(*args))
        spec = np.fft.fftn(g[None, ...] * win, axes=fft_axes)
        spec = spec[np.ix_(np.arange(len(xs)), *keeps)]
        flat[start : start + len(xs)] = spec * post
    meta = {"transform": "stft", "window": phi.to_dict()}
    return SampledField(x_axes + tuple(xi_axes), out, None, meta)


# ---------------------------------------------------------------------------
# finite Zak transform


def finite_zak(f, M: int, N: int) -> np.ndarray:
    """Finite Zak transform ``Zf(n, k) = sum_m f((n - m M) mod L) e^{2 pi i m k / N}``.

    Returns an ``M x N`` array; ``L = M N`` is the signal length.
    """
    f = np.asarray(f, dtype=complex).reshape(-1)
    L = len(f)
    if M * N != L or M < 1 or N < 1:
        raise ValueError(f"M*N must equal the signal length: {M}*{N} != {L}")
    n = np.arange(M)[:, None]
    m = np.arange(N)[None, :]
    g = f[(n - m * M) % L]
    # sum_m g e^{+2 pi i m k / N} = N * ifft
    return np.fft.ifft(g, axis=1) * N


# ---------------------------------------------------------------------------
# continuous-model Zak transform


def _zak_sum(cells: np.ndarray, cell_lo, vgrids, shift) -> np.ndarray:
    """``sum_c A[c, i] e^{2 pi i (k - c).v}`` for every sample ``i`` and grid ``v``.

    ``cells`` has axes ``(C_1..C_d, n_1..n_d)``; the result has axes
    ``(n_1..n_d, m_1..m_d)``. This evaluates the defining lattice sum at
    ``u_i + k`` directly.
    """
    out = cells
    for a, v in enumerate(vgrids):
        c = cell_lo[a] + np.arange(cells.shape[a])
        phase = np.exp(2j * np.pi * np.multiply.outer(shift[a] - c, v))
        out = np.tensordot(out, phase, axes=([0], [0]))
    return out


@dataclass(frozen=True, eq=False)
class ZakField:
    """Zak transform sampled on ``x_cells`` x-cells and ``xi_cells`` xi-cells.

    ``field`` has axes ``u_1..u_d`` (E-coordinates) followed by
    ``v_1..v_d`` (E'-coordinates) and carries the basis ``E x E'``. When the
    cell decomposition ``cells`` of the source is present the defining sum
    can be re-evaluated at shifted arguments.
    """

    field: SampledField
    basis: OrderedBasis
    truncation: int
    boundary_mass: float
    per_cell: tuple[int, ...]
    xi_per_cell: tuple[int, ...]
    cells: np.ndarray | None = None
    cell_lo: tuple[int, ...] | None = None
    source: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.basis.dim

    @property
    def values(self) -> np.ndarray:
        return self.field.values

    def fundamental(self) -> np.ndarray:
        """Values on the fundamental cell ``[0,1)^d x [0,1)^d``."""
        sl = tuple(slice(0, n) for n in self.per_cell) + tuple(slice(0, n) for n in self.xi_per_cell)
        return self.field.values[sl]

    def u_grid(self) -> list[np.ndarray]:
        return [np.arange(n) / n for n in self.per_cell]

    def v_grid(self) -> list[np.ndarray]:
        return [np.arange(n) / n for n in self.xi_per_cell]

    def evaluate(self, shift, vgrids=None) -> np.ndarray:
        """Defining sum at ``(u_i + shift, v)`` for the fundamental ``u_i``."""
        if self.cells is None:
            raise ValueError("this Zak field carries no source cells to re-evaluate the sum")
        vgrids = self.v_grid() if vgrids is None else vgrids
        return _zak_sum(self.cells, self.cell_lo, vgrids, np.atleast_1d(shift))

    def l2_norm(self) -> float:
        """Standard-measure L^2 norm over the fundamental cell of ``E x E'``."""
        vals = self.fundamental()
        w = math.prod(1.0 / n for n in self.per_cell) * math.prod(1.0 / n for n in self.xi_per_cell)
        w *= self.basis.volume * dual_basis(self.basis).volume
        return float(np.sqrt(np.sum(np.abs(vals) ** 2) * w))

    def with_values(self, values) -> "ZakField":
        return ZakField(
            self.field.with_values(values), self.basis, self.truncation, self.boundary_mass,
            self.per_cell, self.xi_per_cell, self.cells, self.cell_lo, self.source,
        )


def _zak_source(f: SampledField, E: OrderedBasis, decay_tol: float, min_cells: int):
    axes, vals = basis_samples(f, E)
    if any(a.kind != "line" for a in axes):
        raise ValueError("zak expects line axes")
    peak = float(np.max(np.abs(vals))) if vals.size else 0.0
    boundary = 0.0
    for k in range(vals.ndim):
        for idx in (0, -1):
            face = np.take(vals, idx, axis=k)
            boundary = max(boundary, float(np.max(np.abs(face))))
    rel = boundary / peak if peak > 0 else 0.0
    if rel > decay_tol:
        raise ValueError(f"insufficient decay: boundary mass {rel:.3g} exceeds {decay_tol:g}")
    for ax in axes:
        if ax.length < min_cells:
            raise ValueError(f"box covers {ax.length:.3g} lattice cells, need at least {min_cells}")
    cells, cell_lo = cellify(vals, axes, range(vals.ndim))
    d = vals.ndim
    # axes (C1, n1, C2, n2, ...) -> (C1..Cd, n1..nd)
    order = [2 * k for k in range(d)] + [2 * k + 1 for k in range(d)]
    cells = np.ascontiguousarray(np.transpose(cells, order))
    per_cell = tuple(cells.shape[d:])
    source = {
        "axes": [a.to_dict() for a in f.axes],
        "basis_coords": f.basis is not None,
        "cell_range": [[int(c), int(c + cells.shape[k])] for k, c in enumerate(cell_lo)],
    }
    return cells, tuple(cell_lo), per_cell, rel, source


def zak(
    f: SampledField,
    E: OrderedBasis | None = None,
    xi_per_cell: int = 64,
    x_cells: int = 1,
    xi_cells: int = 1,
    decay_tol: float = 1e-12,
    min_cells: int = 8,
) -> ZakField:
    """Zak transform of ``f`` with respect to the lattice of ``E``.

    The x-grid is the sampling grid of ``f`` in E-coordinates restricted to
    ``[0, x_cells)``; the xi-grid has ``xi_per_cell`` points per E'-cell on
    ``[0, xi_cells)``. Every sample, including those outside the
    fundamental cell, is evaluated from the defining lattice sum.
    """
    E = as_basis(E, f.ndim)
    d = f.ndim
    cells, cell_lo, per_cell, rel, source = _zak_source(f, E, decay_tol, min_cells)
    xi_per = (int(xi_per_cell),) * d if np.ndim(xi_per_cell) == 0 else tuple(int(v) for v in xi_per_cell)
    xc = (x_cells,) * d if np.ndim(x_cells) == 0 else tuple(x_cells)
    vc = (xi_cells,) * d if np.ndim(xi_cells) == 0 else tuple(xi_cells)
    vgrids = [np.arange(n * m) / n for n, m in zip(xi_per, vc)]
    shape = tuple(n * m for n, m in zip(per_cell, xc)) + tuple(len(v) for v in vgrids)
    out = np.empty(shape, dtype=complex)
    for shift in np.ndindex(*xc):
        block = _zak_sum(cells, cell_lo, vgrids, shift)
        sl = tuple(slice(k * n, (k + 1) * n) for k, n in zip(shift, per_cell))
        out[sl] = block
    axes = tuple(Axis(0.0, 1.0 / n, n * m) for n, m in zip(per_cell, xc)) + tuple(
        Axis(0.0, 1.0 / n, n * m) for n, m in zip(xi_per, vc)
    )
    lo = np.array(cell_lo)
    hi = lo + np.array(cells.shape[:d]) - 1
    trunc = int(max(np.max(np.abs(lo)), np.max(np.abs(hi)) + max(xc)))
    meta = {"transform": "zak", "basis": E.to_dict(), "truncation": trunc, "boundary_mass": rel}
    fld = SampledField(axes, out, product_basis(E, dual_basis(E)), meta)
    return ZakField(fld, E, trunc, rel, per_cell, xi_per, cells, cell_lo, source)


def inverse_zak(F: ZakField, check: bool = True, cell_range=None) -> SampledField:
    """Recover ``f`` from the xi-Fourier coefficients of ``F(u, .)``.

    ``f_E(u_i - n)`` is the ``n``-th Fourier coefficient of
    ``v -> F(u_i, v)`` over one E'-cell, computed by an FFT over the
    xi-samples. The output covers the cell range of the source (or
    ``cell_range``) and uses the source's coordinate convention.

    Raises
    ------
    ValueError
        If ``check`` is set and the quasi-periodicity defect exceeds 1e-6.
    """
    if check and F.cells is not None:
        defect = quasi_periodicity_defect(F)
        if defect > 1e-6:
            raise ValueError(f"field is not quasi-periodic (relative defect {defect:.3g})")
    d = F.dim
    vals = F.fundamental()
    coef = np.fft.fftn(vals, axes=tuple(range(d, 2 * d))) / math.prod(F.xi_per_cell)
    if cell_range is None:
        if "cell_range" in F.source:
            cell_range = F.source["cell_range"]
        else:
            cell_range = [[-(n // 2), n - n // 2] for n in F.xi_per_cell]
    for (lo, hi), n in zip(cell_range, F.xi_per_cell):
        if hi - lo > n:
            raise ValueError(f"{hi - lo} cells requested but only {n} xi-samples per cell are available")
    # f_E(u_i + c) = coef[i, (-c) mod n]
    idx = [(-np.arange(lo, hi)) % n for (lo, hi), n in zip(cell_range, F.xi_per_cell)]
    out = coef[(slice(None),) * d + np.ix_(*idx)]  # (n_1..n_d, C_1..C_d)
    order = []
    for k in range(d):
        order += [d + k, k]
    out = np.transpose(out, order)
    out = out.reshape(tuple(out.shape[2 * k] * out.shape[2 * k + 1] for k in range(d)))
    axes = tuple(
        Axis(lo, 1.0 / n, (hi - lo) * n) for (lo, hi), n in zip(cell_range, F.per_cell)
    )
    if F.source.get("basis_coords", True) or not F.basis.is_diagonal:
        return SampledField(axes, out, F.basis, {"transform": "inverse_zak"})
    std_axes = []
    for k, (ax, e) in enumerate(zip(axes, np.diag(F.basis.matrix))):
        if e > 0:
            std_axes.append(Axis(ax.origin * e, ax.step * e, ax.count))
        else:
            out = np.flip(out, axis=k)
            std_axes.append(Axis((ax.origin + (ax.count - 1) * ax.step) * e, ax.step * abs(e), ax.count))
    return SampledField(tuple(std_axes), out, None, {"transform": "inverse_zak"})


def quasi_periodicity_defect(F: ZakField, shifts=(-1, 1)) -> float:
    """Largest relative defect of the two quasi-periodicity identities.

    Compares (a) stored blocks beyond the fundamental cell with the
    fundamental block transported by ``F(u + k, v) = e^{2 pi i k.v} F(u, v)``
    and ``F(u, v + l) = F(u, v)``, and (b) when source cells are present,
    the defining sum recomputed at ``u + k`` and ``v + l`` for the given
    integer shifts. Defects are relative to the largest stored magnitude.
    """
    d = F.dim
    vals = F.field.values
    scale = float(np.max(np.abs(vals)))
    if scale == 0.0:
        return 0.0
    base = F.fundamental()
    vg = F.v_grid()
    worst = 0.0
    x_blocks = [s // n for s, n in zip(vals.shape[:d], F.per_cell)]
    v_blocks = [s // n for s, n in zip(vals.shape[d:], F.xi_per_cell)]
    for k in np.ndindex(*x_blocks):
        for l in np.ndindex(*v_blocks):
            if not any(k) and not any(l):
                continue
            sl = tuple(slice(a * n, (a + 1) * n) for a, n in zip(k, F.per_cell)) + tuple(
                slice(b * n, (b + 1) * n) for b, n in zip(l, F.xi_per_cell)
            )
            phase = _phase(vg, k, d)
            worst = max(worst, float(np.max(np.abs(vals[sl] - phase * base))))
    if F.cells is not None:
        for a in range(d):
            for s in shifts:
                k = np.zeros(d, dtype=int)
                k[a] = s
                shifted = F.evaluate(k)
                worst = max(worst, float(np.max(np.abs(shifted - _phase(vg, k, d) * base))))
                vshift = [v + (s if b == a else 0) for b, v in enumerate(vg)]
                worst = max(worst, float(np.max(np.abs(F.evaluate(np.zeros(d, dtype=int), vshift) - base))))
    return worst / scale


def _phase(vgrids, k, d) -> np.ndarray:
    """``prod_a e^{2 pi i k_a v_a}`` shaped to broadcast against ``(n..., m...)`` arrays."""
    ph = np.ones((1,) * d + tuple(len(v) for v in vgrids), dtype=complex)
    for a, v in enumerate(vgrids):
        shape = [1] * (2 * d)
        shape[d + a] = len(v)
        ph = ph * np.exp(2j * np.pi * k[a] * v).reshape(shape)
    return ph


# ---------------------------------------------------------------------------
# STFT of Zak transforms (d = 1)


def _scalar_basis(E: OrderedBasis) -> float:
    if E.dim != 1:
        raise ValueError(f"unsupported dimension {E.dim}: only d = 1 is implemented")
    return float(E.matrix[0, 0])


@dataclass(frozen=True)
class ZakGrid:
    """Integration grid for compositions of the Zak transform with STFTs (d = 1).

    ``x_per_cell`` samples per lattice cell in x and ``t_per_cell`` samples
    per dual cell in xi are used for the integrals. Output points are the
    integration points of the first ``x_cells`` (resp. ``xi_cells``) cells,
    taken every ``x_stride`` (resp. ``xi_stride``) samples.
    """

    x_per_cell: int = 32
    t_per_cell: int = 64
    x_cells: int = 1
    xi_cells: int = 1
    x_stride: int = 1
    xi_stride: int = 2
    eta_step: float | None = None
    n_eta: int = 64
    y_step: float | None = None
    n_y: int = 64

    def __post_init__(self):
        if self.x_per_cell % self.x_stride or self.t_per_cell % self.xi_stride:
            raise ValueError("strides must divide the samples per cell")


def _zak_base(f: SampledField, E: OrderedBasis, grid: ZakGrid, decay_tol: float, v_cells: int = 1):
    """Zak values from the defining sum on ``[0,1) x [0, v_cells)`` (E-coordinates)."""
    axes, vals = basis_samples(f, E)
    ax = axes[0]
    n_src, _ = _cell_layout(ax)
    if n_src % grid.x_per_cell:
        raise ValueError(f"source grid ({n_src} per cell) is not a multiple of x_per_cell={grid.x_per_cell}")
    stride = n_src // grid.x_per_cell
    cells, cell_lo, per_cell, rel, _ = _zak_source(f, E, decay_tol, 8)
    cells = cells[:, ::stride]
    v = np.arange(grid.t_per_cell * v_cells) / grid.t_per_cell
    base = _zak_sum(cells, cell_lo, [v], [0])  # (x_per_cell, t_per_cell * v_cells)
    return base, rel


def _extend_x(base: np.ndarray, k_lo: int, k_hi: int, t_per_cell: int) -> np.ndarray:
    """Quasi-periodic extension in x over cells ``k_lo..k_hi - 1``, shape (S, columns of base)."""
    v = np.arange(base.shape[1]) / t_per_cell
    ks = np.arange(k_lo, k_hi)
    ext = np.exp(2j * np.pi * np.multiply.outer(ks, v))[:, None, :] * base[None, :, :]
    return ext.reshape(-1, base.shape[1])


def _fft_length(samples: int, spacing_step: float | None, sample_step: float, multiple_of: int = 1) -> int:
    """Transform length: at least ``samples``; matches a requested frequency step if given."""
    if spacing_step is None:
        length = 1 << max(0, (samples - 1).bit_length())
    else:
        length = int(round(TWO_PI / (spacing_step * sample_step)))
    length = -(-length // multiple_of) * multiple_of
    while length < samples:
        length += multiple_of
    return length


def _window_cells(phi: Window, cell: float) -> int:
    return int(math.ceil((phi.support_radius() + abs(phi.center[0])) / cell)) + 1


def partial_stft_zak(
    f: SampledField,
    E: OrderedBasis | None,
    phi: Window,
    which: int,
    grid: ZakGrid = ZakGrid(),
    decay_tol: float = 1e-12,
) -> SampledField:
    """STFT of the Zak transform in one of its two variables (d = 1).

    ``which=1`` transforms ``x -> Zf(x, xi)`` and returns axes
    ``(x, xi, eta)``; ``which=2`` transforms ``xi -> Zf(x, xi)`` and returns
    axes ``(x, xi, y)``. The transformed variable is integrated over the
    quasi-periodic extension of the fundamental cell. Axes are in standard
    coordinates.
    """
    E = as_basis(E, f.ndim)
    a = _scalar_basis(E)
    ap = TWO_PI / a
    phi = phi.for_dim(1)
    if which not in (1, 2):
        raise ValueError(f"which must be 1 or 2, got {which}")
    base, rel = _zak_base(f, E, grid, decay_tol, grid.xi_cells if which == 1 else 1)
    ns, nt = grid.x_per_cell, grid.t_per_cell
    ds, dt = abs(a) / ns, abs(ap) / nt
    norm = TWO_PI ** -0.5
    if which == 1:
        R = _window_cells(phi, abs(a))
        k_lo, k_hi = -R, grid.x_cells + R
        ext = _extend_x(base, k_lo, k_hi, nt)[:, :: grid.xi_stride]  # (S, Q)
        s = a * (k_lo + np.arange(ext.shape[0]) / ns)
        x_out = a * np.arange(0, ns * grid.x_cells, grid.x_stride) / ns
        L = _fft_length(len(s), grid.eta_step, ds)
        out = []
        for x in x_out:
            g = ext * np.conj(phi(s - x))[:, None]
            spec, eta_ax = centered_dft(g, 0, s[0], ds, L, grid.n_eta)
            out.append(spec.T)
        vals = np.array(out) * norm
        axes = (
            Axis(0.0, a * grid.x_stride / ns, len(x_out)),
            Axis(0.0, ap * grid.xi_stride / nt, ext.shape[1]),
            eta_ax,
        )
        return SampledField(axes, vals, None, {"transform": "partial_stft_zak", "which": 1, "boundary_mass": rel})
    if which == 2:
        R = _window_cells(phi, abs(ap))
        l_lo, l_hi = -R, grid.xi_cells + R
        t_idx = np.arange(l_lo * nt, l_hi * nt)
        t = ap * t_idx / nt
        xi_idx = np.arange(0, nt * grid.xi_cells, grid.xi_stride)
        x_out = np.arange(0, ns * grid.x_cells, grid.x_stride)
        L = _fft_length(len(t), grid.y_step, dt, multiple_of=nt)
        # Zak samples along t for every output x (quasi-periodic in x, periodic in t)
        zx = []
        for ix in x_out:
            k, i = divmod(ix, ns)
            zx.append(base[i, t_idx % nt] * np.exp(2j * np.pi * k * (t_idx / nt)))
        zx = np.array(zx)  # (X, T)
        rows = []
        for xi_i in xi_idx:
            win = np.conj(phi(t - ap * xi_i / nt))
            spec, y_ax = centered_dft(zx * win, 1, t[0], dt, L, grid.n_y)
            rows.append(spec)
        vals = np.transpose(np.array(rows), (1, 0, 2)) * norm
        axes = (Axis(0.0, a * grid.x_stride / ns, len(x_out)), Axis(0.0, ap * grid.xi_stride / nt, len(xi_idx)), y_ax)
        return SampledField(axes, vals, None, {"transform": "partial_stft_zak", "which": 2, "boundary_mass": rel})


@dataclass(frozen=True)
class StftZakPlan:
    """Precomputed pieces for the four-variable STFT of a Zak transform."""

    a: float
    grid: ZakGrid
    zst: np.ndarray  # (T, S) Zak samples on the extended (t, s) grid
    s: np.ndarray
    t: np.ndarray
    x_out: np.ndarray
    xi_out: np.ndarray
    L_s: int
    L_t: int
    boundary_mass: float


def plan_stft_of_zak(f: SampledField, E: OrderedBasis | None, Phi: Window, grid: ZakGrid = ZakGrid(), decay_tol: float = 1e-12) -> StftZakPlan:
    E = as_basis(E, f.ndim)
    a = _scalar_basis(E)
    ap = TWO_PI / a
    if Phi.dim != 2 and not (Phi.dim == 1 and Phi.center == (0.0,) and Phi.modulation == (0.0,)):
        raise ValueError("the phase-space window must be two-dimensional")
    base, rel = _zak_base(f, E, grid, decay_tol)
    ns, nt = grid.x_per_cell, grid.t_per_cell
    win = Phi.for_dim(2)
    w1 = Window(win.width, (win.center[0],), (win.modulation[0],))
    w2 = Window(win.width, (win.center[1],), (win.modulation[1],))
    Rx = _window_cells(w1, abs(a))
    Rt = _window_cells(w2, abs(ap))
    k_lo, k_hi = -Rx, grid.x_cells + Rx
    l_lo, l_hi = -Rt, grid.xi_cells + Rt
    ext = _extend_x(base, k_lo, k_hi, nt)  # (S, nt), periodic in t
    t_idx = np.arange(l_lo * nt, l_hi * nt)
    zst = np.ascontiguousarray(ext[:, t_idx % nt].T)  # (T, S)
    s = a * (k_lo * ns + np.arange(ext.shape[0])) / ns
    t = ap * t_idx / nt
    x_out = a * np.arange(0, ns * grid.x_cells, grid.x_stride) / ns
    xi_out = ap * np.arange(0, nt * grid.xi_cells, grid.xi_stride) / nt
    L_s = _fft_length(len(s), grid.eta_step, abs(a) / ns)
    L_t = _fft_length(len(t), grid.y_step, abs(ap) / nt, multiple_of=nt)
    return StftZakPlan(a, grid, zst, s, t, x_out, xi_out, L_s, L_t, rel)


def iter_stft_of_zak(plan: StftZakPlan, Phi: Window) -> Iterator[tuple[int, np.ndarray, Axis, Axis]]:
    """Yield ``(ix, V[ix], eta_axis, y_axis)`` one x-slice at a time; ``V[ix]`` has axes (xi, eta, y)."""
    win = Phi.for_dim(2)
    w1 = Window(win.width, (win.center[0],), (win.modulation[0],))
    w2 = Window(win.width, (win.center[1],), (win.modulation[1],))
    g = plan.grid
    ds = abs(plan.a) / g.x_per_cell
    dt = abs(TWO_PI / plan.a) / g.t_per_cell
    win_t = np.conj(w2(plan.t[None, :] - plan.xi_out[:, None]))  # (Q, T)
    for ix, x in enumerate(plan.x_out):
        h = plan.zst * np.conj(w1(plan.s - x))[None, :]
        w1t, eta_ax = centered_dft(h, 1, plan.s[0], ds, plan.L_s, g.n_eta)  # (T, n_eta)
        prod = win_t[:, :, None] * w1t[None, :, :]  # (Q, T, n_eta)
        v, y_ax = centered_dft(prod, 1, plan.t[0], dt, plan.L_t, g.n_y)  # (Q, n_y, n_eta)
        yield ix, np.swapaxes(v, 1, 2) / TWO_PI, eta_ax, y_ax


def stft_of_zak(
    f: SampledField,
    E: OrderedBasis | None,
    Phi: Window,
    grid: ZakGrid = ZakGrid(x_per_cell=32, t_per_cell=64, xi_stride=2),
    decay_tol: float = 1e-12,
) -> SampledField:
    """Full STFT of the quasi-periodically extended Zak transform (d = 1).

    Returns a field with axes ``(x, xi, eta, y)``, x and xi restricted to
    ``x_cells`` lattice cells and ``xi_cells`` dual cells. The default grid
    is 32 x 32 x 64 x 64.
    """
    if f.ndim != 1:
        raise ValueError(f"unsupported dimension {f.ndim}: stft_of_zak is implemented for d = 1")
    plan = plan_stft_of_zak(f, E, Phi, grid, decay_tol)
    out = np.empty((len(plan.x_out), len(plan.xi_out), grid.n_eta, grid.n_y), dtype=complex)
    eta_ax = y_ax = None
    for ix, v, eta_ax, y_ax in iter_stft_of_zak(plan, Phi):
        out[ix] = v
    a, ap = plan.a, TWO_PI / plan.a
    axes = (
        Axis(0.0, a * grid.x_stride / grid.x_per_cell, len(plan.x_out)),
        Axis(0.0, ap * grid.xi_stride / grid.t_per_cell, len(plan.xi_out)),
        eta_ax,
        y_ax,
    )
    meta = {
        "transform": "stft_of_zak",
        "basis": [[a]],
        "window": Phi.to_dict(),
        "x_shift_steps": grid.x_per_cell // grid.x_stride,
        "xi_shift_steps": grid.t_per_cell // grid.xi_stride,
        "boundary_mass": plan.boundary_mass,
    }
    return SampledField(axes, out, None, meta)


# ---------------------------------------------------------------------------
# periodic functions


@dataclass(frozen=True, eq=False)
class FourierCoefficients:
    """Coefficients ``c(f, alpha)`` for ``alpha = T_E' m``, ``m`` in ``[-K, K]^d``."""

    basis: OrderedBasis
    table: np.ndarray  # shape (2K+1,)*d, index m + K
    cutoff: int

    def __getitem__(self, m) -> complex:
        m = np.atleast_1d(m)
        if np.any(np.abs(m) > self.cutoff):
            return 0j
        return complex(self.table[tuple(m + self.cutoff)])

    def items(self):
        K = self.cutoff
        for idx in np.ndindex(*self.table.shape):
            yield tuple(int(i - K) for i in idx), complex(self.table[idx])

    def indices(self) -> np.ndarray:
        K = self.cutoff
        grids = np.meshgrid(*[np.arange(-K, K + 1)] * self.basis.dim, indexing="ij")
        return np.stack(grids, -1).reshape(-1, self.basis.dim)

    def frequencies(self) -> np.ndarray:
        """Standard-coordinate frequencies ``alpha`` for every table entry."""
        return dual_basis(self.basis).from_coords(self.indices().astype(float))

    def scaled(self, lam: complex) -> "FourierCoefficients":
        return FourierCoefficients(self.basis, self.table * lam, self.cutoff)

    @classmethod
    def from_dict(cls, basis: OrderedBasis, coeffs: dict, cutoff: int | None = None) -> "FourierCoefficients":
        d = basis.dim
        keys = [np.atleast_1d(k) for k in coeffs]
        K = int(max(np.max(np.abs(k)) for k in keys)) if cutoff is None else int(cutoff)
        table = np.zeros((2 * K + 1,) * d, dtype=complex)
        for k, v in coeffs.items():
            table[tuple(np.atleast_1d(k) + K)] = v
        return cls(basis, table, K)


def fourier_coefficients(f: SampledField, E: OrderedBasis | None = None, cutoff: int = 8) -> FourierCoefficients:
    """Coefficients of an E-periodic function from samples covering a full cell.

    ``c(f, alpha) = |cell|^{-1} int_cell f(x) e^{-i<x,alpha>} dx`` over the
    first complete lattice cell of the grid, evaluated with one FFT per axis.
    """
    E = as_basis(E if E is not None else f.basis, f.ndim)
    axes, vals = basis_samples(f, E)
    sl = []
    ns = []
    for ax in axes:
        try:
            n, g0 = _cell_layout(ax)
        except ValueError as exc:
            raise ValueError(f"grid does not tile the cell evenly: {exc}") from None
        first = (-g0) % n
        if first + n > ax.count:
            raise ValueError("the grid does not contain a complete period cell")
        sl.append(slice(first, first + n))
        ns.append(n)
    cell = vals[tuple(sl)]
    if any(2 * cutoff >= n for n in ns):
        raise ValueError(f"cutoff {cutoff} needs more than {2 * cutoff} samples per cell")
    spec = np.fft.fftn(cell) / math.prod(ns)
    idx = np.arange(-cutoff, cutoff + 1)
    table = spec[np.ix_(*[idx % n for n in ns])]
    return FourierCoefficients(E, table, cutoff)


def synthesize_periodic(c: FourierCoefficients, box, step, basis_coords: bool = False) -> SampledField:
    """Evaluate ``sum c(f, alpha) e^{i<x,alpha>}`` on a grid.

    With ``basis_coords`` the box and step are in E-coordinates and the
    field is returned in that basis.
    """
    from .fields import sample

    m = c.indices()
    coef = c.table.reshape(-1)
    keep = coef != 0
    m, coef = m[keep], coef[keep]
    if basis_coords:
        freqs = TWO_PI * m.astype(float)
    else:
        freqs = dual_basis(c.basis).from_coords(m.astype(float))

    def expr(*x):
        total = np.zeros(np.broadcast(*x).shape, dtype=complex)
        for ck, fk in zip(coef, freqs):
            total = total + ck * np.exp(1j * sum(fk[a] * x[a] for a in range(len(x))))
        return total

    fld = sample(expr, box, step)
    return SampledField(fld.axes, fld.values, c.basis if basis_coords else None, {"transform": "synthesize_periodic"})


# ---------------------------------------------------------------------------
# semi-discrete convolution


def semidiscrete_convolve(a: LatticeSequence, f: SampledField, E: OrderedBasis | None = None) -> SampledField:
    """``(a * f)(x) = sum_j a(j) f(x - j)`` over the lattice points ``j`` of ``a``.

    Lattice shifts must be whole numbers of grid steps. Torus axes wrap;
    on line axes the output keeps only points where every shift stays in
    the box.
    """
    E = as_basis(E if E is not None else a.basis, f.ndim)
    if not a.basis.allclose(E):
        raise ValueError("sequence and convolution basis differ")
    d = f.ndim
    if f.basis is not None:
        if not f.basis.allclose(E):
            raise ValueError("field is sampled in a different basis")
        unit = [1.0 / ax.step for ax in f.axes]
        shifts = a.points * np.array(unit)
    else:
        if not E.is_diagonal:
            raise ValueError("non-diagonal basis: sample the field in basis coordinates")
        shifts = a.points * (np.diag(E.matrix) / np.array(f.steps))
    if not np.all(np.abs(shifts - np.round(shifts)) <= 1e-9 * np.maximum(1.0, np.abs(shifts))):
        raise ValueError("lattice shifts are not whole multiples of the grid step")
    shifts = np.round(shifts).astype(int)
    lo = np.zeros(d, dtype=int)
    hi = np.array(f.shape)
    for k, ax in enumerate(f.axes):
        if ax.kind == "line" and len(shifts):
            lo[k] = max(0, shifts[:, k].max())
            hi[k] = min(ax.count, ax.count + shifts[:, k].min())
    if np.any(hi <= lo):
        raise ValueError("empty output box: the field's box is too small for the sequence support")
    out = np.zeros(tuple(hi - lo), dtype=complex)
    for s, val in zip(shifts, a.values):
        if val == 0:
            continue
        g = f.values
        sl = []
        for k, ax in enumerate(f.axes):
            if ax.kind == "torus":
                g = np.roll(g, s[k], axis=k)
                sl.append(slice(None))
            else:
                sl.append(slice(lo[k] - s[k], hi[k] - s[k]))
        out += val * g[tuple(sl)]
    axes = tuple(
        ax if ax.kind == "torus" else Axis(ax.origin + lo[k] * ax.step, ax.step, int(hi[k] - lo[k]))
        for k, ax in enumerate(f.axes)
    )
    return SampledField(axes, out, f.basis, {"transform": "semidiscrete_convolve"})
