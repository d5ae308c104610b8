"""Wigner functions of transverse packets and their negativity.

n(r, p) = integral d^d k / (2 pi)^d exp(i k.r) psi(p + k/2) conj(psi(p - k/2))

The k-integral is a trapezoid sum on the grid dual to the r-grid (spacing
2 pi / (pad * N_r * dr), range +-pi / dr), evaluated with one inverse FFT per
momentum slice.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import packets as pk
from .errors import AliasingDetected, GridTooCoarse, InvalidParameter
from .quadrature import adaptive_box_integrate, reproducible_sum

NORM_TOL = 1e-3
ALIAS_TOL = 1e-6
NEGATIVITY_THRESHOLD = 0.01


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """Isotropic phase-space grid; every transverse axis uses the same ranges.

    Axes are half-open: r_m = r_min + m (r_max - r_min) / N_r, m = 0 .. N_r - 1,
    so a symmetric range contains the origin.
    """
    dim: int
    r_min: float
    r_max: float
    n_r: int
    p_min: float
    p_max: float
    n_p: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise InvalidParameter(f"grid dim must be 1 or 2, got {self.dim}")
        for name in ("n_r", "n_p"):
            n = getattr(self, name)
            if n < 16 or n & (n - 1):
                raise InvalidParameter(f"{name} must be a power of two >= 16, got {n}")
        for lo, hi, name in ((self.r_min, self.r_max, "r"), (self.p_min, self.p_max, "p")):
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise InvalidParameter(f"{name} range must be finite with min < max")

    @property
    def r(self) -> np.ndarray:
        return self.r_min + self.dr * np.arange(self.n_r)

    @property
    def p(self) -> np.ndarray:
        return self.p_min + self.dp * np.arange(self.n_p)

    @property
    def dr(self) -> float:
        return (self.r_max - self.r_min) / self.n_r

    @property
    def dp(self) -> float:
        return (self.p_max - self.p_min) / self.n_p

    @property
    def cell_volume(self) -> float:
        return (self.dr * self.dp) ** self.dim

    @property
    def shape(self) -> tuple:
        return (self.n_r,) * self.dim + (self.n_p,) * self.dim


@dataclass
class WignerGrid:
    grid: PhaseSpaceGrid
    values: np.ndarray
    imag_residual: float
    metadata: dict = field(default_factory=dict)

    @property
    def normalization(self) -> float:
        return math.fsum(self.values.ravel()) * self.grid.cell_volume

    @property
    def peak(self) -> float:
        return float(np.max(np.abs(self.values)))


def _check_coverage(packet, grid: PhaseSpaceGrid):
    lo, hi = pk.support_box(packet, widths=3.0)
    if np.any(lo < grid.p_min) or np.any(hi > grid.p_max):
        raise InvalidParameter(
            f"momentum range [{grid.p_min}, {grid.p_max}] does not cover the packet's "
            f"+-3 sigma support [{lo}, {hi}]")


def wigner_transform(packet, grid: PhaseSpaceGrid, pad: int = 2,
                     threads: Optional[int] = None, check: bool = True) -> WignerGrid:
    """Sample the Wigner function of ``packet`` on ``grid``.

    Raises GridTooCoarse when the sampled surface does not integrate to 1
    within 1e-3 and AliasingDetected when the boundary carries more than
    1e-6 of the peak.
    """
    if packet.dim != grid.dim:
        raise InvalidParameter("packet and grid dimensions differ")
    if pad < 2:
        raise InvalidParameter("zero-padding factor must be at least 2")
    _check_coverage(packet, grid)
    n_k = pad * grid.n_r
    dk = 2 * math.pi / (n_k * grid.dr)
    # n_k + 1 points from -pi/dr to +pi/dr; the endpoints get weight 1/2 and
    # the +pi/dr column is folded onto -pi/dr (same FFT kernel), which keeps
    # the k-sum symmetric so the result is real up to rounding
    k = (np.arange(n_k + 1) - n_k // 2) * dk
    wk = np.ones(n_k + 1)
    wk[0] = wk[-1] = 0.5
    kern = wk * np.exp(1j * k * grid.r_min)
    sign = (-1.0) ** np.arange(grid.n_r)
    scale = (dk / (2 * math.pi)) * n_k
    p_axis = grid.p

    if grid.dim == 1:
        def slab(p_vals):
            f = pk.density(packet, p_vals[:, None, None], k[None, :, None]) * kern
            f[:, 0] += f[:, -1]
            out = np.fft.ifft(f[:, :n_k], axis=1)[:, :grid.n_r] * (scale * sign)
            return out.T  # (n_r, n_p_chunk)
        chunks = np.array_split(p_axis, max(1, grid.n_p // 64))
        full = np.concatenate(_map(slab, chunks, threads), axis=1)
    else:
        KX, KY = np.meshgrid(k, k, indexing="ij")
        kk = np.stack([KX, KY], axis=-1)
        kern2 = kern[:, None] * kern[None, :]
        sign2 = (scale * sign)[:, None] * (scale * sign)[None, :]

        def slab(px):
            pts = np.stack([np.full(grid.n_p, px), p_axis], axis=-1)[:, None, None, :]
            f = pk.density(packet, pts, kk[None]) * kern2
            f[:, 0, :] += f[:, -1, :]
            f[:, :, 0] += f[:, :, -1]
            out = np.fft.ifft2(f[:, :n_k, :n_k], axes=(1, 2))[:, :grid.n_r, :grid.n_r]
            return np.moveaxis(out * sign2, 0, -1)  # (n_r, n_r, n_py)

        full = np.stack(_map(slab, list(p_axis), threads), axis=-2)  # (rx, ry, px, py)

    values = np.ascontiguousarray(full.real)
    resid = float(np.max(np.abs(full.imag)))
    w = WignerGrid(grid, values, resid, metadata={"packet": packet.describe(), "pad": pad,
                                                  "imag_residual": resid})
    if check:
        _diagnose(w)
    return w


def _map(fn, items, threads):
    if threads is None or threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def _diagnose(w: WignerGrid):
    norm = w.normalization
    w.metadata["normalization"] = norm
    if abs(norm - 1.0) > NORM_TOL:
        raise GridTooCoarse(f"Wigner normalization {norm:.6g} deviates from 1 by more than {NORM_TOL}")
    peak = w.peak
    edge = _boundary_max(w.values)
    w.metadata["boundary_ratio"] = edge / peak
    if edge > ALIAS_TOL * peak:
        raise AliasingDetected(f"boundary |n| = {edge:.3e} exceeds {ALIAS_TOL} x peak {peak:.3e}")


def _boundary_max(values: np.ndarray) -> float:
    m = 0.0
    for ax in range(values.ndim):
        m = max(m, float(np.max(np.abs(np.take(values, [0, -1], axis=ax)))))
    return m


def wigner_point(packet, r, p, rtol: float = 1e-10) -> float:
    """Direct quadrature of the Wigner integral at one phase-space point.

    Slow reference evaluation, independent of the FFT path.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    p = np.atleast_1d(np.asarray(p, dtype=float))
    lo, hi = pk.support_box(packet)
    reach = 2 * np.maximum(np.abs(hi - p), np.abs(p - lo))

    def f(kpts):
        vals = pk.density(packet, np.broadcast_to(p, kpts.shape), kpts)
        return vals * np.exp(1j * (kpts @ r))

    val, _ = adaptive_box_integrate(f, -reach, reach, rtol=rtol, atol=1e-15, order=32)
    return float(np.real(val)) / (2 * math.pi) ** packet.dim


def negativity_volume(w: WignerGrid) -> float:
    """Integrated negative part: sum of max(0, -n) times the cell volume."""
    neg = np.maximum(0.0, -w.values)
    return math.fsum(neg.ravel()) * w.grid.cell_volume


def marginals(w: WignerGrid):
    """(momentum density on the p-grid, position density on the r-grid)."""
    d = w.grid.dim
    r_axes = tuple(range(d))
    p_axes = tuple(range(d, 2 * d))
    mom = w.values.sum(axis=r_axes) * w.grid.dr ** d
    pos = w.values.sum(axis=p_axes) * w.grid.dp ** d
    return mom, pos


def position_density(packet, x) -> np.ndarray:
    """|psi(x)|^2 with psi(x) = (2 pi)^(-d/2) integral dp exp(i p.x) psi(p), by quadrature."""
    x = np.atleast_2d(np.asarray(x, dtype=float).reshape(-1, packet.dim))
    lo, hi = pk.support_box(packet)
    out = np.empty(x.shape[0])
    for i, xi in enumerate(x):
        val, _ = adaptive_box_integrate(
            lambda pts: pk.amplitude(packet, pts) * np.exp(1j * (pts @ xi)), lo, hi,
            rtol=1e-10, atol=1e-15, order=32)
        out[i] = abs(val) ** 2 / (2 * math.pi) ** packet.dim
    return out


def translate(w: WignerGrid, cells: Sequence[int]) -> np.ndarray:
    """Values shifted by an integer number of r-cells per axis (vacated cells are NaN)."""
    out = np.full_like(w.values, np.nan)
    src = [slice(None)] * w.values.ndim
    dst = [slice(None)] * w.values.ndim
    for ax, c in enumerate(cells):
        n = w.values.shape[ax]
        if c >= 0:
            src[ax], dst[ax] = slice(0, n - c), slice(c, n)
        else:
            src[ax], dst[ax] = slice(-c, n), slice(0, n + c)
    out[tuple(dst)] = w.values[tuple(src)]
    return out


@dataclass(frozen=True)
class NegativityScan:
    separations: np.ndarray  # in units of sigma_x
    negativity: np.ndarray
    threshold: float
    onset: Optional[float]  # smallest d / sigma_x above threshold, None if never

    def rows(self):
        return list(zip(self.separations.tolist(), self.negativity.tolist()))


def negativity_scale(separations, sigma: float = 1.0, grid: Optional[PhaseSpaceGrid] = None,
                     threshold: float = NEGATIVITY_THRESHOLD, threads: Optional[int] = None,
                     dim: int = 1) -> NegativityScan:
    """Negativity volume of equal-weight cats versus their separation.

    ``separations`` are in units of sigma_x = 1 / sigma and must be sorted.
    """
    d = np.asarray(separations, dtype=float)
    if np.any(np.diff(d) < 0):
        raise InvalidParameter("separations must be monotone non-decreasing")
    sigma_x = 1.0 / sigma
    if grid is None:
        half_r = (0.5 * d.max() + 8.0) * sigma_x
        grid = PhaseSpaceGrid(dim, -half_r, half_r, 256 if dim == 1 else 32,
                              -8 * sigma, 8 * sigma, 256 if dim == 1 else 32)
    neg = np.empty(d.size)
    for i, sep in enumerate(d):
        packet = pk.cat(sep * sigma_x, dim=dim, sigma=sigma)
        neg[i] = negativity_volume(wigner_transform(packet, grid, threads=threads))
    above = np.nonzero(neg > threshold)[0]
    onset = float(d[above[0]]) if above.size else None
    return NegativityScan(d, neg, threshold, onset)


CSV_HEADER = "# dim,Nr,Np,rmin,rmax,pmin,pmax"


def write_csv(w: WignerGrid, path) -> None:
    """Export with round-trip float formatting; see ``read_csv``."""
    g = w.grid
    lines = [CSV_HEADER,
             "# " + ",".join([str(g.dim), str(g.n_r), str(g.n_p)]
                             + [repr(float(x)) for x in (g.r_min, g.r_max, g.p_min, g.p_max)])]
    r, p = g.r, g.p
    if g.dim == 1:
        for i, ri in enumerate(r):
            rr = repr(float(ri))
            for j, pj in enumerate(p):
                lines.append(f"{rr},{float(pj)!r},{float(w.values[i, j])!r}")
    else:
        for ix in range(g.n_r):
            for iy in range(g.n_r):
                head = f"{float(r[ix])!r},{float(r[iy])!r}"
                for jx in range(g.n_p):
                    for jy in range(g.n_p):
                        lines.append(f"{head},{float(p[jx])!r},{float(p[jy])!r},"
                                     f"{float(w.values[ix, iy, jx, jy])!r}")
    text = "\n".join(lines) + "\n"
    with open(path, "w", encoding="ascii") as fh:
        fh.write(text)


def read_csv(path) -> WignerGrid:
    with open(path, encoding="ascii") as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"not a Wigner CSV export: {header!r}")
        meta = fh.readline().lstrip("#").strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    dim, n_r, n_p = (int(x) for x in meta[:3])
    r_min, r_max, p_min, p_max = (float(x) for x in meta[3:])
    grid = PhaseSpaceGrid(dim, r_min, r_max, n_r, p_min, p_max, n_p)
    values = data[:, -1].reshape(grid.shape)
    return WignerGrid(grid, values, imag_residual=float("nan"))
