"""Transverse momentum-space wave packets.

A packet is a normalized amplitude psi(p) over the d-dimensional transverse
momentum plane (d = 1 or 2). Position offsets enter as the phase
exp(-i b.p), so the position operator is x = i d/dp.

Kinds
-----
gaussian
    prod_j (pi sigma_j^2)^(-1/4) exp(-(p_j - mu_j)^2 / (2 sigma_j^2)).
airy
    Gaussian envelope times the cubic phase exp(i sum_j (xi_j (p_j - mu_j))^3 / 3).
vortex
    Ring-Gaussian exp(i l phi) exp(-(|p - mu| - kappa)^2 / (2 sigma^2)), 2D only.
cat
    Normalized superposition of displaced Gaussian components.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidParameter, NormalizationFailure, QuadratureNonConvergence
from .quadrature import adaptive_box_integrate, adaptive_integrate, gauss_legendre, weighted_sum

KINDS = ("gaussian", "vortex", "airy", "cat")
NORM_TOL = 1e-6
SUPPORT_WIDTHS = 10.0


@dataclass(frozen=True)
class WavePacket:
    kind: str
    dim: int
    mean_p: tuple
    sigma: tuple
    shift_b: tuple
    kappa: float = 0.0
    ell: int = 0
    xi: tuple = ()
    components: tuple = ()
    norm_const: float = 1.0
    # squared norm of the unnormalized amplitude (vortex, cat); 1 otherwise
    raw_norm_sq: float = 1.0
    label: str = field(default="", compare=False)

    def __repr__(self) -> str:
        extra = ""
        if self.kind == "vortex":
            extra = f", kappa={self.kappa}, ell={self.ell}"
        elif self.kind == "airy":
            extra = f", xi={self.xi}"
        elif self.kind == "cat":
            extra = f", n_components={len(self.components)}"
        return (f"WavePacket({self.kind}, dim={self.dim}, mean_p={self.mean_p}, "
                f"sigma={self.sigma}, shift_b={self.shift_b}{extra})")

    def describe(self) -> dict:
        out = {"kind": self.kind, "dim": self.dim, "mean_p": list(self.mean_p),
               "sigma": list(self.sigma), "shift_b": list(self.shift_b)}
        if self.kind == "vortex":
            out.update(kappa=self.kappa, ell=self.ell)
        if self.kind == "airy":
            out["xi"] = list(self.xi)
        if self.kind == "cat":
            out["components"] = [
                {"weight": [w.real, w.imag], "packet": c.describe()} for w, c in self.components]
        return out


def _vec(value, dim: int, name: str, default: float = 0.0) -> tuple:
    if value is None:
        return (float(default),) * dim
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.size == 1:
        arr = np.repeat(arr, dim)
    if arr.size != dim:
        raise InvalidParameter(f"{name} must have {dim} components, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise InvalidParameter(f"{name} must be finite")
    return tuple(float(x) for x in arr)


def _as_points(p, dim: int) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if dim == 1 and (p.ndim == 0 or p.shape[-1] != 1):
        p = p[..., None]
    if p.shape[-1] != dim:
        raise InvalidParameter(f"momentum points need trailing dimension {dim}, got {p.shape}")
    return p


def make_packet(kind: str, dim: int = 1, sigma=1.0, mean_p=None, shift_b=None, *,
                kappa: float = 0.0, ell: int = 0, xi=None, components=None,
                weights=None, label: str = "") -> WavePacket:
    """Build a normalized packet.

    ``components`` (cat only) is a sequence of gaussian packets and
    ``weights`` the matching complex amplitudes. Identical components are
    merged; a cat left with a single component is returned as that Gaussian.
    """
    if kind not in KINDS:
        raise InvalidParameter(f"unknown packet kind {kind!r}; expected one of {KINDS}")
    if kind == "cat":
        return _make_cat(components, weights, shift_b, label)
    if dim not in (1, 2):
        raise InvalidParameter(f"dim must be 1 or 2, got {dim}")
    sig = _vec(sigma, dim, "sigma")
    if any(s <= 0 for s in sig):
        raise InvalidParameter(f"sigma must be positive, got {sig}")
    mu = _vec(mean_p, dim, "mean_p")
    b = _vec(shift_b, dim, "shift_b")
    if kind == "gaussian":
        norm = float(np.prod([(math.pi * s * s) ** -0.25 for s in sig]))
        return WavePacket("gaussian", dim, mu, sig, b, norm_const=norm, label=label)
    if kind == "airy":
        xi_v = _vec(xi if xi is not None else 0.0, dim, "xi")
        norm = float(np.prod([(math.pi * s * s) ** -0.25 for s in sig]))
        return WavePacket("airy", dim, mu, sig, b, xi=xi_v, norm_const=norm, label=label)
    # vortex
    if dim != 2:
        raise InvalidParameter("vortex requires dim=2")
    if float(ell) != int(ell):
        raise InvalidParameter(f"ell must be an integer, got {ell}")
    if kappa < 0:
        raise InvalidParameter(f"kappa must be non-negative, got {kappa}")
    if sig[0] != sig[1]:
        raise InvalidParameter("vortex packets need an isotropic width")
    raw = _vortex_raw_norm_sq(float(kappa), sig[0])
    return WavePacket("vortex", 2, mu, sig, b, kappa=float(kappa), ell=int(ell),
                      norm_const=1.0 / math.sqrt(raw), raw_norm_sq=raw, label=label)


def _vortex_raw_norm_sq(kappa: float, sigma: float) -> float:
    # angular integral is exactly 2 pi; radial part by adaptive quadrature
    upper = kappa + SUPPORT_WIDTHS * sigma
    val, err = adaptive_integrate(
        lambda r: 2 * math.pi * r * np.exp(-((r - kappa) / sigma) ** 2), 0.0, upper,
        rtol=1e-12)
    if err > 1e-3 * abs(val):
        raise NormalizationFailure(f"vortex radial norm unstable (err {err:.2e})")
    return val


def _make_cat(components, weights, shift_b, label) -> WavePacket:
    if not components or len(components) < 2:
        raise InvalidParameter("cat needs at least two components")
    if weights is None:
        weights = [1.0] * len(components)
    if len(weights) != len(components):
        raise InvalidParameter("cat weights and components differ in length")
    weights = [complex(w) for w in weights]
    if all(w == 0 for w in weights):
        raise InvalidParameter("cat weights are all zero")
    dims = {c.dim for c in components}
    if len(dims) != 1:
        raise InvalidParameter("cat components must share one dimension")
    dim = dims.pop()
    if any(c.kind != "gaussian" for c in components):
        raise InvalidParameter("cat components must be gaussian packets")
    extra = _vec(shift_b, dim, "shift_b")
    merged: list = []
    for w, c in zip(weights, components):
        c = shifted(c, extra) if any(extra) else c
        for i, (w0, c0) in enumerate(merged):
            if (c0.mean_p, c0.sigma, c0.shift_b) == (c.mean_p, c.sigma, c.shift_b):
                merged[i] = (w0 + w, c0)
                break
        else:
            merged.append((w, c))
    merged = [(w, c) for w, c in merged if w != 0]
    if not merged:
        raise InvalidParameter("cat components cancel exactly")
    if len(merged) == 1:
        return merged[0][1]
    raw = _cat_raw_norm_sq(merged, dim)
    first = merged[0][1]
    return WavePacket("cat", dim, first.mean_p, first.sigma, (0.0,) * dim,
                      components=tuple(merged), norm_const=1.0 / math.sqrt(raw),
                      raw_norm_sq=raw, label=label)


def _cat_raw_norm_sq(merged, dim: int) -> float:
    lo, hi = _support_box_of(merged, dim)

    def integrand(pts):
        acc = np.zeros(pts.shape[0], dtype=complex)
        for w, c in merged:
            acc += w * amplitude(c, pts)
        return np.abs(acc) ** 2

    val, err = adaptive_box_integrate(integrand, lo, hi, rtol=1e-12, atol=1e-15)
    val = float(np.real(val))
    if val <= 0 or err > 1e-3 * val:
        raise NormalizationFailure(f"cat norm unstable: {val} +- {err}")
    return val


def _support_box_of(merged, dim, widths=SUPPORT_WIDTHS):
    lo = np.full(dim, np.inf)
    hi = np.full(dim, -np.inf)
    for _, c in merged:
        c_lo, c_hi = support_box(c, widths)
        lo = np.minimum(lo, c_lo)
        hi = np.maximum(hi, c_hi)
    return lo, hi


def gaussian(dim=1, sigma=1.0, mean_p=None, shift_b=None) -> WavePacket:
    return make_packet("gaussian", dim, sigma, mean_p, shift_b)


def vortex(ell: int, kappa: float = 0.0, sigma=1.0, mean_p=None, shift_b=None) -> WavePacket:
    return make_packet("vortex", 2, sigma, mean_p, shift_b, kappa=kappa, ell=ell)


def airy(xi, dim=1, sigma=1.0, mean_p=None, shift_b=None) -> WavePacket:
    return make_packet("airy", dim, sigma, mean_p, shift_b, xi=xi)


def cat(separation, dim=1, sigma=1.0, weights=(1.0, 1.0), axis=0, mean_p=None,
        shift_b=None) -> WavePacket:
    """Two displaced Gaussians at +-separation/2 along ``axis``."""
    offset = np.zeros(dim)
    offset[axis] = 0.5 * separation
    comps = [gaussian(dim, sigma, mean_p, offset), gaussian(dim, sigma, mean_p, -offset)]
    return make_packet("cat", dim, components=comps, weights=list(weights), shift_b=shift_b)


def shifted(packet: WavePacket, b) -> WavePacket:
    """Packet translated in position by ``b`` (extra phase exp(-i b.p))."""
    b = np.asarray(_vec(b, packet.dim, "b"))
    if packet.kind == "cat":
        comps = tuple((w, shifted(c, b)) for w, c in packet.components)
        return replace(packet, components=comps)
    new_b = tuple(float(x) for x in np.asarray(packet.shift_b) + b)
    return replace(packet, shift_b=new_b)


def rescaled(packet: WavePacket, factor: float) -> WavePacket:
    """Packet with every momentum scale multiplied by ``factor``.

    Lengths (shift, Airy scale, cat offsets) shrink by the same factor, so
    dimensionless products such as b * sigma are unchanged, and so is the
    normalization.
    """
    if factor <= 0:
        raise InvalidParameter("rescaling factor must be positive")

    def mom(v):
        return tuple(float(x) * factor for x in v)

    def length(v):
        return tuple(float(x) / factor for x in v)

    if packet.kind == "cat":
        comps = tuple((w, rescaled(c, factor)) for w, c in packet.components)
        return replace(packet, components=comps, mean_p=mom(packet.mean_p),
                       sigma=mom(packet.sigma))
    out = replace(packet, mean_p=mom(packet.mean_p), sigma=mom(packet.sigma),
                  shift_b=length(packet.shift_b), kappa=packet.kappa * factor,
                  xi=length(packet.xi))
    if packet.kind in ("gaussian", "airy"):
        norm = float(np.prod([(math.pi * s * s) ** -0.25 for s in out.sigma]))
        out = replace(out, norm_const=norm)
    elif packet.kind == "vortex":
        raw = packet.raw_norm_sq * factor ** 2
        out = replace(out, raw_norm_sq=raw, norm_const=1.0 / math.sqrt(raw))
    return out


def support_box(packet: WavePacket, widths: float = SUPPORT_WIDTHS):
    """Momentum box outside which |psi| is negligible."""
    mu = np.asarray(packet.mean_p)
    if packet.kind == "cat":
        return _support_box_of(packet.components, packet.dim, widths)
    sig = np.asarray(packet.sigma)
    half = packet.kappa + widths * sig if packet.kind == "vortex" else widths * sig
    return mu - half, mu + half


def momentum_scale(packet: WavePacket) -> float:
    """Mean per-axis momentum width (the sigma_p of the packet)."""
    if packet.kind == "cat":
        return float(np.mean([np.mean(c.sigma) for _, c in packet.components]))
    return float(np.mean(packet.sigma))


def amplitude(packet: WavePacket, p) -> np.ndarray:
    """Normalized psi(p); ``p`` has trailing dimension ``dim`` (optional for dim=1)."""
    pts = _as_points(p, packet.dim)
    if packet.kind == "cat":
        acc = np.zeros(pts.shape[:-1], dtype=complex)
        for w, c in packet.components:
            acc = acc + w * amplitude(c, pts)
        return packet.norm_const * acc
    mu = np.asarray(packet.mean_p)
    sig = np.asarray(packet.sigma)
    b = np.asarray(packet.shift_b)
    d = pts - mu
    phase = -(pts @ b)
    if packet.kind == "vortex":
        rho = np.hypot(d[..., 0], d[..., 1])
        env = np.exp(-0.5 * ((rho - packet.kappa) / sig[0]) ** 2)
        if packet.ell:
            phase = phase + packet.ell * np.arctan2(d[..., 1], d[..., 0])
    else:
        env = np.exp(-0.5 * np.sum((d / sig) ** 2, axis=-1))
        if packet.kind == "airy":
            phase = phase + np.sum((np.asarray(packet.xi) * d) ** 3, axis=-1) / 3.0
    return packet.norm_const * env * np.exp(1j * phase)


def gradient(packet: WavePacket, p) -> np.ndarray:
    """Analytic d psi / d p, shape (..., dim)."""
    pts = _as_points(p, packet.dim)
    if packet.kind == "cat":
        acc = np.zeros(pts.shape, dtype=complex)
        for w, c in packet.components:
            acc = acc + w * gradient(c, pts)
        return packet.norm_const * acc
    psi = amplitude(packet, pts)
    mu = np.asarray(packet.mean_p)
    sig = np.asarray(packet.sigma)
    d = pts - mu
    logd = -1j * np.broadcast_to(np.asarray(packet.shift_b), d.shape).astype(complex)
    if packet.kind == "vortex":
        rho = np.hypot(d[..., 0], d[..., 1])
        safe = np.where(rho > 0, rho, 1.0)
        radial = -(rho - packet.kappa) / sig[0] ** 2 / safe
        logd = logd + radial[..., None] * d
        if packet.ell:
            perp = np.stack([-d[..., 1], d[..., 0]], axis=-1)
            logd = logd + 1j * packet.ell * perp / (safe ** 2)[..., None]
    else:
        logd = logd - d / sig ** 2
        if packet.kind == "airy":
            logd = logd + 1j * np.asarray(packet.xi) ** 3 * d ** 2
    return psi[..., None] * logd


def density(packet: WavePacket, p, k) -> np.ndarray:
    """Two-point density matrix psi(p + k/2) conj(psi(p - k/2))."""
    p = _as_points(p, packet.dim)
    k = _as_points(k, packet.dim)
    return amplitude(packet, p + 0.5 * k) * np.conj(amplitude(packet, p - 0.5 * k))


def _polar_rule(center, radius, n_r: int, n_phi: int):
    r, wr = gauss_legendre(0.0, radius, 16, max(n_r // 16, 1))
    phi = 2 * math.pi * np.arange(n_phi) / n_phi
    R, PHI = np.meshgrid(r, phi, indexing="ij")
    pts = np.stack([center[0] + R * np.cos(PHI), center[1] + R * np.sin(PHI)], axis=-1)
    w = (wr[:, None] * R * (2 * math.pi / n_phi)).ravel()
    return pts.reshape(-1, 2), w


def integrate(f, packets: Sequence[WavePacket], rtol: float = 1e-10, atol: float = 1e-14):
    """Integrate ``f(points)`` over the union of the packets' momentum supports.

    2D integrals use a polar rule (Gauss-Legendre in radius, uniform in
    angle) about the mean of the packet centres, which integrates angular
    harmonics exactly.
    """
    dim = packets[0].dim
    boxes = [support_box(pk) for pk in packets]
    lo = np.min([b[0] for b in boxes], axis=0)
    hi = np.max([b[1] for b in boxes], axis=0)
    if dim == 1:
        return adaptive_box_integrate(f, lo, hi, rtol=rtol, atol=atol)
    center = np.mean([np.asarray(pk.mean_p) for pk in packets], axis=0)
    radius = float(np.max(np.hypot(*np.maximum(np.abs(lo - center), np.abs(hi - center)))))
    n_r, n_phi = 32, 32
    prev = None
    while n_r * n_phi <= 2 ** 20:
        pts, w = _polar_rule(center, radius, n_r, n_phi)
        val = weighted_sum(w, f(pts))
        if prev is not None:
            err = np.max(np.abs(val - prev))
            if err <= max(rtol * np.max(np.abs(val)), atol):
                return val, err
        prev = val
        n_r *= 2
        n_phi *= 2
    raise QuadratureNonConvergence("polar integral did not converge")


def norm(packet: WavePacket) -> float:
    val, _ = integrate(lambda pts: np.abs(amplitude(packet, pts)) ** 2, [packet])
    return float(np.real(val))


def overlap(a: WavePacket, b: WavePacket) -> complex:
    """<a|b> = integral of conj(psi_a) psi_b by quadrature."""
    if a.dim != b.dim:
        raise InvalidParameter("overlap needs packets of equal dimension")
    val, _ = integrate(lambda pts: np.conj(amplitude(a, pts)) * amplitude(b, pts), [a, b],
                       rtol=1e-10, atol=1e-13)
    return complex(val)


@dataclass(frozen=True)
class Moments:
    mean_p: np.ndarray
    cov_diag: np.ndarray
    mean_x: np.ndarray


def moments(packet: WavePacket) -> Moments:
    """Mean momentum, per-axis momentum variance and mean position.

    The mean position is the centroid of the Wigner function,
    integral of Re(conj(psi) i dpsi/dp) dp.
    """
    dim = packet.dim

    def stacked(pts):
        psi = amplitude(packet, pts)
        dens = np.abs(psi) ** 2
        loc_x = -np.imag(np.conj(psi)[..., None] * gradient(packet, pts))
        cols = [dens[..., None] * pts, dens[..., None] * pts ** 2, loc_x]
        return np.concatenate(cols, axis=-1)

    vals, _ = integrate(stacked, [packet], rtol=1e-9, atol=1e-13)
    vals = np.real(vals)
    mean = vals[:dim]
    var = vals[dim:2 * dim] - mean ** 2
    return Moments(mean, var, vals[2 * dim:])


def gaussian_components(packet: WavePacket):
    """Gaussian-mixture view: list of (amplitude coefficient, gaussian) or None.

    The coefficients include the packet's normalization, so
    psi = sum_j c_j g_j with each g_j a normalized Gaussian.
    """
    if packet.kind == "gaussian":
        return [(1.0 + 0j, packet)]
    if packet.kind == "cat":
        return [(packet.norm_const * w, c) for w, c in packet.components]
    return None


def angular_harmonics(packet: WavePacket, radius: float, n_phi: int = 256,
                      center=None) -> np.ndarray:
    """|c_l|^2 of psi on the circle |p - center| = radius, l = -n_phi/2 .. n_phi/2 - 1."""
    if packet.dim != 2:
        raise InvalidParameter("angular harmonics need a 2D packet")
    c = np.asarray(packet.mean_p if center is None else center, dtype=float)
    phi = 2 * math.pi * np.arange(n_phi) / n_phi
    pts = np.stack([c[0] + radius * np.cos(phi), c[1] + radius * np.sin(phi)], axis=-1)
    coeff = np.fft.fft(amplitude(packet, pts)) / n_phi
    power = np.abs(np.fft.fftshift(coeff)) ** 2
    return power / power.sum()


def check_normalized(packet: WavePacket, tol: float = NORM_TOL) -> float:
    n = norm(packet)
    if abs(n - 1.0) > tol:
        raise NormalizationFailure(f"packet norm {n} deviates from 1 by more than {tol}")
    return n
