"""Relative-coordinate state of two colliding packets.

With q1 = Q/2 + q and q2 = Q/2 - q the two-particle bilinear entering a
2 -> 2 rate (transverse momentum conserved, so k1 = -k2 = k) is

    rho_rel(q, k) = integral dQ rho_1(Q/2 + q, k) rho_2(Q/2 - q, -k),

and its Fourier transform over k is the relative-coordinate Wigner function.
Its momentum marginal is the density of the relative position x1 - x2,
N_rel(r) = integral dy P1(y) P2(y - r).
"""
from __future__ import annotations

import math
from itertools import product

import numpy as np

from . import packets as pk
from .errors import InvalidParameter, WignerGradientUnstable
from .quadrature import gauss_legendre

BOX_WIDTHS = 6.0


def _axis_packet(packet, axis: int):
    """1D gaussian/airy factor of a separable packet along ``axis``."""
    kw = dict(sigma=packet.sigma[axis], mean_p=packet.mean_p[axis], shift_b=packet.shift_b[axis])
    if packet.kind == "airy":
        return pk.make_packet("airy", 1, xi=packet.xi[axis], **kw)
    return pk.make_packet("gaussian", 1, **kw)


def axis_terms(packet):
    """Separable expansion psi = sum_j c_j prod_axis phi_j,axis, or None for vortices."""
    if packet.kind == "vortex":
        return None
    if packet.kind == "cat":
        return [(packet.norm_const * w, [_axis_packet(c, a) for a in range(c.dim)])
                for w, c in packet.components]
    return [(1.0 + 0j, [_axis_packet(packet, a) for a in range(packet.dim)])]


def _gauss_quad_axis(fa, fb, fc, fd, q, k):
    """Closed-form Q-integral of four 1D factors (see module docstring).

    Each factor is a Gaussian, possibly with a cubic Airy phase. With
    x = Q/2 the cubic terms of a factor and its conjugate partner cancel, so
    the integrand is exp(-A x^2 + B x + C) with complex A, B, C.
    """
    offs = (q + 0.5 * k, q - 0.5 * k, -q - 0.5 * k, -q + 0.5 * k)
    facs = (fa, fb, fc, fd)
    conj = (False, True, False, True)
    A = 0.0 + 0.0j
    B = 0.0 + 0.0j
    C = 0.0 + 0.0j
    cubic = 0.0
    pref = 1.0
    for f, off, cj in zip(facs, offs, conj):
        s2 = f.sigma[0] ** 2
        mu, b = f.mean_p[0], f.shift_b[0]
        beta = b if cj else -b
        c = mu - off
        A = A + 0.5 / s2
        B = B + c / s2 + 1j * beta
        C = C - c * c / (2 * s2) + 1j * beta * off
        if f.kind == "airy" and f.xi[0]:
            # (xi (x + d))^3 / 3 with d = off - mu, sign flipped for conjugates
            x3 = (-1.0 if cj else 1.0) * f.xi[0] ** 3
            d = -c
            cubic += x3 / 3
            A = A - 1j * x3 * d
            B = B + 1j * x3 * d * d
            C = C + 1j * x3 * d ** 3 / 3
        pref *= (math.pi * s2) ** -0.25
    if abs(cubic) > 1e-12 * max(abs(f.xi[0]) ** 3 if f.xi else 0.0 for f in facs):
        raise InvalidParameter("cubic phases do not pair up in the relative density")
    return 2 * pref * np.sqrt(np.pi / A) * np.exp(B * B / (4 * A) + C)


def _numeric_quad_axis(fa, fb, fc, fd, q, k, n_nodes=96):
    lo = min(f.mean_p[0] - BOX_WIDTHS * 2 * f.sigma[0] for f in (fa, fb, fc, fd))
    hi = max(f.mean_p[0] + BOX_WIDTHS * 2 * f.sigma[0] for f in (fa, fb, fc, fd))
    # x = Q/2 covers every factor's support once the offsets are added
    span = np.max(np.abs(q)) + 0.5 * np.max(np.abs(k))
    x, w = gauss_legendre(lo - span, hi + span, 32, max(n_nodes // 32, 1))
    shape = np.broadcast(q, k).shape
    qq = np.broadcast_to(q, shape)[..., None]
    kk = np.broadcast_to(k, shape)[..., None]
    vals = (pk.amplitude(fa, x + qq + 0.5 * kk)
            * np.conj(pk.amplitude(fb, x + qq - 0.5 * kk))
            * pk.amplitude(fc, x - qq - 0.5 * kk)
            * np.conj(pk.amplitude(fd, x - qq + 0.5 * kk)))
    return 2 * np.sum(vals * w, axis=-1)


class RelativeState:
    """Relative-coordinate bilinear of two packets of equal dimension."""

    def __init__(self, packet1, packet2):
        if packet1.dim != packet2.dim:
            raise InvalidParameter("colliding packets must share the transverse dimension")
        self.p1, self.p2 = packet1, packet2
        self.dim = packet1.dim
        self.q0 = 0.5 * (np.asarray(packet1.mean_p) - np.asarray(packet2.mean_p))
        self.Q0 = np.asarray(packet1.mean_p) + np.asarray(packet2.mean_p)
        self.terms1 = axis_terms(packet1)
        self.terms2 = axis_terms(packet2)

    @property
    def separable(self) -> bool:
        return self.terms1 is not None and self.terms2 is not None

    @property
    def gaussian_pair(self) -> bool:
        return self.p1.kind == "gaussian" and self.p2.kind == "gaussian"

    def boxes(self, widths: float = BOX_WIDTHS):
        """(q-box, k-box, Q-box) as (lower, upper) pairs covering the support."""
        lo1, hi1 = pk.support_box(self.p1, widths)
        lo2, hi2 = pk.support_box(self.p2, widths)
        h1 = 0.5 * (hi1 - lo1)
        h2 = 0.5 * (hi2 - lo2)
        hq = 0.5 * (h1 + h2)
        hk = 2 * np.minimum(h1, h2)
        hQ = h1 + h2
        return ((self.q0 - hq, self.q0 + hq), (-hk, hk), (self.Q0 - hQ, self.Q0 + hQ))

    def _terms(self):
        for (ca, fa), (cb, fb), (cc, fc), (cd, fd) in product(self.terms1, self.terms1,
                                                               self.terms2, self.terms2):
            yield ca * np.conj(cb) * cc * np.conj(cd), (fa, fb, fc, fd)

    def density(self, q, k):
        """rho_rel(q, k) for separable packets; q, k have trailing dimension dim."""
        if not self.separable:
            raise InvalidParameter("closed-form relative density needs separable packets")
        q = np.asarray(q, dtype=float)
        k = np.asarray(k, dtype=float)
        shape = np.broadcast(q[..., 0], k[..., 0]).shape
        out = np.zeros(shape, dtype=complex)
        for coef, (fa, fb, fc, fd) in self._terms():
            term = np.full(shape, coef, dtype=complex)
            for ax in range(self.dim):
                term = term * _gauss_quad_axis(fa[ax], fb[ax], fc[ax], fd[ax],
                                               q[..., ax], k[..., ax])
            out += term
        return out

    def axis_tables(self, q_axes, k_axes):
        """Per-axis factors of rho_rel on tensor grids.

        Returns a list of (coefficient, [T_a]) with T_a[i, j] the axis-a
        factor at (q_axes[a][i], k_axes[a][j]); rho_rel is the sum over the
        list of coefficient times the outer product of the T_a.
        """
        if not self.separable:
            raise InvalidParameter("closed-form relative density needs separable packets")
        out = []
        for coef, (fa, fb, fc, fd) in self._terms():
            out.append((coef, [_gauss_quad_axis(fa[a], fb[a], fc[a], fd[a],
                                                np.asarray(q_axes[a])[:, None],
                                                np.asarray(k_axes[a])[None, :])
                               for a in range(self.dim)]))
        return out

    def joint_integrand(self, q, k, Q):
        """Unintegrated product rho_1(Q/2 + q, k) rho_2(Q/2 - q, -k) for any packets."""
        q1 = 0.5 * Q + q
        q2 = 0.5 * Q - q
        return (pk.amplitude(self.p1, q1 + 0.5 * k) * np.conj(pk.amplitude(self.p1, q1 - 0.5 * k))
                * pk.amplitude(self.p2, q2 - 0.5 * k) * np.conj(pk.amplitude(self.p2, q2 + 0.5 * k)))

    def relative_shift(self) -> np.ndarray:
        return np.asarray(self.p1.shift_b) - np.asarray(self.p2.shift_b)

    def log_density_gradient(self):
        """Gradient of ln N_rel(r) at r = 0 (the collision point).

        Closed form for two Gaussians; otherwise from position-space
        densities sampled by FFT.
        """
        if self.gaussian_pair:
            s1 = np.asarray(self.p1.sigma)
            s2 = np.asarray(self.p2.sigma)
            alpha = 1 / s1 ** 2 + 1 / s2 ** 2
            return 2 * self.relative_shift() / alpha
        grad, value, peak, _ = _fft_relative_density(self.p1, self.p2)
        if value < 1e-12 * peak:
            raise WignerGradientUnstable(
                f"relative density at the collision point ({value:.3e}) is below 1e-12 of its peak")
        return grad / value

    def position_overlap(self):
        """N_rel(0): probability density of zero relative transverse offset."""
        if self.gaussian_pair:
            s1 = np.asarray(self.p1.sigma)
            s2 = np.asarray(self.p2.sigma)
            alpha = 1 / s1 ** 2 + 1 / s2 ** 2
            b = self.relative_shift()
            return float(np.prod(np.exp(-b ** 2 / alpha) / np.sqrt(math.pi * alpha)))
        return _fft_relative_density(self.p1, self.p2)[1]

    def conditional_momentum(self):
        """Mean relative momentum q - q0 given zero relative position.

        Nonzero when position and momentum are correlated inside a packet,
        e.g. the circulating current of an off-centre vortex.
        """
        if self.gaussian_pair:
            return np.zeros(self.dim)
        _, value, _, flow = _fft_relative_density(self.p1, self.p2)
        return flow / value - self.q0


def position_extent(packet) -> float:
    """Radius beyond which the position density is negligible (conservative)."""
    if packet.kind == "cat":
        return max(position_extent(c) for _, c in packet.components)
    width = 12.0 / float(np.min(packet.sigma))
    reach = float(np.max(np.abs(packet.shift_b))) + width
    if packet.kind == "airy":
        s = np.asarray(packet.sigma)
        xi = np.abs(np.asarray(packet.xi))
        reach += float(np.max(xi ** 3 * (BOX_WIDTHS * s) ** 2))
    if packet.kind == "vortex":
        reach += 12.0 / float(np.min(packet.sigma))
    return reach


def _fft_relative_density(p1, p2):
    """(grad N_rel(0), N_rel(0), max_r N_rel, current overlap) by FFT.

    The last entry is integral (j1 P2 - P1 j2) / 2 with j the probability
    current, i.e. N_rel(0) times the mean relative momentum at r = 0.
    """
    dim = p1.dim
    lo = np.minimum(*(pk.support_box(p)[0] for p in (p1, p2)))
    hi = np.maximum(*(pk.support_box(p)[1] for p in (p1, p2)))
    X = 2 * max(position_extent(p1), position_extent(p2))
    span = float(np.max(hi - lo))
    # x-grid of n points on [-X, X) is dual to a p-grid of spacing pi / X,
    # which must cover the momentum support
    n = 64
    while n * math.pi / X < span:
        n *= 2
    if n ** dim > 2 ** 22:
        raise InvalidParameter("relative position grid would be too large")
    dx = 2 * X / n
    dp = math.pi / X
    p_axes = [lo[a] + dp * np.arange(n) for a in range(dim)]
    x_axis = (np.arange(n) - n // 2) * dx
    mesh = np.stack(np.meshgrid(*p_axes, indexing="ij"), axis=-1)

    def to_position(values):
        # psi(x_m) = (2 pi)^(-d/2) dp^d sum_j values_j exp(i p_j x_m)
        out = values
        for a in range(dim):
            ph = np.exp(1j * lo[a] * x_axis)
            sgn = (-1.0) ** np.arange(n)
            shape = [1] * out.ndim
            shape[a] = n
            out = np.fft.ifft(out * sgn.reshape(shape), axis=a) * n
            out = out * ph.reshape(shape)
        return out * (dp / math.sqrt(2 * math.pi)) ** dim

    dens = []
    grads = []
    currents = []
    for p in (p1, p2):
        psi_p = pk.amplitude(p, mesh)
        psi_x = to_position(psi_p)
        d_psi_x = [to_position(1j * mesh[..., a] * psi_p) for a in range(dim)]
        dens.append(np.abs(psi_x) ** 2)
        grads.append([2 * np.real(np.conj(psi_x) * g) for g in d_psi_x])
        currents.append([np.imag(np.conj(psi_x) * g) for g in d_psi_x])
    P1, P2 = dens
    cell = dx ** dim
    value = float(np.sum(P1 * P2) * cell)
    grad = np.array([float(np.sum(g * P2) * cell) for g in grads[0]])
    axes = list(range(dim))
    corr = np.fft.ifftn(np.fft.fftn(P1, s=[2 * n] * dim, axes=axes)
                        * np.conj(np.fft.fftn(P2, s=[2 * n] * dim, axes=axes)), axes=axes)
    peak = float(np.max(np.real(corr))) * cell
    flow = np.array([0.5 * float(np.sum(j1 * P2 - P1 * j2) * cell)
                     for j1, j2 in zip(currents[0], currents[1])])
    return grad, value, max(peak, value), flow
