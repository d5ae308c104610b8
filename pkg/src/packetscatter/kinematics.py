"""Relativistic 2 -> 2 kinematics and paraxiality parameters.

Natural units (hbar = c = 1), energies in MeV, metric (+, -, -, -).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import BelowThreshold, InvalidParameter, NonConservedMomentum

CONSERVATION_RTOL = 1e-9


@dataclass(frozen=True)
class FourMomentum:
    E: float
    px: float
    py: float
    pz: float

    @classmethod
    def from_mass(cls, m: float, px: float, py: float, pz: float) -> "FourMomentum":
        if m < 0:
            raise InvalidParameter(f"mass must be non-negative, got {m}")
        return cls(math.sqrt(m * m + px * px + py * py + pz * pz), px, py, pz)

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.E, self.px, self.py, self.pz])

    @property
    def p(self) -> float:
        return math.sqrt(self.px ** 2 + self.py ** 2 + self.pz ** 2)

    @property
    def mass(self) -> float:
        return math.sqrt(max(self.minkowski_square(), 0.0))

    def minkowski_square(self) -> float:
        return self.E ** 2 - self.px ** 2 - self.py ** 2 - self.pz ** 2

    def dot(self, other: "FourMomentum") -> float:
        return self.E * other.E - self.px * other.px - self.py * other.py - self.pz * other.pz

    def __add__(self, other: "FourMomentum") -> "FourMomentum":
        return FourMomentum(self.E + other.E, self.px + other.px,
                            self.py + other.py, self.pz + other.pz)

    def __sub__(self, other: "FourMomentum") -> "FourMomentum":
        return FourMomentum(self.E - other.E, self.px - other.px,
                            self.py - other.py, self.pz - other.pz)

    def boost_z(self, beta: float) -> "FourMomentum":
        """Boost along the collision axis with velocity ``beta``."""
        if not -1.0 < beta < 1.0:
            raise InvalidParameter("|beta| < 1 required")
        gamma = 1.0 / math.sqrt(1.0 - beta * beta)
        return FourMomentum(gamma * (self.E + beta * self.pz), self.px, self.py,
                            gamma * (self.pz + beta * self.E))


@dataclass(frozen=True)
class MandelstamPoint:
    s: float
    t: float
    u: float


@dataclass(frozen=True)
class ParaxialityReport:
    lambda_dB: float
    lambda_c: float
    ratio_dB: Optional[float]
    ratio_c: float
    atom_ratio: Optional[float] = None
    sigma_x: float = math.nan

    @property
    def dB_undefined(self) -> bool:
        return self.ratio_dB is None

    def as_dict(self) -> dict:
        return {
            "lambda_dB": self.lambda_dB,
            "lambda_c": self.lambda_c,
            "ratio_dB": self.ratio_dB,
            "ratio_c": self.ratio_c,
            "atom_ratio": self.atom_ratio,
            "sigma_x": self.sigma_x,
        }


def mandelstam(p1: FourMomentum, p2: FourMomentum, p3: FourMomentum,
               p4: FourMomentum) -> MandelstamPoint:
    total_in = p1 + p2
    total_out = p3 + p4
    s = total_in.minkowski_square()
    scale = math.sqrt(abs(s)) if s != 0 else max(abs(total_in.E), 1.0)
    diff = np.abs(total_in.vector - total_out.vector)
    if np.any(diff > CONSERVATION_RTOL * max(scale, 1e-300)):
        raise NonConservedMomentum(
            f"p1 + p2 != p3 + p4 (max deviation {diff.max():.3e}, sqrt(s) = {scale:.6g})")
    return MandelstamPoint(s, (p1 - p3).minkowski_square(), (p1 - p4).minkowski_square())


def kallen(x: float, y: float, z: float) -> float:
    return x * x + y * y + z * z - 2 * x * y - 2 * x * z - 2 * y * z


def cm_momentum(s: float, m1: float, m2: float) -> float:
    """Momentum magnitude of either particle in the centre-of-mass frame."""
    threshold = (m1 + m2) ** 2
    if s < threshold * (1 - 1e-15):
        raise BelowThreshold(f"s = {s} is below threshold {threshold}")
    if s <= threshold:
        return 0.0
    prod = (s - threshold) * (s - (m1 - m2) ** 2)
    return math.sqrt(max(prod, 0.0)) / (2.0 * math.sqrt(s))


def sqrt_s_for_momentum(p: float, m1: float, m2: float) -> float:
    """Invariant mass of a head-on pair with CM momentum ``p``."""
    if p < 0:
        raise InvalidParameter("momentum must be non-negative")
    return math.hypot(m1, p) + math.hypot(m2, p)


def elastic_cm_point(sqrt_s: float, m1: float, m2: float, theta: float, phi: float = 0.0):
    """Head-on elastic scattering along z; returns (p1, p2, p3, p4)."""
    k = cm_momentum(sqrt_s ** 2, m1, m2)
    n = (math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta))
    p1 = FourMomentum.from_mass(m1, 0.0, 0.0, k)
    p2 = FourMomentum.from_mass(m2, 0.0, 0.0, -k)
    p3 = FourMomentum.from_mass(m1, k * n[0], k * n[1], k * n[2])
    p4 = FourMomentum.from_mass(m2, -k * n[0], -k * n[1], -k * n[2])
    return p1, p2, p3, p4


def paraxiality(mass: float, sigma_p: float, mean_p: float,
                atom_size: Optional[float] = None) -> ParaxialityReport:
    """Dimensionless smallness parameters of a packet.

    ``ratio_dB`` is ``None`` when ``mean_p`` is zero (de Broglie wavelength
    undefined).
    """
    if mass <= 0:
        raise InvalidParameter(f"mass must be positive, got {mass}")
    if sigma_p <= 0:
        raise InvalidParameter(f"sigma_p must be positive, got {sigma_p}")
    if mean_p < 0:
        raise InvalidParameter(f"mean_p must be non-negative, got {mean_p}")
    if atom_size is not None and atom_size <= 0:
        raise InvalidParameter(f"atom_size must be positive, got {atom_size}")
    lam_db = 2 * math.pi / mean_p if mean_p > 0 else math.inf
    return ParaxialityReport(
        lambda_dB=lam_db,
        lambda_c=1.0 / mass,
        ratio_dB=sigma_p / mean_p if mean_p > 0 else None,
        ratio_c=sigma_p / mass,
        atom_ratio=None if atom_size is None else atom_size * sigma_p,
        sigma_x=1.0 / sigma_p,
    )


class TransverseKinematics:
    """Map a relative transverse momentum to (s, t) at a fixed final direction.

    The two incoming particles move head on along z with longitudinal momenta
    +P and -P and transverse momenta +q and -q, so the total momentum is
    always zero. Particle 3 (mass m1) leaves along the direction (theta, phi)
    and particle 4 (mass m2) recoils; the elastic final state is fixed by
    energy-momentum conservation. ``P`` is set from the nominal ``sqrt_s`` at
    q = 0.

    ``n_perp`` overrides the transverse part (sin theta cos phi, sin theta
    sin phi) of the outgoing direction; the asymmetry code passes exactly
    negated vectors for opposite azimuthal bins.
    """

    def __init__(self, sqrt_s: float, m1: float, m2: float, theta: float, phi: float, dim: int = 2,
                 n_perp=None):
        if dim not in (1, 2):
            raise InvalidParameter("transverse dimension must be 1 or 2")
        self.m1, self.m2 = float(m1), float(m2)
        self.sqrt_s = float(sqrt_s)
        self.P = cm_momentum(self.sqrt_s ** 2, m1, m2)
        self.theta, self.phi, self.dim = float(theta), float(phi), dim
        if n_perp is None:
            n_perp = np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi)])
        n_perp = np.asarray(n_perp, dtype=float)
        self.n_perp = n_perp[:dim]
        self.n_z = math.cos(theta)

    def _split(self, q):
        q = np.asarray(q, dtype=float)
        if q.shape[-1] != self.dim:
            raise InvalidParameter(f"expected trailing dimension {self.dim}, got shape {q.shape}")
        return q

    def invariants(self, q):
        """(s, t) for relative transverse momenta ``q`` of shape (..., dim)."""
        q = self._split(q)
        q2 = np.sum(q * q, axis=-1)
        base = self.P ** 2 + q2
        E1 = np.sqrt(self.m1 ** 2 + base)
        E2 = np.sqrt(self.m2 ** 2 + base)
        s = (E1 + E2) ** 2
        W = E1 + E2
        E3 = (s + self.m1 ** 2 - self.m2 ** 2) / (2 * W)
        k = np.sqrt(np.maximum(E3 * E3 - self.m1 ** 2, 0.0))
        qn = q @ self.n_perp
        t = 2 * self.m1 ** 2 - 2 * (E1 * E3 - k * qn - self.P * k * self.n_z)
        return s, t

    def jacobian(self, q):
        """Analytic (ds/dq, dt/dq) at ``q``, each of shape (..., dim)."""
        q = self._split(q)
        q2 = np.sum(q * q, axis=-1)
        base = self.P ** 2 + q2
        E1 = np.sqrt(self.m1 ** 2 + base)
        E2 = np.sqrt(self.m2 ** 2 + base)
        W = E1 + E2
        s = W * W
        delta = self.m1 ** 2 - self.m2 ** 2
        E3 = (s + delta) / (2 * W)
        k = np.sqrt(np.maximum(E3 * E3 - self.m1 ** 2, 0.0))
        ds_dq = 2 * W * (1 / E1 + 1 / E2)[..., None] * q
        dE3_ds = (s - delta) / (4 * s * W)
        dk_ds = np.where(k > 0, E3 * dE3_ds / np.where(k > 0, k, 1.0), 0.0)
        qn = q @ self.n_perp
        dt_dq = (-2 * (E3 / E1)[..., None] * q
                 - 2 * (E1 * dE3_ds)[..., None] * ds_dq
                 + 2 * k[..., None] * self.n_perp
                 + 2 * ((qn + self.P * self.n_z) * dk_ds)[..., None] * ds_dq)
        return ds_dq, dt_dq
