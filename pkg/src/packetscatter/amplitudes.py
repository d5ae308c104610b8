"""Scattering amplitude models M(s, t) = |M| exp(i zeta).

All models share the modulus |M| = A / (-t)^n; they differ in the phase:

constant_phase      zeta = zeta0
log_phase           zeta = eta * ln(-t / Lambda^2)          (Coulomb-like)
polynomial_phase    zeta = sum_{m,n} c[m][n] s^m t^n
size_phase          zeta = eta * a * sqrt(-t)               (extended target of size a)
tabulated           zeta(t), |M|(t) from cubic splines over a t-table
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import BelowThreshold, InvalidParameter, OutOfDomain

AMPLITUDE_KINDS = ("constant_phase", "log_phase", "polynomial_phase", "size_phase", "tabulated")


@dataclass(frozen=True)
class AmplitudeModel:
    kind: str
    A: float = 1.0
    power: Optional[float] = None  # modulus power of -t; default 1 for log_phase, else 0
    zeta0: float = 0.0
    eta: float = 0.0
    lambda2: float = 1.0
    coeffs: tuple = ()  # polynomial: tuple of rows, coeffs[m][n] multiplies s^m t^n
    size: float = 0.0
    table_t: tuple = ()
    table_phase: tuple = ()
    table_modulus: tuple = ()
    s_threshold: float = 0.0
    _splines: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in AMPLITUDE_KINDS:
            raise InvalidParameter(f"unknown amplitude kind {self.kind!r}")
        if self.A <= 0:
            raise InvalidParameter("normalization A must be positive")
        if self.kind == "log_phase" and self.lambda2 <= 0:
            raise InvalidParameter("Lambda^2 must be positive")
        if self.kind == "size_phase" and self.size < 0:
            raise InvalidParameter("size must be non-negative")
        if self.kind == "tabulated":
            t = np.asarray(self.table_t, dtype=float)
            if t.size < 4 or np.any(np.diff(t) <= 0) or t[-1] >= 0:
                raise InvalidParameter("tabulated t must be increasing, negative, >= 4 points")
            ph = np.asarray(self.table_phase, dtype=float)
            mod = (np.asarray(self.table_modulus, dtype=float) if self.table_modulus
                   else np.full(t.size, self.A))
            if ph.shape != t.shape or mod.shape != t.shape or np.any(mod <= 0):
                raise InvalidParameter("tabulated phase/modulus must match t and be positive")
            object.__setattr__(self, "_splines", {"phase": CubicSpline(t, ph),
                                                  "modulus": CubicSpline(t, mod)})

    @property
    def modulus_power(self) -> float:
        if self.power is not None:
            return float(self.power)
        return 1.0 if self.kind == "log_phase" else 0.0

    def with_phase_removed(self) -> "AmplitudeModel":
        """Same modulus, constant zero phase."""
        if self.kind == "tabulated":
            return AmplitudeModel("tabulated", A=self.A, table_t=self.table_t,
                                  table_phase=tuple(0.0 for _ in self.table_t),
                                  table_modulus=self.table_modulus or tuple(self.A for _ in self.table_t))
        return AmplitudeModel("constant_phase", A=self.A, power=self.modulus_power,
                              s_threshold=self.s_threshold)


def _domain(model: AmplitudeModel, s, t):
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(t >= 0):
        raise OutOfDomain("amplitude models need t < 0")
    if np.any(s < model.s_threshold):
        raise OutOfDomain(f"s below threshold {model.s_threshold}")
    if model.kind == "tabulated":
        lo, hi = model.table_t[0], model.table_t[-1]
        if np.any(t < lo) or np.any(t > hi):
            raise OutOfDomain(f"t outside tabulated range [{lo}, {hi}]")
    return s, t


def modulus(model: AmplitudeModel, s, t):
    s, t = _domain(model, s, t)
    if model.kind == "tabulated":
        return model._splines["modulus"](t)
    n = model.modulus_power
    if n == 0:
        return np.full(np.broadcast(s, t).shape, model.A) if np.ndim(t) else model.A
    return model.A / (-t) ** n


def phase(model: AmplitudeModel, s, t):
    s, t = _domain(model, s, t)
    kind = model.kind
    if kind == "constant_phase":
        return np.zeros(np.broadcast(s, t).shape) + model.zeta0
    if kind == "log_phase":
        return model.eta * np.log(-t / model.lambda2)
    if kind == "size_phase":
        return model.eta * model.size * np.sqrt(-t)
    if kind == "polynomial_phase":
        out = np.zeros(np.broadcast(s, t).shape)
        for m, row in enumerate(model.coeffs):
            for n, c in enumerate(row):
                if c:
                    out = out + c * s ** m * t ** n
        return out
    return model._splines["phase"](t)


def evaluate(model: AmplitudeModel, s, t):
    """Complex amplitude |M| exp(i zeta)."""
    return modulus(model, s, t) * np.exp(1j * phase(model, s, t))


def phase_gradient(model: AmplitudeModel, s, t):
    """Analytic (d zeta / d s, d zeta / d t)."""
    s, t = _domain(model, s, t)
    zero = np.zeros(np.broadcast(s, t).shape)
    kind = model.kind
    if kind == "constant_phase":
        return zero, zero.copy()
    if kind == "log_phase":
        return zero, model.eta / t + zero
    if kind == "size_phase":
        return zero, -0.5 * model.eta * model.size / np.sqrt(-t) + zero
    if kind == "polynomial_phase":
        ds = zero.copy()
        dt = zero.copy()
        for m, row in enumerate(model.coeffs):
            for n, c in enumerate(row):
                if not c:
                    continue
                if m:
                    ds = ds + c * m * s ** (m - 1) * t ** n
                if n:
                    dt = dt + c * n * s ** m * t ** (n - 1)
        return ds, dt
    return zero, model._splines["phase"](t, 1) + zero


def log_modulus_gradient(model: AmplitudeModel, s, t):
    """(d ln|M| / d s, d ln|M| / d t)."""
    s, t = _domain(model, s, t)
    zero = np.zeros(np.broadcast(s, t).shape)
    if model.kind == "tabulated":
        spl = model._splines["modulus"]
        return zero, spl(t, 1) / spl(t) + zero
    return zero, -model.modulus_power / t + zero


def phase_gradient_fd(model: AmplitudeModel, s, t, h: float):
    """Central-difference (d zeta / d s, d zeta / d t); error O(h^2)."""
    if h <= 0:
        raise InvalidParameter("step h must be positive")
    _domain(model, s, t)
    _domain(model, s - h, t + h)
    _domain(model, s + h, t - h)
    ds = (phase(model, s + h, t) - phase(model, s - h, t)) / (2 * h)
    dt = (phase(model, s, t + h) - phase(model, s, t - h)) / (2 * h)
    return ds, dt


def flux_factor(s: float, m1: float, m2: float) -> float:
    return (s - (m1 + m2) ** 2) * (s - (m1 - m2) ** 2)


def plane_wave_dsigma_dt(model: AmplitudeModel, s: float, t: float, m1: float, m2: float) -> float:
    """dsigma/dt = |M|^2 / (16 pi lambda(s, m1^2, m2^2)); independent of the phase."""
    if s <= (m1 + m2) ** 2:
        raise BelowThreshold(f"s = {s} is at or below threshold {(m1 + m2) ** 2}")
    mod = modulus(model, s, t)
    return mod * mod / (16 * math.pi * flux_factor(s, m1, m2))
