"""First-order non-plane-wave correction and the azimuthal asymmetry.

Writing M(q) = |M| exp(i zeta) and expanding the phase difference of the
bilinear M(q + k/2) M*(q - k/2) to first order in k turns the k-integral of
the relative density matrix into the relative-position density shifted by
u = d zeta / d q. Relative to the plane-wave rate this gives

    ratio = grad ln N_rel(0) . u,    u = zeta_s ds/dq + zeta_t dt/dq,

where N_rel is the density of the relative transverse position of the two
packets at the collision point. The Mandelstam chain rule splits the ratio
into eps (f1 zeta_s + f2 zeta_t) with eps = sigma_p / m.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Optional

import numpy as np

from . import amplitudes as amp
from . import packets as pk
from .errors import DegenerateDipole, InvalidParameter, OutOfDomain
from .kinematics import TransverseKinematics, paraxiality
from .quadrature import reproducible_sum
from .relative import RelativeState

MIN_PHI_BINS = 8


@dataclass(frozen=True)
class ScatteringScenario:
    """Two packets colliding head on along z, with elastic final state.

    ``impact`` is added to the position offset of packet 1. Azimuthal bins
    are centred at phi_offset + 2 pi (j + 1/2) / n_phi; the hemisphere axis
    of the asymmetry is the phi = phi_offset direction.
    """
    m1: float
    m2: float
    packet1: pk.WavePacket
    packet2: pk.WavePacket
    model: amp.AmplitudeModel
    sqrt_s: float
    impact: Optional[tuple] = None
    thetas: tuple = (math.pi / 2,)
    n_phi: int = 16
    phi_offset: float = 0.0

    def __post_init__(self):
        if self.packet1.dim != self.packet2.dim:
            raise InvalidParameter("packets must share the transverse dimension")
        if self.m1 <= 0 or self.m2 <= 0:
            raise InvalidParameter("masses must be positive")
        if self.sqrt_s <= self.m1 + self.m2:
            raise InvalidParameter("sqrt_s must be above threshold")
        if self.impact is not None:
            b = tuple(float(x) for x in np.atleast_1d(self.impact))
            if len(b) != self.dim or not all(math.isfinite(x) for x in b):
                raise InvalidParameter(f"impact must be a finite {self.dim}-vector")
            object.__setattr__(self, "impact", b)

    @property
    def dim(self) -> int:
        return self.packet1.dim

    @property
    def sigma_p(self) -> float:
        return pk.momentum_scale(self.packet1)

    @property
    def sigma_x(self) -> float:
        return 1.0 / self.sigma_p

    @property
    def small_parameter(self) -> float:
        """sigma_p / m1, i.e. lambda_c / sigma_x."""
        return self.sigma_p / self.m1

    @cached_property
    def in_packets(self):
        p1 = self.packet1 if self.impact is None else pk.shifted(self.packet1, self.impact)
        return p1, self.packet2

    @cached_property
    def relative(self) -> RelativeState:
        return RelativeState(*self.in_packets)

    @cached_property
    def dipole_gradient(self) -> np.ndarray:
        """grad ln N_rel at the collision point."""
        return np.asarray(self.relative.log_density_gradient(), dtype=float)

    @cached_property
    def flow_momentum(self) -> np.ndarray:
        """Mean relative momentum (minus q0) at zero relative position."""
        return np.asarray(self.relative.conditional_momentum(), dtype=float)

    def kinematics(self, theta: float, phi: float, n_perp=None) -> TransverseKinematics:
        return TransverseKinematics(self.sqrt_s, self.m1, self.m2, theta, phi, self.dim,
                                    n_perp=n_perp)

    def phi_bins(self):
        """Bin centres, transverse direction factors and hemisphere signs.

        For an even bin count the second half of the directions are exact
        negatives of the first half, so opposite bins cancel bitwise.
        """
        n = self.n_phi
        rel = 2 * math.pi * (np.arange(n) + 0.5) / n
        centers = self.phi_offset + rel
        dirs = np.stack([np.cos(centers), np.sin(centers)], axis=-1)
        signs = np.sign(np.cos(rel))
        signs[np.abs(np.cos(rel)) < 1e-12] = 0.0
        if n % 2 == 0:
            dirs[n // 2:] = -dirs[: n // 2]
            signs[n // 2:] = -signs[: n // 2]
        return centers, dirs, signs

    def with_impact(self, impact) -> "ScatteringScenario":
        return replace(self, impact=None if impact is None else tuple(np.atleast_1d(impact)))

    def with_model(self, model: amp.AmplitudeModel) -> "ScatteringScenario":
        return replace(self, model=model)

    def rescaled(self, factor: float) -> "ScatteringScenario":
        """All momentum widths times ``factor``, lengths divided by it."""
        impact = None if self.impact is None else tuple(x / factor for x in self.impact)
        return replace(self, packet1=pk.rescaled(self.packet1, factor),
                       packet2=pk.rescaled(self.packet2, factor), impact=impact)

    def with_sigma_p(self, sigma_p: float) -> "ScatteringScenario":
        return self.rescaled(sigma_p / self.sigma_p)

    def paraxiality(self, atom_size: Optional[float] = None):
        p = self.kinematics(math.pi / 2, 0.0).P
        return paraxiality(self.m1, self.sigma_p, p, atom_size)

    def describe(self) -> dict:
        return {"m1": self.m1, "m2": self.m2, "sqrt_s": self.sqrt_s,
                "packet1": self.packet1.describe(), "packet2": self.packet2.describe(),
                "impact": None if self.impact is None else list(self.impact),
                "model": self.model.kind, "n_phi": self.n_phi, "phi_offset": self.phi_offset}


def effective_dipole(scenario: ScatteringScenario) -> np.ndarray:
    """Difference of the Wigner centroids of the two in-packets."""
    p1, p2 = scenario.in_packets
    return pk.moments(p1).mean_x - pk.moments(p2).mean_x


def _transverse(scenario, theta, phi, n_perp):
    if n_perp is None:
        return None
    n_perp = np.asarray(n_perp, dtype=float)
    return math.sin(theta) * n_perp if n_perp.size == 2 else n_perp


@dataclass(frozen=True)
class FirstOrder:
    ratio: float
    f1: float
    f2: float
    epsilon: float
    zeta_s: float
    zeta_t: float
    s: float
    t: float
    flow: float = 0.0


def first_order_terms(scenario: ScatteringScenario, theta: float, phi: float,
                      n_perp=None) -> FirstOrder:
    """First-order ratio with its f1 (d zeta/ds) and f2 (d zeta/dt) split.

    ``flow`` is the separate first-order modulus term grad ln|M|^2 . <q - q0>,
    where the mean is taken at zero relative position; it is not part of
    ``ratio``. ``n_perp`` optionally overrides the unit azimuthal direction (cos phi,
    sin phi).
    """
    kin = scenario.kinematics(theta, phi, _transverse(scenario, theta, phi, n_perp))
    q0 = scenario.relative.q0
    s, t = kin.invariants(q0)
    s, t = float(s), float(t)
    if not t < 0:
        raise OutOfDomain(f"theta = {theta} gives t = {t}; need t < 0")
    zs, zt = amp.phase_gradient(scenario.model, s, t)
    zs, zt = float(zs), float(zt)
    ds_dq, dt_dq = kin.jacobian(q0)
    g = scenario.dipole_gradient
    eps = scenario.small_parameter
    gs = float(g @ ds_dq)
    gt = float(g @ dt_dq)
    ratio = gs * zs + gt * zt
    # modulus term: momentum-position correlation inside the packets (zero for
    # Gaussians, Airy and cats; the circulating current of a vortex)
    ms, mt = amp.log_modulus_gradient(scenario.model, s, t)
    dq = scenario.flow_momentum
    flow = 2 * (float(ms) * float(dq @ ds_dq) + float(mt) * float(dq @ dt_dq))
    return FirstOrder(ratio, gs / eps, gt / eps, eps, zs, zt, s, t, flow)


def first_order_ratio(scenario: ScatteringScenario, theta: float, phi: float,
                      n_perp=None) -> float:
    """d sigma^(1) / d sigma^(pw) at the final direction (theta, phi)."""
    return first_order_terms(scenario, theta, phi, n_perp).ratio


def plane_wave(scenario: ScatteringScenario, theta: float, phi: float, n_perp=None) -> float:
    kin = scenario.kinematics(theta, phi, _transverse(scenario, theta, phi, n_perp))
    s, t = kin.invariants(scenario.relative.q0)
    return float(amp.plane_wave_dsigma_dt(scenario.model, float(s), float(t),
                                          scenario.m1, scenario.m2))


@dataclass(frozen=True)
class AsymmetryResult:
    theta: float
    A: float
    phi: np.ndarray
    pw_dsigma_dt: np.ndarray
    ratio: np.ndarray
    degenerate: bool = False


def azimuthal_asymmetry(scenario: ScatteringScenario, theta: float) -> AsymmetryResult:
    """Hemisphere asymmetry of w = dsigma_pw (1 + ratio) over the phi bins.

    Positive A means more scattering towards the phi = phi_offset side.
    """
    if scenario.n_phi < MIN_PHI_BINS:
        raise InvalidParameter(f"need at least {MIN_PHI_BINS} phi bins")
    centers, dirs, signs = scenario.phi_bins()
    pw = np.array([plane_wave(scenario, theta, c, d) for c, d in zip(centers, dirs)])
    ratio = np.array([first_order_ratio(scenario, theta, c, d) for c, d in zip(centers, dirs)])
    degenerate = not np.any(scenario.dipole_gradient)
    if degenerate:
        warnings.warn("in-state has no dipole moment; asymmetry set to 0", DegenerateDipole,
                      stacklevel=2)
        return AsymmetryResult(theta, 0.0, centers, pw, ratio, True)
    corr = pw * ratio
    num = reproducible_sum(signs * pw) + reproducible_sum(signs * corr)
    den = reproducible_sum(pw) + reproducible_sum(corr)
    return AsymmetryResult(theta, num / den, centers, pw, ratio)


@dataclass(frozen=True)
class AtomScaleResult:
    A: float
    A_point: float
    scale: float
    point_scale: float
    atom_size: float

    @property
    def enhancement(self) -> float:
        return self.A / self.A_point if self.A_point else math.inf


def atom_scale_asymmetry(scenario: ScatteringScenario, atom_size: float,
                         theta: Optional[float] = None, eta: Optional[float] = None
                         ) -> AtomScaleResult:
    """Asymmetry when the amplitude phase varies on the target size ``atom_size``.

    The phase is eta * a * sqrt(-t), so the phase gradient grows with a. The
    comparison value A_point uses the same geometry with a = 1/m1 (the
    Compton wavelength of particle 1). ``scale`` is a / sigma_x.
    """
    if atom_size <= 0:
        raise InvalidParameter("atom size must be positive")
    if scenario.packet1.kind not in ("cat", "gaussian"):
        raise InvalidParameter("atom-scale asymmetry expects a cat (or degenerate cat) packet")
    theta = scenario.thetas[0] if theta is None else theta
    eta = (scenario.model.eta or 1.0) if eta is None else eta

    def asym(size):
        model = amp.AmplitudeModel("size_phase", A=scenario.model.A, eta=eta, size=size,
                                   power=scenario.model.modulus_power)
        return azimuthal_asymmetry(scenario.with_model(model), theta).A

    lam_c = 1.0 / scenario.m1
    return AtomScaleResult(asym(atom_size), asym(lam_c), atom_size * scenario.sigma_p,
                           lam_c * scenario.sigma_p, atom_size)


@dataclass
class CorrectionReport:
    """Per-bin table, asymmetries and paraxiality for one scenario."""
    rows: list = field(default_factory=list)
    asymmetry: dict = field(default_factory=dict)
    dipole: list = field(default_factory=list)
    paraxiality: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    COLUMNS = ("theta", "phi_bin_center", "pw_dsigma_dt", "first_order_ratio",
               "oracle_ratio", "oracle_err")

    def as_dict(self) -> dict:
        return {"columns": list(self.COLUMNS), "rows": self.rows,
                "asymmetry": self.asymmetry, "effective_dipole": self.dipole,
                "paraxiality": self.paraxiality, "provenance": self.provenance}


def correction_report(scenario: ScatteringScenario, oracle_config=None, threads=None,
                      atom_size: Optional[float] = None, provenance=None) -> CorrectionReport:
    """Evaluate every (theta, phi) bin, optionally with the brute-force oracle."""
    from .oracle import averaged_bilinear

    report = CorrectionReport(provenance=dict(provenance or {}))
    report.dipole = [float(x) for x in effective_dipole(scenario)]
    report.paraxiality = scenario.paraxiality(atom_size).as_dict()
    for theta in scenario.thetas:
        res = azimuthal_asymmetry(scenario, theta)
        report.asymmetry[repr(float(theta))] = {"A": res.A, "degenerate": res.degenerate}
        _, dirs, _ = scenario.phi_bins()
        for phi, d, pw, r in zip(res.phi, dirs, res.pw_dsigma_dt, res.ratio):
            o_ratio = o_err = None
            if oracle_config is not None:
                o = averaged_bilinear(scenario, theta, phi, oracle_config, n_perp=d,
                                      threads=threads)
                o_ratio, o_err = o.ratio, o.ratio_err
            report.rows.append([float(theta), float(phi), float(pw), float(r), o_ratio, o_err])
    return report
