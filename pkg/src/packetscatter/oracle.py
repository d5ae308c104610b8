"""Brute-force packet average of the squared amplitude.

The exact bilinear at a fixed final direction is

    B = integral d^d q d^d k / (2 pi)^d  rho_rel(q, k) M(q + k/2) M*(q - k/2),

with M(q) the amplitude at the kinematics of relative transverse momentum q.
It is normalized by the same integral with M = 1 (the luminosity overlap), so
the ratio to |M(q0)|^2 tends to 1 for sharp packets.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import amplitudes as amp
from .correction import ScatteringScenario, _transverse, first_order_ratio
from .errors import InvalidParameter, NegativeValueBeyondError, NonConvergence
from .quadrature import gauss_legendre, reproducible_sum

METHODS = ("tensor_quadrature", "monte_carlo")
MC_BATCHES = 32
DEFAULT_TARGET = {"tensor_quadrature": 1e-9, "monte_carlo": 1e-2}


@dataclass(frozen=True)
class OracleConfig:
    method: str = "tensor_quadrature"
    nodes: int = 64
    samples: int = 100_000
    seed: int = 0
    target: Optional[float] = None
    max_nodes: int = 512

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidParameter(f"unknown oracle method {self.method!r}")
        if self.nodes < 32 or self.nodes % 16:
            raise InvalidParameter("quadrature needs >= 32 nodes per axis, a multiple of 16")
        if self.samples < 10_000:
            raise InvalidParameter("Monte Carlo needs >= 1e4 samples")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise InvalidParameter("seed must be a 64-bit unsigned integer")
        if self.target is not None and self.target <= 0:
            raise InvalidParameter("target must be positive")

    @property
    def tolerance(self) -> float:
        return DEFAULT_TARGET[self.method] if self.target is None else self.target


@dataclass(frozen=True)
class BilinearResult:
    value: float          # packet-averaged |M|^2
    error: float
    baseline: float       # |M(q0)|^2
    ratio: float
    ratio_err: float
    imag_residual: float  # |Im B| / |Re B| before discarding
    evaluations: int
    method: str


def _amplitude_pair(model, kin, q, k):
    s_p, t_p = kin.invariants(q + 0.5 * k)
    s_m, t_m = kin.invariants(q - 0.5 * k)
    return amp.evaluate(model, s_p, t_p) * np.conj(amp.evaluate(model, s_m, t_m))


def _map(fn, items, threads):
    if threads is None or threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _row_sum(values) -> complex:
    # pairwise numpy sums along rows (fixed shape, so deterministic), exact
    # summation across rows
    rows = np.sum(values, axis=-1)
    return reproducible_sum(rows)


def _quadrature_level(scenario, kin, n, threads):
    rs = scenario.relative
    if not rs.separable:
        raise InvalidParameter("tensor quadrature needs separable packets; use monte_carlo")
    dim = scenario.dim
    (qlo, qhi), (klo, khi), _ = rs.boxes()
    panels = n // 16
    qa = [gauss_legendre(qlo[a], qhi[a], 16, panels) for a in range(dim)]
    ka = [gauss_legendre(klo[a], khi[a], 16, panels) for a in range(dim)]
    tables = rs.axis_tables([x for x, _ in qa], [x for x, _ in ka])
    k_nodes = np.stack(np.meshgrid(*[x for x, _ in ka], indexing="ij"), axis=-1).reshape(-1, dim)
    wk = np.prod(np.meshgrid(*[w for _, w in ka], indexing="ij"), axis=0).ravel()
    wk = wk * (2 * math.pi) ** -dim

    def work(i):
        # all grid points whose first q coordinate is node i
        if dim == 1:
            q_pts = qa[0][0][i:i + 1, None]
            wq = qa[0][1][i:i + 1]
            rho = sum(c * t[0][i][None, :] for c, t in tables)
        else:
            q_pts = np.stack([np.full(n, qa[0][0][i]), qa[1][0]], axis=-1)
            wq = qa[0][1][i] * qa[1][1]
            rho = sum(c * np.einsum("c,bd->bcd", t[0][i], t[1]).reshape(n, -1)
                      for c, t in tables)
        rho = rho * wq[:, None] * wk[None, :]
        mm = _amplitude_pair(scenario.model, kin, q_pts[:, None, :], k_nodes[None, :, :])
        return _row_sum(rho * mm), _row_sum(rho)

    parts = _map(work, list(range(n)), threads)
    num = complex(reproducible_sum([p[0].real for p in parts]),
                  reproducible_sum([p[0].imag for p in parts]))
    lum = complex(reproducible_sum([p[1].real for p in parts]),
                  reproducible_sum([p[1].imag for p in parts]))
    return num, lum, n ** (2 * dim)


def _tensor_quadrature(scenario, kin, config, baseline, threads):
    n = config.nodes
    prev = None
    evals = 0
    while n <= config.max_nodes:
        num, lum, cnt = _quadrature_level(scenario, kin, n, threads)
        evals += cnt
        ratio = num.real / lum.real / baseline
        if prev is not None:
            err = abs(ratio - prev[0])
            if err <= config.tolerance * abs(ratio):
                return num, lum, ratio, err, evals
        prev = (ratio,)
        n *= 2
    raise NonConvergence(
        f"tensor quadrature did not reach relative error {config.tolerance} "
        f"with {config.max_nodes} nodes per axis")


def _proposal_widths(scenario):
    p1, p2 = scenario.in_packets

    def scale(p):
        sig = np.asarray(p.sigma if p.kind != "cat" else
                         np.mean([c.sigma for _, c in p.components], axis=0))
        return sig + (p.kappa if p.kind == "vortex" else 0.0)

    s = np.sqrt(0.5 * (scale(p1) ** 2 + scale(p2) ** 2)) * 1.25
    return 0.5 * s, s, s


def _mc_batch(scenario, kin, config, batch, n):
    rs = scenario.relative
    dim = scenario.dim
    key = np.array([int(config.seed), batch], dtype=np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    sq, sk, sQ = _proposal_widths(scenario)
    z = rng.standard_normal((n, 3, dim))
    q = rs.q0 + sq * z[:, 0]
    k = sk * z[:, 1]
    Q = rs.Q0 + sQ * z[:, 2]
    log_p = -0.5 * np.sum(z * z, axis=(1, 2))
    weight = np.exp(-log_p) * float(np.prod(sq * sk * sQ)) * (2 * math.pi) ** (1.5 * dim)
    weight = weight * (2 * math.pi) ** -dim
    # antithetic k pair: the two integrands are complex conjugates
    f_p = rs.joint_integrand(q, k, Q)
    f_m = rs.joint_integrand(q, -k, Q)
    m_p = _amplitude_pair(scenario.model, kin, q, k)
    m_m = _amplitude_pair(scenario.model, kin, q, -k)
    num = 0.5 * weight * (f_p * m_p + f_m * m_m)
    lum = 0.5 * weight * (f_p + f_m)
    return reproducible_sum(num), reproducible_sum(lum)


def _monte_carlo(scenario, kin, config, baseline, threads):
    per = -(-config.samples // MC_BATCHES)
    parts = _map(lambda b: _mc_batch(scenario, kin, config, b, per), list(range(MC_BATCHES)),
                 threads)
    num = complex(reproducible_sum([p[0].real for p in parts]),
                  reproducible_sum([p[0].imag for p in parts]))
    lum = complex(reproducible_sum([p[1].real for p in parts]),
                  reproducible_sum([p[1].imag for p in parts]))
    ratio = num.real / lum.real / baseline
    batch = np.array([p[0].real / p[1].real / baseline for p in parts])
    mean = reproducible_sum(batch) / MC_BATCHES
    var = reproducible_sum((batch - mean) ** 2) / (MC_BATCHES - 1)
    err = math.sqrt(var / MC_BATCHES)
    if err > config.tolerance * abs(ratio):
        raise NonConvergence(
            f"Monte Carlo error {err:.3e} exceeds target {config.tolerance} x ratio "
            f"with {per * MC_BATCHES} samples")
    return num, lum, ratio, max(err, np.finfo(float).tiny), per * MC_BATCHES * 2


def averaged_bilinear(scenario: ScatteringScenario, theta: float, phi: float,
                      config: OracleConfig, n_perp=None, threads=None) -> BilinearResult:
    """Exact packet-averaged |M|^2 at the final direction (theta, phi)."""
    kin = scenario.kinematics(theta, phi, _transverse(scenario, theta, phi, n_perp))
    q0 = scenario.relative.q0
    s0, t0 = kin.invariants(q0)
    baseline = float(abs(amp.evaluate(scenario.model, float(s0), float(t0))) ** 2)
    run = _tensor_quadrature if config.method == "tensor_quadrature" else _monte_carlo
    num, lum, ratio, err, evals = run(scenario, kin, config, baseline, threads)
    if lum.real <= 0:
        raise NegativeValueBeyondError(f"luminosity overlap {lum.real:.3e} is not positive")
    if ratio < -3 * err:
        raise NegativeValueBeyondError(
            f"packet-averaged |M|^2 ratio {ratio:.3e} is negative beyond its error {err:.1e}")
    imag = abs(num.imag) / abs(num.real) if num.real else math.inf
    return BilinearResult(ratio * baseline, err * baseline, baseline, ratio, err, imag, evals,
                          config.method)


@dataclass(frozen=True)
class ScalingResult:
    slope: float
    quadratic: float
    quadratic_residual: float  # |quadratic * x_max| / |slope|
    table: list                # rows (sigma_p, sigma_p/m, ratio - 1, err, first_order)


def scaling_probe(scenario: ScatteringScenario, sigma_p_list, theta: float, phi: float,
                  config: OracleConfig, threads=None) -> ScalingResult:
    """Least-squares fit ratio - 1 = a x + c x^2 with x = sigma_p / m1.

    Widths are varied at fixed b / sigma_x.
    """
    sig = np.sort(np.asarray(sigma_p_list, dtype=float))
    if sig.size < 4 or sig[-1] < 10 * sig[0]:
        raise InvalidParameter("scaling probe needs >= 4 widths spanning a decade")
    rows = []
    for sp in sig:
        sc = scenario.with_sigma_p(float(sp))
        res = averaged_bilinear(sc, theta, phi, config, threads=threads)
        rows.append((float(sp), sc.small_parameter, res.ratio - 1.0, res.ratio_err,
                     first_order_ratio(sc, theta, phi)))
    x = np.array([r[1] for r in rows])
    y = np.array([r[2] for r in rows])
    err = np.array([max(r[3], 1e-300) for r in rows])
    # relative weighting: every point counts equally in the fit
    w = 1.0 / np.maximum(np.abs(y), err)
    if not np.all(np.isfinite(w)):
        w = np.ones_like(x)
    design = np.stack([x, x * x], axis=-1) * w[:, None]
    (a, c), *_ = np.linalg.lstsq(design, y * w, rcond=None)
    resid = abs(c) * x.max() / abs(a) if a else math.inf
    return ScalingResult(float(a), float(c), float(resid), rows)


def wkb_remainder(scenario: ScatteringScenario, theta: float, phi: float,
                  config: OracleConfig, threads=None) -> float:
    """|oracle ratio - first-order ratio - 1|, the empirical second-order part."""
    res = averaged_bilinear(scenario, theta, phi, config, threads=threads)
    return abs(res.ratio - first_order_ratio(scenario, theta, phi) - 1.0)
