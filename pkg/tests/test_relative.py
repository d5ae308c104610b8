from __future__ import annotations

import math

import numpy as np
import pytest

from packetscatter import packets as pk
from packetscatter import wigner as wg
from packetscatter.errors import InvalidParameter
from packetscatter.quadrature import gauss_legendre
from packetscatter.relative import RelativeState, _fft_relative_density

PAIRS = {
    "gaussian": (pk.gaussian(1, 1.0, mean_p=0.2, shift_b=0.7), pk.gaussian(1, 0.8, mean_p=-0.1)),
    "cat": (pk.cat(3.0, 1, 1.0, weights=(1.0, 0.5j)), pk.gaussian(1, 1.2, shift_b=-0.4)),
    "airy": (pk.airy(0.8, 1, 1.0, shift_b=0.3), pk.airy(0.5, 1, 0.9)),
}


def brute_density(rs, q, k):
    # direct Q-integral of the unintegrated product
    Q, w = gauss_legendre(-16.0, 16.0, 32, 16)
    vals = rs.joint_integrand(np.full((Q.size, 1), q), np.full((Q.size, 1), k), Q[:, None])
    return complex(np.sum(vals * w))


@pytest.mark.parametrize("name", list(PAIRS))
def test_closed_form_matches_direct_integral(name):
    rs = RelativeState(*PAIRS[name])
    for q, k in ((0.0, 0.0), (0.3, -0.5), (-0.7, 1.1), (1.2, 0.4)):
        closed = complex(rs.density(np.array([q]), np.array([k])))
        assert closed == pytest.approx(brute_density(rs, q, k), abs=1e-12)


@pytest.mark.parametrize("name", list(PAIRS))
def test_density_hermitian_and_normalized(name):
    rs = RelativeState(*PAIRS[name])
    q = np.linspace(-1, 1, 7)[:, None]
    k = np.full_like(q, 0.6)
    assert np.allclose(rs.density(q, -k), np.conj(rs.density(q, k)), atol=1e-15)
    # q1 = Q/2 + q, q2 = Q/2 - q has unit Jacobian, so rho_rel(q, 0) integrates to 1
    x, w = gauss_legendre(-12.0, 12.0, 32, 8)
    total = np.sum(w * rs.density(x[:, None], np.zeros((x.size, 1))))
    assert total.real == pytest.approx(1.0, abs=1e-10)
    assert abs(total.imag) < 1e-12


def test_axis_tables_rebuild_density():
    p1 = pk.cat(2.0, 2, (1.0, 0.7), axis=1)
    p2 = pk.airy((0.4, 0.6), 2, 1.1, shift_b=(0.2, 0.0))
    rs = RelativeState(p1, p2)
    qa = [np.array([-0.3, 0.1]), np.array([0.5, -0.2, 0.0])]
    ka = [np.array([0.4]), np.array([-0.6, 0.2])]
    tables = rs.axis_tables(qa, ka)
    for i, j, m, n in ((0, 0, 0, 0), (1, 0, 2, 1), (1, 0, 1, 0)):
        rebuilt = sum(c * t[0][i, j] * t[1][m, n] for c, t in tables)
        direct = rs.density(np.array([qa[0][i], qa[1][m]]), np.array([ka[0][j], ka[1][n]]))
        assert rebuilt == pytest.approx(complex(direct), abs=1e-14)


def test_gaussian_overlap_from_relative_wigner():
    # integral dq dk / 2 pi rho_rel is the relative-position density at r = 0
    p1, p2 = PAIRS["gaussian"]
    rs = RelativeState(p1, p2)
    x, w = gauss_legendre(-10.0, 10.0, 32, 8)
    Qg, Kg = np.meshgrid(x, x, indexing="ij")
    rho = rs.density(Qg[..., None], Kg[..., None])
    total = np.sum(w[:, None] * w[None, :] * rho).real / (2 * math.pi)
    assert rs.position_overlap() == pytest.approx(total, rel=1e-10)


def test_gaussian_gradient_against_fft_path():
    p1 = pk.gaussian(2, (1.0, 0.6), shift_b=(0.8, -0.3))
    p2 = pk.gaussian(2, (0.7, 0.9), shift_b=(-0.2, 0.1))
    rs = RelativeState(p1, p2)
    grad, value, _, flow = _fft_relative_density(p1, p2)
    assert value == pytest.approx(rs.position_overlap(), rel=1e-9)
    assert grad / value == pytest.approx(rs.log_density_gradient(), rel=1e-8)
    assert flow == pytest.approx([0.0, 0.0], abs=1e-12)


def test_cat_gradient_against_position_quadrature():
    p1 = pk.cat(4.0, 1, 1.0)
    p2 = pk.gaussian(1, 1.0, shift_b=0.5)
    rs = RelativeState(p1, p2)
    y, w = gauss_legendre(-12.0, 12.0, 32, 6)
    P1 = wg.position_density(p1, y)
    h = 1e-3

    def n_rel(r):
        return float(np.sum(w * P1 * wg.position_density(p2, y - r)))

    fd = (math.log(n_rel(h)) - math.log(n_rel(-h))) / (2 * h)
    assert rs.log_density_gradient()[0] == pytest.approx(fd, rel=1e-5)
    assert rs.position_overlap() == pytest.approx(n_rel(0.0), rel=1e-8)


def test_vortex_circulation_sets_conditional_momentum():
    b = (2.0, 0.0)
    flows = {}
    for ell in (-1, 0, 1):
        rs = RelativeState(pk.vortex(ell, 1.0, 0.6, shift_b=b), pk.gaussian(2, 0.6))
        flows[ell] = rs.conditional_momentum()
    assert flows[0] == pytest.approx([0.0, 0.0], abs=1e-4)
    # current circulates about the vortex centre: perpendicular to b, odd in l
    assert abs(flows[1][1]) > 0.1
    assert flows[1][0] == pytest.approx(0.0, abs=1e-4)
    assert flows[-1] == pytest.approx(-flows[1], abs=1e-4)


def test_gaussian_pair_has_no_conditional_momentum():
    rs = RelativeState(*PAIRS["gaussian"])
    assert np.all(rs.conditional_momentum() == 0)


def test_vortex_is_not_separable():
    rs = RelativeState(pk.vortex(1, 1.0, 0.5), pk.gaussian(2, 0.5))
    assert not rs.separable
    with pytest.raises(InvalidParameter):
        rs.density(np.zeros(2), np.zeros(2))
    with pytest.raises(InvalidParameter):
        RelativeState(pk.gaussian(1), pk.gaussian(2))
