from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from packetscatter import packets as pk
from packetscatter.errors import InvalidParameter


@pytest.mark.parametrize("packet", [
    pk.gaussian(1, 0.7, mean_p=0.3),
    pk.gaussian(2, (0.5, 1.3), shift_b=(2.0, -1.0)),
    pk.airy(1.4, 1, 0.8),
    pk.airy((0.5, 1.0), 2, 1.0),
    pk.vortex(2, 1.5, 0.6),
    pk.vortex(-1, 0.0, 1.0, mean_p=(0.4, 0.0)),
    pk.cat(3.0, 1, 1.0),
    pk.cat(2.5, 2, 1.0, weights=(1.0, 1j), axis=1),
], ids=repr)
def test_normalized(packet):
    assert pk.norm(packet) == pytest.approx(1.0, abs=1e-8)


def test_gaussian_peak_value():
    g = pk.gaussian(1, 2.0)
    assert abs(pk.amplitude(g, 0.0)) == pytest.approx((math.pi * 4.0) ** -0.25, rel=1e-14)


def test_cat_raw_norm_closed_form():
    # separation d with sigma d = 4: overlap of the two halves is exp(-4)
    c = pk.cat(4.0, 1, 1.0)
    assert c.raw_norm_sq == pytest.approx(2 * (1 + math.exp(-4.0)), rel=1e-10)
    odd = pk.cat(4.0, 1, 1.0, weights=(1.0, -1.0))
    assert odd.raw_norm_sq == pytest.approx(2 * (1 - math.exp(-4.0)), rel=1e-10)


def test_cat_collapses_when_components_coincide():
    c = pk.cat(0.0, 1, 0.9)
    assert c.kind == "gaussian"
    assert c == pk.gaussian(1, 0.9)


def test_density_is_hermitian():
    c = pk.cat(2.0, 2, 1.0, weights=(1.0, 0.5j))
    rng = np.random.default_rng(3)
    p = rng.normal(size=(20, 2))
    k = rng.normal(size=(20, 2))
    assert np.allclose(pk.density(c, p, -k), np.conj(pk.density(c, p, k)), atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-2, 2))
def test_shift_multiplies_density_by_phase(b, p, k):
    g = pk.airy(0.7, 1, 1.1)
    ratio = pk.density(pk.shifted(g, b), p, k) / pk.density(g, p, k)
    assert ratio == pytest.approx(np.exp(-1j * b * k), abs=1e-9)


def test_vortex_orthogonality_and_shifted_overlap():
    a = pk.vortex(1, 1.0, 0.5)
    b = pk.vortex(2, 1.0, 0.5)
    assert abs(pk.overlap(a, b)) < 1e-8
    # a position shift multiplies by exp(-i b.p), which carries every l
    moved = pk.shifted(b, (1.0, 0.0))
    assert abs(pk.overlap(a, moved)) > 1e-3


def test_moments_of_shifted_gaussian():
    g = pk.gaussian(2, (0.5, 2.0), mean_p=(0.3, -1.0), shift_b=(1.5, -0.25))
    m = pk.moments(g)
    assert m.mean_p == pytest.approx([0.3, -1.0], abs=1e-9)
    assert m.cov_diag == pytest.approx([0.125, 2.0], rel=1e-8)
    assert m.mean_x == pytest.approx([1.5, -0.25], abs=1e-9)


def test_airy_centroid_moves():
    # cubic phase xi^3 d^3 / 3 shifts <x> by -xi^3 <d^2> = -xi^3 sigma^2 / 2
    xi, s = 0.8, 1.0
    m = pk.moments(pk.airy(xi, 1, s))
    assert m.mean_x[0] == pytest.approx(-(xi ** 3) * s * s / 2, rel=1e-8)


def test_vortex_harmonics_single_l():
    for ell in (-2, 0, 3):
        v = pk.vortex(ell, 1.0, 0.5)
        power = pk.angular_harmonics(v, 1.0, n_phi=64)
        assert power[32 + ell] == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("call", [
    lambda: pk.gaussian(1, -1.0),
    lambda: pk.gaussian(3, 1.0),
    lambda: pk.vortex(1, -0.5, 1.0),
    lambda: pk.make_packet("vortex", 1, 1.0, ell=1),
    lambda: pk.vortex(1, 1.0, (1.0, 2.0)),
    lambda: pk.make_packet("plane", 1),
    lambda: pk.cat(1.0, 1, 1.0, weights=(0.0, 0.0)),
    lambda: pk.gaussian(2, 1.0, mean_p=(1.0, 2.0, 3.0)),
])
def test_invalid_parameters(call):
    with pytest.raises(InvalidParameter):
        call()


@pytest.mark.parametrize("packet", [
    pk.gaussian(1, 0.7, shift_b=1.2),
    pk.airy(0.9, 1, 1.0),
    pk.vortex(1, 1.0, 0.5, shift_b=(0.5, 0.0)),
    pk.cat(3.0, 1, 1.0),
], ids=lambda p: p.kind)
def test_rescaled_keeps_norm_and_scales_position(packet):
    f = 3.0
    r = pk.rescaled(packet, f)
    assert pk.norm(r) == pytest.approx(1.0, abs=1e-8)
    assert pk.momentum_scale(r) == pytest.approx(f * pk.momentum_scale(packet))
    assert pk.moments(r).mean_x == pytest.approx(pk.moments(packet).mean_x / f, abs=1e-9)


def test_gradient_matches_differences():
    v = pk.vortex(2, 1.0, 0.7, mean_p=(0.1, 0.2), shift_b=(0.3, -0.4))
    p = np.array([0.9, -0.6])
    h = 1e-6
    grad = pk.gradient(v, p)
    for a in range(2):
        e = np.zeros(2)
        e[a] = h
        fd = (pk.amplitude(v, p + e) - pk.amplitude(v, p - e)) / (2 * h)
        assert grad[a] == pytest.approx(fd, rel=1e-6)
