from __future__ import annotations

import math

import numpy as np
import pytest

from packetscatter import packets as pk
from packetscatter import wigner as wg
from packetscatter.errors import AliasingDetected, GridTooCoarse, InvalidParameter

GRID1 = wg.PhaseSpaceGrid(1, -8.0, 8.0, 128, -8.0, 8.0, 128)


def gaussian_wigner(r, p, sigma, b=0.0, mu=0.0):
    # closed form for one Gaussian axis, sigma_x = 1 / sigma
    return np.exp(-((p - mu) / sigma) ** 2 - (sigma * (r - b)) ** 2) / math.pi


def test_gaussian_matches_closed_form():
    g = pk.gaussian(1, 1.2, mean_p=0.5, shift_b=-1.0)
    w = wg.wigner_transform(g, GRID1)
    R, P = np.meshgrid(GRID1.r, GRID1.p, indexing="ij")
    ref = gaussian_wigner(R, P, 1.2, -1.0, 0.5)
    assert np.max(np.abs(w.values - ref)) < 1e-10
    assert w.normalization == pytest.approx(1.0, abs=1e-10)
    assert w.imag_residual < 1e-12


def test_cat_agrees_with_direct_quadrature():
    c = pk.cat(4.0, 1, 1.0)
    w = wg.wigner_transform(c, GRID1)
    rng = np.random.default_rng(11)
    for _ in range(6):
        i, j = rng.integers(32, 96, size=2)
        direct = wg.wigner_point(c, GRID1.r[i], GRID1.p[j])
        assert w.values[i, j] == pytest.approx(direct, abs=1e-9)


def test_cat_interference_is_negative():
    # even cat: W(0, p) = [g(0,p) + cos(p d) g-part] / N, negative near p d = pi
    c = pk.cat(6.0, 1, 1.0)
    w = wg.wigner_transform(c, GRID1)
    assert w.values.min() < -0.1
    assert wg.negativity_volume(w) > 0.1
    assert wg.negativity_volume(wg.wigner_transform(pk.gaussian(1, 1.0), GRID1)) < 1e-12


def test_marginals_match_densities():
    c = pk.cat(3.0, 1, 1.0, weights=(1.0, 0.6j))
    w = wg.wigner_transform(c, GRID1)
    mom, pos = wg.marginals(w)
    assert mom == pytest.approx(np.abs(pk.amplitude(c, GRID1.p)) ** 2, abs=1e-10)
    xs = GRID1.r[::16]
    assert pos[::16] == pytest.approx(wg.position_density(c, xs), abs=1e-9)


def test_negativity_scan_monotone_with_onset():
    scan = wg.negativity_scale([0.0, 1.0, 2.0, 3.0, 4.0, 6.0])
    assert scan.negativity[0] < 1e-12
    assert np.all(np.diff(scan.negativity) >= -1e-12)
    assert scan.onset is not None and 1.0 <= scan.onset <= 3.0
    with pytest.raises(InvalidParameter):
        wg.negativity_scale([2.0, 1.0])


def test_translation_covariance():
    g = pk.airy(0.6, 1, 1.0)
    shift = 4 * GRID1.dr
    a = wg.wigner_transform(g, GRID1)
    b = wg.wigner_transform(pk.shifted(g, shift), GRID1)
    moved = wg.translate(a, [4])
    ok = ~np.isnan(moved)
    assert np.max(np.abs(b.values[ok] - moved[ok])) < 1e-10


def test_parity_of_centred_cat():
    c = pk.cat(3.0, 1, 1.0)
    w = wg.wigner_transform(c, GRID1)
    # the half-open grid contains the origin at index N/2; mirror about it
    v = w.values[1:, 1:]
    assert np.max(np.abs(v - v[::-1, ::-1])) < 1e-12


def test_gaussian_is_positive_everywhere():
    w = wg.wigner_transform(pk.gaussian(1, 0.8, shift_b=1.0), GRID1)
    assert w.values.min() > -1e-12


def test_two_dimensional_product():
    grid = wg.PhaseSpaceGrid(2, -6.0, 6.0, 64, -8.0, 8.0, 32)
    g = pk.gaussian(2, (1.0, 1.5), shift_b=(0.5, 0.0))
    w = wg.wigner_transform(g, grid)
    r, p = grid.r, grid.p
    ref = (gaussian_wigner(r[:, None, None, None], p[None, None, :, None], 1.0, 0.5)
           * gaussian_wigner(r[None, :, None, None], p[None, None, None, :], 1.5))
    assert np.max(np.abs(w.values - ref)) < 1e-9
    assert w.normalization == pytest.approx(1.0, abs=1e-6)


def test_vortex_two_dimensional_is_normalized():
    # a thin ring keeps the phase singularity at p = 0 negligible, so the
    # position tails are Gaussian and a finite grid holds the function
    grid = wg.PhaseSpaceGrid(2, -12.0, 12.0, 64, -4.0, 4.0, 32)
    v = pk.vortex(1, 2.0, 0.4)
    w = wg.wigner_transform(v, grid)
    assert w.normalization == pytest.approx(1.0, abs=1e-3)
    assert wg.negativity_volume(w) > 0.1
    r, p = grid.r, grid.p
    direct = wg.wigner_point(v, (r[33], r[31]), (p[20], p[12]), rtol=1e-8)
    assert w.values[33, 31, 20, 12] == pytest.approx(direct, abs=1e-8)


def test_grid_errors():
    g = pk.gaussian(1, 1.0)
    # edges at 3.5 sigma_x: almost all the weight is inside, the tail is not
    edge = wg.PhaseSpaceGrid(1, -3.5, 3.5, 64, -8.0, 8.0, 64)
    with pytest.raises(AliasingDetected):
        wg.wigner_transform(g, edge)
    narrow_r = wg.PhaseSpaceGrid(1, -1.5, 1.5, 64, -8.0, 8.0, 64)
    with pytest.raises(GridTooCoarse):
        wg.wigner_transform(g, narrow_r)
    with pytest.raises(InvalidParameter):
        wg.wigner_transform(g, wg.PhaseSpaceGrid(1, -8.0, 8.0, 64, -1.0, 1.0, 64))
    with pytest.raises(InvalidParameter):
        wg.PhaseSpaceGrid(1, -1.0, 1.0, 100, -1.0, 1.0, 64)
    with pytest.raises(InvalidParameter):
        wg.wigner_transform(g, GRID1, pad=1)


def test_csv_round_trip(tmp_path):
    w = wg.wigner_transform(pk.cat(3.0, 1, 1.0), wg.PhaseSpaceGrid(1, -8, 8, 64, -8, 8, 64))
    path = tmp_path / "w.csv"
    wg.write_csv(w, path)
    back = wg.read_csv(path)
    assert back.grid == w.grid
    assert np.array_equal(back.values, w.values)
    assert wg.negativity_volume(back) == wg.negativity_volume(w)
    with open(path) as fh:
        assert fh.readline().strip() == wg.CSV_HEADER


def test_threads_do_not_change_values():
    c = pk.cat(3.0, 1, 1.0)
    a = wg.wigner_transform(c, GRID1, threads=1)
    b = wg.wigner_transform(c, GRID1, threads=3)
    assert np.array_equal(a.values, b.values)
