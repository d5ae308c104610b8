from __future__ import annotations

import math

import pytest

from packetscatter import amplitudes as amp
from packetscatter import correction as corr
from packetscatter import packets as pk
from packetscatter.kinematics import sqrt_s_for_momentum

M_E = 0.51099895          # MeV
KE = 0.3                  # 300 keV beams
P_CM = math.sqrt((M_E + KE) ** 2 - M_E ** 2)
SQRT_S = sqrt_s_for_momentum(P_CM, M_E, M_E)


def log_phase(eta=1.0):
    return amp.AmplitudeModel("log_phase", eta=eta)


def gaussian_scenario(eps, b_over_sigma_x=1.0, model=None, dim=1, n_phi=16, phi_offset=0.0,
                      sqrt_s=SQRT_S):
    """Two equal Gaussian electrons with sigma_p = eps * m and impact b along x."""
    sp = eps * M_E
    impact = [b_over_sigma_x / sp] + [0.0] * (dim - 1)
    return corr.ScatteringScenario(M_E, M_E, pk.gaussian(dim, sp), pk.gaussian(dim, sp),
                                   model or log_phase(), sqrt_s, impact=impact,
                                   n_phi=n_phi, phi_offset=phi_offset)


@pytest.fixture
def electron():
    return gaussian_scenario(1e-3)
