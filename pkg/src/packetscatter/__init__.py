"""Non-plane-wave corrections in 2 -> 2 scattering of structured wave packets."""
from __future__ import annotations

__version__ = "0.1.0"

from .amplitudes import AmplitudeModel, evaluate, phase_gradient, plane_wave_dsigma_dt
from .correction import (ScatteringScenario, atom_scale_asymmetry, azimuthal_asymmetry,
                         effective_dipole, first_order_ratio)
from .errors import *  # noqa: F401,F403
from .kinematics import FourMomentum, cm_momentum, mandelstam, paraxiality
from .oracle import OracleConfig, averaged_bilinear, scaling_probe, wkb_remainder
from .packets import WavePacket, make_packet
from .wigner import PhaseSpaceGrid, negativity_volume, wigner_transform

__all__ = [
    "AmplitudeModel", "FourMomentum", "OracleConfig", "PhaseSpaceGrid", "ScatteringScenario",
    "WavePacket", "atom_scale_asymmetry", "averaged_bilinear", "azimuthal_asymmetry",
    "cm_momentum", "effective_dipole", "evaluate", "first_order_ratio", "make_packet",
    "mandelstam", "negativity_volume", "paraxiality", "phase_gradient",
    "plane_wave_dsigma_dt", "scaling_probe", "wigner_transform", "wkb_remainder",
]
