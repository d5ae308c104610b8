"""Unit conversion between natural units (hbar = c = 1, MeV) and nm / keV."""

HBARC_EV_NM = 197.327
HBARC_MEV_NM = HBARC_EV_NM * 1e-6


def nm_to_natural(length_nm):
    """Length in nm -> inverse MeV."""
    return length_nm / HBARC_MEV_NM


def natural_to_nm(length):
    return length * HBARC_MEV_NM


def kev_to_mev(value_kev):
    return value_kev * 1e-3


def mev_to_kev(value_mev):
    return value_mev * 1e3


def sigma_p_from_sigma_x(sigma_x):
    """Momentum width for a position width, using sigma_p = 1/sigma_x."""
    return 1.0 / sigma_x
