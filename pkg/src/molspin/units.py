"""Unit conversions. Energies are in MHz (ordinary frequency, E/h) throughout.

Dipolar couplings are reported as J/2pi in Hz, i.e. ordinary frequency; the
angular rate entering exp(-iHt) is 2*pi times that value.
"""

import scipy.constants as sc

DEBYE = 1e-21 / sc.c  # C m

#: mu_B / h in MHz per Gauss
BOHR_MAGNETON_MHZ_PER_G = sc.physical_constants["Bohr magneton in Hz/T"][0] * 1e-4 * 1e-6
#: mu_N / h in MHz per Gauss
NUCLEAR_MAGNETON_MHZ_PER_G = sc.physical_constants["nuclear magneton in MHz/T"][0] * 1e-4
#: (1 Debye)(1 kV/cm) / h in MHz
DEBYE_KV_PER_CM_MHZ = DEBYE * 1e5 / sc.h * 1e-6
#: (1 Debye)^2 / (4 pi eps0 (1 nm)^3) / h in Hz
DEBYE2_PER_NM3_HZ = DEBYE**2 / (4 * sc.pi * sc.epsilon_0 * 1e-27) / sc.h


def stark_mhz(E_kV_cm, d_debye):
    """E*d in MHz."""
    return E_kV_cm * d_debye * DEBYE_KV_PER_CM_MHZ


def dipolar_hz(d2_debye2, R_nm):
    """(d^2 / R^3) / h in Hz for d^2 in Debye^2 and R in nm."""
    return d2_debye2 * DEBYE2_PER_NM3_HZ / R_nm**3
