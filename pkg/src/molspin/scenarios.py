"""Ready-made encodings and sweeps for the KRb and YO protocols.

These wrap the lower-level modules with the state choices used throughout
the demos, the command line and the acceptance checks.
"""

import numpy as np

from . import units
from .angular import BasisKet, build_basis
from .couplings import LatticeGeometry, coupling_constants, coupling_map
from .effective import (
    alc_pair_kets,
    crossing_field,
    dressed_crossing_field,
    dressed_encoding_states,
    dressed_two_level,
    quadrupole_coupling,
    rotor_dipoles,
    spin_half_from_alc,
    spin_half_from_bare,
    spin_half_from_dressed,
)
from .molecule import (
    FieldPoint,
    differential_stark_shift,
    get_molecule,
    reference_track,
    state_label,
)


def krb_ket(N, MN, MI):
    return BasisKet(N, 2 * MN, None, tuple(int(round(2 * m)) for m in MI))


def krb_label(N, MN, MI):
    return state_label(krb_ket(N, MN, MI))


# Ising encoding: up = |0~0,-3,-1/2>, down = |1~0,-4,1/2>, both M_F = -7/2
ISING_UP = (0, 0, (-3, -0.5))
ISING_DOWN = (1, 0, (-4, 0.5))
# microwave transitions compared in the selectivity analysis
MAIN_TRANSITION = ((0, 0, (-4, 0.5)), (1, 0, (-4, 0.5)))
COMPETING_TRANSITION = ((0, 0, (-3, -0.5)), (1, 0, (-3, -0.5)))
# dressed XXZ encoding, M = (-2,-3/2), M' = (-4,3/2)
DRESSED_KETS = ((0, 0, (-2, -1.5)), (1, 0, (-2, -1.5)), (1, -1, (-4, 1.5)))
KRB_MF = -3.5


def krb_ising_track(E_values, B=400.0, N_max=5, spec=None):
    """Track the Ising and transition states of KRb along an E sweep at fixed B."""
    spec = spec or get_molecule("KRb")
    basis = build_basis(spec, N_max, total_MF_filter=KRB_MF)
    kets = list(dict.fromkeys(krb_ket(*s) for s in
                              (ISING_UP, ISING_DOWN, *MAIN_TRANSITION, *COMPETING_TRANSITION)))
    sweep = [FieldPoint(float(E), B) for E in E_values]
    return reference_track(spec, basis, sweep, kets)


def krb_ising_encoding(track, point_index):
    return spin_half_from_bare(track, krb_label(*ISING_UP), krb_label(*ISING_DOWN), point_index)


def krb_stark_shift(track, point_index):
    main = tuple(krb_label(*s) for s in MAIN_TRANSITION)
    comp = tuple(krb_label(*s) for s in COMPETING_TRANSITION)
    return differential_stark_shift(track, main, comp, point_index)


def krb_ising_couplings(E=20.0, B=400.0, a=500.0, L=6, dims=1, N_max=5):
    """Encoding, constants and coupling map for the KRb Ising protocol at (E, B)."""
    track = krb_ising_track([E], B, N_max)
    eff = krb_ising_encoding(track, 0)
    consts = coupling_constants(eff)
    cmap = coupling_map(LatticeGeometry(dims, L, a), consts)
    return eff, consts, cmap


def krb_dressed_setup(E=0.0, Omega=2.1, Delta=0.0, N_max=4, bracket=(150.0, 300.0), spec=None):
    """Crossing field, encoding states and V for the microwave-dressed KRb crossing."""
    spec = spec or get_molecule("KRb")
    basis = build_basis(spec, N_max, total_MF_filter=KRB_MF)
    kets = [krb_ket(*k) for k in DRESSED_KETS]
    B_c = dressed_crossing_field(spec, E, basis, *kets, Omega, bracket, Delta)
    enc = dressed_encoding_states(spec, FieldPoint(E, B_c), basis, *kets)
    model, pair = dressed_two_level(enc, Omega, Delta)
    return B_c, enc, model, pair


def krb_dressed_scan(B_values, E=0.0, Omega=2.1, Delta=0.0, N_max=4, spec=None):
    """Per-B dressed encoding: energies, V and dipoles."""
    spec = spec or get_molecule("KRb")
    basis = build_basis(spec, N_max, total_MF_filter=KRB_MF)
    kets = [krb_ket(*k) for k in DRESSED_KETS]
    rows = []
    for B in B_values:
        enc = dressed_encoding_states(spec, FieldPoint(E, float(B)), basis, *kets)
        model, pair = dressed_two_level(enc, Omega, Delta)
        eff = spin_half_from_dressed(enc, Omega, Delta)
        rows.append((float(B), model, quadrupole_coupling(enc, pair), eff))
    return rows


def yo_alc_scan(B_values, E=5.0, N_max=3, M_I=-0.5, spec=None):
    """EffectiveSpinHalf at each B across the YO avoided crossing."""
    spec = spec or get_molecule("YO")
    basis = build_basis(spec, N_max)
    return [spin_half_from_alc(spec, FieldPoint(E, float(B)), basis, M_I) for B in B_values]


def yo_crossing(E=5.0, N_max=3, M_I=-0.5, spec=None):
    spec = spec or get_molecule("YO")
    basis = build_basis(spec, N_max)
    return crossing_field(spec, E, method="numeric", basis=basis, kets=alc_pair_kets(M_I))


def rotor_jz_curve(betas, N_max=8):
    """(d_up/d, d_down/d, J_z/d^2) of the hyperfine-free rotor over reduced fields."""
    out = np.array([rotor_dipoles(b, N_max) for b in betas])
    return out[:, 0], out[:, 1], (out[:, 0] - out[:, 1]) ** 2


def nn_hz(consts_debye2, a=500.0):
    """d^2/a^3 in Hz for a Debye^2 coupling constant."""
    return units.dipolar_hz(consts_debye2, a)
