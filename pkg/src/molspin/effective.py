"""Effective two-level descriptions of molecular spin-1/2 encodings.

Three constructions are provided:

* the 2Sigma avoided level crossing (ALC) between |0~0,+1/2,M_I> and
  |1~1,-1/2,M_I>, both as the analytic three-level / two-level models and
  from the full hyperfine-resolved spectrum;
* microwave-dressed 1Sigma states in the rotating frame (RWA), coupled to a
  bare rotational state through the quadrupole-induced admixture;
* bare 1Sigma encodings |0~0,M> / |1~0,M'>.
"""

import logging
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from . import units
from .angular import BasisKet, build_basis
from .molecule import (
    ALL_TERMS,
    DipoleTriple,
    FieldPoint,
    StructureError,
    block_spectrum,
    dipole_operator,
    reference_assignment,
    state_label,
)

log = logging.getLogger(__name__)


class BracketError(RuntimeError):
    pass


@dataclass(frozen=True)
class TwoLevelEffective:
    e_up: float  # MHz
    e_down: float
    v: float
    provenance: str = "analytic"

    def matrix(self):
        return np.array([[self.e_up, self.v], [self.v, self.e_down]])


@dataclass(frozen=True)
class EffectiveSpinHalf:
    up_composition: np.ndarray
    down_composition: np.ndarray
    component_labels: tuple
    dipoles: DipoleTriple | None
    gap: float  # E_up - E_down, MHz
    d_cross_bound: float | None = None


@dataclass(frozen=True)
class DressedPair:
    Omega: float
    Delta: float
    c0_plus: float
    c1_plus: float
    c0_minus: float
    c1_minus: float
    E_plus: float
    E_minus: float


def _zeeman_half(spec, B):
    # Zeeman energy of M_S = +1/2; equals mu_0 B for g_S = 2
    return 0.5 * spec.g_S * units.BOHR_MAGNETON_MHZ_PER_G * B


def _require_2sigma(spec):
    if spec.kind != "2Sigma":
        raise StructureError(f"{spec.name} is not a 2Sigma molecule")


def alc_three_level(spec, point):
    """Hamiltonian over {|0 0 +1/2>, |1 0 +1/2>, |1 1 -1/2>} (hyperfine omitted)."""
    _require_2sigma(spec)
    muB = _zeeman_half(spec, point.B)
    Ed = units.stark_mhz(point.E, spec.d)
    Be, g = spec.B_e, spec.gamma
    return np.array([
        [muB, -Ed / np.sqrt(3), 0.0],
        [-Ed / np.sqrt(3), 2 * Be + muB, g / np.sqrt(2)],
        [0.0, g / np.sqrt(2), 2 * Be - muB - g / 2],
    ])


def alc_effective_2x2(spec, point):
    """Weak-field effective Hamiltonian over {|0~0 +1/2>, |1~1 -1/2>}."""
    _require_2sigma(spec)
    Ed = units.stark_mhz(point.E, spec.d)
    beta = Ed / spec.B_e
    if beta > 0.3:
        warnings.warn(f"beta_E = {beta:.2f} is outside the weak-field regime", stacklevel=2)
    muB = _zeeman_half(spec, point.B)
    return TwoLevelEffective(
        e_up=muB - Ed**2 / (6 * spec.B_e),
        e_down=2 * spec.B_e - muB - spec.gamma / 2,
        v=Ed * spec.gamma / (2 * np.sqrt(6) * spec.B_e),
        provenance="analytic",
    )


def crossing_field_analytic(spec, E):
    """B_c (Gauss) from 2 mu_0 B_c = 2 B_e - gamma/2 + (Ed)^2 / (6 B_e)."""
    _require_2sigma(spec)
    Ed = units.stark_mhz(E, spec.d)
    rhs = 2 * spec.B_e - spec.gamma / 2 + Ed**2 / (6 * spec.B_e)
    return rhs / (2 * _zeeman_half(spec, 1.0))


@dataclass(frozen=True)
class Crossing:
    B_c: float  # Gauss
    gap: float  # MHz, achieved minimum gap (0 for the analytic path)
    method: str


def _golden_refine(gap_fn, lo, hi, xatol):
    res = minimize_scalar(gap_fn, bounds=(lo, hi), method="bounded",
                          options={"xatol": xatol, "maxiter": 500})
    return float(res.x), float(res.fun)


def alc_pair_kets(M_I):
    """The diabatic kets |0 0 +1/2 M_I> and |1 1 -1/2 M_I> of a single-nucleus 2Sigma molecule."""
    tm = int(round(2 * M_I))
    return BasisKet(0, 0, 1, (tm,)), BasisKet(1, 2, -1, (tm,))


def _pair_indices(w, v, basis, ket_a, ket_b):
    ia, ib = basis.position(ket_a), basis.position(ket_b)
    sa = int(np.argmax(v[ia] ** 2))
    sb = int(np.argmax(v[ib] ** 2))
    if sa == sb:
        # fully mixed; take the two states with the largest combined weight
        wsum = v[ia] ** 2 + v[ib] ** 2
        sa, sb = np.sort(np.argsort(wsum)[-2:])
    return sa, sb


def crossing_field_numeric(spec, E, ket_a, ket_b, bracket, basis=None, step=5.0,
                           xatol=1e-3, include=ALL_TERMS):
    """Gap-minimum field between two states identified by their diabatic kets.

    A coarse scan over ``bracket`` locates the minimum of |E_a - E_b| using the
    states of largest weight on each ket; the minimum is then refined on the
    gap between the two adjacent adiabatic levels.
    """
    if basis is None:
        basis = build_basis(spec, 2)
    if ket_a.twoMF != ket_b.twoMF:
        raise StructureError("states of different M_F do not form an avoided crossing")
    twoMF = ket_a.twoMF
    lo, hi = bracket
    Bs = np.arange(lo, hi + step / 2, step)
    gaps = []
    for B in Bs:
        w, v = block_spectrum(spec, FieldPoint(E, B), basis, twoMF, include)
        sa, sb = _pair_indices(w, v, basis, ket_a, ket_b)
        gaps.append(abs(w[sa] - w[sb]))
    gaps = np.array(gaps)
    k = int(np.argmin(gaps))
    if k == 0 or k == len(Bs) - 1:
        raise BracketError(f"no gap minimum inside [{lo}, {hi}] G (edge at {Bs[k]} G)")

    w, v = block_spectrum(spec, FieldPoint(E, Bs[k]), basis, twoMF, include)
    sa, sb = sorted(_pair_indices(w, v, basis, ket_a, ket_b))
    if sb - sa != 1:
        raise BracketError("the two states are not adjacent near the gap minimum")

    def adiabatic_gap(B):
        w, _ = block_spectrum(spec, FieldPoint(E, B), basis, twoMF, include)
        return w[sb] - w[sa]

    B_c, g = _golden_refine(adiabatic_gap, Bs[k - 1], Bs[k + 1], xatol)
    return Crossing(B_c, g, "numeric")


def crossing_field(spec, E, method="analytic", **kw):
    """Crossing field; ``method`` is 'analytic' (closed form) or 'numeric' (gap minimum)."""
    if method == "analytic":
        return Crossing(crossing_field_analytic(spec, E), 0.0, "analytic")
    if method == "numeric":
        M_I = kw.pop("M_I", -0.5)
        ket_a, ket_b = kw.pop("kets", alc_pair_kets(M_I))
        bracket = kw.pop("bracket", None)
        if bracket is None:
            guess = crossing_field_analytic(spec, E)
            bracket = (0.85 * guess, 1.1 * guess)
        return crossing_field_numeric(spec, E, ket_a, ket_b, bracket, **kw)
    raise ValueError(f"unknown method {method!r}")


def _two_level_eigen(H):
    w, v = np.linalg.eigh(H)
    v = v.copy()
    for j in range(2):
        if v[0, j] < 0 or (v[0, j] == 0 and v[1, j] < 0):
            v[:, j] *= -1
    return w, v


def mixing_amplitudes(model):
    """Eigenvectors of a TwoLevelEffective; |up> is the upper eigenstate.

    Returns an EffectiveSpinHalf without dipoles; compositions are over the
    model's own basis (first, second), phase-fixed so the first entry is >= 0.
    """
    w, v = _two_level_eigen(model.matrix())
    return EffectiveSpinHalf(v[:, 1], v[:, 0], ("first", "second"), None, float(w[1] - w[0]))


def dressed_pair(E_1M, Omega, Delta=0.0):
    """Rotating-frame dressed states of a resonantly driven |0~> <-> |1~> transition.

    In the frame rotating with the drive the bare |0~> sits at E_1M + Delta
    and |1~> at E_1M; the drive couples them with Omega/2 (RWA).
    """
    if Omega <= 0:
        raise ValueError("Rabi frequency must be positive")
    H = np.array([[E_1M + Delta, Omega / 2], [Omega / 2, E_1M]])
    w, v = _two_level_eigen(H)
    return DressedPair(Omega, Delta, v[0, 1], v[1, 1], v[0, 0], v[1, 0], w[1], w[0])


# ---------------------------------------------------------------------------
# 1Sigma microwave-dressed ALC


@dataclass
class DressedEncoding:
    """Vectors and energies needed for the dressed |-,M> / |1~-1,M'> two-level model."""

    spec: object
    basis: object
    point: FieldPoint
    v0: np.ndarray  # |0~0,M>
    v1: np.ndarray  # |1~0,M>
    vb: np.ndarray  # |1~-1,M'>
    e0: float
    e1: float
    eb: float


def dressed_encoding_states(spec, point, basis, ket0, ket1, ketb):
    """Eigenvectors of the three bare states at ``point``, assigned through the hyperfine-free reference."""
    e, v, _ = reference_assignment(spec, point, basis, [ket0, ket1, ketb])
    return DressedEncoding(spec, basis, point, v[:, 0], v[:, 1], v[:, 2], e[0], e[1], e[2])


def dressed_encoding_from_track(track, label0, label1, labelb, point_index):
    spec, basis = track.spec, track.basis
    e = track.energies[point_index]
    return DressedEncoding(
        spec, basis, track.sweep[point_index],
        track.vector(label0, point_index), track.vector(label1, point_index),
        track.vector(labelb, point_index),
        e[track.index(label0)], e[track.index(label1)], e[track.index(labelb)])


def quadrupole_coupling(enc, dressed):
    """Coupling V_MM' (MHz) between the dressed |-,M> and the bare |1~-1,M'>.

    In the rotating frame the drive acts on the |0~0,M> component of |-,M>.
    The quadrupole interaction gives |1~-1,M'> a small admixture of the
    driven rotational state, so the same drive couples it with strength
    (Omega/2) <0~0,M|d_0|1~-1,M'> / <0~0,M|d_0|1~0,M>. This vanishes
    identically when the quadrupole constants are zero.
    """
    D = dipole_operator(enc.spec, enc.basis, 0)
    d01 = enc.v0 @ D @ enc.v1
    d0b = enc.v0 @ D @ enc.vb
    return float(dressed.c0_minus * dressed.Omega / 2 * d0b / d01)


def quadrupole_matrix_element(enc, dressed):
    """<-,M| H_eQ |1~-1,M'> evaluated literally between exact eigenvectors (MHz)."""
    from .molecule import term_operator

    Q = term_operator(enc.spec, enc.basis, "quadrupole")
    minus = dressed.c0_minus * enc.v0 + dressed.c1_minus * enc.v1
    return float(minus @ Q @ enc.vb)


def dressed_two_level(enc, Omega, Delta=0.0):
    """TwoLevelEffective over (|-,M>, |1~-1,M'>) in the rotating frame.

    The dressed level sits at E(1~0,M) + Delta/2 - sqrt(Omega^2+Delta^2)/2
    relative to the rotating frame of the drive; the bare N~=1 state keeps
    its molecular energy.
    """
    pair = dressed_pair(enc.e1, Omega, Delta)
    V = quadrupole_coupling(enc, pair)
    return TwoLevelEffective(pair.E_minus, enc.eb, V, provenance="numeric"), pair


def dressed_crossing_field(spec, E, basis, ket0, ket1, ketb, Omega, bracket, Delta=0.0,
                           xatol=1e-3):
    """B where the diagonal energies of the dressed two-level model coincide."""

    def detuning(B):
        enc = dressed_encoding_states(spec, FieldPoint(E, B), basis, ket0, ket1, ketb)
        model, _ = dressed_two_level(enc, Omega, Delta)
        return model.e_up - model.e_down

    lo, hi = bracket
    Bs = np.linspace(lo, hi, 31)
    vals = np.array([detuning(B) for B in Bs])
    sign_change = np.where(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
    if len(sign_change) == 0:
        raise BracketError(f"dressed levels do not cross inside [{lo}, {hi}] G")
    k = sign_change[0]
    a, b = Bs[k], Bs[k + 1]
    fa = vals[k]
    while b - a > xatol:
        m = 0.5 * (a + b)
        fm = detuning(m)
        if np.sign(fm) == np.sign(fa):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


# ---------------------------------------------------------------------------
# EffectiveSpinHalf construction


def _dipoles(D, u, w):
    return DipoleTriple(float(u @ D @ u), float(w @ D @ w), float(u @ D @ w))


def spin_half_from_alc(spec, point, basis, M_I=-0.5, include=ALL_TERMS):
    """Encoding from the two adiabatic eigenstates of the full 2Sigma spectrum near the ALC.

    Compositions are taken over the diabatic pair, defined inside the
    two-dimensional adiabatic subspace as the eigenbasis of S_z (the two
    zeroth-order states carry opposite M_S).
    """
    ket_a, ket_b = alc_pair_kets(M_I)
    w, v = block_spectrum(spec, point, basis, ket_a.twoMF, include)
    sa, sb = sorted(_pair_indices(w, v, basis, ket_a, ket_b))
    lower, upper = v[:, sa], v[:, sb]
    P = np.column_stack([upper, lower])
    Sz = np.diag([k.MS for k in basis.kets])
    sz2 = P.T @ Sz @ P
    _, rot = np.linalg.eigh(sz2)
    # rot columns: ascending S_z -> (|1~1,-1/2>, |0~0,+1/2>)
    diabatic = (rot[:, 1], rot[:, 0])
    comp_up = np.array([diabatic[0][0], diabatic[1][0]])
    comp_down = np.array([diabatic[0][1], diabatic[1][1]])
    for c in (comp_up, comp_down):
        if c[0] < 0:
            c *= -1
    D = dipole_operator(spec, basis, 0)
    return EffectiveSpinHalf(
        comp_up, comp_down, (state_label(ket_a), state_label(ket_b)),
        _dipoles(D, upper, lower), float(w[sb] - w[sa]))


def spin_half_from_alc_analytic(spec, point):
    """Encoding from the analytic two-level model with dipoles from the 3x3 problem.

    Dipoles use the zeroth-order states of the three-level model:
    |0~0 +1/2> = c0|00+> + c1|10+> from the Stark block, and |1 1 -1/2>.
    """
    model = alc_effective_2x2(spec, point) if units.stark_mhz(point.E, spec.d) / spec.B_e <= 0.3 \
        else _quiet_2x2(spec, point)
    res = mixing_amplitudes(model)
    Ed = units.stark_mhz(point.E, spec.d)
    # Stark block {|00+>, |10+>} ground vector
    w, v = np.linalg.eigh(np.array([[0.0, -Ed / np.sqrt(3)], [-Ed / np.sqrt(3), 2 * spec.B_e]]))
    c0, c1 = abs(v[0, 0]), abs(v[1, 0])
    # dipole operator over {|00+>, |10+>, |11->} (units of d)
    d3 = spec.d * np.array([[0, 1 / np.sqrt(3), 0], [1 / np.sqrt(3), 0, 0], [0, 0, 0]])
    zero_a = np.array([c0, c1, 0.0])
    zero_b = np.array([0.0, 0.0, 1.0])
    up = res.up_composition[0] * zero_a + res.up_composition[1] * zero_b
    down = res.down_composition[0] * zero_a + res.down_composition[1] * zero_b
    return EffectiveSpinHalf(res.up_composition, res.down_composition,
                             ("|0~,0,1/2>", "|1~,1,-1/2>"), _dipoles(d3, up, down), res.gap)


def _quiet_2x2(spec, point):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return alc_effective_2x2(spec, point)


def spin_half_from_dressed(enc, Omega, Delta=0.0):
    """Encoding |up/down> = c|-,M> + c'|1~-1,M'> from the dressed two-level model."""
    model, pair = dressed_two_level(enc, Omega, Delta)
    res = mixing_amplitudes(model)
    minus = pair.c0_minus * enc.v0 + pair.c1_minus * enc.v1
    up = res.up_composition[0] * minus + res.up_composition[1] * enc.vb
    down = res.down_composition[0] * minus + res.down_composition[1] * enc.vb
    D = dipole_operator(enc.spec, enc.basis, 0)
    return EffectiveSpinHalf(res.up_composition, res.down_composition, ("|-,M>", "|1~-1,M'>"),
                             _dipoles(D, up, down), res.gap)


def spin_half_from_bare(track, label_up, label_down, point_index):
    """Bare 1Sigma encoding, e.g. |up> = |0~0,M>, |down> = |1~0,M'>.

    ``d_cross_bound`` records max_q |<up|d_q|down>| over q = 0, +-1, which
    the nuclear-spin selection rule suppresses at high field.
    """
    u, w = track.vector(label_up, point_index), track.vector(label_down, point_index)
    D0 = dipole_operator(track.spec, track.basis, 0)
    bound = max(abs(u @ dipole_operator(track.spec, track.basis, q) @ w) for q in (-1, 0, 1))
    e = track.energies[point_index]
    gap = e[track.index(label_up)] - e[track.index(label_down)]
    return EffectiveSpinHalf(np.array([1.0, 0.0]), np.array([0.0, 1.0]), (label_up, label_down),
                             _dipoles(D0, u, w), float(gap), float(bound))


def build_effective_spin_half(source, **inputs):
    """Dispatch on ``source`` in {'alc', 'alc-analytic', 'dressed', 'bare-encoding'}."""
    if source == "alc":
        return spin_half_from_alc(**inputs)
    if source == "alc-analytic":
        return spin_half_from_alc_analytic(**inputs)
    if source == "dressed":
        return spin_half_from_dressed(**inputs)
    if source == "bare-encoding":
        return spin_half_from_bare(**inputs)
    raise ValueError(f"unknown encoding source {source!r}")


# ---------------------------------------------------------------------------
# rotor model


def rotor_dipoles(beta_E, N_max=8):
    """(d_0~0, d_1~0) / d of a bare rigid rotor at reduced field beta_E = Ed/B_e."""
    from .molecule import MoleculeSpec, diagonalize

    rotor = MoleculeSpec("rotor", "1Sigma", B_e=1.0, d=1.0)
    basis = build_basis(rotor, N_max, total_MF_filter=0)
    E = beta_E / units.DEBYE_KV_PER_CM_MHZ
    e, v, _ = diagonalize(rotor, FieldPoint(E, 0.0), basis)
    D = dipole_operator(rotor, basis, 0)
    return float(v[:, 0] @ D @ v[:, 0]), float(v[:, 1] @ D @ v[:, 1])
