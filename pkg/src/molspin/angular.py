"""Angular-momentum machinery for the uncoupled molecular basis.

Half-integers are handled internally as doubled integers so that every
selection rule is an exact integer comparison.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import factorial, sqrt

import numpy as np


class AngularMomentumError(ValueError):
    pass


def _twice(x):
    """Return 2*x as an int, rejecting anything that is not a half-integer."""
    tx = 2 * Fraction(x).limit_denominator(1000)
    if tx.denominator != 1 or abs(float(tx) - 2 * float(x)) > 1e-9:
        raise AngularMomentumError(f"{x!r} is not a half-integer")
    return int(tx)


@lru_cache(maxsize=None)
def _wigner3j_doubled(tj1, tj2, tj3, tm1, tm2, tm3):
    """Racah sum on doubled arguments; returns the signed square as a Fraction."""
    if tm1 + tm2 + tm3 != 0:
        return Fraction(0)
    if abs(tm1) > tj1 or abs(tm2) > tj2 or abs(tm3) > tj3:
        return Fraction(0)
    if (tj1 + tm1) % 2 or (tj2 + tm2) % 2 or (tj3 + tm3) % 2:
        return Fraction(0)
    if tj3 > tj1 + tj2 or tj3 < abs(tj1 - tj2) or (tj1 + tj2 + tj3) % 2:
        return Fraction(0)

    a = (tj1 + tj2 - tj3) // 2
    b = (tj1 - tj2 + tj3) // 2
    c = (-tj1 + tj2 + tj3) // 2
    j1pm1, j1mm1 = (tj1 + tm1) // 2, (tj1 - tm1) // 2
    j2pm2, j2mm2 = (tj2 + tm2) // 2, (tj2 - tm2) // 2
    j3pm3, j3mm3 = (tj3 + tm3) // 2, (tj3 - tm3) // 2
    total = (tj1 + tj2 + tj3) // 2

    # squared prefactor: triangle coefficient times the m-dependent factorials
    pref2 = Fraction(
        factorial(a) * factorial(b) * factorial(c)
        * factorial(j1pm1) * factorial(j1mm1)
        * factorial(j2pm2) * factorial(j2mm2)
        * factorial(j3pm3) * factorial(j3mm3),
        factorial(total + 1),
    )

    # k runs over all values keeping every factorial argument non-negative
    kmin = max(0, (tj2 - tj3 - tm1) // 2, (tj1 - tj3 + tm2) // 2)
    kmax = min(a, j1mm1, j2pm2)

    s = 0
    for k in range(kmin, kmax + 1):
        denom = (
            factorial(k)
            * factorial(a - k)
            * factorial(j1mm1 - k)
            * factorial(j2pm2 - k)
            * factorial((tj3 - tj2 + tm1) // 2 + k)
            * factorial((tj3 - tj1 - tm2) // 2 + k)
        )
        s += Fraction((-1) ** k, denom)

    phase = -1 if ((tj1 - tj2 - tm3) // 2) % 2 else 1
    val2 = pref2 * s * s
    sign = phase * (1 if s > 0 else -1 if s < 0 else 0)
    return sign * val2


def wigner3j(j1, j2, j3, m1, m2, m3):
    """Wigner 3-j symbol (j1 j2 j3; m1 m2 m3).

    Arguments may be ints, floats or Fractions but must be half-integers.
    Exact zeros are returned when a selection rule fails.
    """
    tj = [_twice(j) for j in (j1, j2, j3)]
    tm = [_twice(m) for m in (m1, m2, m3)]
    if any(t < 0 for t in tj):
        raise AngularMomentumError("angular momenta must be non-negative")
    for t_j, t_m in zip(tj, tm):
        if abs(t_m) > t_j:
            raise AngularMomentumError(f"|m|={t_m / 2} exceeds j={t_j / 2}")
        if (t_j + t_m) % 2:
            raise AngularMomentumError("j and m must be both integer or both half-integer")
    signed = _wigner3j_doubled(*tj, *tm)
    if signed == 0:
        return 0.0
    return float(np.sign(float(signed))) * sqrt(abs(signed))


def wigner3j_squared_exact(j1, j2, j3, m1, m2, m3):
    """Signed square of the 3-j symbol as an exact Fraction (sign carries the 3-j sign)."""
    tj = [_twice(j) for j in (j1, j2, j3)]
    tm = [_twice(m) for m in (m1, m2, m3)]
    return _wigner3j_doubled(*tj, *tm)


def rotor_tensor(n1, m1, k, q, n2, m2):
    """<n1 m1| C^k_q |n2 m2> for the reduced spherical harmonic C^k_q."""
    if m1 != m2 + q:
        return 0.0
    if not abs(n1 - n2) <= k <= n1 + n2:
        return 0.0
    return (
        (-1) ** int(m1)
        * sqrt((2 * n1 + 1) * (2 * n2 + 1))
        * wigner3j(n1, k, n2, -m1, q, m2)
        * wigner3j(n1, k, n2, 0, 0, 0)
    )


@dataclass(frozen=True, order=True)
class BasisKet:
    """Uncoupled basis ket |N M_N>|S M_S>|I1 M_I1>... ; projections stored doubled."""

    N: int
    twoMN: int
    twoMS: int | None
    twoMI: tuple = ()

    @property
    def MN(self):
        return self.twoMN // 2

    @property
    def MS(self):
        return None if self.twoMS is None else self.twoMS / 2

    @property
    def MI(self):
        return tuple(t / 2 for t in self.twoMI)

    @property
    def twoMF(self):
        return self.twoMN + (self.twoMS or 0) + sum(self.twoMI)

    def label(self):
        parts = [str(self.N), str(self.MN)]
        if self.twoMS is not None:
            parts.append(_fmt_half(self.twoMS))
        parts.extend(_fmt_half(t) for t in self.twoMI)
        return "|" + ",".join(parts) + ">"


def _fmt_half(t):
    return str(t // 2) if t % 2 == 0 else f"{t}/2"


def tensor_element(bra, k, q, ket):
    """<bra| C^k_q |ket> for a purely spatial rank-k operator (k = 1 or 2)."""
    if k not in (1, 2):
        raise AngularMomentumError("only rank 1 and 2 are supported")
    if abs(q) > k:
        raise AngularMomentumError("|q| must not exceed k")
    if bra.twoMS != ket.twoMS or bra.twoMI != ket.twoMI:
        return 0.0
    return rotor_tensor(bra.N, bra.MN, k, q, ket.N, ket.MN)


@dataclass(frozen=True)
class BasisSet:
    kets: tuple
    N_max: int
    twoS: int = 0
    twoI: tuple = ()
    total_MF_filter: float | None = None
    index: dict = field(default=None, compare=False, repr=False)

    def __len__(self):
        return len(self.kets)

    def __iter__(self):
        return iter(self.kets)

    def position(self, ket):
        return self.index[ket]

    def serialize(self):
        return "\n".join(k.label() for k in self.kets).encode()


def _projections(two_j):
    return list(range(-two_j, two_j + 1, 2))


def full_product_kets(N_max, twoS, twoI):
    """All uncoupled kets in lexicographic (N, M_N, M_S, M_I...) order."""
    spin_lists = []
    if twoS is not None and twoS > 0:
        spin_lists.append(_projections(twoS))
    for t in twoI:
        spin_lists.append(_projections(t))
    kets = []
    has_S = twoS is not None and twoS > 0
    for N in range(N_max + 1):
        for mn in range(-N, N + 1):
            for combo in product(*spin_lists):
                if has_S:
                    kets.append(BasisKet(N, 2 * mn, combo[0], tuple(combo[1:])))
                else:
                    kets.append(BasisKet(N, 2 * mn, None, tuple(combo)))
    return kets


def build_basis(spec, N_max=5, total_MF_filter=None):
    """Uncoupled tensor-product basis for ``spec``, optionally restricted to one M_F."""
    if N_max < 1:
        raise AngularMomentumError("N_max must be at least 1")
    twoS = _twice(spec.S) if spec.S else 0
    twoI = tuple(_twice(n.I) for n in spec.nuclei)
    kets = full_product_kets(N_max, twoS, twoI)
    if total_MF_filter is not None:
        tf = _twice(total_MF_filter)
        kets = [k for k in kets if k.twoMF == tf]
    kets = tuple(kets)
    return BasisSet(kets, N_max, twoS, twoI, total_MF_filter,
                    {k: i for i, k in enumerate(kets)})


def basis_size(N_max, S, Is):
    n_rot = sum(2 * n + 1 for n in range(N_max + 1))
    return int(n_rot * (2 * S + 1) * np.prod([2 * i + 1 for i in Is]))
