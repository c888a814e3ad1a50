"""Dipolar spin-coupling constants on a lattice.

All couplings are reported as J/2pi in Hz. The many-body propagators multiply
by 2*pi, so the cluster time pi/J becomes 1/(2 J_Hz).
"""

import csv
import io
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import units


@dataclass(frozen=True)
class SpinCouplingConstants:
    """Debye^2 prefactors of the q = 0 dipolar interaction."""

    J_perp: float
    J_z: float
    W_z: float
    V: float


def coupling_constants(eff):
    """Apply J_perp = 2 d_x^2, J_z = (d_up - d_down)^2, W_z, V to ``eff.dipoles``."""
    d = eff.dipoles if hasattr(eff, "dipoles") else eff
    return SpinCouplingConstants(
        J_perp=2.0 * d.d_cross**2,
        J_z=(d.d_up - d.d_down) ** 2,
        W_z=0.5 * (d.d_up**2 - d.d_down**2),
        V=0.25 * (d.d_up + d.d_down) ** 2,
    )


@dataclass(frozen=True)
class LatticeGeometry:
    dims: int
    L: int
    a: float  # nm
    field_orientation: tuple = (0.0, 0.0, 1.0)

    def __post_init__(self):
        if self.dims not in (1, 2):
            raise ValueError("dims must be 1 or 2")
        if self.L < 2:
            raise ValueError("L must be at least 2")
        if self.a <= 0:
            raise ValueError("lattice spacing must be positive")
        n = np.linalg.norm(self.field_orientation)
        if n == 0:
            raise ValueError("field orientation must be non-zero")
        object.__setattr__(self, "field_orientation",
                           tuple(float(x) / n for x in self.field_orientation))

    @property
    def n_sites(self):
        return self.L ** self.dims

    def integer_coords(self):
        """Site coordinates in units of a; a 1D chain lies along x, a square lattice in xy."""
        if self.dims == 1:
            return np.array([[i, 0, 0] for i in range(self.L)], dtype=float)
        return np.array([[i, j, 0] for i, j in product(range(self.L), repeat=2)], dtype=float)

    def positions(self):
        return self.a * self.integer_coords()

    def neighbors(self, j):
        """Nearest-neighbour site indices of site ``j`` (open boundaries)."""
        c = self.integer_coords()
        d = np.linalg.norm(c - c[j], axis=1)
        return [int(k) for k in np.flatnonzero(np.isclose(d, 1.0))]


def geometric_factor(R, field_orientation=(0.0, 0.0, 1.0)):
    """(1 - 3 cos^2 theta) / |R|^3 in nm^-3."""
    R = np.asarray(R, dtype=float)
    r = np.linalg.norm(R)
    if r == 0:
        raise ValueError("zero separation")
    u = np.asarray(field_orientation, dtype=float)
    cos = R @ u / (r * np.linalg.norm(u))
    return (1.0 - 3.0 * cos**2) / r**3


@dataclass
class CouplingMap:
    """Symmetric pair couplings in Hz (J/2pi); diagonals are zero."""

    geometry: LatticeGeometry
    constants: SpinCouplingConstants
    Jz: np.ndarray
    Jperp: np.ndarray
    Wz: np.ndarray = field(default=None)
    V: np.ndarray = field(default=None)

    @property
    def n_sites(self):
        return self.Jz.shape[0]

    def nearest_neighbor(self):
        """(J^z, J^perp) between sites 0 and 1, which are nearest neighbours in both layouts."""
        return float(self.Jz[0, 1]), float(self.Jperp[0, 1])

    def to_csv(self, stream=None):
        out = stream or io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["i", "j", "Jz_Hz", "Jperp_Hz"])
        n = self.n_sites
        for i in range(n):
            for j in range(i + 1, n):
                w.writerow([i, j, repr(float(self.Jz[i, j])), repr(float(self.Jperp[i, j]))])
        return out.getvalue() if stream is None else None


def coupling_map(geom, consts, cutoff_radius=None):
    """Pairwise couplings over every site pair of ``geom`` (optionally within a cutoff, nm)."""
    pos = geom.positions()
    n = len(pos)
    G = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            R = pos[j] - pos[i]
            if cutoff_radius is not None and np.linalg.norm(R) > cutoff_radius:
                continue
            G[i, j] = G[j, i] = geometric_factor(R, geom.field_orientation)
    scale = units.DEBYE2_PER_NM3_HZ
    return CouplingMap(geom, consts, consts.J_z * scale * G, consts.J_perp * scale * G,
                       consts.W_z * scale * G, consts.V * scale * G)


def synthetic_map(Jz, Jperp, geometry=None):
    """CouplingMap from explicit matrices (Hz), e.g. all-to-all test models."""
    Jz = np.asarray(Jz, dtype=float)
    Jperp = np.asarray(Jperp, dtype=float)
    if Jz.shape != Jperp.shape or Jz.shape[0] != Jz.shape[1]:
        raise ValueError("coupling matrices must be square and of equal shape")
    if not (np.allclose(Jz, Jz.T) and np.allclose(Jperp, Jperp.T)):
        raise ValueError("coupling matrices must be symmetric")
    return CouplingMap(geometry, None, Jz, Jperp, np.zeros_like(Jz), np.zeros_like(Jz))


def uniform_map(n, Jz, Jperp):
    off = 1.0 - np.eye(n)
    return synthetic_map(Jz * off, Jperp * off)


def mean_couplings(cmap):
    """(1/N^2) sum over ordered pairs i != j, for J^z and J^perp."""
    n = cmap.n_sites
    return float(cmap.Jz.sum() / n**2), float(cmap.Jperp.sum() / n**2)
