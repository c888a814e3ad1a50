"""Spin-rotational spectra of polar molecules and the dipolar spin models they realize."""

__version__ = "0.1.0"

from .angular import BasisKet, BasisSet, build_basis, wigner3j
from .molecule import (
    DipoleTriple,
    FieldPoint,
    MoleculeSpec,
    Nucleus,
    SpectrumTrack,
    TrackingError,
    assemble_hamiltonian,
    get_molecule,
    sweep_and_track,
)
