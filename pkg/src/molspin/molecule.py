"""Single-molecule Hamiltonians of 1Sigma and 2Sigma molecules in parallel E and B fields.

The Hamiltonian is built in the uncoupled basis |N M_N>|S M_S>|I1 M_I1>...
with energies in MHz, E in kV/cm, B in Gauss and dipoles in Debye. Sign
conventions for the individual terms are collected in CONVENTIONS.md.
"""

import csv
import dataclasses
import io
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

import numpy as np
import yaml
from scipy.optimize import linear_sum_assignment

from . import units
from .angular import BasisKet, BasisSet, build_basis, rotor_tensor, wigner3j

log = logging.getLogger(__name__)

ALL_TERMS = frozenset({
    "rotation", "stark", "zeeman",
    # 1Sigma hyperfine
    "quadrupole", "nuclear_spin_rotation", "spin_spin_scalar", "spin_spin_tensor",
    # 2Sigma
    "spin_rotation", "hyperfine",
})


class StructureError(ValueError):
    pass


class TrackingError(RuntimeError):
    def __init__(self, message, point=None, candidates=()):
        super().__init__(message)
        self.point = point
        self.candidates = tuple(candidates)


@dataclass(frozen=True)
class Nucleus:
    name: str
    I: float
    g: float = 0.0
    sigma: float = 0.0
    eQq: float = 0.0
    c_nsr: float = 0.0


@dataclass(frozen=True)
class MoleculeSpec:
    name: str
    kind: str  # "1Sigma" or "2Sigma"
    B_e: float
    d: float
    nuclei: tuple = ()
    g_r: float = 0.0
    gamma: float = 0.0
    b: float = 0.0
    c: float = 0.0
    g_S: float = 2.0023
    spin_spin_scalar: float = 0.0
    spin_spin_tensor: float = 0.0
    source: str = ""

    def __post_init__(self):
        if self.kind not in ("1Sigma", "2Sigma"):
            raise StructureError(f"unknown species kind {self.kind!r}")
        if self.B_e <= 0:
            raise StructureError("B_e must be positive")
        if self.d < 0:
            raise StructureError("dipole moment must be non-negative")
        if any(n.I < 0 for n in self.nuclei):
            raise StructureError("nuclear spins must be non-negative")
        if self.kind == "1Sigma" and (self.gamma or self.b or self.c):
            raise StructureError("1Sigma molecules carry no electron-spin constants")

    @property
    def S(self):
        return 0.5 if self.kind == "2Sigma" else 0

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def without_hyperfine(self):
        """Copy with every hyperfine coupling set to zero (Zeeman and rotation kept)."""
        nuclei = tuple(dataclasses.replace(n, eQq=0.0, c_nsr=0.0) for n in self.nuclei)
        return dataclasses.replace(self, nuclei=nuclei, b=0.0, c=0.0,
                                   spin_spin_scalar=0.0, spin_spin_tensor=0.0)


@dataclass(frozen=True)
class FieldPoint:
    E: float = 0.0  # kV/cm
    B: float = 0.0  # Gauss

    def __post_init__(self):
        if self.E < 0 or self.B < 0:
            raise StructureError("field magnitudes must be non-negative")


# ---------------------------------------------------------------------------
# registry


def load_registry(path=None):
    """Parse a constants registry; returns (version, {name: MoleculeSpec})."""
    if path is None:
        text = resources.files("molspin").joinpath("data/molecules.yaml").read_text()
    else:
        with open(path) as f:
            text = f.read()
    raw = yaml.safe_load(text)
    if not isinstance(raw, dict) or "molecules" not in raw:
        raise StructureError("registry must define a 'molecules' mapping")
    specs = {name: spec_from_dict(name, entry) for name, entry in raw["molecules"].items()}
    return raw.get("version", 0), specs


_SPEC_KEYS = {"kind", "source", "B_e", "d", "g_r", "gamma", "b", "c", "g_S",
              "spin_spin_scalar", "spin_spin_tensor", "nuclei", "name"}
_NUCLEUS_KEYS = {"name", "I", "g", "sigma", "eQq", "c_nsr"}


def spec_from_dict(name, entry):
    unknown = set(entry) - _SPEC_KEYS
    if unknown:
        raise StructureError(f"{name}: unknown keys {sorted(unknown)}")
    for key in ("kind", "B_e", "d"):
        if key not in entry:
            raise StructureError(f"{name}: missing required key {key!r}")
    nuclei = []
    for i, n in enumerate(entry.get("nuclei", [])):
        bad = set(n) - _NUCLEUS_KEYS
        if bad or "I" not in n:
            raise StructureError(f"{name}.nuclei[{i}]: needs 'I', unknown keys {sorted(bad)}")
        nuclei.append(Nucleus(name=str(n.get("name", f"nucleus{i}")), I=float(n["I"]),
                              **{k: float(n[k]) for k in ("g", "sigma", "eQq", "c_nsr") if k in n}))
    kw = {k: float(entry[k]) for k in ("B_e", "d", "g_r", "gamma", "b", "c", "g_S",
                                        "spin_spin_scalar", "spin_spin_tensor") if k in entry}
    return MoleculeSpec(name=entry.get("name", name), kind=entry["kind"], nuclei=tuple(nuclei),
                        source=str(entry.get("source", "")).strip(), **kw)


@lru_cache(maxsize=None)
def _default_registry():
    return load_registry()


def get_molecule(name):
    version, specs = _default_registry()
    try:
        return specs[name]
    except KeyError:
        raise KeyError(f"molecule {name!r} not in registry (have {sorted(specs)})") from None


def registry_version():
    return _default_registry()[0]


# ---------------------------------------------------------------------------
# operator algebra on the full product space


def _spin_ops(j):
    """(jz, j+, j-) in the |j m> basis ordered by ascending m."""
    m = np.arange(-j, j + 1)
    jz = np.diag(m)
    jp = np.diag(np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1)), -1)
    return jz, jp, jp.T.copy()


def _spherical(jz, jp, jm):
    """Spherical components {q: A_q} of a vector operator."""
    return {1: -jp / np.sqrt(2), 0: jz, -1: jm / np.sqrt(2)}


def _clebsch(j1, m1, j2, m2, J, M):
    return (-1) ** int(j1 - j2 + M) * np.sqrt(2 * J + 1) * wigner3j(j1, j2, J, m1, m2, -M)


def _rank2(A, B):
    """Rank-2 coupled product [A x B]^2_p of two vector operators (already embedded)."""
    out = {}
    for p in range(-2, 3):
        acc = 0
        for q1 in (-1, 0, 1):
            q2 = p - q1
            if abs(q2) > 1:
                continue
            acc = acc + _clebsch(1, q1, 1, q2, 2, p) * (A[q1] @ B[q2])
        out[p] = acc
    return out


class _ProductSpace:
    """Full uncoupled product space: rotor x (electron spin) x nuclei."""

    def __init__(self, N_max, S, Is):
        self.rot_states = [(N, M) for N in range(N_max + 1) for M in range(-N, N + 1)]
        self.dims = [len(self.rot_states)]
        self.spins = []
        if S:
            self.spins.append(S)
        self.spins.extend(Is)
        self.dims.extend(int(round(2 * j + 1)) for j in self.spins)
        self.dim = int(np.prod(self.dims))

        rs = self.rot_states
        n = len(rs)
        self.N2 = np.diag([N * (N + 1) for N, _ in rs]).astype(float)
        self.Nz = np.diag([M for _, M in rs]).astype(float)
        Np = np.zeros((n, n))
        for a, (N1, M1) in enumerate(rs):
            for b, (N2, M2) in enumerate(rs):
                if N1 == N2 and M1 == M2 + 1:
                    Np[a, b] = np.sqrt(N2 * (N2 + 1) - M2 * (M2 + 1))
        self.Np, self.Nm = Np, Np.T.copy()
        self.C = {}
        for k in (1, 2):
            for q in range(-k, k + 1):
                mat = np.zeros((n, n))
                for a, (N1, M1) in enumerate(rs):
                    for b, (N2, M2) in enumerate(rs):
                        mat[a, b] = rotor_tensor(N1, M1, k, q, N2, M2)
                self.C[k, q] = mat

    def embed(self, factor_ops):
        """Kronecker product with ``factor_ops`` {factor index: matrix}, identity elsewhere."""
        mats = [factor_ops.get(i, np.eye(d)) for i, d in enumerate(self.dims)]
        out = mats[0]
        for m in mats[1:]:
            out = np.kron(out, m)
        return out

    def rot(self, mat):
        return self.embed({0: mat})

    def spin_vector(self, i):
        """Spherical components of spin factor i (0-based among spins), embedded."""
        jz, jp, jm = _spin_ops(self.spins[i])
        return {q: self.embed({i + 1: op}) for q, op in _spherical(jz, jp, jm).items()}

    def rot_vector(self):
        return {q: self.rot(op) for q, op in _spherical(self.Nz, self.Np, self.Nm).items()}


def _dot(A, B):
    return sum((-1) ** q * A[q] @ B[-q] for q in (-1, 0, 1))


def _tensor_dot(C2, T2):
    return sum((-1) ** p * C2[-p] @ T2[p] for p in range(-2, 3))


@lru_cache(maxsize=32)
def _term_matrices(spec, N_max):
    """Per-term Hamiltonian matrices on the full product space, each for unit field."""
    Is = [n.I for n in spec.nuclei]
    space = _ProductSpace(N_max, spec.S, Is)
    C2 = {p: space.rot(space.C[2, p]) for p in range(-2, 3)}
    terms = {"rotation": spec.B_e * space.rot(space.N2)}
    terms["stark"] = -spec.d * space.rot(space.C[1, 0])  # times E (MHz per D kV/cm applied later)
    mu_N, mu_B = units.NUCLEAR_MAGNETON_MHZ_PER_G, units.BOHR_MAGNETON_MHZ_PER_G
    offset = 1 if spec.S else 0

    if spec.kind == "1Sigma":
        zee = -spec.g_r * mu_N * space.rot(space.Nz)
        Nvec = space.rot_vector()
        quad = 0
        nsr = 0
        Ivecs = []
        for i, nuc in enumerate(spec.nuclei):
            Iv = space.spin_vector(i)
            Ivecs.append(Iv)
            zee = zee - nuc.g * mu_N * (1 - nuc.sigma) * Iv[0]
            if nuc.I >= 1 and nuc.eQq:
                pref = nuc.eQq * np.sqrt(6) / (4 * nuc.I * (2 * nuc.I - 1))
                quad = quad + pref * _tensor_dot(C2, _rank2(Iv, Iv))
            if nuc.c_nsr:
                nsr = nsr + nuc.c_nsr * _dot(Nvec, Iv)
        terms["zeeman"] = zee
        terms["quadrupole"] = quad if np.ndim(quad) else np.zeros((space.dim, space.dim))
        terms["nuclear_spin_rotation"] = nsr if np.ndim(nsr) else np.zeros((space.dim, space.dim))
        if len(Ivecs) == 2:
            terms["spin_spin_scalar"] = spec.spin_spin_scalar * _dot(Ivecs[0], Ivecs[1])
            terms["spin_spin_tensor"] = (-spec.spin_spin_tensor * np.sqrt(6)
                                         * _tensor_dot(C2, _rank2(Ivecs[0], Ivecs[1])))
    else:
        Svec = space.spin_vector(0)
        Nvec = space.rot_vector()
        terms["zeeman"] = spec.g_S * mu_B * Svec[0]
        terms["spin_rotation"] = spec.gamma * _dot(Nvec, Svec)
        hf = 0
        for i, nuc in enumerate(spec.nuclei):
            Iv = space.spin_vector(i + offset)
            hf = hf + (spec.b + spec.c / 3) * _dot(Iv, Svec)
            hf = hf + spec.c * np.sqrt(6) / 3 * _tensor_dot(C2, _rank2(Iv, Svec))
        terms["hyperfine"] = hf if np.ndim(hf) else np.zeros((space.dim, space.dim))

    dip = {q: spec.d * space.rot(space.C[1, q]) for q in (-1, 0, 1)}
    return space, {k: np.real_if_close(v) for k, v in terms.items()}, dip


def _full_kets(spec, N_max):
    # same ordering as _ProductSpace.embed, since both are lexicographic
    return build_basis(spec, N_max).kets


def _basis_indices(spec, basis):
    full = _full_kets(spec, basis.N_max)
    pos = {k: i for i, k in enumerate(full)}
    try:
        return np.array([pos[k] for k in basis.kets])
    except KeyError as e:
        raise StructureError(f"basis ket {e} does not belong to {spec.name}") from None


def assemble_hamiltonian(spec, point, basis, include=ALL_TERMS):
    """Hermitian Hamiltonian matrix (MHz) of ``spec`` at ``point`` over ``basis``."""
    if not isinstance(basis, BasisSet):
        raise StructureError("basis must be a BasisSet")
    _, terms, _ = _term_matrices(spec, basis.N_max)
    idx = _basis_indices(spec, basis)
    dim = len(_full_kets(spec, basis.N_max))
    if any(t.shape != (dim, dim) for t in terms.values()):
        raise StructureError("term dimension mismatch")
    H = np.zeros((len(idx), len(idx)))
    scale = {"stark": point.E * units.DEBYE_KV_PER_CM_MHZ, "zeeman": point.B}
    for name, mat in terms.items():
        if name not in include:
            continue
        s = scale.get(name, 1.0)
        if s:
            H += s * mat[np.ix_(idx, idx)]
    return H


def dipole_operator(spec, basis, q=0):
    """d * C^1_q over ``basis`` in Debye."""
    _, _, dip = _term_matrices(spec, basis.N_max)
    idx = _basis_indices(spec, basis)
    return dip[q][np.ix_(idx, idx)]


def term_operator(spec, basis, name):
    """A single Hamiltonian term (unit field for stark/zeeman) over ``basis``."""
    _, terms, _ = _term_matrices(spec, basis.N_max)
    idx = _basis_indices(spec, basis)
    return terms[name][np.ix_(idx, idx)]


def mf_blocks(basis):
    """{2*M_F: index array} for the conserved total projection."""
    blocks = {}
    for i, k in enumerate(basis.kets):
        blocks.setdefault(k.twoMF, []).append(i)
    return {m: np.array(v) for m, v in sorted(blocks.items())}


def fix_phase(vecs):
    """Make the largest-magnitude component of each column real positive."""
    vecs = np.array(vecs, copy=True)
    for j in range(vecs.shape[1]):
        k = np.argmax(np.abs(vecs[:, j]))
        ph = vecs[k, j] / abs(vecs[k, j])
        vecs[:, j] /= ph
    return vecs.real if np.isrealobj(vecs) or np.allclose(vecs.imag, 0) else vecs


def diagonalize(spec, point, basis, include=ALL_TERMS):
    """Eigen-decomposition block by block in M_F.

    Returns (energies, vectors, twoMF) with vectors as columns over the full
    ``basis``; within each block energies ascend.
    """
    H = assemble_hamiltonian(spec, point, basis, include)
    energies, vectors, mfs = [], [], []
    for twoMF, idx in mf_blocks(basis).items():
        w, v = np.linalg.eigh(H[np.ix_(idx, idx)])
        full = np.zeros((len(basis), len(idx)))
        full[idx, :] = fix_phase(v)
        energies.append(w)
        vectors.append(full)
        mfs.extend([twoMF] * len(w))
    return np.concatenate(energies), np.hstack(vectors), np.array(mfs)


# ---------------------------------------------------------------------------
# sweeps


def state_label(ket, tilde=True):
    """Adiabatic label string |N~ M_N, M_S, M_I...> of a dominant basis ket."""
    s = ket.label()
    if tilde:
        s = "|" + s[1:].replace(",", "~,", 1)
    return s


@dataclass
class SpectrumTrack:
    sweep: list
    energies: np.ndarray  # (n_points, n_states) MHz
    vectors: np.ndarray  # (n_points, dim, n_states)
    labels: list
    twoMF: np.ndarray
    basis: BasisSet
    spec: MoleculeSpec
    min_overlap: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def index(self, label):
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown label {label!r}") from None

    def energy(self, label):
        return self.energies[:, self.index(label)]

    def vector(self, label, point_index):
        return self.vectors[point_index, :, self.index(label)]

    def to_csv(self, stream=None, columns=None):
        cols = list(self.labels) if columns is None else list(columns)
        out = stream or io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["E_kV_per_cm", "B_G"] + [f"{c} [MHz]" for c in cols])
        for p, pt in enumerate(self.sweep):
            w.writerow([repr(pt.E), repr(pt.B)]
                       + [repr(float(self.energies[p, self.index(c)])) for c in cols])
        return out.getvalue() if stream is None else None


def find_label(track, N, MN, MI=(), MS=None):
    """Label of the tracked state whose seed ket has the given quantum numbers."""
    ket = BasisKet(N, 2 * MN, None if MS is None else int(round(2 * MS)),
                   tuple(int(round(2 * m)) for m in MI))
    label = state_label(ket)
    track.index(label)
    return label


def _auto_labels(basis, vectors):
    labels = []
    for j in range(vectors.shape[1]):
        k = int(np.argmax(np.abs(vectors[:, j])))
        labels.append(state_label(basis.kets[k]))
    # dominant components are unique for well-separated states; disambiguate otherwise
    seen = {}
    for i, l in enumerate(labels):
        if l in seen:
            seen[l] += 1
            labels[i] = f"{l}#{seen[l]}"
        else:
            seen[l] = 0
    return labels


def sweep_and_track(spec, basis, sweep, seeds=None, threshold=0.5, include=ALL_TERMS):
    """Diagonalize along ``sweep`` and follow states by maximal eigenvector overlap.

    ``seeds`` restricts tracking to the listed labels (strings as produced by
    ``state_label``); by default every eigenstate is tracked and labelled by
    its dominant basis ket at the first point. States of different M_F never
    mix, so crossings between blocks are followed diabatically.
    """
    sweep = list(sweep)
    if not sweep:
        raise StructureError("sweep must contain at least one field point")
    e0, v0, mf0 = diagonalize(spec, sweep[0], basis, include)
    labels = _auto_labels(basis, v0)
    if seeds is not None:
        keep = []
        for s in seeds:
            if s not in labels:
                raise KeyError(f"seed {s!r} not found among states at the first point")
            keep.append(labels.index(s))
    else:
        keep = list(range(len(labels)))
    keep = np.array(keep)

    n = len(sweep)
    E = np.zeros((n, len(keep)))
    V = np.zeros((n, len(basis), len(keep)))
    E[0], V[0] = e0[keep], v0[:, keep]
    mf = mf0[keep]
    minov = np.ones(max(n - 1, 0))
    tracked_labels = [labels[k] for k in keep]

    for p in range(1, n):
        e, v, mfs = diagonalize(spec, sweep[p], basis, include)
        for twoMF in np.unique(mf):
            cols = np.where(mf == twoMF)[0]
            cand = np.where(mfs == twoMF)[0]
            ov = np.abs(V[p - 1][:, cols].T @ v[:, cand])
            rows, picks = linear_sum_assignment(-ov)
            for r, c in zip(rows, picks):
                o = ov[r, c]
                if o < threshold:
                    second = np.argsort(ov[r])[-2] if len(cand) > 1 else c
                    raise TrackingError(
                        f"overlap {o:.3f} below {threshold} for {tracked_labels[cols[r]]} at "
                        f"{sweep[p]}; candidates are states {cand[c]} and {cand[second]}; "
                        "halve the sweep step",
                        point=sweep[p], candidates=(int(cand[c]), int(cand[second])))
                minov[p - 1] = min(minov[p - 1], o)
                vec = v[:, cand[c]]
                if V[p - 1][:, cols[r]] @ vec < 0:
                    vec = -vec
                V[p][:, cols[r]] = vec
                E[p, cols[r]] = e[cand[c]]
    return SpectrumTrack(sweep, E, V, tracked_labels, mf, basis, spec, minov)


# ---------------------------------------------------------------------------
# observables


@dataclass(frozen=True)
class DipoleTriple:
    d_up: float
    d_down: float
    d_cross: float


def dipole_element(track, label_a, label_b, point_index, q=0):
    """<a| d C^1_q |b> between tracked eigenstates, in Debye."""
    va = track.vector(label_a, point_index)
    vb = track.vector(label_b, point_index)
    D = dipole_operator(track.spec, track.basis, q)
    return float(va @ D @ vb)


def dipole_elements(track, label_up, label_down, point_index, q=0):
    """DipoleTriple for an encoding (up, down); d_cross uses component ``q``."""
    return DipoleTriple(
        dipole_element(track, label_up, label_up, point_index, 0),
        dipole_element(track, label_down, label_down, point_index, 0),
        dipole_element(track, label_up, label_down, point_index, q),
    )


def differential_stark_shift(track, main_transition, competing_transition, point_index):
    """(main upper - main lower) - (competing upper - competing lower), MHz.

    Each transition is a (lower_label, upper_label) pair.
    """
    (ml, mu), (cl, cu) = main_transition, competing_transition
    e = track.energies[point_index]
    i = track.index
    return float((e[i(mu)] - e[i(ml)]) - (e[i(cu)] - e[i(cl)]))


def dipole_between(spec, basis, va, vb, q=0):
    """<va| d C^1_q |vb> for arbitrary real amplitude vectors over ``basis``, Debye."""
    return float(va @ dipole_operator(spec, basis, q) @ vb)


def block_spectrum(spec, point, basis, twoMF, include=ALL_TERMS):
    """Sorted eigenpairs of a single M_F block; vectors are columns over ``basis``."""
    H = assemble_hamiltonian(spec, point, basis, include)
    idx = mf_blocks(basis)[twoMF]
    w, v = np.linalg.eigh(H[np.ix_(idx, idx)])
    full = np.zeros((len(basis), len(idx)))
    full[idx, :] = fix_phase(v)
    return w, full


def reference_assignment(spec, point, basis, kets, include=ALL_TERMS):
    """Match each requested ket to an eigenstate through the hyperfine-free reference.

    Without hyperfine terms M_N and every M_I are exact, so each reference
    eigenvector is a Stark-dressed rotor state times a nuclear product state
    and carries the label |N~ M_N, M>. Full eigenstates are assigned to the
    requested references by maximal total overlap within each M_F block.
    Returns (energies, vectors, overlaps) ordered as ``kets``.
    """
    ref_spec = spec.without_hyperfine()
    e, v, mf = diagonalize(spec, point, basis, include)
    re, rv, rmf = diagonalize(ref_spec, point, basis, include)
    energies = np.zeros(len(kets))
    vectors = np.zeros((len(basis), len(kets)))
    overlaps = np.zeros(len(kets))
    by_block = {}
    for n, ket in enumerate(kets):
        by_block.setdefault(ket.twoMF, []).append(n)
    for twoMF, members in by_block.items():
        rcols = np.where(rmf == twoMF)[0]
        cols = np.where(mf == twoMF)[0]
        refs = []
        for n in members:
            ket = kets[n]
            # within a fixed (M_N, M) sector the reference states are ordered by energy,
            # so N~ is the rank among references sharing the ket's projections
            same = [c for c in rcols if _projections_of(basis, rv[:, c]) == _key(ket)]
            same.sort(key=lambda c: re[c])
            if ket.N - abs(ket.MN) >= len(same):
                raise StructureError(f"reference state for {ket.label()} not in basis")
            refs.append(same[ket.N - abs(ket.MN)])
        ov = np.abs(rv[:, refs].T @ v[:, cols])
        rows, picks = linear_sum_assignment(-ov)
        for r, c in zip(rows, picks):
            n = members[r]
            vec = v[:, cols[c]]
            if rv[:, refs[r]] @ vec < 0:
                vec = -vec
            energies[n], vectors[:, n], overlaps[n] = e[cols[c]], vec, ov[r, c]
    return energies, vectors, overlaps


def _key(ket):
    return (ket.twoMN, ket.twoMS, ket.twoMI)


def _projections_of(basis, vec):
    k = basis.kets[int(np.argmax(np.abs(vec)))]
    return _key(k)


def reference_track(spec, basis, sweep, kets, include=ALL_TERMS):
    """SpectrumTrack whose states are assigned at every point by ``reference_assignment``.

    Unlike overlap continuation this cannot drift through the dense
    near-crossings of hyperfine manifolds; ``min_overlap`` holds the worst
    reference overlap at each point.
    """
    sweep = list(sweep)
    if not sweep:
        raise StructureError("sweep must contain at least one field point")
    E = np.zeros((len(sweep), len(kets)))
    V = np.zeros((len(sweep), len(basis), len(kets)))
    minov = np.zeros(len(sweep))
    for p, pt in enumerate(sweep):
        E[p], V[p], ov = reference_assignment(spec, pt, basis, kets, include)
        minov[p] = ov.min()
        if p:
            flip = np.einsum("ij,ij->j", V[p - 1], V[p]) < 0
            V[p][:, flip] *= -1
    labels = [state_label(k) for k in kets]
    return SpectrumTrack(sweep, E, V, labels, np.array([k.twoMF for k in kets]), basis, spec, minov)
