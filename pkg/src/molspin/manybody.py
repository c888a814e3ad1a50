"""Statevector dynamics for the dipolar Ising and XXZ lattice models.

Bit i of a basis index is site i; a set bit means spin up (S^z = +1/2).
Couplings are taken in Hz (J/2pi); propagators use the angular rate 2*pi*J.
"""

import csv
import io
import logging
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.linalg import expm_multiply

log = logging.getLogger(__name__)

MAX_SITES = 16
TWO_PI = 2.0 * np.pi


class SimulationError(ValueError):
    pass


@dataclass
class SpinState:
    n_sites: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if not 1 <= self.n_sites <= MAX_SITES:
            raise SimulationError(f"n_sites must lie in [1, {MAX_SITES}]")
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (2**self.n_sites,):
            raise SimulationError("amplitude vector has the wrong length")

    @classmethod
    def product_x(cls, n):
        """|+>^n, every spin along +x."""
        return cls(n, np.full(2**n, 2 ** (-n / 2), dtype=complex))

    @classmethod
    def basis(cls, n, bits):
        psi = np.zeros(2**n, dtype=complex)
        psi[bits] = 1.0
        return cls(n, psi)

    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def copy(self):
        return SpinState(self.n_sites, self.amplitudes.copy())


@lru_cache(maxsize=32)
def _sz_table(n):
    """(2^n, n) array of S^z eigenvalues."""
    idx = np.arange(2**n)
    return (((idx[:, None] >> np.arange(n)) & 1) - 0.5).astype(float)


def _check(cmap, state):
    if cmap.n_sites != state.n_sites:
        raise SimulationError(f"map has {cmap.n_sites} sites, state has {state.n_sites}")


def ising_energies(Jz, fields=None):
    """Diagonal of sum_{i<j} J_ij s_i s_j + sum_i h_i s_i, in Hz."""
    n = Jz.shape[0]
    sz = _sz_table(n)
    e = 0.5 * np.einsum("ai,ij,aj->a", sz, Jz, sz)
    if fields is not None:
        e = e + sz @ np.asarray(fields, dtype=float)
    return e


def offset_energies(cmap):
    """sum_{i<j} [W_ij (s_i + s_j) + V_ij] in Hz."""
    sz = _sz_table(cmap.n_sites)
    Wz = cmap.Wz if cmap.Wz is not None else np.zeros_like(cmap.Jz)
    V = cmap.V if cmap.V is not None else np.zeros_like(cmap.Jz)
    return sz @ Wz.sum(axis=1) + 0.5 * V.sum()


def evolve_ising(cmap, state, t, fields=None):
    """Exact Ising propagation for time ``t`` (s), optionally with static z fields (Hz)."""
    _check(cmap, state)
    phase = np.exp(-1j * TWO_PI * t * ising_energies(cmap.Jz, fields))
    return SpinState(state.n_sites, phase * state.amplitudes)


def cluster_time(cmap):
    """pi / |J^z_nn| with J in angular units, i.e. 1/(2|J_nn|) for J in Hz."""
    jz, _ = cmap.nearest_neighbor()
    if jz == 0:
        raise SimulationError("nearest-neighbour J^z vanishes; the Ising protocol is undefined")
    return 1.0 / (2.0 * abs(jz))


def ising_frame_angles(cmap, t):
    """Single-site z-rotation angles that turn Ising evolution into controlled-Z gates.

    exp(-i 2pi J t s_i s_j) differs from a controlled phase by local rotations
    exp(-i phi_j s_j) with phi_j = pi t sum_k J_jk.
    """
    return np.pi * t * cmap.Jz.sum(axis=1)


def rotate_z(state, angles):
    """Apply prod_j exp(+i phi_j s_j)."""
    sz = _sz_table(state.n_sites)
    return SpinState(state.n_sites, np.exp(1j * sz @ np.asarray(angles)) * state.amplitudes)


# ---------------------------------------------------------------------------
# XXZ


@lru_cache(maxsize=64)
def _sector(n, k):
    states = np.array(sorted(sum(1 << i for i in c) for c in combinations(range(n), k)),
                      dtype=np.int64)
    return states


def _sector_hamiltonian(Jz, Jperp, diag, n, k):
    states = _sector(n, k)
    lookup = {int(s): a for a, s in enumerate(states)}
    rows, cols, vals = [], [], []
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if Jperp[i, j] != 0]
    for a, s in enumerate(states):
        s = int(s)
        for i, j in pairs:
            if ((s >> i) & 1) != ((s >> j) & 1):
                b = lookup[s ^ ((1 << i) | (1 << j))]
                rows.append(a)
                cols.append(b)
                vals.append(0.5 * Jperp[i, j])
    dim = len(states)
    H = coo_matrix((vals, (rows, cols)), shape=(dim, dim)).tocsr()
    H = H + coo_matrix((diag[states], (np.arange(dim), np.arange(dim))), shape=(dim, dim)).tocsr()
    return states, H


def evolve_xxz(cmap, state, t, fields=None, include_offsets=False, dense_limit=1500):
    """Exact XXZ evolution, sector by sector in total S^z.

    Sectors up to ``dense_limit`` states are exponentiated through eigh,
    larger ones with a Krylov action (expm_multiply).
    """
    _check(cmap, state)
    n = state.n_sites
    diag = ising_energies(cmap.Jz, fields)
    if include_offsets:
        diag = diag + offset_energies(cmap)
    psi = state.amplitudes
    out = np.zeros_like(psi)
    for k in range(n + 1):
        states = _sector(n, k)
        block = psi[states]
        if not np.any(block):
            continue
        _, H = _sector_hamiltonian(cmap.Jz, cmap.Jperp, diag, n, k)
        if H.shape[0] <= dense_limit:
            w, v = np.linalg.eigh(H.toarray())
            out[states] = v @ (np.exp(-1j * TWO_PI * t * w) * (v.conj().T @ block))
        else:
            out[states] = expm_multiply(-1j * TWO_PI * t * H, block)
    return SpinState(n, out)


# ---------------------------------------------------------------------------
# observables


def _apply_sigma(psi, n, site, kind):
    idx = np.arange(2**n)
    bit = (idx >> site) & 1
    if kind == "z":
        return np.where(bit == 1, 1.0, -1.0) * psi
    flipped = psi[idx ^ (1 << site)]
    if kind == "x":
        return flipped
    # sigma_y |down> = i|up>, |up> -> -i|down>
    return np.where(bit == 1, 1j, -1j) * flipped


def site_expectation(state, site, kind):
    psi = state.amplitudes
    return float(np.real(np.vdot(psi, _apply_sigma(psi, state.n_sites, site, kind)))) / 2


def total_sz(state):
    sz = _sz_table(state.n_sites).sum(axis=1)
    p = np.abs(state.amplitudes) ** 2
    mean = float(p @ sz)
    return mean, float(p @ sz**2 - mean**2)


def stabilizer_expectation(state, j, geometry=None, neighbors=None, frame_angles=None):
    """2^(m+1) <S^x_j prod_k S^z_k> over the m nearest neighbours of site ``j``.

    Open boundaries keep only existing neighbours, so the prefactor follows
    the actual count. ``frame_angles`` first undoes the single-site z
    rotations that accompany Ising evolution (see ``ising_frame_angles``).
    """
    if neighbors is None:
        if geometry is None:
            neighbors = [k for k in (j - 1, j + 1) if 0 <= k < state.n_sites]
        else:
            neighbors = geometry.neighbors(j)
    if frame_angles is not None:
        state = rotate_z(state, frame_angles)
    n = state.n_sites
    phi = _apply_sigma(state.amplitudes, n, j, "x")
    for k in neighbors:
        phi = _apply_sigma(phi, n, k, "z")
    # each Pauli carries 1/2; the prefactor 2^(m+1) cancels them exactly
    return float(np.real(np.vdot(state.amplitudes, phi)))


def stabilizer_with_dephasing(F_value, gamma_d, t):
    """F exp(-gamma_d t / 2)."""
    if gamma_d < 0:
        raise SimulationError("gamma_d must be non-negative")
    return F_value * np.exp(-0.5 * gamma_d * t)


@dataclass(frozen=True)
class SqueezingReport:
    xi2: float
    optimal_angle: float  # rad, measured from the first perpendicular axis
    mean_spin: float


def collective_moments(state):
    """Mean vector and symmetrized covariance of the collective spin."""
    n = state.n_sites
    psi = state.amplitudes
    vecs = []
    for kind in ("x", "y", "z"):
        acc = np.zeros_like(psi)
        for i in range(n):
            acc += _apply_sigma(psi, n, i, kind)
        vecs.append(acc / 2)
    mean = np.array([np.real(np.vdot(psi, v)) for v in vecs])
    second = np.array([[np.real(np.vdot(a, b)) for b in vecs] for a in vecs])
    cov = 0.5 * (second + second.T) - np.outer(mean, mean)
    return mean, cov


def squeezing_parameter(state):
    """Wineland parameter N min_phi var(S_perp) / |<S>|^2."""
    n = state.n_sites
    mean, cov = collective_moments(state)
    length = np.linalg.norm(mean)
    if length <= 1e-6 * n / 2:
        raise SimulationError("mean spin vanishes; squeezing direction is undefined")
    u = mean / length
    trial = np.array([1.0, 0.0, 0.0]) if abs(u[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = trial - (trial @ u) * u
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(u, e1)
    P = np.column_stack([e1, e2])
    w, v = np.linalg.eigh(P.T @ cov @ P)
    angle = float(np.arctan2(v[1, 0], v[0, 0]))
    return SqueezingReport(float(n * w[0] / length**2), angle, float(length))


def kitagawa_ueda_xi2(N, mu):
    """Exact OAT Wineland parameter for H = chi S_z^2 from |+>^N, mu = 2 chi t."""
    A = 1 - np.cos(mu) ** (N - 2)
    B = 4 * np.sin(mu / 2) * np.cos(mu / 2) ** (N - 2)
    vmin = N / 4 * (1 + (N - 1) / 4 * (A - np.sqrt(A**2 + B**2)))
    mean = N / 2 * np.cos(mu / 2) ** (N - 1)
    return N * vmin / mean**2


def oat_squeezing_with_noise(N, chi, t0, gamma_d):
    """(1 + 2 gamma_d t0)/(N chi t0)^2 + N^2 (chi t0)^4 / 6."""
    if N < 2 or chi * t0 <= 0:
        raise SimulationError("need N >= 2 and chi t0 > 0")
    x = chi * t0
    return (1 + 2 * gamma_d * t0) / (N * x) ** 2 + N**2 * x**4 / 6


# dimensionless J_perp * t_opt for 1/R^3 XXZ on a square lattice, keyed by J_z/J_perp
OPTIMAL_TIME_CONSTANTS = {0.0: 4.69, 0.5: 10.5}


def optimal_squeezing_time(J_perp_hz, jz_ratio=0.0):
    """t_opt = c / J_perp with J_perp angular; only tabulated ratios are available."""
    try:
        c = OPTIMAL_TIME_CONSTANTS[float(jz_ratio)]
    except KeyError:
        raise SimulationError(f"no optimal-time constant tabulated for J_z/J_perp = {jz_ratio}")
    return c / (TWO_PI * J_perp_hz)


# ---------------------------------------------------------------------------
# inhomogeneity and gap protection


def site_splitting(delta_E_updown, i, j=0):
    return delta_E_updown * (i * i + j * j)


@dataclass(frozen=True)
class GapProtectionReport:
    delta_h: float  # exact double sum, Hz
    delta_h_asymptotic: float  # L^2 / sqrt(90) dE
    delta_MB_nn: float
    L_max: int

    @property
    def protected(self):
        return self.delta_MB_nn > self.delta_h


def splitting_spread(L, delta_E_updown):
    """Exact width from the double sum over i, j in [-L/2, L/2] (integer part), normalized by 1/L^2."""
    r = np.arange(-(L // 2), L // 2 + 1)
    i, j = np.meshgrid(r, r, indexing="ij")
    s = (i**2 + j**2).astype(float)
    var = (np.sum(s**2) - np.sum(s) ** 2 / L**2) / L**2
    return delta_E_updown * np.sqrt(max(var, 0.0))


def gap_protection(L, J_perp_nn, delta_E_updown, n_nn=4):
    if L < 2:
        raise SimulationError("L must be at least 2")
    exact = splitting_spread(L, delta_E_updown)
    asym = L**2 / np.sqrt(90) * delta_E_updown
    if delta_E_updown == 0:
        L_max = np.iinfo(np.int64).max
    else:
        L_max = int(np.floor(np.sqrt(n_nn * J_perp_nn * np.sqrt(90) / delta_E_updown)))
    return GapProtectionReport(float(exact), float(asym), n_nn * J_perp_nn, L_max)


# ---------------------------------------------------------------------------
# noise


@dataclass(frozen=True)
class NoiseModel:
    gamma_d: float = 0.0
    delta_E_updown: float = 0.0
    kind: str = "static"
    profile: str = "harmonic"  # or "gaussian" (static only)

    def __post_init__(self):
        if self.gamma_d < 0 or self.delta_E_updown < 0:
            raise SimulationError("noise parameters must be non-negative")
        if self.kind not in ("white", "static"):
            raise SimulationError("noise kind must be 'white' or 'static'")
        if self.profile not in ("harmonic", "gaussian"):
            raise SimulationError("static profile must be 'harmonic' or 'gaussian'")


def make_rng(seed):
    if seed is None:
        raise SimulationError("a seed is required")
    return np.random.Generator(np.random.Philox(seed))


def _site_offsets(geometry, n):
    if geometry is None:
        c = np.arange(n) - (n - 1) // 2
        return np.column_stack([c, np.zeros(n, dtype=int)])
    coords = geometry.integer_coords()[:, :2]
    centre = np.floor((coords.max(axis=0)) / 2)
    return (coords - centre).astype(int)


def static_fields(noise, n, geometry=None, rng=None):
    if noise.profile == "harmonic":
        off = _site_offsets(geometry, n)
        return np.array([site_splitting(noise.delta_E_updown, i, j) for i, j in off], dtype=float)
    return rng.normal(0.0, noise.delta_E_updown, size=n)


@dataclass(frozen=True)
class EnsembleResult:
    stabilizers: np.ndarray
    stabilizer_err: np.ndarray
    xi2: float
    xi2_err: float
    n_samples: int


def _echo(state):
    """pi pulse about x on every site: flips every bit, times (-i)^n."""
    n = state.n_sites
    idx = np.arange(2**n)
    return SpinState(n, (-1j) ** n * state.amplitudes[idx ^ (2**n - 1)])


def static_noise_ensemble(cmap, state, noise, t, n_samples, seed, protocol="ising",
                          echo=False, sites=None, frame_angles=None):
    """Average stabilizers and xi^2 over static field realizations.

    With ``echo`` an ideal global x pi pulse is applied at t/2 and again at t,
    which cancels every static single-site phase while leaving S^z S^z
    evolution intact.
    """
    if noise.kind != "static":
        raise SimulationError("static_noise_ensemble requires a static noise model")
    if n_samples < 1:
        raise SimulationError("n_samples must be at least 1")
    n = state.n_sites
    sites = list(range(n)) if sites is None else list(sites)
    children = np.random.SeedSequence(seed).spawn(n_samples)
    evolve = evolve_ising if protocol == "ising" else evolve_xxz
    K, X = [], []
    for child in children:
        rng = np.random.Generator(np.random.Philox(child))
        h = static_fields(noise, n, cmap.geometry, rng)
        if echo:
            s = evolve(cmap, state, t / 2, fields=h)
            s = _echo(s)
            s = evolve(cmap, s, t / 2, fields=h)
            s = _echo(s)
        else:
            s = evolve(cmap, state, t, fields=h)
        K.append([stabilizer_expectation(s, j, cmap.geometry, frame_angles=frame_angles)
                  for j in sites])
        try:
            X.append(squeezing_parameter(s).xi2)
        except SimulationError:
            X.append(np.nan)
    K, X = np.array(K), np.array(X)
    m = len(children)
    err = K.std(axis=0, ddof=1) / np.sqrt(m) if m > 1 else np.zeros(K.shape[1])
    ok = X[np.isfinite(X)]
    xi2 = float(ok.mean()) if ok.size else float("nan")
    xerr = float(ok.std(ddof=1) / np.sqrt(ok.size)) if ok.size > 1 else 0.0
    return EnsembleResult(K.mean(axis=0), err, xi2, xerr, m)


def white_noise_coherence(gamma_d, t, n_traj, seed, n_steps=200):
    """Monte-Carlo <S^x>/(1/2) of one free spin under white frequency noise.

    Each step kicks the phase by a Gaussian of variance gamma_d dt, which
    integrates to <exp(-i phi)> = exp(-gamma_d t / 2).
    Returns (mean, standard error).
    """
    rng = make_rng(seed)
    dt = t / n_steps
    phase = rng.normal(0.0, np.sqrt(gamma_d * dt), size=(n_traj, n_steps)).sum(axis=1)
    c = np.cos(phase)
    return float(c.mean()), float(c.std(ddof=1) / np.sqrt(n_traj))


def timeseries_csv(rows, stream=None):
    """Rows of (t_s, observable, value, stderr) as CSV with a unit header."""
    out = stream or io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["t_s", "observable", "value", "stderr"])
    for t, name, val, err in rows:
        w.writerow([repr(float(t)), name, repr(float(val)), "" if err is None else repr(float(err))])
    return out.getvalue() if stream is None else None


def sector_dimension(n, k):
    return comb(n, k)
