# %% [markdown]
# # Rotational structure of KRb and YO
#
# Build the uncoupled |N M_N; M_S; M_I...> basis, assemble the field-dressed
# Hamiltonian and look at how levels move with the electric field.

# %%
import numpy as np

from molspin import FieldPoint, build_basis, get_molecule, scenarios, wigner3j
from molspin.molecule import diagonalize, find_label, sweep_and_track

# A 3-j symbol sanity check: (1 1 0; 0 0 0) = -1/sqrt(3).
print("3j(1 1 0; 0 0 0) =", wigner3j(1, 1, 0, 0, 0, 0), "expected", -1 / np.sqrt(3))

# %% [markdown]
# ## KRb: the N = 0 and N = 1 manifolds at 400 G
# Restricting to a single total projection M_F keeps the matrices small.

# %%
krb = get_molecule("KRb")
basis = build_basis(krb, N_max=3, total_MF_filter=-3.5)
print(f"KRb basis with M_F = -7/2: {len(basis)} states")
e, _, _ = diagonalize(krb, FieldPoint(E=0.0, B=400.0), basis)
print("lowest N=0 energies (MHz):", np.round(np.sort(e)[:3], 4))
print("2 B_e (MHz):", 2 * krb.B_e, "  N=0 -> N=1 gap:", round(np.sort(e)[np.sort(e) > 1000][0] - np.sort(e)[0], 3))

# %% [markdown]
# ## Following states in an electric-field sweep
# Labels are adiabatic: each state keeps the name of the hyperfine-free level it
# overlaps with most. ``scenarios.krb_ising_track`` does this for the KRb states
# used later on.

# %%
Es = np.linspace(1.0, 20.0, 39)
track = scenarios.krb_ising_track(Es)
g = find_label(track, 0, 0, (-4, 0.5))
x = find_label(track, 1, 0, (-4, 0.5))
for p in (0, 18, 38):
    print(f"E = {Es[p]:5.1f} kV/cm   E(N~=0) = {track.energy(g)[p]:10.3f} MHz   "
          f"transition = {track.energy(x)[p] - track.energy(g)[p]:10.3f} MHz   "
          f"worst label overlap {track.min_overlap[p]:.4f}")

# %% [markdown]
# For other molecules ``sweep_and_track`` follows states by eigenvector overlap
# from the first point onward. YO across its avoided crossing:

# %%
yo = get_molecule("YO")
yo_track = sweep_and_track(yo, build_basis(yo, 3), [FieldPoint(5.0, B) for B in np.linspace(8500, 8700, 41)])
print(f"{len(yo_track.labels)} YO states tracked over {len(yo_track.sweep)} points")

# %% [markdown]
# The full table, with a unit-annotated header, is one call away:

# %%
print(track.to_csv().splitlines()[0][:120], "...")
