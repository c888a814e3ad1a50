# %% [markdown]
# # From dipole moments to lattice couplings
#
# J_z = (d_up - d_down)^2 and J_perp = 2 d_cross^2 set the Ising and flip-flop
# strengths; the lattice adds the (1 - 3 cos^2 theta)/r^3 geometry.

# %%
import numpy as np

from molspin import scenarios
from molspin.couplings import LatticeGeometry, coupling_constants, coupling_map, mean_couplings

# %% [markdown]
# ## KRb Ising encoding at 20 kV/cm and 400 G, 500 nm spacing

# %%
eff, consts, cmap = scenarios.krb_ising_couplings(E=20.0, B=400.0, a=500.0, L=6)
d = eff.dipoles
print(f"d_up {d.d_up:.4f} D   d_down {d.d_down:.4f} D   d_cross {d.d_cross:.1e} D")
jz, jp = cmap.nearest_neighbor()
print(f"nearest-neighbour J_z = {jz:.1f} Hz, J_perp = {jp:.2e} Hz")

# %% [markdown]
# ## How the rotor dipoles shape J_z
# In a bare rotor J_z / d^2 peaks near beta_E = Ed/B_e = 3.

# %%
betas = np.linspace(0.5, 8, 16)
_, _, jz_curve = scenarios.rotor_jz_curve(betas)
for b, j in zip(betas, jz_curve):
    print(f"beta_E = {b:4.1f}  J_z/d^2 = {j:.4f}  " + "#" * int(60 * j))

# %% [markdown]
# ## Geometry
# Site 1 sits one spacing along y from site 0. Tilting the field to the magic
# angle from that bond switches the coupling off.

# %%
magic = np.arccos(1 / np.sqrt(3))
for label, orient in (("field along z", (0, 0, 1)), ("magic angle", (0, np.cos(magic), np.sin(magic)))):
    m = coupling_map(LatticeGeometry(2, 3, 500.0, orient), coupling_constants(eff))
    print(f"{label:14s}  J_z(0,1) = {m.Jz[0, 1]:8.2f} Hz   mean J_z = {mean_couplings(m)[0]:8.2f} Hz")
