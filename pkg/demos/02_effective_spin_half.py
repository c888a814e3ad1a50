# %% [markdown]
# # Effective spin-1/2 encodings
#
# Three ways of turning two molecular levels into a pseudo-spin:
# the YO avoided level crossing, bare KRb levels and microwave-dressed KRb.

# %%
import numpy as np

from molspin import FieldPoint, get_molecule, scenarios
from molspin.effective import (
    alc_effective_2x2,
    alc_three_level,
    crossing_field_analytic,
    spin_half_from_dressed,
)

yo = get_molecule("YO")

# %% [markdown]
# ## YO: where do |0 0 +1/2> and |1 1 -1/2> cross?
# The closed form ignores hyperfine structure; the numeric search uses the full
# Hamiltonian and minimizes the adiabatic gap.

# %%
E = 5.0
numeric = scenarios.yo_crossing(E)
print(f"analytic B_c = {crossing_field_analytic(yo, E):.1f} G")
print(f"numeric  B_c = {numeric.B_c:.1f} G, minimum gap {numeric.gap:.2f} MHz")

# %% [markdown]
# The two-level model is accurate at weak field. Compare with the three-level block:

# %%
Ew = 0.2
pt = FieldPoint(Ew, crossing_field_analytic(yo, Ew) + 20.0)
print("3x3 lowest pair:", np.linalg.eigvalsh(alc_three_level(yo, pt))[:2])
print("2x2           :", np.linalg.eigvalsh(alc_effective_2x2(yo, pt).matrix()))

# %% [markdown]
# ## Dipole moments across the YO crossing
# At B_c the two encoded states carry equal dipoles, so the Ising part vanishes
# while the transition dipole peaks.

# %%
for dB in (-20, -5, 0, 5, 20):
    eff = scenarios.yo_alc_scan([numeric.B_c + dB], E)[0]
    d = eff.dipoles
    print(f"B_c{dB:+4d} G  d_up {d.d_up:+.4f}  d_down {d.d_down:+.4f}  d_cross {d.d_cross:.4f} D")

# %% [markdown]
# ## Microwave-dressed KRb
# A 2.1 MHz drive dresses |0~0,M> with |1~0,M>; near 224 G the lower dressed state
# meets |1~-1,M'> and the nuclear quadrupole interaction couples them.

# %%
B_c, enc, model, pair = scenarios.krb_dressed_setup()
print(f"dressed crossing at {B_c:.2f} G, V = {abs(model.v) * 1e3:.3f} kHz")
d = spin_half_from_dressed(enc, 2.1).dipoles
print(f"d_up {d.d_up:+.5f} D, d_down {d.d_down:+.5f} D, d_cross {d.d_cross:.5f} D")
