# %% [markdown]
# # Telling the two coding states apart
#
# Each secret bit is carried by one of two real qubit states that sit at an
# angle theta.  We look at how well a single pair can be distinguished, and
# then at guessing the xor of m bits, checking every closed form against the
# dense density-matrix oracle.

# %%
import math

import numpy as np

from qcointoss import discrimination as disc
from qcointoss.qmath import psi, validate_povm

theta = math.pi / 9
print(f"theta = pi/9: Helstrom error {disc.helstrom_error(theta):.6f}")
print(f"              conclusive rate {disc.conclusive_rate(theta):.6f}")
print(f"              false claim pass {disc.false_claim_pass(theta):.6f}")

# %% [markdown]
# The unambiguous measurement never misidentifies; it pays with an
# inconclusive outcome.

# %%
povm = disc.build_unambiguous_povm(theta)
print("POVM problems:", validate_povm(povm) or "none")
for bit in (0, 1):
    probs = povm.probabilities(psi(bit, theta).vector())
    print(bit, {k: round(v, 6) for k, v in probs.items()})

# %% [markdown]
# Parity of m bits: the closed form against the brute-force oracle,
# odd and even m alike.

# %%
for m in range(1, 7):
    devs = [abs(disc.parity_error_exact(m, w) - disc.parity_error_oracle(m, w))
            for w in np.linspace(0, math.pi / 2, 9)]
    print(f"m={m}: PE(m, pi/4) = {disc.parity_error_exact(m, math.pi / 4):.6f}, "
          f"max deviation from oracle {max(devs):.1e}")
