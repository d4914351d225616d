# %% [markdown]
# # How large can the bias get?
#
# The attack's bias is bounded through the function c**m (1 - c**2) / 2,
# maximised at c* = sqrt(m / (m + 2)).  We also evaluate the success formula
# of the minimum-error (best-guess) variant of the attack.

# %%
import math

import numpy as np

from qcointoss.harness import check_bias_bound
from qcointoss.strategies import attack_analytics, best_guess_success, critical_round

rows, ok = check_bias_bound(1000)
for r in rows[:3] + rows[-1:]:
    print(f"m={r.m:4d} max={r.closed_form:.6g} at c*={r.c_star:.4f}, numeric {r.numeric:.6g}")
print("all below 1/m:", ok)

# %% [markdown]
# The best-guess formula at the critical round stays below the conclusive
# attack's p0, but it is not below 1/2 everywhere: at round 1 it reduces to
# (1 + sin(theta)**m) / 2.

# %%
theta = math.pi / 9
for m in range(2, 9):
    i = critical_round(m, theta)
    rounds = np.arange(1, i + 5)
    values = [best_guess_success(m, theta, int(k)) for k in rounds]
    print(f"m={m} at i*: {best_guess_success(m, theta, i):.5f} (conclusive p0 {attack_analytics(m, theta).p0:.5f}), "
          f"max over rounds {max(values):.5f} at i={rounds[int(np.argmax(values))]}")
