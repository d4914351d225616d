# %% [markdown]
# # Bob's conclusive-measurement attack
#
# At the critical round Bob measures everything Alice has committed so far.
# If every position comes out conclusive he knows her parity and steers his
# last bit; the swap is caught unless the stale particles pass Alice's test.

# %%
import math

from qcointoss.harness import attack_report, sweep_attack
from qcointoss.protocol import derive_params
from qcointoss.strategies import attack_analytics

theta = math.pi / 9
for m in (2, 4, 10):
    a = attack_analytics(m, theta)
    print(f"m={m:2d} i*={a.i_star} PC={a.pc:.4f} PS={a.ps:.5f} p0={a.p0:.5f} "
          f"bounds {a.lower_bound:.2e} <= {a.xi:.2e} <= {a.upper_bound}")

# %% [markdown]
# A small simulation next to the closed forms (the acceptance suite uses 4e5
# sessions; here 2e4 keep the demo short).

# %%
rep = attack_report(derive_params(4, theta), trials=20_000, base_seed=3)
e = rep.empirical
print(f"empirical p0 {e.p0:.4f} +/- {e.stderr0:.4f} vs {rep.analytic.p0:.4f}")
print("all-conclusive rate", e.rate("bob.conclusive"), "vs", round(rep.analytic.pc, 4))
print("swap survives", e.rate("bob.swapped.completed", "bob.swapped"), "vs", round(rep.analytic.ps, 4))
print(rep.checks())

# %%
for row in sweep_attack([2, 4, 8, 16], theta):
    print(row.m, row.i_star, f"{row.xi:.3e}", row.bounds_hold)
