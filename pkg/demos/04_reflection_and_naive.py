# %% [markdown]
# # Two protocols that fall over
#
# Without the pair-and-return step, Bob can simply bounce Alice's particles
# back as his own commitment.  And the EPR-based naive protocol lets Bob
# learn the coin before he is committed to anything.

# %%
import math

from qcointoss.harness import monte_carlo, naive_monte_carlo
from qcointoss.naive import NAIVE_HONEST, basis_reroll_attack
from qcointoss.protocol import StrategyInapplicable, derive_params
from qcointoss.strategies import reflection_attack

no_return = derive_params(4, math.pi / 9, variant="no-return")
est = monte_carlo(no_return, bob=reflection_attack(), trials=2000, base_seed=0)
print(f"reflection on no-return: p0 = {est.p0}, aborts = {est.aborts}")

try:
    reflection_attack(derive_params(4, math.pi / 9))
except StrategyInapplicable as exc:
    print("with returns:", exc)

# %%
honest = naive_monte_carlo(4, NAIVE_HONEST, 20_000, base_seed=5)
attack = naive_monte_carlo(4, basis_reroll_attack(4), 20_000, base_seed=5)
fresh = naive_monte_carlo(4, basis_reroll_attack(4, fresh_test=True), 20_000, base_seed=5)
for name, e in (("honest", honest), ("reroll", attack), ("reroll, fresh test", fresh)):
    print(f"{name:20s} p0={e.p0:.3f} p1={e.p1:.3f} abort={e.abort:.3f}")
