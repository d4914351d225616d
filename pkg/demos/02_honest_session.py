# %% [markdown]
# # One honest session, message by message
#
# Both parties follow the protocol.  The transcript is a replayable log: the
# same parameters, strategies and seed always give the same bytes.

# %%
import math
from collections import Counter

from qcointoss.harness import monte_carlo
from qcointoss.protocol import Transcript, derive_params, run_session

params = derive_params(3, math.pi / 9)
print(params, "particles per session:", params.particle_count)

out = run_session(params, seed=42)
print("completed:", out.completed, "bits:", out.alice_bit, out.bob_bit)
print(Counter(out.transcript.tags()))

# %%
text = out.transcript.dumps()
print(text.splitlines()[0])
assert Transcript.loads(text).dumps() == text
assert run_session(params, seed=42).transcript.dumps() == text

# %% [markdown]
# Over many sessions the coin is fair and nobody ever aborts.

# %%
est = monte_carlo(params, trials=5000, base_seed=1)
print(f"p0 = {est.p0:.4f} +/- {est.stderr0:.4f}, aborts = {est.aborts}")
