# %% [markdown]
# # One genealogy, three generators
#
# A supercritical birth-death process (birth rate 2, death rate 1) is run
# to time T.  We generate the same object three ways and check that they
# agree in distribution:
#
# * the forward Gillespie simulation, individual by individual;
# * the contour encoding, a Levy path with drift -1 and truncated jumps;
# * the backward construction of a sample of size n from i.i.d. branch heights.

# %%
import math

import numpy as np

from bdsfs import (
    RateParams,
    SamplingFrame,
    conditioned_forward,
    contour_population_at_T,
    delta,
    replicate_rng,
    sample_marked_tree,
    sfs_from_genealogy,
    sfs_from_marked_tree,
    simulate_contour,
    simulate_forward,
)
from bdsfs.coalescent import to_newick

params = RateParams(lam=2.0, mu=1.0, nu=1.0)
T = 1.0
reps = 20_000

# %% [markdown]
# ## Population size at T
#
# Forward and contour simulations of N_T.  The population size is zero with
# probability 1 - e^{rT} delta_T and otherwise geometric with success
# probability delta_T, so P(N >= k+1 | N >= k) = 1 - delta_T for every k >= 1.

# %%
fwd = np.array([simulate_forward(params, T, replicate_rng(0, i)).population for i in range(reps)])
con = np.array([contour_population_at_T(simulate_contour(params, T, replicate_rng(1, i))) for i in range(reps)])

print(f"mean N_T   forward {fwd.mean():.4f}   contour {con.mean():.4f}   e^(rT) {math.exp(params.r * T):.4f}")
print(" k   P(N>=k+1|N>=k) forward   contour   1 - delta_T")
for k in range(1, 6):
    rf = np.mean(fwd[fwd >= k] >= k + 1)
    rc = np.mean(con[con >= k] >= k + 1)
    print(f"{k:2d}   {rf:22.4f}   {rc:7.4f}   {1 - delta(params, T):11.4f}")

# %% [markdown]
# ## A sampled genealogy, forward versus backward
#
# Condition on N_T >= 3 and sample three individuals.  The number of birth
# events carried by at least two of the three sampled leaves should have
# the same law under both constructions.

# %%
frame = SamplingFrame(n=3, T=1.5)
n_pairs = 5000
fwd_r2 = [sfs_from_genealogy(*conditioned_forward(params, frame, replicate_rng(2, i))).R_ge2 for i in range(n_pairs)]
bwd_r2 = [sfs_from_marked_tree(sample_marked_tree(params, frame, replicate_rng(3, i))).R_ge2 for i in range(n_pairs)]
print("R^{>=2} histogram (forward | backward)")
for v in range(6):
    print(f"  {v}: {fwd_r2.count(v) / n_pairs:.3f} | {bwd_r2.count(v) / n_pairs:.3f}")

# %% [markdown]
# The backward tree can be exported as Newick, with per-edge event and
# mutation counts in comments.

# %%
print(to_newick(sample_marked_tree(params, SamplingFrame(6, 3.0), replicate_rng(4, 0))))
