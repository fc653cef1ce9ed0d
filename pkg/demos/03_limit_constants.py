# %% [markdown]
# # Limit constants and a small CLT experiment
#
# The variance of R^{>=2} / sqrt(n) tends to lam^2 / r^2.  The proof reduces
# it to integrals of logistic-order probabilities against the intensity
# mu + r / (1 + e^{-s}); here they are evaluated by adaptive quadrature and
# compared with their closed forms.

# %%
from bdsfs import RateParams
from bdsfs.harness import ExperimentConfig, reports_to_csv, run_clt, verify_calculus_identity, verify_moments

for lam, mu in [(2.0, 1.0), (3.0, 0.5)]:
    print(f"lam={lam} mu={mu}")
    for rep in verify_moments(RateParams(lam, mu)):
        print("  " + rep.summary())

# %% [markdown]
# The integrals rest on int_0^inf x^m / (1 + x)^n dx, an alternating
# binomial sum.

# %%
print(verify_calculus_identity(2, 5).summary())

# %% [markdown]
# ## Normality of R^{>=2}
#
# A reduced run (n = 500, 300 replicates) of the CLT experiment.  The full
# desk-scale check uses n = 2000 and 2000 replicates; see `python -m bdsfs clt`.
# The second row recentres at 0 instead of n lam / r and must fail: a power
# check of the KS test itself.

# %%
cfg = ExperimentConfig(RateParams(2.0, 1.0, 1.0), n=500, reps=300, seed=0, t_rule="clt")
print(reports_to_csv([run_clt(cfg, "R"), run_clt(cfg, "M"), run_clt(cfg, "R", center=0.0)]))
