# %% [markdown]
# # Budget splits and the total guarantee
#
# In exact mode the budget is split between the test and the mechanism so
# that it recombines to exactly (eps, delta). With approximate volumes and
# samplers the calculator folds the oracle accuracy and failure
# probabilities back in.

# %%
from tukeydp.mechanisms import account, approx_privacy_accounting, split_privacy_budget

p = split_privacy_budget(1.0, 1e-6, "exact")
print(p)
print("recombined:", account(p))

# %%
q = split_privacy_budget(1.0, 1e-6, "approx")
print("eta", q.eta, "beta", q.beta, "tau", q.tau)
for form in ("conditioning", "closed"):
    print(form, account(q, form))

# %% [markdown]
# The total epsilon grows with eta; a sweep makes the cost visible.

# %%
for eta in (0.0, 0.01, 0.025, 0.05):
    e, d = approx_privacy_accounting(q.eps_p, q.eps_e, q.delta_p, q.delta_e, eta=eta,
                                     tau=q.tau, beta=q.beta, zeta=q.zeta)
    print(f"eta={eta:<6} eps_total={e:.4f} delta_total={d:.3g}")
