# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#   kernelspec:
#     display_name: Python 3
#     language: python
#     name: python3
# ---

# %% [markdown]
# # Heavy tails below the mean
#
# A law with infinite mean can still satisfy the L/log L moment condition.
# For such a law the centred sums, scaled by (n+1)log(n+1), should shrink
# anyway. This notebook first checks the moments and then simulates.

# %%
from logsumm import laws, lln_lab

# %%
for kind in ("zipf_log2", "zipf_log1", "zipf_plain"):
    r = lln_lab.moment_check(laws.zipf(kind))
    print(kind, "LlogL:", r["LlogL"].verdict, " mean:", r["mean"].verdict)

# %% [markdown]
# `zipf_log1` sits exactly in the interesting gap. Below we watch the median
# of the normalised statistic across 50 replicas. The seeds are split per
# replica, so the thread count does not change the numbers.

# %%
law = laws.zipf("zipf_log1", signed=True)
rep = lln_lab.simulate_statement("vi", law, [10**3, 10**4, 10**5], replicas=50, master_seed=7, threads=4)
for n, med, q in zip(rep.horizons, rep.median, rep.q90):
    print(f"n={n:>7}  median={med:.4g}  q90={q:.4g}")

# %% [markdown]
# Tail-probability series tell the same story from a different angle.

# %%
for kind in ("zipf_plain", "zipf_log1"):
    print(kind, lln_lab.exceedance_series(laws.zipf(kind), 1.0).verdict)
