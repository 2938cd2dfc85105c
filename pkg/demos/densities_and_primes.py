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
# # Three densities and the prime counting function
#
# Integers that start with the digit 1 have no arithmetic density. Their
# proportion keeps swinging between about 1/9 and 5/9. A logarithmic
# average smooths the swing out.

# %%
import numpy as np

from logsumm import number_theory as nt

# %%
cps = [10**k for k in range(2, 8)] + [2 * 10**k for k in range(2, 7)]
rep = nt.density_report(nt.parse_set("ld:1"), sorted(cps), (1.2, 1.05))
for n, a, lg, h in zip(rep.checkpoints, rep.arithmetic, rep.logarithmic, rep.logarithmic_h):
    print(f"{n:>9}  arithmetic={a:.4f}  1/log n weights={lg:.4f}  harmonic weights={h:.4f}")
print("log10(2) =", np.log10(2))

# %% [markdown]
# With 1/log n normalisation the estimate still carries an O(1/log n) bias.
# Dividing by the harmonic number instead removes most of it.

# %%
sieve = nt.build_sieve(10**7)
for row in nt.pnt_hierarchy_report(sieve, [10**4, 10**5, 10**6, 10**7]):
    print({k: (round(v, 5) if isinstance(v, float) else v) for k, v in row.items()})
