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
# # Logarithmic means next to their moving-average cousins
#
# The plain logarithmic mean of a sequence and its moving-average variant
# with window (n^(1/lambda), n] should agree in the limit. This notebook puts
# numbers on how slowly that happens.

# %%
import numpy as np

from logsumm import sequences as sq
from logsumm import transforms as tr

# %% [markdown]
# ## Agreement on a bounded oscillation
#
# `alternating_01` has no ordinary limit, but every logarithmic method
# assigns it 1/2.

# %%
seq = sq.alternating_01()
for n in (10**3, 10**4, 10**5, 10**6):
    ell = tr.ell_transform(seq, n)
    mov = {lam: tr.movavg_transform(seq, n, lam)[1] for lam in (1.5, 2.0, 3.0)}
    print(n, round(ell, 6), {k: round(v, 6) for k, v in mov.items()})

# %% [markdown]
# ## The drift table
#
# The gap between the two normalisations shrinks only like 1/log n, so a
# slowly drifting sequence still shows a visible gap at a million terms.

# %%
drift = tr.equivalence_drift([sq.constant(1.0), sq.slow_drift(1.0, 2.0)], ("ell", "movavg:2"))
for name, gaps in zip(("constant", "slow_drift"), drift.gaps):
    print(name, np.round(gaps, 4))

# %% [markdown]
# ## Power-series side
#
# The L transform and Abel's method need x close to 1 before they settle.

# %%
for x in (0.9, 0.99, 0.999, 0.9999):
    print(x, tr.L_transform(seq, x), tr.abel_transform(seq, x))
