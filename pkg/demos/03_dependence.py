# coding: utf-8

# # How fast does dependence decay?
#
# delta_i measures how much X_0 moves when innovation eps_i is swapped for an
# independent copy. For a linear process it is sqrt(2)|a_{-i}|, which lets us
# check the coupling estimator.

# In[1]:

import numpy as np

from blockstat import ProcessSpec
from blockstat.dependence import check_summability, partial_sum_bound_check, profile

ar = ProcessSpec.ar1(0.5, seed=3)
w = range(-8, 1)
mc = profile(ar, 1, 2.0, 20_000, window=w)
an = profile(ar, 1, mode="analytic", window=w)
for i, v, s, a in zip(mc.indices, mc.values, mc.stderr, an.values):
    print(f"i={i:3d}  mc={v:.4f} +- {s:.4f}  exact={a:.4f}")


# Summability of i^2 delta_i. Geometric decay gets a certified tail; a
# power law right at the boundary does not.

# In[2]:

print(check_summability(profile(ar, mode="analytic"), "i2", ar))
slow = ProcessSpec.power_law(3.0, window=128)
print(check_summability(profile(slow, mode="analytic"), "i2", slow))


# The moment bound on partial sums, || sum_{t<=N} (X_t^k - E X_t^k) ||_2 against
# sqrt(N) times the dependence sum, on a nonlinear Volterra process.

# In[3]:

from blockstat.processes import builtin_specs

volterra = builtin_specs(seed=0)["volterra"]
for N in (100, 1000):
    c = partial_sum_bound_check(volterra, 2, N, replications=200, delta_replications=10_000, seed=1)
    print(f"N={N:5d}  lhs={c.lhs:8.3f} +- {c.lhs_se:.3f}   rhs={c.rhs:8.3f}   holds={c.holds}")
