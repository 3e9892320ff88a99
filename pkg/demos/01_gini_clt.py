# coding: utf-8

# # Gini's mean difference over block statistics
#
# The U-statistic with kernel |x - y| is asymptotically normal once the
# projection h1 is nondegenerate. We check that against N(0, 4) and look at
# the two constants that define the standardisation.

# In[1]:

import math

import numpy as np

from blockstat import get_kernel, hoeffding, gamma_n_squared, validate_theorem1
from blockstat.ustat import Normal, bernoulli

gini = get_kernel("gini")


# The mean and the projection variance under N(0, 1), by quadrature:

# In[2]:

parts = hoeffding(gini, Normal(1.0))
print("theta   ", parts.theta, " 2/sqrt(pi) =", 2 / math.sqrt(math.pi))
print("gamma^2 ", gamma_n_squared(gini, Normal(1.0), parts),
      " closed form =", 1 / 3 + (2 * math.sqrt(3) - 4) / math.pi)


# h1 has a closed form too, 2 phi(x) + x (2 Phi(x) - 1) - theta. A few values:

# In[3]:

x = np.linspace(-3, 3, 7)
print(np.round(parts.h1(x), 6))


# Now 2000 replications of sqrt(b)(U - theta) / gamma with b = 500 blocks.
# The sorted algorithm makes each U cost O(b log b).

# In[4]:

rep = validate_theorem1(Normal(), "gini", 500, 2000, seed=0)
print(f"KS distance {rep.ks_distance:.4f}  p = {rep.ks_pvalue:.3f}")
print(f"variance {rep.variance:.3f} (target 4)")
print("rejection rates", rep.rejection_rates)


# A fair coin makes |x - y| degenerate: h1 is constant, so there is no
# sqrt(b) limit to standardise by.

# In[5]:

try:
    gamma_n_squared(gini, bernoulli(0.5))
except Exception as exc:
    print(type(exc).__name__, exc)
