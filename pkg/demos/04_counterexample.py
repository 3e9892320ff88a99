# coding: utf-8

# # When the block statistic is not integrable
#
# X takes the value exp(-exp(e^k)/2) with probability 2^-k. A whole block sits
# on atom k with probability 2^{-k l}, and then log of the block second moment
# is -exp(e^k). The doubly exponential growth beats the geometric decay for
# every l, so E|W| is infinite. A smooth cut-off around the population moment
# fixes that.

# In[1]:

from blockstat.harness import counterexample_demo, untruncated_lower_bound

for l in (100, 1000, 10_000):
    b = untruncated_lower_bound(l)
    print(f"l={l:6d}  terms grow from k={b['turning_k']}  "
          f"log10 of partial sums: {[f'{v:.3g}' for v in b['log10_partial'][:12:3]]} ... "
          f"{b['log10_partial'][-1]:.3g}")


# Monte Carlo cannot see the divergence: the events that cause it have
# probability below 2^-l. The truncated statistic is bounded by sqrt(l) log 2
# and its running mean settles.

# In[2]:

res = counterexample_demo((100, 1000), replications=1000, seed=0)
for l, r in res.items():
    print(f"l={l:5d}  |W| mean {r['mc_untruncated_mean']:.3f} +- {r['mc_untruncated_se']:.3f}   "
          f"|W^eta| mean {r['mc_truncated_mean']:.3f} +- {r['mc_truncated_se']:.3f}   "
          f"settled={r['truncated_settled']}")
