# coding: utf-8

# # Entangled resource states
#
# Seeding |+> in the middle of the chain and spreading it outward gives GHZ
# states and Bell pairs on the end sites.  One step of the cluster rule on
# |+...+> gives a linear cluster state.

# In[1]:

import numpy as np

from bqca.metrics import all_bipartitions, measure_R, schmidt_rank, schmidt_spectrum, tangle
from bqca.sequences import (bell_pair, cluster, cluster_input, cluster_reference, ghz, ghz_state,
                            run_program)
from bqca.state import fidelity_up_to_phase


# In[2]:

for n in (4, 8, 14):
    prog = ghz(n)
    out = run_program(prog, prog.initial_state())
    print(f"GHZ n={n}: fidelity {fidelity_up_to_phase(out, ghz_state(n)):.12f}  "
          f"R {measure_R(out):.6f}  rank(first half) {schmidt_rank(out, range(n // 2))}  "
          f"time {prog.total_time / (np.pi / 8):g} pi/8")


# In[3]:

for n in (4, 8, 14):
    prog = bell_pair(n)
    out = run_program(prog, prog.initial_state())
    print(f"Bell n={n}: tangle(0, {n - 1}) = {tangle(out, 0, n - 1):.12f}, "
          f"compiled time {prog.total_time / (np.pi / 4):g} pi/4")


# All 127 cuts of an 8-site cluster state agree with a directly built one.

# In[4]:

n = 8
out = run_program(cluster(n), cluster_input(n))
ref = cluster_reference(n)
dev = max(np.max(np.abs(schmidt_spectrum(out, p) - schmidt_spectrum(ref, p))) for p in all_bipartitions(n))
print("cluster: max Schmidt spectrum deviation", dev, " R =", measure_R(out))
