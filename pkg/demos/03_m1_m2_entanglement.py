# coding: utf-8

# # Two entangling rules, M1 and M2
#
# M1 keeps returning to where it started; M2 wanders and stays highly
# entangled.  R (twice one minus the mean single-site purity) is the yardstick.

# In[1]:

import numpy as np

from bqca.metrics import detect_period, measure_R, space_time
from bqca.rules import M1, M2, BoundaryConditions, evolve
from bqca.state import PureState, from_tokens, init_basis

bc = BoundaryConditions.fixed(0, 0)
n = 10


# In[2]:

corners = {"|10...0>": [1] + [0] * 9, "|0...01>": [0] * 9 + [1], "|10...01>": [1] + [0] * 8 + [1]}
for label, bits in corners.items():
    print(label, "period", detect_period(M1, init_basis(n, bits), bc))

amps = sum(init_basis(n, b).amplitudes for b in list(corners.values()) + [[0] * n]) / 2
print("equal superposition of the four corners: period", detect_period(M1, PureState(n, amps), bc))


# In[3]:

psi = from_tokens("+00000000+")
r1 = np.array([measure_R(s) for s in evolve(psi, M1, bc, 150)])
r2 = np.array([measure_R(s) for s in evolve(psi, M2, bc, 150)])
print(f"M1: max R {r1.max():.3f}   M2: mean R over steps 50..150 {r2[50:].mean():.3f}")


# A coarse text rendering of the M2 space-time diagram (probability of |1>).

# In[4]:

diag = space_time(evolve(psi, M2, bc, 30))
shades = " .:-=+*#%@"
for row in diag.p1:
    print("".join(shades[min(9, int(v * 10))] for v in row))
