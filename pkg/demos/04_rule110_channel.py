# coding: utf-8

# # Rule 110 as a quantum channel
#
# Classical rule 110 is not reversible, so on qubits it needs a non-unitary
# map.  A one-parameter family interpolates between the reversible rule 108
# (p=0) and rule 110 (p=1).

# In[1]:

import itertools

import numpy as np

from bqca.channels import (RULE110_TABLE, channel_evolve, channel_step, classical_block_step, mixed_rule,
                           rule110_channel)
from bqca.metrics import average_tangle, mixedness
from bqca.rules import BoundaryConditions
from bqca.state import KET_PLUS, init_basis, init_product

bc = BoundaryConditions.fixed(0, 0)


# On basis states the channel is exactly the classical automaton.

# In[2]:

ch = rule110_channel()
agree = 0
for bits in itertools.product((0, 1), repeat=6):
    out = channel_step(init_basis(6, bits), ch, bc)
    want = init_basis(6, classical_block_step(bits, RULE110_TABLE, bc)).to_density()
    agree += np.allclose(out.matrix, want.matrix, atol=1e-12)
print(agree, "of 64 basis states agree")


# Starting from |+>^6, the mixedness settles within a few steps, and more
# decay (larger p) leaves more pairwise entanglement behind.

# In[3]:

rho0 = init_product(6, [KET_PLUS] * 6)
for p in (0.0, 0.5, 1.0):
    traj = channel_evolve(rho0, mixed_rule(p), bc, 12)
    mix = [mixedness(r) for r in traj]
    tau = np.mean([average_tangle(r) for r in traj[1:]])
    print(f"p={p}: mixedness {np.round(mix[:6], 4)} ...  mean tangle {tau:.2e}")
