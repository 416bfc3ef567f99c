# coding: utf-8

# # Moving a qubit down an Ising chain
#
# A global transport rule carries whatever sits on site 0 to the far end of a
# chain of |0> cells.  We run it twice: once on the rule engine, once as the
# compiled pulse schedule, and compare.

# In[1]:

import numpy as np

from bqca import pulses
from bqca.sequences import run_program, transport
from bqca.state import KET0, init_product, reduced_density

n = 14
phi = np.array([0.6, 0.8j])
prog = transport(n)
psi = init_product(n, [phi] + [KET0] * (n - 1))


# In[2]:

out = run_program(prog, psi)
rho_end = reduced_density(out, [n - 1]).matrix
print("fidelity at the last site:", np.real(phi.conj() @ rho_end @ phi))


# The compiled schedule is just a list of Ising segments, global rotations and
# end-site corrections.  Its duration is in units of 1/g.

# In[3]:

sched = prog.schedule
print(len(sched.elements), "elements, total time", sched.total_time / (np.pi / 4), "x pi/4")
for el in sched.elements[:6]:
    print("  ", el)


# In[4]:

out2 = pulses.simulate_schedule(sched, psi)
print("pulse vs rule engine overlap:", abs(np.vdot(out.amplitudes, out2.amplitudes)))
