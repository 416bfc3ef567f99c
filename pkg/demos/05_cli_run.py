# coding: utf-8

# # Running experiments from config files
#
# The same experiments can be described in YAML and run with ``bqca-run``.
# Here we seed the bundled figure configs into a scratch directory and run
# one of them through the library entry point.

# In[1]:

import tempfile
from pathlib import Path

from bqca import cli
from bqca.experiment import read_diagram_csv

work = Path(tempfile.mkdtemp())
cli.main(["--seed-figures", "--out", str(work / "configs")])
print(sorted(p.name for p in (work / "configs").iterdir()))


# In[2]:

print((work / "configs" / "fig1.yaml").read_text())
status = cli.main([str(work / "configs" / "fig1.yaml"), "--out", str(work / "results"), "--emit-schedule"])
print("exit status", status)


# In[3]:

for f in sorted((work / "results").rglob("*")):
    print(f.relative_to(work))


# The CSV diagrams read back into arrays (rows are steps, columns sites).

# In[4]:

p1 = read_diagram_csv(work / "results" / "fig1" / "fig1.p1.csv")
print(p1.shape, "final row:", p1[-1].round(2))
