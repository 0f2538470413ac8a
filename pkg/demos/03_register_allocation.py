"""
Registers and functional units
==============================

Value lifetimes from a schedule, left-edge register binding, and the
clique-partition count for comparison.
"""

from hlsched.allocation import allocation_report, left_edge, lifetimes
from hlsched.dfg import load_fixture
from hlsched.saa import saa
from hlsched.schedule import ResourceConstraints, asap

diamond = load_fixture("diamond")
for lt in lifetimes(diamond, asap(diamond)):
    print(f"{lt.value}: [{lt.birth}, {lt.death}]")
print(left_edge(lifetimes(diamond, asap(diamond))).register)

# %% the boundary convention matters: a value read in the step another is written
lts = lifetimes(diamond, asap(diamond))
print("closed", left_edge(lts).count, "shared boundary", left_edge(lts, shared_boundary=True).count)

# %% wave filter after the chain transform
ewf = load_fixture("ewf")
r = saa(ewf, rc=ResourceConstraints.of(add=4, mul=2))
rep = allocation_report(r.dfg, r.schedule)
print("units", {k.value: v for k, v in rep.fu.items()}, "total", rep.fu_total)
print("registers", rep.registers, "clique", rep.registers_clique)
print(rep.conventions)
