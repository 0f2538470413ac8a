"""
Hardware/software partitioning
==============================

Expensive operations go to hardware; values crossing the boundary are
buffered and pay a transfer cost.
"""

from hlsched.dfg import OpKind, load_fixture
from hlsched.partition import CostModel, partition_by_clique, partition_by_cycles, partition_metrics
from hlsched.schedule import ResourceConstraints, asap, mbs

cost = CostModel(sw_cycles={OpKind.ADD: 1, OpKind.MUL: 4}, transfer_cycles=2)

diamond = load_fixture("diamond")
p = partition_by_cycles(diamond, cost, threshold=2)
print({n: s.value for n, s in p.items()})
print(partition_metrics(diamond, asap(diamond), p, cost))

# %% wave filter, both strategies
# the eight multiplies never overlap, so they form one heavy clique that
# lands in hardware: here both strategies agree
ewf = load_fixture("ewf")
sched = mbs(ewf, rc=ResourceConstraints.of(add=3, mul=2))
for name, part in [
    ("cycles", partition_by_cycles(ewf, cost, threshold=2)),
    ("clique", partition_by_clique(ewf, sched, cost)),
]:
    print(name, partition_metrics(ewf, sched, part, cost))
