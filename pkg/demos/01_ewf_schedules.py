"""
Scheduling the elliptic wave filter
===================================

Unconstrained bounds first, then the resource-constrained schedulers on
the same 3-adder / 2-multiplier budget.
"""

from hlsched.dfg import LatencyModel, OpKind, critical_path_length, load_fixture
from hlsched.schedule import ResourceConstraints, alap, asap, fds, fdls, fu_usage, mbs, mobility

ewf = load_fixture("ewf")
print(len(ewf.nodes), "ops:", {k.value: ewf.count(k) for k in ewf.kinds()})
print("critical path", critical_path_length(ewf))

# %% slack per operation; zero marks the critical path
mob = mobility(asap(ewf), alap(ewf))
print("critical ops:", " ".join(n for n, m in mob.items() if m == 0))

# %% constrained schedulers
rc = ResourceConstraints.of(add=3, mul=2)
for sched in (mbs(ewf, rc=rc), fdls(ewf, rc=rc)):
    units = {k.value: v for k, v in fu_usage(ewf, sched).items()}
    print(f"{sched.algorithm:5} {sched.length:3} steps  units {units}")

# force-directed scheduling is time constrained instead
sched, usage = fds(ewf, deadline=17)
print(f"fds   {sched.length:3} steps  units {({k.value: v for k, v in usage.items()})}")

# %% two-cycle multipliers stretch everything
mul2 = LatencyModel({OpKind.MUL: 2})
for add, mul in [(3, 3), (2, 2), (2, 1), (1, 1)]:
    s = mbs(ewf, mul2, ResourceConstraints.of(add=add, mul=mul))
    print(f"+{add} *{mul}: {s.length} steps")
