"""
Serial chains to balanced trees
===============================

Same-kind single-fanout chains are re-associated into balanced trees,
the graph is list scheduled, and critical operations are pulled into
earlier steps with free units.
"""

import random
from fractions import Fraction

from hlsched.dfg import critical_path_length, evaluate, load_fixture
from hlsched.saa import find_chains, rebalance_chain, saa
from hlsched.schedule import ResourceConstraints

chain4 = load_fixture("chain4")
(chain,) = find_chains(chain4)
tree = rebalance_chain(chain4, chain)
print("chain4 depth", critical_path_length(chain4), "->", critical_path_length(tree))

# %% the same operands give the same sum
env = {x: Fraction(i + 1, 3) for i, x in enumerate(chain4.inputs)}
print(evaluate(chain4, env), evaluate(tree, env))

# %% the full flow on the wave filter
ewf = load_fixture("ewf")
result = saa(ewf, rc=ResourceConstraints.of(add=4, mul=2))
print("chains:", [c.nodes for c in result.chains])
print("cuts:", [(c.src, c.dst) for c in result.cuts])
print("baseline", result.baseline_length, "-> final", result.final_length)

# exact arithmetic, so equality is exact
rng = random.Random(0)
env = {x: Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for x in ewf.inputs}
assert evaluate(ewf, env) == evaluate(result.dfg, env)
