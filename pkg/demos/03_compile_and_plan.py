"""End to end: parse, compile, plan, and validate.

The envelope benchmark: a sealed envelope holds a secret. Bob checks it,
then Alice checks it; the goal is that Bob believes Alice believes the
secret. Checking in the other order breaks the goal, which the semantic
validator detects.
"""

import os

from pdkb.compiler import compile_problem
from pdkb.model import ground
from pdkb.parser import desugar, parse_file
from pdkb.planner import solve_bfs
from pdkb.validator import assess_plan

BENCH = os.path.join(os.path.dirname(__file__), '..', 'benchmarks')


def load(name):
    return desugar(parse_file(os.path.join(BENCH, 'envelope', name)))


prob = load('envelope.pdkbddl')
cp = compile_problem(prob, ground(prob))
print('Compiled to %d fluents and %d operators (%s flavor).'
      % (len(cp.fluents), len(cp.operators), cp.flavor))

plan = solve_bfs(cp)
print('Shortest plan found by breadth-first search:')
for op in plan:
    print('   ', op.label)

result = assess_plan(prob, plan=[(op.name,) + op.args for op in plan])
print('Semantic verdict on that plan:', result.verdict)

reversed_ = desugar(parse_file(
    os.path.join(BENCH, 'envelope', 'envelope-reversed.pdkbddl')))
result = assess_plan(reversed_)
print('Same actions in the opposite order:', result.verdict)
print('Failure:', result.witness.failure)
