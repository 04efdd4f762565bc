"""Semantic plan and policy validation by direct PEKB progression.

Plans and policies run on full PEKB states via ``progress``; the same
awareness expansion the compiler performs on fluent effects is applied
here at the RML level. The cross-check harness replays random action
outcomes through both the semantic and the compiled pipeline and reports
any divergence.
"""

import random

from .compiler import compile_problem, fluent_space
from .model import ALWAYS, ground
from .pekb import (PEKB, ConditionalEffect, InconsistentResult, closure,
                   entails, is_consistent, progress)
from .rml import BELIEF, format_rml, negate, wrap

STRONG_VALID = 'StrongValid'
WEAK_VALID = 'WeakValid'
INVALID = 'Invalid'

DEFAULT_MAX_BRANCHES = 10_000
DEFAULT_MAX_DEPTH = 50


class ResourceLimit(Exception):
    pass


class UnknownAction(Exception):
    pass


class Trajectory:
    """A sequence of PEKB states with the actions between them."""

    __slots__ = ('states', 'actions', 'failure')

    def __init__(self, states, actions, failure=None):
        self.states = tuple(states)
        self.actions = tuple(actions)
        self.failure = failure

    def labels(self):
        return [a.label for a in self.actions]

    def __repr__(self):
        body = ' '.join(self.labels()) or '<empty>'
        if self.failure:
            return 'Trajectory[%s | %s]' % (body, self.failure)
        return 'Trajectory[%s]' % body


class VerificationResult:
    __slots__ = ('verdict', 'witness', 'trajectories')

    def __init__(self, verdict, witness=None, trajectories=0):
        self.verdict = verdict
        self.witness = witness
        self.trajectories = trajectories

    def __repr__(self):
        return 'VerificationResult(%s)' % self.verdict


# ---------------------------------------------------------------------------
# awareness expansion at the RML level


def _regular(is_ak, rml):
    return bool(rml.modalities) or not is_ak(rml.atom)


def _aware_condition(agent, ce, mu, depth, is_ak):
    """The spawned effect's condition, or None when it would exceed the
    depth bound."""
    pos = set()
    neg = set()
    for c in ce.condition_pos:
        if _regular(is_ak, c):
            nested = wrap(BELIEF, agent, c)
            if nested.depth > depth:
                return None
            pos.add(nested)
        else:
            pos.add(c)
    for c in ce.condition_neg:
        if _regular(is_ak, c):
            nested = negate(wrap(BELIEF, agent, c))
            if nested.depth > depth:
                return None
            pos.add(nested)
        else:
            neg.add(c)
    if mu != ALWAYS:
        if _regular(is_ak, mu):
            nested = wrap(BELIEF, agent, mu)
            if nested.depth > depth:
                return None
            pos.add(nested)
        else:
            pos.add(mu)
    return pos, neg


def expand_outcome(outcome, awareness, depth, is_ak):
    """One outcome's conditional effects plus all awareness-derived ones.

    Every aware agent adopts a nested-belief copy of each add; for each
    base delete the agent comes to consider the dropped literal's negation
    possible (skipped when the literal already speaks about that agent's
    own beliefs). Spawned effects are adds and spawn recursively until the
    depth bound cuts them off.
    """
    seen = set(outcome)
    frontier = list(outcome)
    while frontier:
        fresh = []
        for ce in frontier:
            if not _regular(is_ak, ce.effect):
                continue
            for agent, mu in sorted(awareness.items()):
                if ce.delete:
                    mods = ce.effect.modalities
                    if mods and mods[0][1] == agent:
                        continue
                    nested = negate(wrap(BELIEF, agent, ce.effect))
                else:
                    nested = wrap(BELIEF, agent, ce.effect)
                if nested.depth > depth:
                    continue
                cond = _aware_condition(agent, ce, mu, depth, is_ak)
                if cond is None:
                    continue
                cand = ConditionalEffect(cond[0], nested,
                                         condition_neg=cond[1])
                if cand not in seen:
                    seen.add(cand)
                    fresh.append(cand)
        frontier = fresh
    return seen


# ---------------------------------------------------------------------------
# stepping


def precondition_holds(state, action):
    return (all(r in state for r in action.precondition_pos)
            and not any(r in state for r in action.precondition_neg))


def successors(state, action, depth, is_ak):
    """All progression results of a ground action, one per outcome."""
    out = []
    for outcome in action.outcomes:
        expanded = expand_outcome(outcome, action.awareness, depth, is_ak)
        out.append(progress(state, expanded))
    return out


def goal_holds(problem, state):
    return (all(r in state for r in problem.goal_pos)
            and not any(r in state for r in problem.goal_neg))


def _action_index(ground_actions):
    return {(a.name,) + a.args: a for a in ground_actions}


def resolve_plan(problem, plan=None, ground_actions=None):
    """Plan steps as GroundActions; steps come from the problem when not
    given explicitly."""
    if ground_actions is None:
        ground_actions = ground(problem)
    if plan is None:
        plan = problem.plan
    if plan is None:
        raise UnknownAction('no plan to assess')
    index = _action_index(ground_actions)
    resolved = []
    for step in plan:
        if not isinstance(step, tuple):
            resolved.append(step)
            continue
        action = index.get(tuple(step))
        if action is None:
            raise UnknownAction('no ground action %s' % (step,))
        resolved.append(action)
    return resolved


# ---------------------------------------------------------------------------
# plan assessment


def assess_plan(problem, plan=None, ground_actions=None,
                max_branches=DEFAULT_MAX_BRANCHES):
    """Enumerate every trajectory of the plan and aggregate verdicts.

    StrongValid: all trajectories complete and end in the goal.
    WeakValid: some do. Invalid: none do; an inapplicable step or an
    inconsistent progression is a failed trajectory, not an exception.
    """
    actions = resolve_plan(problem, plan, ground_actions)
    init = closure(PEKB(problem.initial))
    successes = []
    failures = []
    count = [0]

    def walk(state, step, states, taken):
        count[0] += 1
        if count[0] > max_branches:
            raise ResourceLimit('trajectory cap %d exceeded' % max_branches)
        if step == len(actions):
            traj = Trajectory(states, taken)
            if goal_holds(problem, state):
                successes.append(traj)
            else:
                failures.append(Trajectory(states, taken,
                                           'goal not satisfied'))
            return
        action = actions[step]
        if not precondition_holds(state, action):
            failures.append(Trajectory(states, taken,
                                       'step %d: %s not applicable'
                                       % (step, action.label)))
            return
        try:
            nexts = successors(state, action, problem.depth, problem.is_ak)
        except InconsistentResult as exc:
            failures.append(Trajectory(states, taken,
                                       'step %d: %s' % (step, exc)))
            return
        for nxt in nexts:
            walk(nxt, step + 1, states + [nxt], taken + [action])

    walk(init, 0, [init], [])
    total = len(successes) + len(failures)
    if not failures and successes:
        return VerificationResult(STRONG_VALID, successes[0], total)
    if successes:
        return VerificationResult(WEAK_VALID, successes[0], total)
    return VerificationResult(INVALID, failures[0] if failures else None,
                              total)


# ---------------------------------------------------------------------------
# policy verification


def state_key(state):
    """Canonical text form of a closed PEKB state (policy lookup key)."""
    return '\n'.join(format_rml(r) for r in sorted(closure(state).rmls))


def plan_policy(problem, plan=None, ground_actions=None):
    """The policy a deterministic plan induces along its own trajectory."""
    actions = resolve_plan(problem, plan, ground_actions)
    state = closure(PEKB(problem.initial))
    mapping = {}
    for action in actions:
        mapping[state_key(state)] = action
        nexts = successors(state, action, problem.depth, problem.is_ak)
        if len(nexts) != 1:
            raise UnknownAction('plan-induced policies need deterministic '
                                'actions')
        state = nexts[0]
    return mapping


def verify_policy(problem, policy, ground_actions=None,
                  max_states=DEFAULT_MAX_BRANCHES,
                  max_depth=DEFAULT_MAX_DEPTH):
    """Exhaustively execute a policy keyed by state_key.

    Undefined at a goal state ends the trajectory successfully; undefined
    anywhere else fails it. Cycles are accepted under the fairness
    reading: StrongValid requires every reachable state to have some path
    to a terminal success and no reachable failure.
    """
    if ground_actions is None:
        ground_actions = ground(problem)
    index = _action_index(ground_actions)
    init = closure(PEKB(problem.initial))

    succ_map = {}
    terminal_ok = {}
    fail_witness = {}
    frontier = [(init, [init], [])]
    seen = {init}
    while frontier:
        state, states, taken = frontier.pop()
        if len(states) > max_depth + 1:
            raise ResourceLimit('policy depth cap %d exceeded' % max_depth)
        key = state_key(state)
        chosen = policy.get(key)
        if chosen is None:
            if goal_holds(problem, state):
                terminal_ok[state] = Trajectory(states, taken)
            else:
                fail_witness[state] = Trajectory(
                    states, taken, 'policy undefined off the goal')
            continue
        if isinstance(chosen, tuple):
            chosen = index.get(tuple(chosen))
        if chosen is None or not precondition_holds(state, chosen):
            label = chosen.label if chosen is not None else '<unknown>'
            fail_witness[state] = Trajectory(
                states, taken, 'policy action %s not applicable' % label)
            continue
        try:
            nexts = successors(state, chosen, problem.depth, problem.is_ak)
        except InconsistentResult as exc:
            fail_witness[state] = Trajectory(states, taken, str(exc))
            continue
        succ_map[state] = nexts
        for nxt in nexts:
            if nxt not in seen:
                if len(seen) > max_states:
                    raise ResourceLimit('policy state cap %d exceeded'
                                        % max_states)
                seen.add(nxt)
                frontier.append((nxt, states + [nxt], taken + [chosen]))

    if fail_witness:
        return VerificationResult(INVALID, next(iter(fail_witness.values())),
                                  len(seen))
    if not terminal_ok:
        witness = Trajectory([init], [], 'no trajectory reaches the goal')
        return VerificationResult(INVALID, witness, len(seen))
    # can every reachable state still reach a terminal success?
    can_finish = set(terminal_ok)
    grew = True
    while grew:
        grew = False
        for state, nexts in succ_map.items():
            if state not in can_finish and any(n in can_finish
                                               for n in nexts):
                can_finish.add(state)
                grew = True
    witness = next(iter(terminal_ok.values()))
    if all(s in can_finish for s in seen):
        return VerificationResult(STRONG_VALID, witness, len(seen))
    return VerificationResult(WEAK_VALID, witness, len(seen))


# ---------------------------------------------------------------------------
# semantic vs compiled cross-check


def _compiled_state(pekb_state, fluent_set):
    return frozenset(r for r in closure(pekb_state).rmls if r in fluent_set)


def _apply_outcome(state, op, outcome_index):
    adds, dels = op.outcomes[outcome_index]
    fired_dels = {l for cond, l in dels if cond.satisfied(state)}
    fired_adds = {l for cond, l in adds if cond.satisfied(state)}
    return frozenset((state - fired_dels) | fired_adds)


def _random_state(rng, pool, max_size=4):
    while True:
        size = rng.randint(0, max_size)
        sample = rng.sample(pool, min(size, len(pool)))
        if is_consistent(PEKB(sample)):
            return closure(PEKB(sample))


def crosscheck_progression(problem, n_cases, seed, max_state_size=4):
    """Random (state, action, outcome) triples through both pipelines.

    Semantic side: progress on the raw outcome (no awareness). Compiled
    side: the matching operator compiled without awareness, applied to the
    projected state. Reports every divergence with a greedily minimized
    state.
    """
    ground_actions = ground(problem)
    cp = compile_problem(problem, ground_actions, with_awareness=False)
    fluent_set = frozenset(cp.fluents)
    pool = sorted(fluent_set)
    rng = random.Random(seed)
    divergences = []
    skipped = 0

    def run_case(state, a_idx, o_idx):
        """(semantic projection, compiled successor) or None if skipped."""
        action = ground_actions[a_idx]
        try:
            sem = progress(state, action.outcomes[o_idx])
        except InconsistentResult:
            return None
        compiled_succ = _apply_outcome(_compiled_state(state, fluent_set),
                                       cp.operators[a_idx], o_idx)
        return _compiled_state(sem, fluent_set), compiled_succ

    for case in range(n_cases):
        state = _random_state(rng, pool, max_state_size)
        a_idx = rng.randrange(len(ground_actions))
        o_idx = rng.randrange(len(ground_actions[a_idx].outcomes))
        pair = run_case(state, a_idx, o_idx)
        if pair is None:
            skipped += 1
            continue
        sem_proj, comp_succ = pair
        if sem_proj == comp_succ:
            continue
        # greedy minimization: drop state RMLs while the divergence holds
        core = state
        for rml in sorted(state.rmls):
            smaller = PEKB(core.rmls - {rml}, closed=True)
            trial = run_case(smaller, a_idx, o_idx)
            if trial is not None and trial[0] != trial[1]:
                core = smaller
        final = run_case(core, a_idx, o_idx)
        divergences.append({
            'case': case,
            'action': ground_actions[a_idx].label,
            'outcome': o_idx,
            'state': [format_rml(r) for r in sorted(core.rmls)],
            'semantic': [format_rml(r) for r in sorted(final[0])],
            'compiled': [format_rml(r) for r in sorted(final[1])],
        })
    return {
        'version': 1,
        'cases': n_cases,
        'seed': seed,
        'skipped': skipped,
        'divergences': divergences,
    }
