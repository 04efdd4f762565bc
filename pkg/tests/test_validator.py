"""Semantic plan assessment, policy verification, and the cross-check."""

import os

import pytest

from pdkb.pekb import PEKB, closure
from pdkb.parser import desugar, parse_file
from pdkb.rml import parse_rml
from pdkb.validator import (INVALID, STRONG_VALID, WEAK_VALID, UnknownAction,
                            assess_plan, crosscheck_progression, plan_policy,
                            resolve_plan, state_key, successors,
                            verify_policy)

HERE = os.path.dirname(__file__)
BENCH = os.path.join(HERE, '..', 'benchmarks')


def load(*parts):
    return desugar(parse_file(os.path.join(BENCH, *parts)))


@pytest.fixture(scope='module')
def envelope():
    return load('envelope', 'envelope.pdkbddl')


@pytest.fixture(scope='module')
def ask():
    return load('misc', 'ask.pdkbddl')


# ---------------------------------------------------------------------------
# plan assessment


def test_envelope_plan_is_strong_valid(envelope):
    result = assess_plan(envelope)
    assert result.verdict == STRONG_VALID
    assert len(result.witness.states) == 3
    assert len(result.witness.actions) == 2


def test_reversed_envelope_plan_is_invalid():
    prob = load('envelope', 'envelope-reversed.pdkbddl')
    result = assess_plan(prob)
    assert result.verdict == INVALID
    assert 'goal' in result.witness.failure


def test_empty_plan_succeeds_when_goal_holds_initially(envelope):
    goal = envelope.goal_pos[0]
    assert goal not in closure(PEKB(envelope.initial))
    result = assess_plan(envelope, plan=[])
    assert result.verdict == INVALID
    trivial = load('misc', 'unsolvable.pdkbddl')
    # flip the goal to something already entailed
    trivial.goal_pos = ()
    assert assess_plan(trivial, plan=[]).verdict == STRONG_VALID


def test_inapplicable_step_names_itself():
    prob = load('misc', 'negation-removal.pdkbddl')
    result = assess_plan(prob, plan=[('check',)])
    assert result.verdict == INVALID
    assert 'step 0' in result.witness.failure
    assert 'check' in result.witness.failure


def test_unknown_plan_action_raises(envelope):
    with pytest.raises(UnknownAction):
        assess_plan(envelope, plan=[('teleport', 'bob')])


def test_nondeterministic_plan_is_weak_at_best(ask):
    result = assess_plan(ask, plan=[('ask',), ('report-yes',)])
    assert result.verdict == WEAK_VALID
    assert result.trajectories == 2


def test_sequential_plans_cannot_cover_both_branches(ask):
    # whichever report step matches the outcome, the other is inapplicable
    result = assess_plan(ask, plan=[('ask',), ('report-yes',),
                                    ('report-no',)])
    assert result.verdict == INVALID


# ---------------------------------------------------------------------------
# policy verification


def test_plan_induced_policy_is_strong_valid(envelope):
    policy = plan_policy(envelope)
    assert verify_policy(envelope, policy).verdict == STRONG_VALID


def test_branching_policy_covers_both_outcomes(ask):
    init = closure(PEKB(ask.initial))
    (do_ask,) = resolve_plan(ask, plan=[('ask',)])
    yes_state, no_state = successors(init, do_ask, ask.depth, ask.is_ak)
    if parse_rml('B_a raining') not in yes_state:
        yes_state, no_state = no_state, yes_state
    policy = {state_key(init): ('ask',),
              state_key(yes_state): ('report-yes',),
              state_key(no_state): ('report-no',)}
    assert verify_policy(ask, policy).verdict == STRONG_VALID


def test_partial_policy_is_invalid_with_witness(ask):
    init = closure(PEKB(ask.initial))
    policy = {state_key(init): ('ask',)}
    result = verify_policy(ask, policy)
    assert result.verdict == INVALID
    assert 'undefined' in result.witness.failure


def test_looping_policy_that_never_exits_is_invalid():
    prob = load('misc', 'coin.pdkbddl')
    # flipping forever regardless of the result: no terminal success
    init = closure(PEKB(prob.initial))
    (flip,) = resolve_plan(prob, plan=[('flip',)])
    keys = {state_key(init)}
    frontier = [init]
    while frontier:
        state = frontier.pop()
        for nxt in successors(state, flip, prob.depth, prob.is_ak):
            if state_key(nxt) not in keys:
                keys.add(state_key(nxt))
                frontier.append(nxt)
    policy = {k: ('flip',) for k in keys}
    assert verify_policy(prob, policy).verdict == INVALID


def test_retry_policy_on_coin_is_strong_under_fairness():
    prob = load('misc', 'coin.pdkbddl')
    init = closure(PEKB(prob.initial))
    (flip,) = resolve_plan(prob, plan=[('flip',)])
    policy = {}
    frontier = [init]
    seen = {init}
    while frontier:
        state = frontier.pop()
        if parse_rml('heads') in state:
            continue
        policy[state_key(state)] = ('flip',)
        for nxt in successors(state, flip, prob.depth, prob.is_ak):
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    assert verify_policy(prob, policy).verdict == STRONG_VALID


# ---------------------------------------------------------------------------
# semantic vs compiled progression cross-check


def test_crosscheck_is_deterministic(envelope):
    first = crosscheck_progression(envelope, 50, seed=3)
    second = crosscheck_progression(envelope, 50, seed=3)
    assert first == second
    assert first['cases'] == 50


def test_crosscheck_finds_no_divergence_on_grapevine():
    prob = load('grapevine', 'prob-4ag-2g-2d.pdkbddl')
    report = crosscheck_progression(prob, 200, seed=7)
    assert report['divergences'] == []
    assert report['cases'] == 200
