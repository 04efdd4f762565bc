"""Compilation of ground nested-belief problems to classical/FOND PDDL.

Fluents are identified with canonical RMLs: one fluent per RML in the
depth-bounded space over the regular propositions, plus one fluent per
always-known (AK) atom. The whole state is the root agent's perspective,
so an RML fluent being true means the root believes that RML.

The ancillary rules derive extra conditional effects until fixpoint:
  closure         an add entails adds of everything it entails
  negation        an add deletes the negated literal
  contrapositive  a delete also deletes everything entailing the literal
  uncertain       an add whose condition is not believed false deletes the
                  negated literal
  awareness       per aware agent, nested-belief copies of adds/deletes
"""

import itertools
import json

from .model import ALWAYS
from .pekb import PEKB, closure
from .rml import (BELIEF, POSSIBLE, RML, RmlSpace, enumerate_rmls,
                  format_rml, lit, negate, upward_closure, wrap)

CLASSICAL = 'classical'
FOND = 'fond'

REPORT_VERSION = 1


class NonRootRML(Exception):
    """An initial/goal/effect RML is outside the fluent space."""


class CompiledCondition:
    """Positive and negative fluent sets guarding an effect."""

    __slots__ = ('pos', 'neg')

    def __init__(self, pos=(), neg=()):
        self.pos = frozenset(pos)
        self.neg = frozenset(neg)

    def key(self):
        return (tuple(sorted(self.pos)), tuple(sorted(self.neg)))

    def __eq__(self, other):
        return (isinstance(other, CompiledCondition)
                and self.pos == other.pos and self.neg == other.neg)

    def __hash__(self):
        return hash((self.pos, self.neg))

    def __repr__(self):
        return 'Cond<+%s -%s>' % (sorted(map(str, self.pos)),
                                  sorted(map(str, self.neg)))

    def satisfied(self, state):
        return self.pos <= state and not self.neg & state


class CompiledOperator:
    """A ground operator over fluents.

    outcomes: tuple of (adds, dels), each a frozenset of
    (CompiledCondition, fluent RML) pairs.
    """

    __slots__ = ('name', 'args', 'precondition', 'outcomes')

    def __init__(self, name, args, precondition, outcomes):
        self.name = name
        self.args = tuple(args)
        self.precondition = precondition
        self.outcomes = tuple(outcomes)

    @property
    def label(self):
        if self.args:
            return '(%s %s)' % (self.name, ' '.join(self.args))
        return '(%s)' % self.name

    def __repr__(self):
        return 'CompiledOperator%s' % self.label


class CompiledProblem:
    __slots__ = ('fluents', 'init', 'goal', 'operators', 'flavor', 'report')

    def __init__(self, fluents, init, goal, operators, flavor, report):
        self.fluents = tuple(fluents)
        self.init = frozenset(init)
        self.goal = goal
        self.operators = tuple(operators)
        self.flavor = flavor
        self.report = report


# ---------------------------------------------------------------------------
# base encoding


def fluent_space(problem):
    """The ordered fluent table: regular RMLs then AK atoms."""
    regular = enumerate_rmls(RmlSpace(problem.regular_propositions(),
                                      problem.agents, problem.depth))
    ak = [lit(p) for p in problem.ak_propositions()]
    return tuple(regular) + tuple(sorted(ak))


def _split_condition(problem, pos, neg, fluents):
    cond_pos = set()
    cond_neg = set()
    for rml in pos:
        if rml not in fluents:
            raise NonRootRML('condition %s is outside the fluent space'
                             % rml)
        cond_pos.add(rml)
    for rml in neg:
        # negated AK atoms never exist as fluents; requiring their absence
        # is trivially true, so they are dropped
        if rml.negated and not rml.modalities and problem.is_ak(rml.atom):
            continue
        cond_neg.add(rml)
    return CompiledCondition(cond_pos, cond_neg)


def encode_base(problem, ground_actions):
    """Pre-ancillary compiled problem."""
    fluents = fluent_space(problem)
    fluent_set = frozenset(fluents)

    init = set()
    for rml in closure(PEKB(problem.initial)):
        if rml in fluent_set:
            init.add(rml)
        elif rml.negated and not rml.modalities and problem.is_ak(rml.atom):
            continue
        else:
            raise NonRootRML('initial RML %s is outside the fluent space'
                             % rml)
    goal = _split_condition(problem, problem.goal_pos, problem.goal_neg,
                            fluent_set)

    operators = []
    for action in ground_actions:
        pre = _split_condition(problem, action.precondition_pos,
                               action.precondition_neg, fluent_set)
        outcomes = []
        for outcome in action.outcomes:
            adds = set()
            dels = set()
            for ce in outcome:
                cond = _split_condition(problem, ce.condition_pos,
                                        ce.condition_neg, fluent_set)
                effect = ce.effect
                if effect not in fluent_set:
                    raise NonRootRML('effect %s is outside the fluent space'
                                     % effect)
                (dels if ce.delete else adds).add((cond, effect))
            outcomes.append((frozenset(adds), frozenset(dels)))
        operators.append(CompiledOperator(action.name, action.args, pre,
                                          tuple(outcomes)))
    return fluents, init, goal, operators


# ---------------------------------------------------------------------------
# ancillary rules


class AncillaryConfig:
    __slots__ = ('depth', 'is_ak', 'awareness', 'with_awareness', 'truncated')

    def __init__(self, depth, is_ak, awareness=None, with_awareness=True):
        self.depth = depth
        self.is_ak = is_ak
        self.awareness = awareness or {}
        self.with_awareness = with_awareness
        self.truncated = set()


def _is_regular(config, rml):
    return bool(rml.modalities) or not config.is_ak(rml.atom)


def _closure_rule(config, adds):
    out = set()
    for cond, l in adds:
        if not _is_regular(config, l):
            continue
        for weaker in upward_closure(l):
            out.add((cond, weaker))
    return out


def _negation_rule(config, adds):
    out = set()
    for cond, l in adds:
        if not _is_regular(config, l):
            continue
        out.add((cond, negate(l)))
    return out


def _contrapositive_rule(config, dels):
    out = set()
    for cond, l in dels:
        if not _is_regular(config, l):
            continue
        for weaker in upward_closure(negate(l)):
            out.add((cond, negate(weaker)))
    return out


def _uncertain_rule(config, adds):
    out = set()
    for cond, l in adds:
        if not _is_regular(config, l):
            continue
        neg = frozenset(negate(c) for c in cond.pos) | cond.neg
        out.add((CompiledCondition((), neg), negate(l)))
    return out


def _awareness_condition(config, agent, cond, mu):
    pos = set()
    neg = set()
    for c in cond.pos:
        if _is_regular(config, c):
            nested = wrap(BELIEF, agent, c)
            if nested.depth > config.depth:
                return None
            pos.add(nested)
        else:
            pos.add(c)
    for c in cond.neg:
        if _is_regular(config, c):
            nested = negate(wrap(BELIEF, agent, c))
            if nested.depth > config.depth:
                return None
            pos.add(nested)
        else:
            neg.add(c)
    if mu != ALWAYS:
        if _is_regular(config, mu):
            nested = wrap(BELIEF, agent, mu)
            if nested.depth > config.depth:
                return None
            pos.add(nested)
        else:
            pos.add(mu)
    return CompiledCondition(pos, neg)


def _awareness_rules(config, adds, dels):
    out = set()
    for agent, mu in sorted(config.awareness.items()):
        for cond, l in adds:
            if not _is_regular(config, l):
                continue
            nested = wrap(BELIEF, agent, l)
            if nested.depth > config.depth:
                config.truncated.add((agent, cond, l, 'add'))
                continue
            new_cond = _awareness_condition(config, agent, cond, mu)
            if new_cond is None:
                config.truncated.add((agent, cond, l, 'add'))
                continue
            out.add((new_cond, nested))
        for cond, l in dels:
            if not _is_regular(config, l):
                continue
            # introspection exception: agents do not observe changes to
            # beliefs about their own beliefs
            if l.modalities and l.modalities[0][1] == agent:
                continue
            nested = negate(wrap(BELIEF, agent, l))
            if nested.depth > config.depth:
                config.truncated.add((agent, cond, l, 'del'))
                continue
            new_cond = _awareness_condition(config, agent, cond, mu)
            if new_cond is None:
                config.truncated.add((agent, cond, l, 'del'))
                continue
            out.add((new_cond, nested))
    return out


def apply_ancillary(op, config):
    """Expand one operator's outcomes with ancillary effects to fixpoint."""
    outcomes = []
    for adds, dels in op.outcomes:
        adds = set(adds)
        dels = set(dels)
        while True:
            before = (len(adds), len(dels))
            adds |= _closure_rule(config, adds)
            dels |= _negation_rule(config, adds)
            dels |= _contrapositive_rule(config, dels)
            dels |= _uncertain_rule(config, adds)
            if config.with_awareness:
                adds |= _awareness_rules(config, adds, dels)
            if (len(adds), len(dels)) == before:
                break
        outcomes.append((frozenset(adds), frozenset(dels)))
    return CompiledOperator(op.name, op.args, op.precondition,
                            tuple(outcomes))


def _prune(op, fluent_set, counters):
    """Drop never-firing effects (overlapping pos/neg, impossible pos)."""
    outcomes = []
    for adds, dels in op.outcomes:
        def keep(pair):
            cond, _ = pair
            if cond.pos & cond.neg:
                return False
            if any(f not in fluent_set for f in cond.pos):
                return False
            return True

        kept_adds = frozenset(p for p in adds if keep(p))
        kept_dels = frozenset(p for p in dels if keep(p))
        counters['pruned'] += (len(adds) - len(kept_adds)
                               + len(dels) - len(kept_dels))
        # negative conditions on fluents outside the table are vacuous
        def trim(pair):
            cond, l = pair
            neg = frozenset(f for f in cond.neg if f in fluent_set)
            if neg == cond.neg:
                return pair
            return (CompiledCondition(cond.pos, neg), l)

        outcomes.append((frozenset(trim(p) for p in kept_adds),
                         frozenset(trim(p) for p in kept_dels)))
    return CompiledOperator(op.name, op.args, op.precondition,
                            tuple(outcomes))


# ---------------------------------------------------------------------------
# driver


def _unreduced_style_count(problem):
    """Fluent count under unreduced modality sequences with AK atoms
    counted at both polarities (an alternative bookkeeping style kept in
    the report for comparison)."""
    n = len(problem.agents)
    seqs = sum((2 * n) ** k for k in range(problem.depth + 1))
    return (2 * len(problem.regular_propositions()) * seqs
            + 2 * len(problem.ak_propositions()))


def compile_problem(problem, ground_actions, with_awareness=True,
                    flavor=None, truncated_ground=0):
    fluents, init, goal, base_ops = encode_base(problem, ground_actions)
    fluent_set = frozenset(fluents)
    counters = {'spawned': 0, 'truncated': 0, 'pruned': 0}
    operators = []
    for action, op in zip(ground_actions, base_ops):
        config = AncillaryConfig(problem.depth, problem.is_ak,
                                 awareness=action.awareness,
                                 with_awareness=with_awareness)
        base_sizes = sum(len(a) + len(d) for a, d in op.outcomes)
        expanded = apply_ancillary(op, config)
        done_sizes = sum(len(a) + len(d) for a, d in expanded.outcomes)
        counters['spawned'] += done_sizes - base_sizes
        counters['truncated'] += len(config.truncated)
        operators.append(_prune(expanded, fluent_set, counters))

    if flavor is None:
        flavor = CLASSICAL if all(len(op.outcomes) == 1
                                  for op in operators) else FOND
    n_ak = len(problem.ak_propositions())
    report = {
        'version': REPORT_VERSION,
        'flavor': flavor,
        'depth': problem.depth,
        'agents': len(problem.agents),
        'fluents': len(fluents),
        'fluents_regular': len(fluents) - n_ak,
        'fluents_ak': n_ak,
        'fluents_unreduced_style': _unreduced_style_count(problem),
        'operators': len(operators),
        'spawned_ancillary_effects': counters['spawned'],
        'pruned_effects': counters['pruned'],
        'truncated_effects': counters['truncated'] + truncated_ground,
    }
    return CompiledProblem(fluents, init, goal, operators, flavor, report)


# ---------------------------------------------------------------------------
# emission


def fluent_symbol(rml):
    """Deterministic PDDL-safe name, reversible via fluents.map."""
    parts = []
    for mode, agent in rml.modalities:
        parts.append('%s_%s' % (mode.lower(), agent))
    if rml.negated:
        parts.append('not')
    atom = rml.atom.predicate
    if rml.atom.args:
        atom += '__' + '__'.join(rml.atom.args)
    parts.append(atom)
    return '_'.join(parts)


def _emit_condition(cond, names, indent):
    items = ['(%s)' % names[f] for f in sorted(cond.pos)]
    items += ['(not (%s))' % names[f] for f in sorted(cond.neg)]
    if not items:
        return '(and )'
    return '(and %s)' % (' '.join(items))


def _emit_effects(adds, dels, names):
    lines = []
    for cond, l in sorted(dels, key=lambda p: (p[1], p[0].key())):
        body = '(not (%s))' % names[l]
        if cond.pos or cond.neg:
            lines.append('      (when %s %s)'
                         % (_emit_condition(cond, names, 6), body))
        else:
            lines.append('      %s' % body)
    for cond, l in sorted(adds, key=lambda p: (p[1], p[0].key())):
        body = '(%s)' % names[l]
        if cond.pos or cond.neg:
            lines.append('      (when %s %s)'
                         % (_emit_condition(cond, names, 6), body))
        else:
            lines.append('      %s' % body)
    return lines


def emit_domain(cp, domain_name):
    names = {f: fluent_symbol(f) for f in cp.fluents}
    reqs = ':strips :negative-preconditions :conditional-effects'
    if cp.flavor == FOND:
        reqs += ' :non-deterministic'
    lines = ['(define (domain %s)' % domain_name,
             '  (:requirements %s)' % reqs,
             '  (:predicates']
    for f in cp.fluents:
        lines.append('    (%s)' % names[f])
    lines.append('  )')
    for op in cp.operators:
        opname = op.name if not op.args else \
            '%s__%s' % (op.name, '__'.join(op.args))
        lines.append('  (:action %s' % opname)
        lines.append('    :parameters ()')
        lines.append('    :precondition %s'
                     % _emit_condition(op.precondition, names, 4))
        if cp.flavor == FOND and len(op.outcomes) > 1:
            branches = []
            for adds, dels in op.outcomes:
                body = _emit_effects(adds, dels, names)
                branches.append('    (and\n%s\n    )' % '\n'.join(body))
            lines.append('    :effect (oneof\n%s\n    )'
                         % '\n'.join(branches))
        else:
            body = _emit_effects(op.outcomes[0][0], op.outcomes[0][1], names)
            lines.append('    :effect (and\n%s\n    )' % '\n'.join(body))
        lines.append('  )')
    lines.append(')')
    return '\n'.join(lines) + '\n'


def emit_problem(cp, domain_name, problem_name):
    names = {f: fluent_symbol(f) for f in cp.fluents}
    lines = ['(define (problem %s)' % problem_name,
             '  (:domain %s)' % domain_name,
             '  (:init']
    for f in sorted(cp.init):
        lines.append('    (%s)' % names[f])
    lines.append('  )')
    goal_items = ['(%s)' % names[f] for f in sorted(cp.goal.pos)]
    goal_items += ['(not (%s))' % names[f] for f in sorted(cp.goal.neg)]
    lines.append('  (:goal (and %s))' % ' '.join(goal_items))
    lines.append(')')
    return '\n'.join(lines) + '\n'


def emit_fluent_map(cp):
    out = []
    for f in cp.fluents:
        out.append('%s\t%s' % (fluent_symbol(f), format_rml(f)))
    return '\n'.join(out) + '\n'


def emit_report(cp):
    return json.dumps(cp.report, indent=2, sort_keys=True) + '\n'


def emit_pddl(cp, out_dir, domain_name, problem_name):
    """Write the four artifact files; byte-deterministic."""
    import os
    os.makedirs(out_dir, exist_ok=True)
    paths = {}
    artifacts = {
        'domain.pddl': emit_domain(cp, domain_name),
        'problem.pddl': emit_problem(cp, domain_name, problem_name),
        'fluents.map': emit_fluent_map(cp),
        'compile-report.json': emit_report(cp),
    }
    for name, text in artifacts.items():
        path = os.path.join(out_dir, name)
        with open(path, 'w', encoding='utf-8') as handle:
            handle.write(text)
        paths[name] = path
    return paths
