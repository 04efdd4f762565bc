"""In-memory problem model: action schemas, problems, and grounding.

Templates reuse the RML structure with variable tokens (``?x`` for schema
parameters and quantified variables, ``$agent$`` inside awareness
conditions) in agent slots and atom arguments. Grounding substitutes
bindings and expands quantifiers deterministically.

Always-known (AK) atoms appear as depth-0 RMLs over the AK propositions;
a negated AK atom in a condition means the atom must be absent, and a
negated AK effect is a delete.
"""

from .pekb import PEKB, ConditionalEffect
from .rml import Proposition, RML

GENERATION = 'valid_generation'
ASSESSMENT = 'valid_assessment'

ALWAYS = 'always'
NEVER = 'never'

AGENT_VAR = '$agent$'


class UnknownSymbol(Exception):
    pass


class TypeMismatch(Exception):
    pass


class DepthExceeded(Exception):
    pass


class Diagnostic:
    """One validation finding."""

    __slots__ = ('severity', 'location', 'message')

    def __init__(self, severity, location, message):
        self.severity = severity
        self.location = location
        self.message = message

    @property
    def is_error(self):
        return self.severity == 'error'

    def __repr__(self):
        return '%s at %s: %s' % (self.severity, self.location, self.message)


class EffectTemplate:
    """One conditional effect of a schema, possibly under forall quantifiers.

    quantified:     tuple of (variable, type) pairs from enclosing foralls
    condition_pos:  RML templates that must hold for the effect to fire
    condition_neg:  RML templates that must not hold
    effect:         the RML template added (delete=False) or erased
    """

    __slots__ = ('quantified', 'condition_pos', 'condition_neg', 'effect',
                 'delete')

    def __init__(self, effect, condition_pos=(), condition_neg=(),
                 quantified=(), delete=False):
        self.quantified = tuple(quantified)
        self.condition_pos = tuple(condition_pos)
        self.condition_neg = tuple(condition_neg)
        self.effect = effect
        self.delete = bool(delete)

    def __repr__(self):
        return 'EffectTemplate(%r, pos=%r, neg=%r, forall=%r, delete=%r)' % (
            self.effect, self.condition_pos, self.condition_neg,
            self.quantified, self.delete)


class EpistemicActionSchema:
    """A parameterized action with awareness condition and outcomes.

    derive_condition is 'always', 'never', or an atom template that may
    mention schema parameters and the observer placeholder $agent$.
    outcomes is a tuple of effect-template tuples; more than one outcome
    makes the action nondeterministic.
    """

    __slots__ = ('name', 'parameters', 'precondition_pos', 'precondition_neg',
                 'derive_condition', 'outcomes')

    def __init__(self, name, parameters, precondition_pos, precondition_neg,
                 derive_condition, outcomes):
        self.name = name
        self.parameters = tuple(parameters)
        self.precondition_pos = tuple(precondition_pos)
        self.precondition_neg = tuple(precondition_neg)
        self.derive_condition = derive_condition
        self.outcomes = tuple(tuple(out) for out in outcomes)

    def __repr__(self):
        return 'EpistemicActionSchema(%r)' % (self.name,)


class GroundAction:
    """A fully instantiated action.

    awareness maps each potentially aware agent to 'always' or a ground RML
    condition; agents with a 'never' derive-condition are absent.
    """

    __slots__ = ('name', 'args', 'precondition_pos', 'precondition_neg',
                 'awareness', 'outcomes')

    def __init__(self, name, args, precondition_pos, precondition_neg,
                 awareness, outcomes):
        self.name = name
        self.args = tuple(args)
        self.precondition_pos = frozenset(precondition_pos)
        self.precondition_neg = frozenset(precondition_neg)
        self.awareness = dict(awareness)
        self.outcomes = tuple(tuple(out) for out in outcomes)

    @property
    def label(self):
        if self.args:
            return '(%s %s)' % (self.name, ' '.join(self.args))
        return '(%s)' % self.name

    def __repr__(self):
        return 'GroundAction%s' % self.label


class RPMEPProblem:
    """A ground-able planning problem over nested-belief fluents."""

    __slots__ = ('domain_name', 'problem_name', 'agents', 'root', 'types',
                 'objects', 'predicates', 'schemas', 'initial', 'goal_pos',
                 'goal_neg', 'depth', 'task', 'plan', 'warnings')

    def __init__(self, domain_name, problem_name, agents, types, objects,
                 predicates, schemas, initial, goal_pos, goal_neg, depth,
                 task, plan=None, root=None, warnings=()):
        self.domain_name = domain_name
        self.problem_name = problem_name
        self.agents = tuple(agents)
        self.root = root
        self.types = tuple(types)
        # objects: tuple of (name, type); agents are implicitly objects of
        # type 'agent'
        self.objects = tuple(objects)
        # predicates: name -> (arg type tuple, ak flag)
        self.predicates = dict(predicates)
        self.schemas = tuple(schemas)
        self.initial = tuple(initial)
        self.goal_pos = tuple(goal_pos)
        self.goal_neg = tuple(goal_neg)
        self.depth = depth
        self.task = task
        self.plan = tuple(plan) if plan is not None else None
        self.warnings = tuple(warnings)

    def objects_of_type(self, typ):
        if typ == 'agent':
            return self.agents
        return tuple(name for name, t in self.objects if t == typ)

    def is_ak(self, atom):
        entry = self.predicates.get(atom.predicate)
        return entry is not None and entry[1]

    def regular_propositions(self):
        return tuple(p for p in self._all_propositions() if not self.is_ak(p))

    def ak_propositions(self):
        return tuple(p for p in self._all_propositions() if self.is_ak(p))

    def _all_propositions(self):
        out = []
        for name in sorted(self.predicates):
            arg_types, _ = self.predicates[name]
            for args in _typed_tuples(self, arg_types):
                out.append(Proposition(name, args))
        return tuple(out)


def _typed_tuples(problem, arg_types):
    if not arg_types:
        return [()]
    out = [()]
    for typ in arg_types:
        pool = problem.objects_of_type(typ)
        out = [prefix + (obj,) for prefix in out for obj in pool]
    return out


def _subst_term(term, binding):
    if term.startswith('?') or term == AGENT_VAR:
        try:
            return binding[term]
        except KeyError:
            raise UnknownSymbol('unbound variable %s' % term)
    return term


def subst_rml(template, binding):
    """Instantiate a template RML under a variable binding."""
    mods = tuple((mode, _subst_term(agent, binding))
                 for mode, agent in template.modalities)
    atom = Proposition(template.atom.predicate,
                       tuple(_subst_term(a, binding)
                             for a in template.atom.args))
    return RML(mods, template.negated, atom)


def _bindings(problem, parameters):
    out = [{}]
    for var, typ in parameters:
        pool = problem.objects_of_type(typ)
        if not pool:
            return []
        out = [dict(b, **{var: obj}) for b in out for obj in pool]
    return out


def _instantiate_effects(problem, templates, binding, truncated):
    effects = []
    for tpl in templates:
        for ext in _bindings(problem, tpl.quantified):
            full = dict(binding, **ext)
            effect = subst_rml(tpl.effect, full)
            if effect.depth > problem.depth:
                truncated.append(effect)
                continue
            pos = tuple(subst_rml(c, full) for c in tpl.condition_pos)
            neg = tuple(subst_rml(c, full) for c in tpl.condition_neg)
            if any(c.depth > problem.depth for c in pos + neg):
                truncated.append(effect)
                continue
            effects.append(ConditionalEffect(pos, effect, delete=tpl.delete,
                                             condition_neg=neg))
    return tuple(effects)


class GroundingReport:
    """Counters produced as a side effect of grounding."""

    __slots__ = ('truncated_effects',)

    def __init__(self):
        self.truncated_effects = 0


def ground(problem, report=None):
    """All ground actions of the problem, in deterministic order."""
    if report is None:
        report = GroundingReport()
    actions = []
    for schema in problem.schemas:
        for binding in _bindings(problem, schema.parameters):
            pre_pos = tuple(subst_rml(c, binding)
                            for c in schema.precondition_pos)
            pre_neg = tuple(subst_rml(c, binding)
                            for c in schema.precondition_neg)
            for c in pre_pos + pre_neg:
                if c.depth > problem.depth:
                    raise DepthExceeded(
                        'precondition %s of %s exceeds depth %d'
                        % (c, schema.name, problem.depth))
            awareness = {}
            if schema.derive_condition == ALWAYS:
                awareness = {agent: ALWAYS for agent in problem.agents}
            elif schema.derive_condition != NEVER:
                for agent in problem.agents:
                    full = dict(binding, **{AGENT_VAR: agent})
                    awareness[agent] = subst_rml(schema.derive_condition, full)
            truncated = []
            outcomes = tuple(
                _instantiate_effects(problem, out, binding, truncated)
                for out in schema.outcomes)
            report.truncated_effects += len(truncated)
            args = tuple(binding[var] for var, _ in schema.parameters)
            actions.append(GroundAction(schema.name, args, pre_pos, pre_neg,
                                        awareness, outcomes))
    return actions


def _check_symbols(problem, rml, location, diagnostics):
    entry = problem.predicates.get(rml.atom.predicate)
    if entry is None:
        diagnostics.append(Diagnostic(
            'error', location, 'unknown predicate %s' % rml.atom.predicate))
        return
    arg_types, ak = entry
    if len(arg_types) != len(rml.atom.args):
        diagnostics.append(Diagnostic(
            'error', location,
            'predicate %s expects %d arguments, got %d'
            % (rml.atom.predicate, len(arg_types), len(rml.atom.args))))
    if ak and rml.modalities:
        diagnostics.append(Diagnostic(
            'error', location,
            'always-known atom %s may not appear under belief modalities'
            % rml.atom))
    for _, agent in rml.modalities:
        if not agent.startswith('?') and agent != AGENT_VAR \
                and agent not in problem.agents:
            diagnostics.append(Diagnostic(
                'error', location, 'unknown agent %s' % agent))


def validate_model(problem):
    """Well-formedness diagnostics; errors make the problem unusable."""
    diagnostics = list(problem.warnings)
    for rml in problem.initial:
        _check_symbols(problem, rml, 'init', diagnostics)
        if rml.depth > problem.depth:
            diagnostics.append(Diagnostic(
                'error', 'init', '%s exceeds depth bound %d'
                % (rml, problem.depth)))
    for rml in problem.goal_pos + problem.goal_neg:
        _check_symbols(problem, rml, 'goal', diagnostics)
        if rml.depth > problem.depth:
            diagnostics.append(Diagnostic(
                'error', 'goal', '%s exceeds depth bound %d'
                % (rml, problem.depth)))
    for schema in problem.schemas:
        loc = 'action %s' % schema.name
        for c in schema.precondition_pos + schema.precondition_neg:
            _check_symbols(problem, c, loc, diagnostics)
        for outcome in schema.outcomes:
            for tpl in outcome:
                _check_symbols(problem, tpl.effect, loc, diagnostics)
                for c in tpl.condition_pos + tpl.condition_neg:
                    _check_symbols(problem, c, loc, diagnostics)
                # constraint: AK-changing effects may only watch AK atoms
                eff_pred = problem.predicates.get(tpl.effect.atom.predicate)
                if eff_pred and eff_pred[1]:
                    for c in tpl.condition_pos + tpl.condition_neg:
                        c_pred = problem.predicates.get(c.atom.predicate)
                        if c_pred and not c_pred[1]:
                            diagnostics.append(Diagnostic(
                                'error', loc,
                                'effect on always-known %s conditioned on '
                                'regular %s' % (tpl.effect.atom, c)))
    if problem.task == ASSESSMENT and problem.plan is None:
        diagnostics.append(Diagnostic(
            'error', 'problem', 'assessment task without a (:plan ...)'))
    return diagnostics


def goal_pekb(problem):
    return PEKB(problem.goal_pos)
