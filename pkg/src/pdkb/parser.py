"""PDKBDDL front end.

The language is a PDDL-like s-expression format with belief prefixes
``[ag]`` (belief) and ``<ag>`` (possibility), ``{AK}`` predicate markers,
``{include:file}`` composition, ``(!p)`` shorthand negation, and
``:derive-condition`` awareness annotations.

Includes are spliced into the token stream before tree building, with each
token keeping its own file/line/column so diagnostics point at the real
source. Symbols are case-insensitive and normalized to lower case.
"""

import os
import re

from .model import (AGENT_VAR, ALWAYS, ASSESSMENT, GENERATION, NEVER,
                    Diagnostic, EffectTemplate, EpistemicActionSchema,
                    RPMEPProblem)
from .rml import BELIEF, POSSIBLE, Proposition, RML


class ParseError(Exception):
    """Syntax or structural error, with source position."""

    def __init__(self, message, pos=None):
        self.pos = pos
        if pos:
            message = '%s:%d:%d: %s' % (pos[0], pos[1], pos[2], message)
        super().__init__(message)


class IncludeCycle(ParseError):
    pass


class SemanticError(Exception):
    """Raised when desugaring hits error diagnostics."""

    def __init__(self, diagnostics):
        self.diagnostics = diagnostics
        super().__init__('; '.join(str(d) for d in diagnostics
                                   if d.is_error))


class Token:
    __slots__ = ('kind', 'value', 'pos')

    # kinds: 'lp', 'rp', 'sym', 'modal' (value (mode, agent)), 'ak'

    def __init__(self, kind, value, pos):
        self.kind = kind
        self.value = value
        self.pos = pos

    def __repr__(self):
        return 'Token(%s, %r)' % (self.kind, self.value)


_INCLUDE_RE = re.compile(r'\{include:([^}]*)\}')
_SYMBOL_CHARS = re.compile(r'[^\s()\[\]<>{};]')


def tokenize(text, filename='<string>'):
    tokens = []
    line, col = 1, 0
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        pos = (filename, line, col)
        if ch == '\n':
            line += 1
            col = 0
            i += 1
            continue
        if ch.isspace():
            col += 1
            i += 1
            continue
        if ch == ';':
            while i < n and text[i] != '\n':
                i += 1
            continue
        if ch == '(':
            tokens.append(Token('lp', '(', pos))
            i += 1
            col += 1
            continue
        if ch == ')':
            tokens.append(Token('rp', ')', pos))
            i += 1
            col += 1
            continue
        if ch in '[<':
            close = ']' if ch == '[' else '>'
            end = text.find(close, i + 1)
            if end < 0:
                raise ParseError('unterminated %r belief marker' % ch, pos)
            name = text[i + 1:end].strip().lower()
            if not name:
                raise ParseError('empty belief marker', pos)
            mode = BELIEF if ch == '[' else POSSIBLE
            tokens.append(Token('modal', (mode, name), pos))
            col += end - i + 1
            i = end + 1
            continue
        if ch == '{':
            end = text.find('}', i)
            if end < 0:
                raise ParseError('unterminated { marker', pos)
            body = text[i:end + 1]
            if body.lower() == '{ak}':
                tokens.append(Token('ak', body, pos))
            elif body.lower().startswith('{include:'):
                # include splice happens in parse_file; a bare include here
                # means tokenize was called on raw text
                tokens.append(Token('include', body[9:-1].strip(), pos))
            else:
                raise ParseError('unknown marker %s' % body, pos)
            col += end - i + 1
            i = end + 1
            continue
        m = _SYMBOL_CHARS.match(text, i)
        if not m:
            raise ParseError('unexpected character %r' % ch, pos)
        j = i
        while j < n and _SYMBOL_CHARS.match(text, j):
            j += 1
        word = text[i:j]
        tokens.append(Token('sym', word.lower(), pos))
        col += j - i
        i = j
    return tokens


def tokenize_file(path, _stack=None):
    """Tokenize a file, splicing {include:...} token streams in place."""
    path = os.path.abspath(path)
    stack = _stack or ()
    if path in stack:
        raise IncludeCycle('include cycle through %s' % path,
                           (path, 0, 0))
    with open(path, encoding='utf-8') as handle:
        text = handle.read()
    out = []
    for token in tokenize(text, path):
        if token.kind == 'include':
            child = os.path.join(os.path.dirname(path), token.value)
            if not os.path.exists(child):
                raise ParseError('include not found: %s' % token.value,
                                 token.pos)
            out.extend(tokenize_file(child, stack + (path,)))
        else:
            out.append(token)
    return out


def _build_trees(tokens):
    """Nest the token stream into lists on parentheses."""
    stack = [[]]
    for token in tokens:
        if token.kind == 'lp':
            stack.append([])
        elif token.kind == 'rp':
            if len(stack) == 1:
                raise ParseError('unbalanced )', token.pos)
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(token)
    if len(stack) > 1:
        raise ParseError('missing )', tokens[-1].pos if tokens else None)
    return stack[0]


class Ast:
    """Parsed source: the top-level (define ...) trees."""

    __slots__ = ('units',)

    def __init__(self, units):
        self.units = list(units)

    def signature(self):
        """Position-free structural form, for round-trip comparison."""
        def strip(node):
            if isinstance(node, list):
                return tuple(strip(x) for x in node)
            return (node.kind, node.value)
        return tuple(strip(u) for u in self.units)


def parse(tokens):
    trees = _build_trees(tokens)
    for tree in trees:
        if not isinstance(tree, list) or not tree \
                or getattr(tree[0], 'value', None) != 'define':
            pos = tree[0].pos if isinstance(tree, list) and tree \
                and isinstance(tree[0], Token) else None
            raise ParseError('expected (define ...) at top level',
                             getattr(tree, 'pos', pos))
    return Ast(trees)


def parse_file(path):
    return parse(tokenize_file(path))


def parse_text(text, filename='<string>'):
    tokens = tokenize(text, filename)
    if any(t.kind == 'include' for t in tokens):
        raise ParseError('includes require file-based parsing')
    return parse(tokens)


def pretty_print(ast):
    """Serialize back to parseable text (canonical layout)."""
    def emit(node):
        if isinstance(node, list):
            return '(%s)' % ' '.join(emit(x) for x in node)
        if node.kind == 'modal':
            mode, agent = node.value
            return '[%s]' % agent if mode == BELIEF else '<%s>' % agent
        if node.kind == 'ak':
            return '{AK}'
        return node.value
    return '\n'.join('(%s)' % ' '.join(emit(x) for x in unit)
                     for unit in ast.units)


# ---------------------------------------------------------------------------
# desugaring


def _sym(node, what='symbol'):
    if not isinstance(node, Token) or node.kind != 'sym':
        raise ParseError('expected %s' % what, _pos(node))
    return node.value


def _pos(node):
    if isinstance(node, Token):
        return node.pos
    for item in node:
        return _pos(item)
    return None


def _typed_list(nodes, default_type):
    """Parse `a b - t c d - u` name/type runs."""
    out = []
    pending = []
    it = iter(nodes)
    for node in it:
        word = _sym(node, 'name or -')
        if word == '-':
            typ = _sym(next(it, None), 'type name')
            out.extend((name, typ) for name in pending)
            pending = []
        else:
            pending.append(word)
    for name in pending:
        if name.startswith('?agent') or name == 'agent':
            out.append((name, 'agent'))
        else:
            out.append((name, default_type))
    return out


def _atom_template(tree):
    """(pred args) or (!pred args) -> (negated, Proposition template)."""
    if not tree or not isinstance(tree[0], Token):
        raise ParseError('expected an atom', _pos(tree))
    name = _sym(tree[0], 'predicate')
    negated = name.startswith('!')
    if negated:
        name = name[1:]
    if not name:
        raise ParseError('empty predicate name', tree[0].pos)
    args = tuple(_sym(a, 'atom argument') for a in tree[1:])
    return negated, Proposition(name, args)


class _Literal:
    """A parsed formula literal: an RML template with an outer `not` flag.

    For AK predicates the polarity is later folded into presence/absence
    (conditions) or add/delete (effects) instead of the RML itself.
    """

    __slots__ = ('rml', 'negated_outer')

    def __init__(self, rml, negated_outer):
        self.rml = rml
        self.negated_outer = negated_outer


def _attach_modals(items):
    """Fold runs of belief markers into the element they prefix."""
    out = []
    pending = []
    for item in items:
        if isinstance(item, Token) and item.kind == 'modal':
            pending.append(item)
        else:
            if pending:
                out.append(pending + [item])
                pending = []
            else:
                out.append(item)
    if pending:
        raise ParseError('dangling belief marker', pending[0].pos)
    return out


def _parse_formula(node, modalities=()):
    """Flatten a formula into literals; `and` and stacked modalities only.

    Returns a list of (_Literal, quantifier prefix) pairs; quantifiers are
    (var, type) tuples from enclosing foralls.
    """
    if isinstance(node, Token):
        if node.kind == 'modal':
            raise ParseError('belief marker must prefix a formula', node.pos)
        raise ParseError('expected a formula', node.pos)
    items = list(node)
    mods = list(modalities)
    while items and isinstance(items[0], Token) and items[0].kind == 'modal':
        mods.append(items[0].value)
        items = items[1:]
    if len(items) == 1 and isinstance(items[0], list):
        return _parse_formula(items[0], tuple(mods))
    if not items:
        raise ParseError('empty formula', _pos(node))
    head = items[0]
    if isinstance(head, Token) and head.kind == 'sym':
        if head.value == 'and':
            out = []
            for child in _attach_modals(items[1:]):
                out.extend(_parse_formula(child, tuple(mods)))
            return out
        if head.value == 'forall':
            var = _sym(items[1], 'quantified variable')
            rest = items[2:]
            typ = 'agent'
            if rest and isinstance(rest[0], Token) and rest[0].value == '-':
                typ = _sym(rest[1], 'type name')
                rest = rest[2:]
            out = []
            for child in _attach_modals(rest):
                for literal, quant in _parse_formula(child, tuple(mods)):
                    out.append((literal, ((var, typ),) + quant))
            return out
        if head.value == 'not':
            args = _attach_modals(items[1:])
            if len(args) != 1:
                raise ParseError('(not ...) takes one formula', head.pos)
            inner = _parse_formula(args[0], tuple(mods))
            out = []
            for literal, quant in inner:
                if literal.negated_outer:
                    raise ParseError('nested (not (not ...))', head.pos)
                out.append((_Literal(literal.rml, True), quant))
            return out
        # plain atom
        negated, atom = _atom_template(items)
        rml = RML(tuple(mods), negated, atom)
        return [(_Literal(rml, False), ())]
    # a bare nested list, e.g. ((p))
    if len(items) == 1:
        return _parse_formula(items[0], tuple(mods))
    raise ParseError('cannot parse formula', _pos(node))


def _section_map(body, pos, allowed_multi=()):
    """Group (:key ...) children of a define body."""
    sections = {}
    for item in body:
        if not isinstance(item, list) or not item \
                or not isinstance(item[0], Token) \
                or not item[0].value.startswith(':'):
            raise ParseError('expected a (:section ...)', _pos(item))
        key = item[0].value
        if key in sections and key not in allowed_multi:
            raise ParseError('duplicate %s' % key, item[0].pos)
        sections.setdefault(key, []).append(item)
    return sections


_KNOWN_DOMAIN = {':agents', ':types', ':constants', ':predicates', ':action'}
_KNOWN_PROBLEM = {':domain', ':objects', ':projection', ':task', ':init-type',
                  ':init', ':goal', ':plan', ':depth'}


def _parse_action(tree):
    name = _sym(tree[1], 'action name')
    fields = {}
    it = iter(tree[2:])
    for node in it:
        key = _sym(node, 'action field')
        if not key.startswith(':'):
            raise ParseError('expected :field in action %s' % name, node.pos)
        fields[key] = next(it, None)
    derive = fields.get(':derive-condition')
    if derive is None:
        derive_condition = NEVER
    elif isinstance(derive, Token):
        word = _sym(derive, 'derive condition')
        if word not in (ALWAYS, NEVER):
            raise ParseError('derive-condition must be always, never, or an '
                             'atom', derive.pos)
        derive_condition = word
    else:
        negated, atom = _atom_template(derive)
        if negated:
            raise ParseError('derive-condition atom cannot be negated',
                             _pos(derive))
        derive_condition = RML((), False, atom)
    parameters = _typed_list(fields.get(':parameters') or [], 'object')
    pre_pos, pre_neg = [], []
    if fields.get(':precondition') is not None:
        for literal, quant in _parse_formula(fields[':precondition']):
            if quant:
                raise ParseError('forall not allowed in preconditions',
                                 _pos(tree))
            (pre_neg if literal.negated_outer else pre_pos).append(literal.rml)
    outcomes_raw = [[]]
    effect = fields.get(':effect')
    if effect is not None:
        branches = [effect]
        if isinstance(effect, list) and effect \
                and isinstance(effect[0], Token) and effect[0].value == 'oneof':
            branches = _attach_modals(effect[1:])
        outcomes_raw = [_parse_effect_branch(b) for b in branches]
    return name, parameters, pre_pos, pre_neg, derive_condition, outcomes_raw


def _parse_effect_branch(node):
    """One deterministic outcome: a list of EffectTemplate precursors
    (quantifiers, when-conditions, literal)."""
    out = []

    def walk(tree, quant, cond_pos, cond_neg):
        if isinstance(tree, Token):
            raise ParseError('expected an effect formula', tree.pos)
        items = list(tree)
        head = items[0] if items else None
        if isinstance(head, Token) and head.kind == 'sym':
            if head.value == 'and':
                for child in _attach_modals(items[1:]):
                    walk(child, quant, cond_pos, cond_neg)
                return
            if head.value == 'forall':
                var = _sym(items[1], 'quantified variable')
                rest = items[2:]
                typ = 'agent'
                if rest and isinstance(rest[0], Token) \
                        and rest[0].value == '-':
                    typ = _sym(rest[1], 'type name')
                    rest = rest[2:]
                for child in _attach_modals(rest):
                    walk(child, quant + ((var, typ),), cond_pos, cond_neg)
                return
            if head.value == 'when':
                args = _attach_modals(items[1:])
                if len(args) != 2:
                    raise ParseError('(when cond effect)', head.pos)
                pos_extra, neg_extra = [], []
                for literal, q in _parse_formula(args[0]):
                    if q:
                        raise ParseError('forall not allowed in when '
                                         'conditions', head.pos)
                    (neg_extra if literal.negated_outer
                     else pos_extra).append(literal.rml)
                walk(args[1], quant, cond_pos + tuple(pos_extra),
                     cond_neg + tuple(neg_extra))
                return
        for literal, q in _parse_formula(tree):
            out.append((quant + q, cond_pos, cond_neg, literal))

    walk(node, (), (), ())
    return out


def _default_arg_types(params):
    """Predicate declaration argument types: explicit `- type` or inferred
    from the variable name (?agent... means agent)."""
    return tuple(t for _, t in params)


def desugar(ast, root=None):
    """Lower a parsed source to an RPMEPProblem.

    Raises SemanticError when structural errors are found; parse-and-ignore
    constructs produce warning diagnostics on the problem.
    """
    warnings = []
    domain_tree = None
    problem_tree = None
    for unit in ast.units:
        kind = _sym(unit[1][0] if isinstance(unit[1], list) else unit[1],
                    'define kind') if len(unit) > 1 else ''
        header = unit[1]
        if not isinstance(header, list):
            raise ParseError('expected (domain name) or (problem name)',
                             _pos(unit))
        kind = _sym(header[0], 'define kind')
        if kind == 'domain':
            domain_tree = unit
        elif kind == 'problem':
            problem_tree = unit
        else:
            raise ParseError('unknown define kind %s' % kind, _pos(header))
    if domain_tree is None:
        raise SemanticError([Diagnostic('error', 'input',
                                        'no (define (domain ...)) found')])

    domain_name = _sym(domain_tree[1][1], 'domain name')
    sections = _section_map(domain_tree[2:], _pos(domain_tree),
                            allowed_multi=(':action',))
    for key in sections:
        if key not in _KNOWN_DOMAIN:
            raise ParseError('unknown domain section %s' % key,
                             _pos(sections[key][0]))
    agents = tuple(_sym(t, 'agent name')
                   for t in sections.get(':agents', [[None]])[0][1:])
    types = tuple(_sym(t, 'type name')
                  for t in sections.get(':types', [[None]])[0][1:])

    predicates = {}
    pred_section = sections.get(':predicates', [[None]])[0][1:]
    idx = 0
    while idx < len(pred_section):
        node = pred_section[idx]
        ak = False
        if isinstance(node, Token) and node.kind == 'ak':
            ak = True
            idx += 1
            node = pred_section[idx] if idx < len(pred_section) else None
        if not isinstance(node, list):
            raise ParseError('expected (predicate ...) declaration',
                             _pos(node) if node else _pos(domain_tree))
        name = _sym(node[0], 'predicate name')
        params = _typed_list(node[1:], 'object')
        predicates[name] = (_default_arg_types(params), ak)
        idx += 1

    schemas = []
    for action_tree in sections.get(':action', []):
        name, parameters, pre_pos, pre_neg, derive, outcomes_raw = \
            _parse_action(action_tree)
        outcomes = []
        for branch in outcomes_raw:
            templates = []
            for quant, cond_pos, cond_neg, literal in branch:
                templates.append(_lower_effect(predicates, quant, cond_pos,
                                               cond_neg, literal))
            outcomes.append(tuple(templates))
        pre_pos, pre_neg = _lower_condition(predicates, pre_pos, pre_neg)
        schemas.append(EpistemicActionSchema(
            name, parameters, pre_pos, pre_neg, derive, outcomes))

    # problem side
    problem_name = 'anonymous'
    objects = ()
    depth = 1
    task = GENERATION
    plan = None
    initial = []
    goal_pos, goal_neg = (), ()
    if problem_tree is not None:
        problem_name = _sym(problem_tree[1][1], 'problem name')
        psections = _section_map(problem_tree[2:], _pos(problem_tree))
        for key in psections:
            if key not in _KNOWN_PROBLEM:
                raise ParseError('unknown problem section %s' % key,
                                 _pos(psections[key][0]))
        if ':domain' in psections:
            declared = _sym(psections[':domain'][0][1], 'domain name')
            if declared != domain_name:
                warnings.append(Diagnostic(
                    'warning', 'problem',
                    'problem references domain %s, found %s'
                    % (declared, domain_name)))
        if ':objects' in psections:
            objects = tuple(_typed_list(psections[':objects'][0][1:],
                                        'object'))
        if ':depth' in psections:
            depth = int(_sym(psections[':depth'][0][1], 'depth'))
        if ':task' in psections:
            task = _sym(psections[':task'][0][1], 'task')
            if task not in (GENERATION, ASSESSMENT):
                raise ParseError('unknown task %s' % task,
                                 _pos(psections[':task'][0]))
        if ':init-type' in psections:
            init_type = _sym(psections[':init-type'][0][1], 'init type')
            if init_type != 'complete':
                raise SemanticError([Diagnostic(
                    'error', 'problem',
                    'unsupported init-type %s (only complete)' % init_type)])
        if ':projection' in psections:
            warnings.append(Diagnostic(
                'warning', 'problem', '(:projection ...) is ignored'))
        if ':plan' in psections:
            plan = []
            for step in psections[':plan'][0][1:]:
                if not isinstance(step, list):
                    raise ParseError('plan step must be (action args)',
                                     _pos(step))
                plan.append(tuple(_sym(s, 'plan symbol') for s in step))

        helper = RPMEPProblem(domain_name, problem_name, agents, types,
                              objects, predicates, (), (), (), (), depth,
                              task)
        if ':init' in psections:
            initial = _expand_ground(helper, psections[':init'][0][1:],
                                    allow_negative=False)
        if ':goal' in psections:
            goal_literals = _expand_ground(helper, psections[':goal'][0][1:],
                                           allow_negative=True)
            goal_pos, goal_neg = _lower_condition(
                predicates,
                [r for neg, r in goal_literals if not neg],
                [r for neg, r in goal_literals if neg])
        else:
            goal_pos, goal_neg = (), ()
        if ':init' in psections:
            initial = tuple(r for _, r in initial)

    return RPMEPProblem(domain_name, problem_name, agents, types, objects,
                        predicates, schemas, initial, goal_pos, goal_neg,
                        depth, task, plan=plan, root=root, warnings=warnings)


def _lower_condition(predicates, pos_literals, neg_literals):
    """Route negated AK atoms to the negative side as positive atoms."""
    pos, neg = [], []
    for rml in pos_literals:
        entry = predicates.get(rml.atom.predicate)
        if entry and entry[1] and rml.negated and not rml.modalities:
            neg.append(RML((), False, rml.atom))
        else:
            pos.append(rml)
    for rml in neg_literals:
        entry = predicates.get(rml.atom.predicate)
        if entry and entry[1] and rml.negated and not rml.modalities:
            # (not (!ak)): the atom must be present
            pos.append(RML((), False, rml.atom))
        else:
            neg.append(rml)
    return tuple(pos), tuple(neg)


def _lower_effect(predicates, quant, cond_pos, cond_neg, literal):
    cond_pos, cond_neg = _lower_condition(predicates, cond_pos, cond_neg)
    rml = literal.rml
    delete = literal.negated_outer
    entry = predicates.get(rml.atom.predicate)
    if entry and entry[1] and not rml.modalities:
        # AK atoms have no negative fluent: (!ak) deletes the positive atom
        if rml.negated:
            if delete:
                raise ParseError('(not (!%s)) is not a valid effect'
                                 % rml.atom.predicate)
            delete = True
            rml = RML((), False, rml.atom)
    elif delete:
        # (not phi) on a regular RML erases phi
        pass
    return EffectTemplate(rml, cond_pos, cond_neg, quantified=quant,
                          delete=delete)


def _expand_ground(problem, nodes, allow_negative):
    """Expand init/goal formulas (foralls over declared sets) to ground
    literals; returns (negated_outer, RML) pairs."""
    out = []
    from .model import subst_rml, _bindings
    for node in _attach_modals(nodes):
        for literal, quant in _parse_formula(node):
            for binding in _bindings(problem, quant):
                rml = subst_rml(literal.rml, binding)
                if literal.negated_outer and not allow_negative:
                    raise SemanticError([Diagnostic(
                        'error', 'init',
                        'negative literal %s not allowed here' % rml)])
                out.append((literal.negated_outer, rml))
    return out
