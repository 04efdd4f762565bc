"""Proper epistemic knowledge bases and their update machinery.

A PEKB is a finite set of RMLs. Internally we keep PEKBs deductively
(upward) closed; prime reduction (``prime``) is a presentation operation.
"""

from .rml import (BELIEF, POSSIBLE, RML, downward_closure, negate,
                  upward_closure)


class InconsistentBase(Exception):
    """Raised when an operation requires a consistent PEKB."""


class InconsistentUpdate(Exception):
    """Raised when the update argument is internally inconsistent."""


class InconsistentResult(Exception):
    """Raised when simultaneous effects add an RML and its negation."""


class PEKB:
    """An immutable set of RMLs with a closed-form flag."""

    __slots__ = ('rmls', 'closed', '_hash')

    def __init__(self, rmls=(), closed=False):
        self.rmls = frozenset(rmls)
        self.closed = closed
        self._hash = hash(self.rmls)

    def __eq__(self, other):
        return isinstance(other, PEKB) and self.rmls == other.rmls

    def __hash__(self):
        return self._hash

    def __iter__(self):
        return iter(sorted(self.rmls))

    def __len__(self):
        return len(self.rmls)

    def __contains__(self, rml):
        return rml in self.rmls

    def __repr__(self):
        return 'PEKB{%s}' % ', '.join(str(r) for r in self)


def closure(p):
    """Upward-closed version of p."""
    if isinstance(p, PEKB):
        if p.closed:
            return p
        rmls = p.rmls
    else:
        rmls = p
    out = set()
    for rml in rmls:
        out |= upward_closure(rml)
    return PEKB(out, closed=True)


def negkb(p):
    """The negation image of every RML in p."""
    rmls = p.rmls if isinstance(p, PEKB) else p
    return PEKB({negate(r) for r in rmls})


def prime(p):
    """Keep only maximal (prime) elements: drop anything strictly entailed
    by another member."""
    rmls = set(p.rmls if isinstance(p, PEKB) else p)
    out = set(rmls)
    for rml in rmls:
        for weaker in upward_closure(rml):
            if weaker != rml:
                out.discard(weaker)
    return PEKB(out)


def _group(rmls):
    """Split into the propositional part and per-agent (possible, belief)
    inner RML lists, stripping the leading modality."""
    gamma = []
    agents = {}
    for rml in rmls:
        if rml.depth == 0:
            gamma.append(rml)
        else:
            mode, agent = rml.modalities[0]
            inner = RML(rml.modalities[1:], rml.negated, rml.atom)
            psis, chis = agents.setdefault(agent, ([], []))
            (psis if mode == POSSIBLE else chis).append(inner)
    return gamma, agents


def _inconsistent(rmls):
    gamma, agents = _group(rmls)
    lits = {(r.negated, r.atom) for r in gamma}
    for negated, atom in lits:
        if (not negated, atom) in lits:
            return True
    for psis, chis in agents.values():
        if _inconsistent(chis):
            return True
        for psi in psis:
            if _inconsistent(chis + [psi]):
                return True
    return False


def is_consistent(p):
    """Pairwise-recursive satisfiability test for a PEKB under KD_n."""
    rmls = p.rmls if isinstance(p, PEKB) else set(p)
    return not _inconsistent(list(rmls))


def _entails_rml(p_rmls, query):
    if query.depth == 0:
        return query in p_rmls
    mode, agent = query.modalities[0]
    inner = RML(query.modalities[1:], query.negated, query.atom)
    for rml in p_rmls:
        if rml.depth == 0 or rml.modalities[0][1] != agent:
            continue
        rml_mode = rml.modalities[0][0]
        if mode == BELIEF and rml_mode != BELIEF:
            continue
        stripped = RML(rml.modalities[1:], rml.negated, rml.atom)
        if _entails_rml({stripped}, inner):
            return True
    return False


def entails(p, query):
    """Structural KD_n entailment of a conjunction of RMLs.

    query may be a single RML or any iterable of RMLs.
    """
    if isinstance(p, PEKB):
        if not is_consistent(p):
            raise InconsistentBase('entailment from an inconsistent base')
        rmls = p.rmls
    else:
        rmls = set(p)
    if isinstance(query, RML):
        query = [query]
    return all(_entails_rml(rmls, q) for q in query)


def erase(p, q):
    """Belief erasure: the upward closure of p minus the downward closure
    of q. The result is upward closed; apply prime() for presentation."""
    down = set()
    q_rmls = q.rmls if isinstance(q, PEKB) else q
    for rml in q_rmls:
        down |= downward_closure(rml)
    return PEKB(closure(p).rmls - down, closed=True)


def update(p, q):
    """Belief update: erase the negation of q, then conjoin q."""
    q = q if isinstance(q, PEKB) else PEKB(q)
    if not is_consistent(q):
        raise InconsistentUpdate('update argument is inconsistent')
    return PEKB(erase(p, negkb(q)).rmls | closure(q).rmls, closed=True)


class ConditionalEffect:
    """A conditional effect (gamma, phi) of an action outcome.

    condition_pos: RMLs that must be believed for the effect to fire
    condition_neg: RMLs that must not be believed
    effect:        the RML added (delete=False) or removed (delete=True)
    """

    __slots__ = ('condition_pos', 'condition_neg', 'effect', 'delete')

    def __init__(self, condition_pos, effect, delete=False, condition_neg=()):
        self.condition_pos = frozenset(condition_pos)
        self.condition_neg = frozenset(condition_neg)
        self.effect = effect
        self.delete = delete

    def fires(self, p):
        return (all(r in p for r in self.condition_pos)
                and not any(r in p for r in self.condition_neg))

    def uncertain(self, p):
        """True when the condition is not believed false: no negated
        positive condition and no negative-condition RML is in p."""
        return (not any(negate(r) in p for r in self.condition_pos)
                and not any(r in p for r in self.condition_neg))

    def key(self):
        return (tuple(sorted(self.condition_pos)),
                tuple(sorted(self.condition_neg)),
                self.effect, self.delete)

    def __eq__(self, other):
        return isinstance(other, ConditionalEffect) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        arrow = 'del' if self.delete else 'add'
        return 'CE<%s %s if +%s -%s>' % (
            arrow, self.effect,
            sorted(map(str, self.condition_pos)),
            sorted(map(str, self.condition_neg)))


def progress(p, outcome):
    """Progression of one deterministic outcome (a set of conditional
    effects) applied to a closed consistent PEKB state.

    Adds, deletes, and uncertain-firing deletes are all evaluated against
    the pre-state; the result is (p erase (R u U)) update Q. R and U hold
    the bare fired literals: erase itself discards everything that entails
    them, and nothing weaker, so deleting a belief leaves the matching
    possibility in place.
    """
    p = closure(p)
    adds = set()
    removes = set()
    uncertain = set()
    for ce in outcome:
        if ce.delete:
            if ce.fires(p):
                removes.add(ce.effect)
        else:
            if ce.fires(p):
                adds |= upward_closure(ce.effect)
            if ce.uncertain(p):
                uncertain.add(negate(ce.effect))
    for rml in adds:
        if negate(rml) in adds:
            raise InconsistentResult(
                'simultaneous effects add %s and its negation' % rml)
    q = PEKB(adds, closed=True)
    if not is_consistent(q):
        raise InconsistentResult('added effects are jointly inconsistent')
    return update(erase(p, PEKB(removes | uncertain)), q)
