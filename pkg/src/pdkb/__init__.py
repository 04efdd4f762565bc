"""Epistemic planning toolchain for restricted perspectival multi-agent
problems: modal-literal knowledge bases, a PDKBDDL front end, a classical
planning compiler, grounded solvers, and a progression-based validator."""

__version__ = '0.1.0'

from .rml import (BELIEF, POSSIBLE, Proposition, RML, RmlSpace, RmlSyntaxError,
                  downward_closure, enumerate_rmls, format_rml, lit, negate,
                  parse_rml, upward_closure, wrap)
from .pekb import (ConditionalEffect, InconsistentBase, InconsistentResult,
                   InconsistentUpdate, PEKB, closure, entails, erase,
                   is_consistent, negkb, prime, progress, update)
