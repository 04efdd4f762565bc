"""Updating and erasing beliefs in a knowledge base.

A PEKB is a conjunction of modal literals. Update makes new information
true (retracting whatever contradicted it first); erasure merely stops
the base from entailing something. The last section shows why erasure
is lossy: dropping a possibility takes the stronger belief with it, and
restoring the possibility does not bring the belief back.
"""

from pdkb.pekb import PEKB, closure, erase, prime, update
from pdkb.rml import format_rml, parse_rml


def show(title, base):
    print(title)
    for r in prime(base):
        print('   ', format_rml(r))
    print()


base = PEKB([parse_rml('B_a B_b rain'), parse_rml('B_a cold')])
show('Agent a starts out convinced:', base)

updated = update(base, [parse_rml('B_a B_b !rain')])
show("After learning b now believes it isn't raining:", updated)

erased = erase(updated, [parse_rml('B_a cold')])
show('After merely erasing the belief about cold:', erased)
print('(the possibility P_a cold survives erasure of the belief)\n')

strong = PEKB([parse_rml('B_a rain')])
weak = [parse_rml('P_a rain')]
gone = erase(strong, weak)
restored = PEKB(closure(gone).rmls | closure(PEKB(weak)).rmls)
show('Erase P_a rain from {B_a rain}, then add P_a rain back:', restored)
print('The original belief B_a rain is not recoverable.')
