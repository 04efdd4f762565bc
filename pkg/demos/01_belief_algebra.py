"""A tour of the modal-literal algebra.

Every formula here is a restricted modal literal (RML): a chain of
belief (B) or possibility (P) modalities over a signed proposition.
Same-agent runs collapse at construction, so what you build is always
in canonical form.
"""

from pdkb.rml import (downward_closure, format_rml, negate, parse_rml,
                      upward_closure)


def show(title, rmls):
    print(title)
    for r in sorted(rmls):
        print('   ', format_rml(r))
    print()


print('Same-agent modality runs collapse to the innermost mode:')
for text in ('B_a B_a p', 'P_a B_a p', 'B_a P_a p', 'B_a B_b B_b p'):
    print('    %-14s ->' % text, format_rml(parse_rml(text)))
print()

r = parse_rml('B_a P_b secret')
print('Negation flips every modality and the polarity:')
print('    %s  ->  %s' % (format_rml(r), format_rml(negate(r))))
print()

show('Everything %s entails (upward closure):' % format_rml(r),
     upward_closure(r))
show('Everything that entails it (downward closure):',
     downward_closure(r))
