"""
When no kernel exists
=====================

The identity is not a Carleman operator: no vector is mapped to something
small, so the e-sequence cannot even start.  The pipeline says so and
reports how far the family is from the condition.
"""
import numpy as np

from carleman.decomposition import complete_frame, d_ledger, split_family
from carleman.errors import ConditionFails
from carleman.operators import decay_profile, normalize, select_e_sequence

fam = normalize(np.eye(16)[None], name="identity")
profile = decay_profile(fam)
print("max_r |B_r^* e_n|:", profile.values[:5], "...")
try:
    select_e_sequence(profile, 0.95)
except ConditionFails as exc:
    print("ConditionFails:", exc)
    print("floor of the profile^(1/4):", exc.floor)

# rescaling does not help: 2 I is normalised back to I
fam = normalize(2.0 * np.eye(16)[None])
print("raw norm", fam.raw_norms[0], "-> normalised norm", fam.norms[0])
try:
    select_e_sequence(decay_profile(fam), 0.95)
except ConditionFails as exc:
    print("2 I:", exc)

# The rule is a finite proxy, though.  I + diag(1/n) is normalised to a
# diagonal between 1/2 and 1, so some v_n pass the quarter-power test in
# this truncation even though the operator is bounded below; the d-decay
# functional is where such a family shows its true nature: d(e_k) stays
# near 2 instead of tending to zero.
fam = normalize((np.eye(16) + np.diag(1.0 / np.arange(1, 17)))[None])
sel = select_e_sequence(decay_profile(fam), 0.95)
print("I + diag(1/n) still selects", sel.K_e, "vectors in dimension 16")
fr = complete_frame(sel, 16)
print("d(e_k):", d_ledger(fr, split_family(fam, fr)).totals.round(4))
