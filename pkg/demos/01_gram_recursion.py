"""
Gram determinants, one vector at a time
=======================================

Appending a vector multiplies the Gram determinant by the squared distance
from that vector to the span of the earlier ones. The engine keeps the
running product as a log, and we compare it with a determinant computed from
scratch at every step.
"""
import math

import numpy as np

from gramfree import GramState, gram_det_direct

rng = np.random.default_rng(0)
vs = rng.uniform(-1, 1, size=(8, 12))

state = GramState(d=12)
print(" k   residual    log det (incremental)   log det (direct)")
for k, v in enumerate(vs):
    out = state.append(v)
    direct = math.log(gram_det_direct(list(vs[:k + 1])))
    print(f"{k:2d}  {out.residual:9.5f}  {out.log_det_after:20.12f}  {direct:18.12f}")

# A vector already in the span has residual (numerically) zero and the
# family is flagged dependent from then on.
out = state.append(vs[0] - 2 * vs[3])
print("\nappend e_0 - 2 e_3:", out)
print("det now:", state.det())
