"""
Densities of independent sequences
==================================

For independent draws each absolutely continuous with respect to the base
measure, the joint density against the product base measure is the product
of the individual densities. A law carried by a subspace has no density.
"""
import numpy as np

from gramfree import (BaseGaussian, CovarianceSpec, DegenerateSubspace, IndependentSequence,
                      NotAbsolutelyContinuousError, density_wrt_base)
from gramfree.measures import log_density_wrt_base

d = 6
base = CovarianceSpec.geometric(d)
wider = BaseGaussian(CovarianceSpec(2 * base.lambdas))
narrower = BaseGaussian(CovarianceSpec(0.5 * base.lambdas))
seq = IndependentSequence([wider, narrower, BaseGaussian(base)])

rng = np.random.default_rng(5)
vs = rng.standard_normal((3, d)) * np.sqrt(base.lambdas)

joint = log_density_wrt_base(seq, base, vs)
parts = [log_density_wrt_base(law, base, [v]) for law, v in zip(seq.per_index, vs)]
print("log joint density      :", joint)
print("sum of log densities   :", sum(parts))
print("base against itself    :", density_wrt_base(BaseGaussian(base), base, vs))

try:
    density_wrt_base(DegenerateSubspace(np.eye(d)[:2]), base, vs[:1])
except NotAbsolutelyContinuousError as exc:
    print("degenerate law         :", exc)
