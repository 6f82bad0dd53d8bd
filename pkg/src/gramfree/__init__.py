"""Gram determinants of randomly drawn vectors in a truncated Hilbert space.

Building blocks:

* :mod:`gramfree.hilbert` -- inner products, Gram matrices, direct determinant
* :mod:`gramfree.engine` -- incremental Gram-Schmidt with a log determinant
* :mod:`gramfree.measures` -- Gaussian and degenerate samplers, densities
* :mod:`gramfree.experiments` -- Monte Carlo experiments and mergeable reports
"""
__version__ = "0.1.0"

from .errors import (ConfigError, DimensionError, EmptyInputError, GramFreeError,
                     MergeError, NotAbsolutelyContinuousError)
from .hilbert import gram_det_direct, gram_logdet_direct, gram_matrix, inner
from .engine import (AppendOutcome, GramState, append, det_from_state, distance_to_span,
                     engine_new)
from .measures import (AffineShift, BaseGaussian, CovarianceSpec, DegenerateSubspace,
                       IndependentSequence, Mixture, SeedPath, density_wrt_base, sample,
                       support_dimension)
from .experiments import (ExperimentConfig, ExperimentReport, merge_reports, run_bound,
                          run_freeness, run_negligibility_probe, run_selftest,
                          run_zeroset_probe)
