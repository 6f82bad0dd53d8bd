"""
The zero set of the Gram determinant, and where truncation shows
================================================================

Under the base Gaussian the set of tuples with zero Gram determinant has
measure zero, so no trial should be flagged for ``k < d``. At ``k = d`` we hold
``d + 1`` vectors in a ``d``-dimensional truncation and dependence is forced:
that is an artifact of truncating H, not a property of H.
"""
from gramfree import ExperimentConfig, run_zeroset_probe

d = 12
report = run_zeroset_probe(ExperimentConfig(d=d, k_max=d, trials=2000, master_seed=3))
for k, m in enumerate(report.zeroset_measure):
    note = "  <- more vectors than coordinates" if k >= d else ""
    print(f"k={k:2d}  estimated measure of zero set = {m}{note}")
