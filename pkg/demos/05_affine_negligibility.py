"""
Strict affine subspaces are negligible for product measures
===========================================================

Take ``A = H^(k-1) x (shift + span(B))`` with ``B`` three random directions.
Draws from the product Gaussian never land in ``A`` (within 1e-9), while a
sampler living on ``shift + span(B)`` always does.
"""
import numpy as np

from gramfree import ExperimentConfig, run_negligibility_probe

d = 20
rng = np.random.default_rng(4)
B, shift = rng.standard_normal((3, d)), rng.standard_normal(d)
cfg = ExperimentConfig(d=d, trials=20_000, master_seed=4)

for k in (1, 2, 3):
    print(run_negligibility_probe(B, shift, k, cfg).hit_rates())

# The zero subspace {0}: a continuous law puts no mass on a single point.
print(run_negligibility_probe([], np.zeros(d), 1, cfg).hit_rates())
