"""
Sample study on a few cells of the design.

Each replicate draws normal data from a population model, estimates a
factor model by iterated principal axes and oblique target rotation, and
builds the three predictors from the sample correlation matrix. The
reported determinacy is the correlation of each predictor with the simulated
factor scores.

The full study uses 324 cells x 1000 replicates (``cpscores samplesim``);
this demo uses 50 replicates of four cells.

Run with ``python demos/sample_study.py``.
"""

from cpscores.model import LoadingCondition
from cpscores.samplesim import SampleCondition, run_sample_grid

cells = [
    SampleCondition(LoadingCondition(3, sl, 0.5, 5, False, False), n, replicates=50, seed=1)
    for sl in (0.4, 0.6)
    for n in (300, 900)
]
for agg in run_sample_grid(cells, workers=1):
    c = agg.condition
    print(
        f"sl={c.base.sl:.1f} n={c.n}: "
        f"P_r {agg.mean('P_r'):.3f}  P_c {agg.mean('P_c'):.3f}  "
        f"Cor_r {agg.mean('Cor_r'):.3f}  Cor_c {agg.mean('Cor_c'):.3f}  "
        f"phi_hat {agg.mean('phi_hat'):.3f}  excluded {agg.excluded_count}"
    )
