"""Desk-scale checks of the limit theorems.

Whatever the memory parameter below 1, the signed location behaves like a
simple symmetric walk to first and second order: S_n/n -> 0, S_n/sqrt(n)
is asymptotically standard normal, the iterated-logarithm envelope is
honoured, and the quadratic strong law average settles near 1.  Memory
changes none of these, only the convergent correction term.
"""

import math

import numpy as np

from dihedral_erw.montecarlo import (
    ExperimentConfig,
    ks_normal_test,
    lil_scan,
    mc_terminal_stats,
    sample_paths,
    t2_rate_fit,
    w_regime_scan,
)
from dihedral_erw.group import MemoryParams

SEED = 2

print("normality of S_n / sqrt(n) at n = 4000 (KS against N(0,1), alpha = 1%):")
for q in (-0.5, 0.0, 0.5):
    ens = sample_paths(q, 4000, 4000, SEED)
    res = ks_normal_test(ens.S / math.sqrt(4000), alpha=0.01)
    print(f"  q={q:+.1f}: statistic={res.statistic:.4f} threshold={res.threshold:.4f} "
          f"pass={res.passed}")

print("\nterminal summaries at q = 0.5, n = 2e4, R = 2000:")
cfg = ExperimentConfig(MemoryParams.from_q(0.5), steps=20_000, reps=2000, master_seed=SEED)
summary = mc_terminal_stats(cfg)
for name in ("S_over_sqrt_n", "Ztilde", "QV_over_n", "qsl"):
    s = summary.stats[name]
    print(f"  {name:<15s} mean={s.mean:+.4f}  sd={math.sqrt(s.variance):.4f}")

print("\niterated-logarithm envelope statistic (running max, both signs):")
cfg = ExperimentConfig(MemoryParams.from_q(0.0), steps=200_000, reps=40, master_seed=SEED)
lil = lil_scan(cfg, 200_000)
print(f"  mean+ = {lil.stats['lil_pos'].mean:.3f}   mean- = {lil.stats['lil_neg'].mean:.3f} "
      f"(almost-sure limit of the envelope is 1, band is loose)")

print("\nthe W-walk changes regime with p even though S never does:")
for row in w_regime_scan([0.5, 0.9], 50_000, 300, SEED):
    print(f"  p={row.p}: |W|/r_n mean={row.summary.mean:10.3f}   "
          f"|W|/(n/r_n) mean={row.summary_scaled.mean:.3f}")

print("\nfitted decay of the variance cross-term T2:")
for q in (0.5, -0.5):
    fit = t2_rate_fit(q, (100, 1000, 10_000, 100_000))
    print(f"  q={q:+.1f}: fitted slope {fit.fitted_slope:+.3f} "
          f"(theory {fit.theoretical_slope:+.1f})")
