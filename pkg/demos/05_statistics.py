#!/usr/bin/env python3
"""Tour of the statistics toolkit used by the analyses.

Shows the pooled two-proportion z-test on quartile pass counts, the
normality check plus one-sided Welch comparison for batch score
distributions, and the defect-bootstrap confidence interval for a
Q4 - Q1 effect size.
"""

import numpy as np

from fexlab.stats import (
    bootstrap_effect_ci,
    shapiro_wilk,
    two_proportion_z,
    welch_t_one_sided,
)

print("== two-proportion z-test (Q4 vs Q1 pass counts)")
for (q1, n1), (q4, n4) in [((24, 81), (35, 81)), ((88, 261), (135, 261))]:
    z, p = two_proportion_z(q1, n1, q4, n4)
    print(f"  Q1 {q1}/{n1} vs Q4 {q4}/{n4}: z={z:.3f}, two-sided p={p:.3g}")

print("\n== normality + one-sided Welch (two-way vs three-way scores)")
rng = np.random.default_rng(7)
two_way = rng.normal(2.9, 0.5, 28)
three_way = rng.normal(3.3, 0.5, 56)
for name, sample in (("two-way", two_way), ("three-way", three_way)):
    w, p = shapiro_wilk(sample)
    print(f"  {name}: Shapiro-Wilk W={w:.4f}, p={p:.3f}")
t, df, p = welch_t_one_sided(two_way, three_way)
print(f"  Welch t={t:.3f}, df={df:.1f}, one-sided p={p:.2e}")

print("\n== defect-bootstrap CI for a Q4 - Q1 delta (Bonferroni m=2)")
q1_rates = rng.uniform(0.25, 0.45, 12)
q4_rates = q1_rates + 0.3
effect = bootstrap_effect_ci(q1_rates, q4_rates, replicates=5000, m=2, seed=1)
print(f"  delta={effect.delta:.3f}, CI [{effect.ci_low:.3f}, {effect.ci_high:.3f}] "
      f"({effect.replicates} replicates)")
