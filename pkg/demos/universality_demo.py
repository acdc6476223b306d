"""Universality and self-similarity of the slope sequences.

Three observations, reproduced side by side:
  1. slope ratios alpha'_n / alpha'_{n-1} do not converge, but two different
     single-harmonic forcings give the same ratio sequence;
  2. the golden-mean ratios reappear at the doubled rotation number shifted
     by one index (asymptotic equivalence);
  3. delta * alpha'_n(omega) / alpha'_{n-1}(2 omega) converges: the vertical
     scale factor of the parameter-space self-similarity.
"""

import numpy as np

from qpcascade import (
    FEIGENBAUM_DELTA,
    ForcingSpec,
    TABLE_SCHEDULE,
    asymptotic_equivalence,
    delta1_sequence,
    ratio_sequence,
    slope_table,
)

GOLDEN = (np.sqrt(5) - 1) / 2
N_MAX = 6

mult_g = slope_table(ForcingSpec("multiplicative-cos"), GOLDEN,
                     range(N_MAX + 1), TABLE_SCHEDULE)
add_g = slope_table(ForcingSpec("additive-cos"), GOLDEN,
                    range(N_MAX + 1), TABLE_SCHEDULE)
mult_2g = slope_table(ForcingSpec("multiplicative-cos"), 2 * GOLDEN,
                      range(N_MAX + 1), TABLE_SCHEDULE)

r_mult, r_add, r_2g = (ratio_sequence(t) for t in (mult_g, add_g, mult_2g))

print(f"{'n':>2} {'slope (mult)':>16} {'ratio (mult)':>14} {'ratio (add)':>14}")
for n in range(N_MAX + 1):
    ratio_m = f"{r_mult[n - 1]:.10f}" if n >= 1 else "-"
    ratio_a = f"{r_add[n - 1]:.10f}" if n >= 1 else "-"
    print(f"{n:>2} {mult_g[n].alpha_prime:>16.10f} {ratio_m:>14} {ratio_a:>14}")

print("\nratio spread over n = 1..6 (no single limit):",
      f"{r_mult.max() - r_mult.min():.3f}")
print("largest multiplicative-vs-additive ratio gap at n >= 3:",
      f"{np.max(np.abs(r_mult[2:] - r_add[2:])):.2e}")

verdict = asymptotic_equivalence(r_mult, r_2g, offset=1)
print("\nshifted comparison against the doubled rotation number:")
print("  |r_n(omega) - r_{n-1}(2 omega)| =",
      " ".join(f"{d:.1e}" for d in verdict.diffs))
print(f"  equivalent: {verdict.equivalent} (fitted decay rate {verdict.rho_hat:.3f})")

d1 = delta1_sequence(mult_g, mult_2g, FEIGENBAUM_DELTA)
print("\nvertical rescaling sequence delta_1,n:")
for n, v in enumerate(d1, start=1):
    print(f"  n={n}: {v:.8f}")
print("converges toward ~7.5472 for this family and rotation number")
