"""Self-similarity of the parameter plane under rotation-number doubling.

The affine map (alpha, eps) -> (delta0*(alpha - s*) + s*, delta1*eps) with
delta0 the universal doubling ratio and delta1 the measured vertical factor
carries the diagram box around one superstable level at the doubled
rotation number onto the box around the previous level at the base rotation
number.  The same classification run on both boxes should agree cell by
cell.
"""

import numpy as np

from qpcascade import AffineSelfSimMap, ForcingSpec, find_superstable
from qpcascade.diagram import selfsim_agreement, write_ppm
from qpcascade.forced import ClassifyOptions
from qpcascade.unimodal import accumulation_alpha

GOLDEN = (np.sqrt(5) - 1) / 2

s_star = accumulation_alpha([float(find_superstable(n)) for n in range(9)])
simmap = AffineSelfSimMap(s_star=s_star, delta0=4.66920, delta1=7.54718)
print(f"s* = {s_star:.10f}, delta0 = {simmap.delta0}, delta1 = {simmap.delta1}")

# box W around s_2 examined at the doubled rotation number; its image L(W)
# lands around s_1 and is examined at the base rotation number
s2 = float(find_superstable(2))
window = (s2 - 0.012, s2 + 0.012, 0.0, 0.004)
opts = ClassifyOptions(transient=4000, iters=30000, m_max=6)
print(f"doubled-omega box: {tuple(round(v, 5) for v in window)}")

report = selfsim_agreement(ForcingSpec("multiplicative-cos"), GOLDEN,
                           window, 80, 60, simmap, opts, threads=4)
print(f"base-omega box:    "
      f"{tuple(round(v, 5) for v in report.raster_base.window)}")
print(f"\ncell-label agreement: {report.agreement:.4f}")

write_ppm(report.raster_doubled, "selfsim_doubled.ppm")
write_ppm(report.raster_base, "selfsim_base.ppm")
print("wrote selfsim_doubled.ppm / selfsim_base.ppm")
