"""Color-coded parameter-plane diagram of the forced logistic map.

Classifies a modest grid over (alpha, eps): grey = reducible invariant
curve, blue = non-reducible, black = zero Lyapunov exponent, red = chaotic,
white = divergent.  Writes both the raw PPM raster and a PNG preview.
"""

import numpy as np
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from qpcascade.diagram import LABEL_COLORS, compute_diagram, write_ppm
from qpcascade.forced import ClassifyOptions, ForcedFamily, ForcingSpec

GOLDEN = (np.sqrt(5) - 1) / 2
fam = ForcedFamily(omega=GOLDEN, forcing=ForcingSpec("multiplicative-cos"))

window = (2.8, 4.0, 0.0, 0.15)
width, height = 180, 120
opts = ClassifyOptions(transient=4000, iters=30000, m_max=8)

print(f"classifying a {width}x{height} grid over {window} ...")
raster = compute_diagram(fam, window, width, height, opts, threads=4)

write_ppm(raster, "parameter_space.ppm")
rgb = LABEL_COLORS[raster.labels]
plt.figure(figsize=(8, 5))
plt.imshow(rgb, origin="lower", extent=window, aspect="auto")
plt.xlabel("alpha")
plt.ylabel("eps")
plt.title("attractor classes of the quasi-periodically forced logistic map")
plt.savefig("parameter_space.png", dpi=130, bbox_inches="tight")

unique, counts = np.unique(raster.labels, return_counts=True)
from qpcascade.diagram import LABEL_NAMES
print("cell counts:")
for code, count in zip(unique, counts):
    print(f"  {LABEL_NAMES[int(code)]:<24} {count}")
print("wrote parameter_space.ppm and parameter_space.png")
