"""A stronger line-of-sight component is not always better.

For the reference channel the outage probability at a low threshold drops as
K grows, since the deterministic path keeps lambda_max away from zero. At a
high threshold the order flips: the scattered part, which shrinks with K, is
what lets lambda_max exceed the LoS value of 4.

Run: python demos/outage_crossing.py
"""
import numpy as np

from wishart_outage import presets
from wishart_outage.mimo_outage import outage_sweep

thresholds = np.array([0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0])
ks = (0.0, 0.5, 1.0, 2.0, 10.0)

curves = {k: [p.value for p in outage_sweep(presets.reference_channel(k), thresholds)] for k in ks}

print(f"{'gamma_th/gamma_bar':>20}" + "".join(f"{'K=' + format(k, 'g'):>12}" for k in ks))
for i, x in enumerate(thresholds):
    print(f"{x:20.2f}" + "".join(f"{curves[k][i]:12.4e}" for k in ks))

# locate the crossing of the K = 0.5 and K = 2 curves
grid = np.geomspace(0.5, 8.0, 400)
lo = np.array([p.value for p in outage_sweep(presets.reference_channel(0.5), grid)])
hi = np.array([p.value for p in outage_sweep(presets.reference_channel(2.0), grid)])
i = int(np.argmax(hi > lo))
print(f"\nK = 2 overtakes K = 0.5 near gamma_th/gamma_bar = {grid[i]:.3f} "
      f"(outage {hi[i]:.3f})")
