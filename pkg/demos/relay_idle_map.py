"""Where around a transmitting source are relays likely to be idle?

Run: python demos/relay_idle_map.py

A node is a usable relay only if it currently senses an idle medium.
With one interferer placed uniformly in the deployment area, the
probability that a candidate at (x, 0) senses idle is evaluated by
quadrature along the line through the source and the destination.
"""
import numpy as np

from coopcsma.analysis import fields
from coopcsma.geometry import Region

f = fields.relay_idle_field((0.0, 0.0), window=Region(-40.0, 100.0, -2.0, 2.0), step=2.0)
row = f.values[:, np.argmin(np.abs(f.ys))]
print(" x (m)   idle probability")
for x, v in zip(f.xs[::5], row[::5]):
    print(f"{x:6.0f}   {v:.3f}  " + "#" * int(40 * v))
print(f"\nquadrature residual (grid halving): {f.residual:.1e}")
