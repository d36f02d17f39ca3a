"""Does blocking two channel uses enlarge the region?

For each characterization we sweep the frontier with one channel use and with
two, then compare their support functions.  A positive gap means the
two-use region reaches past the one-use region, so that description is not
additive.  This script takes about a minute.
"""

import math

from qmac import OptimizerConfig, additivity_experiment, collective_qubit_flip, qq_rectangle
from qmac.optimize import point_from_json, point_states
from qmac.region import contains

(entry,) = additivity_experiment([0.1], OptimizerConfig(restarts=1), direction_count=5)
print(f"p = {entry.p}: rect_gap = {entry.rect_gap:.4f} ({entry.verdict('rect')}), "
      f"pent_gap = {entry.pent_gap:.1e} ({entry.verdict('pent')})")

w = next(w for w in entry.witnesses if w["characterization"] == "rect")
print(f"largest rectangle gap in direction theta = {math.degrees(w['theta']):.1f} deg")

# Re-evaluate the two-use witness input from its serialized form
states = point_states(point_from_json(w["input"]))
b = qq_rectangle(collective_qubit_flip(entry.p), 2, states["alice"], states["bob"])
print("two-use rectangle corner:", (round(b.r_max, 4), round(b.q_max, 4)))
k1 = entry.clouds["rect"][0]
print("one-use hull:", [tuple(round(x, 4) for x in v) for v in k1.hull2d])
print("corner inside the one-use hull?", contains(k1, (b.r_max, b.q_max)))
