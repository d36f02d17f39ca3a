"""Rate regions of the two-sender collective bit-flip channel.

Both senders hold one qubit; with probability p both are flipped together.
"""

from qmac import (Ensemble, OptimizerConfig, PureState, binary_entropy, bell_state,
                  collective_qubit_flip, cq_pentagon, cq_rectangle, qq_pentagon, qq_rectangle,
                  sweep_frontier)
from qmac.region import hausdorff, pentagon_hull

p = 0.1
ch = collective_qubit_flip(p)
bell = bell_state(+1, ("P", "in"))
print(ch)
print("2 - H(p) =", 2 - binary_entropy(p))

# Both senders send halves of Bell pairs
pent = qq_pentagon(ch, 1, bell, bell)
rect = qq_rectangle(ch, 1, bell, bell)
print("pentagon (a_max, b_max, sum_max):", [round(v, 6) for v in pent.bounds])
print("rectangle (a_max, b_max):        ", [round(v, 6) for v in rect.bounds])

# Alice sends classical data instead, with one of two ensembles
plus, minus = PureState([("in", 2)], [2 ** -0.5, 2 ** -0.5]), PureState([("in", 2)], [2 ** -0.5, -2 ** -0.5])
zero, one = PureState([("in", 2)], [1, 0]), PureState([("in", 2)], [0, 1])
for name, ens in (("{+,-}", Ensemble([0.5, 0.5], [plus, minus])),
                  ("{0,1}", Ensemble([0.5, 0.5], [zero, one]))):
    r = cq_rectangle(ch, 1, ens, bell)
    pc = cq_pentagon(ch, 1, ens, bell)
    print(f"ensemble {name}: rectangle (R, Q) = ({r.r_max:.6f}, {r.q_max:.6f}); "
          f"pentagon corner = {[round(v, 6) for v in pc.provenance['corner']]}")

# Search over all inputs: the optimized hull matches the Bell-pair pentagon
cloud = sweep_frontier(ch, 1, "pent", direction_count=9, cfg=OptimizerConfig(restarts=2))
print("optimized hull:", [tuple(round(x, 4) for x in v) for v in cloud.hull2d])
print("distance to the analytic pentagon:",
      hausdorff(cloud.hull2d, pentagon_hull(1, 1, 2 - binary_entropy(p))))
