"""A channel where Alice's classical bit decides whether Bob's qubit gets through."""

import numpy as np

from qmac import Ensemble, PureState, bell_state, binary_entropy, cq_rectangle, erasure_mac

ch = erasure_mac()
print(ch)
bell = bell_state(+1, ("P", "in"))
zero, one = PureState([("in", 2)], [1, 0]), PureState([("in", 2)], [0, 1])

# Alice sends 1 with probability p; Bob sends half of a Bell pair
print(f"{'p':>5} {'R':>10} {'H(p)':>10} {'Q':>10} {'1-2p':>10}")
for p in np.linspace(0, 0.5, 6):
    b = cq_rectangle(ch, 1, Ensemble([1 - p, p], [zero, one]), bell)
    print(f"{p:5.2f} {b.r_max:10.6f} {binary_entropy(p):10.6f} {b.q_max:10.6f} {1 - 2 * p:10.6f}")

# Every bit of classical rate Alice gains costs Bob quantum rate: the corners
# trace a curve from (0, 1) to (1, 0) rather than filling the unit square.
