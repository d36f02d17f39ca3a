"""Labeled states, partial traces and the basic entropic quantities."""

import numpy as np

from qmac import (LabeledState, bell_state, binary_entropy, coherent_information, entropy,
                  mutual_information, partial_trace, tensor)
from qmac.state import maximally_mixed

# A Bell pair on factors A, B.  Basis order is row-major: A is the high digit.
psi = bell_state(+1, ("A", "B"))
print("vector:", np.round(psi.vector, 3))

# Either half alone is maximally mixed
print("rho_A =\n", partial_trace(psi, {"A"}).matrix.real)

print("H(AB) =", round(entropy(psi), 12))
print("H(A)  =", entropy(psi, ["A"]))
print("I(A;B) =", mutual_information(psi, ["A"], ["B"]))
print("I_c(A>B) =", coherent_information(psi, ["A"], ["B"]))

# Attach an independent classical bit C; it shares nothing with A or B
c = LabeledState([("C", 2)], np.diag([0.9, 0.1]))
big = tensor(psi.density(), c)
print("factors:", big.labels)
print("H(C) =", entropy(big, ["C"]), " binary_entropy(0.1) =", binary_entropy(0.1))
print("I(AB;C) =", round(mutual_information(big, ["A", "B"], ["C"]), 12))

# A maximally mixed qutrit carries log2(3) bits
print("H(I/3) =", entropy(maximally_mixed([("Q", 3)])), "vs", np.log2(3))
