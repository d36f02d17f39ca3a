"""Capacity regions of quantum multiple-access channels.

Labeled quantum states and Kraus channels, entropic functionals, region
bounds for classical/quantum and quantum/quantum rate pairs, and a seeded
multistart optimizer that sweeps region frontiers.
"""

from .channel import (
    Instrument,
    KrausChannel,
    apply,
    apply_instrument,
    bit_flip,
    collective_qubit_flip,
    dephasing,
    erasure_mac,
    identity_channel,
    load_channel,
    save_channel,
    tensor_power,
)
from .entropic import (
    binary_entropy,
    channel_coherent_information,
    coherent_information,
    conditional_coherent_information,
    conditional_mutual_information,
    entropy,
    mutual_information,
)
from .errors import QmacError
from .optimize import (
    OptimizerConfig,
    additivity_experiment,
    maximize_scalar,
    random_pure,
    sweep_frontier,
)
from .region import (
    RegionCloud,
    contains,
    cq_pentagon,
    cq_rectangle,
    full_region_bounds,
    hausdorff,
    hull_2d,
    qq_pentagon,
    qq_rectangle,
)
from .state import (
    Ensemble,
    FactorLayout,
    LabeledState,
    PureState,
    bell_state,
    cq_state,
    fidelity,
    load_state,
    maximally_entangled,
    partial_trace,
    purify,
    save_state,
    tensor,
)

__version__ = "0.1.0"
