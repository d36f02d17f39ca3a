"""CPTP maps in Kraus form, quantum instruments, and the example channels."""

from __future__ import annotations

import itertools
import json
import math
from typing import Sequence

import numpy as np

from .errors import (
    BadProbability,
    CompletenessViolation,
    DimMismatch,
    LabelCollision,
    ParseError,
    SizeOverflow,
)
from .state import (
    FactorLayout,
    LabeledState,
    _as_layout,
    _check_labels,
    _matrix_from_json,
    _matrix_to_json,
    as_density,
    layout_from_json,
    layout_to_json,
    permute_factors,
)

TOL_CPTP = 1e-8
MAX_DIM = 4096
MAX_KRAUS = 4096

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def _completeness_residual(kraus, d_in: int) -> float:
    s = sum(k.conj().T @ k for k in kraus)
    return float(np.max(np.abs(s - np.eye(d_in))))


class KrausChannel:
    """A channel ``rho -> sum_i K_i rho K_i^dagger`` between two factor layouts."""

    __slots__ = ("in_layout", "out_layout", "kraus", "name")

    def __init__(self, in_layout, out_layout, kraus, name: str = "", check: bool = True):
        in_layout, out_layout = _as_layout(in_layout), _as_layout(out_layout)
        ops = tuple(np.array(k, dtype=complex) for k in kraus)
        if not ops:
            raise CompletenessViolation("a channel needs at least one Kraus operator")
        for k in ops:
            if k.shape != (out_layout.dim, in_layout.dim):
                raise DimMismatch(
                    f"Kraus operator shape {k.shape}, expected {(out_layout.dim, in_layout.dim)}"
                )
            k.setflags(write=False)
        if check:
            res = _completeness_residual(ops, in_layout.dim)
            if res > TOL_CPTP:
                raise CompletenessViolation(f"sum K^dagger K differs from identity by {res:.3g}")
        object.__setattr__(self, "in_layout", in_layout)
        object.__setattr__(self, "out_layout", out_layout)
        object.__setattr__(self, "kraus", ops)
        object.__setattr__(self, "name", name)

    def __setattr__(self, name, value):
        raise AttributeError("KrausChannel is immutable")

    def __repr__(self):
        return (f"KrausChannel({self.name or 'unnamed'}: {list(self.in_layout.factors)} -> "
                f"{list(self.out_layout.factors)}, {len(self.kraus)} Kraus ops)")

    def completeness_residual(self) -> float:
        return _completeness_residual(self.kraus, self.in_layout.dim)

    def relabel(self, in_map: dict | None = None, out_map: dict | None = None) -> "KrausChannel":
        return KrausChannel(self.in_layout.relabel(in_map or {}),
                            self.out_layout.relabel(out_map or {}),
                            self.kraus, self.name, check=False)


class Instrument:
    """Quantum instrument ``tau -> sum_x |x><x| (x) N_x(tau)``.

    ``components[x]`` is the Kraus list of the completely positive map ``N_x``.
    """

    __slots__ = ("in_layout", "out_layout", "components", "classical_label")

    def __init__(self, in_layout, out_layout, components, classical_label: str = "X",
                 check: bool = True):
        in_layout, out_layout = _as_layout(in_layout), _as_layout(out_layout)
        comps = tuple(tuple(np.array(k, dtype=complex) for k in c) for c in components)
        if not comps or any(not c for c in comps):
            raise CompletenessViolation("every instrument component needs a Kraus operator")
        for c in comps:
            for k in c:
                if k.shape != (out_layout.dim, in_layout.dim):
                    raise DimMismatch(f"component Kraus shape {k.shape} does not match layouts")
        if classical_label in out_layout:
            raise LabelCollision(f"classical label {classical_label!r} clashes with outputs")
        if check:
            res = _completeness_residual([k for c in comps for k in c], in_layout.dim)
            if res > TOL_CPTP:
                raise CompletenessViolation(f"components sum to a non trace preserving map ({res:.3g})")
        object.__setattr__(self, "in_layout", in_layout)
        object.__setattr__(self, "out_layout", out_layout)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "classical_label", classical_label)

    def __setattr__(self, name, value):
        raise AttributeError("Instrument is immutable")

    def summed_channel(self) -> KrausChannel:
        """The trace-preserving map ``sum_x N_x`` with the classical record discarded."""
        return KrausChannel(self.in_layout, self.out_layout,
                            [k for c in self.components for k in c], check=False)

    def as_channel(self) -> KrausChannel:
        """The instrument as an ordinary channel whose output keeps the record as a last factor."""
        n = len(self.components)
        out = self.out_layout.concat(FactorLayout(((self.classical_label, n),)))
        ops = []
        for x, comp in enumerate(self.components):
            e = np.zeros((n, 1))
            e[x, 0] = 1
            ops.extend(np.kron(k, e) for k in comp)
        return KrausChannel(self.in_layout, out, ops, check=False)


def _apply_kraus(kraus, s: LabeledState, targets: list[str], in_layout: FactorLayout,
                 out_layout: FactorLayout) -> LabeledState:
    targets = _check_labels(s.layout, targets)
    tdims = tuple(s.layout.dims[s.layout.index(t)] for t in targets)
    if tdims != in_layout.dims:
        raise DimMismatch(f"targets {targets} have dims {tdims}, channel expects {in_layout.dims}")
    rest = [label for label in s.layout.labels if label not in targets]
    clash = set(out_layout.labels) & set(rest)
    if clash:
        raise LabelCollision(f"output labels {sorted(clash)} already present in the state")
    front = permute_factors(s, targets + rest)
    d_in, d_rest, d_out = in_layout.dim, front.layout.dim // in_layout.dim, out_layout.dim
    rho = front.matrix.reshape(d_in, d_rest, d_in, d_rest)
    ks = np.stack(kraus)
    out = np.einsum("mai,irjs,mbj->arbs", ks, rho, ks.conj(), optimize=True)
    rest_layout = FactorLayout(tuple(f for f in front.layout.factors[len(targets):]))
    layout = out_layout.concat(rest_layout)
    result = LabeledState(layout, out.reshape(d_out * d_rest, d_out * d_rest), check=False)
    # outputs take the slot of the first target; untouched factors keep their order
    order = []
    for label in s.layout.labels:
        if label == targets[0]:
            order.extend(out_layout.labels)
        elif label not in targets:
            order.append(label)
    return permute_factors(result, order)


def apply(ch: KrausChannel, s, targets: Sequence[str] | None = None) -> LabeledState:
    """Apply ``ch`` to the factors ``targets`` of ``s``, acting as identity elsewhere.

    ``targets`` defaults to the channel's input labels.  The output factors
    replace the targets in place (at the position of the first target).
    """
    s = as_density(s)
    targets = list(ch.in_layout.labels if targets is None else targets)
    return _apply_kraus(ch.kraus, s, targets, ch.in_layout, ch.out_layout)


def apply_instrument(ins: Instrument, s, targets: Sequence[str] | None = None) -> LabeledState:
    """Apply an instrument; the classical record is appended as the last factor."""
    s = as_density(s)
    targets = list(ins.in_layout.labels if targets is None else targets)
    if ins.classical_label in s.layout:
        raise LabelCollision(f"classical label {ins.classical_label!r} already present")
    branches = [_apply_kraus(c, s, targets, ins.in_layout, ins.out_layout) for c in ins.components]
    n, d = len(branches), branches[0].layout.dim
    layout = branches[0].layout.concat(FactorLayout(((ins.classical_label, n),)))
    out = np.zeros((d, n, d, n), dtype=complex)
    for x, b in enumerate(branches):
        out[:, x, :, x] = b.matrix
    return LabeledState(layout, out.reshape(d * n, d * n), check=False)


def copy_label(label: str, j: int) -> str:
    return f"{label}_{j}"


def tensor_power(ch: KrausChannel, k: int) -> KrausChannel:
    """``ch`` applied to ``k`` copies; copy ``j`` has labels suffixed ``_j`` (1-based).

    Factors are ordered copy by copy.  ``k == 1`` returns ``ch`` unchanged.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if k == 1:
        return ch
    m = len(ch.kraus)
    if m ** k > MAX_KRAUS or max(ch.in_layout.dim, ch.out_layout.dim) ** k > MAX_DIM:
        raise SizeOverflow(f"{m}^{k} Kraus operators or dimension exceeds the configured cap")

    def copies(layout):
        return FactorLayout(tuple((copy_label(label, j), dim)
                                  for j in range(1, k + 1) for label, dim in layout.factors))

    ops = []
    for combo in itertools.product(ch.kraus, repeat=k):
        op = combo[0]
        for other in combo[1:]:
            op = np.kron(op, other)
        ops.append(op)
    name = f"{ch.name}^{k}" if ch.name else ""
    return KrausChannel(copies(ch.in_layout), copies(ch.out_layout), ops, name=name, check=False)


def identity_channel(in_layout, out_labels: Sequence[str] | None = None) -> KrausChannel:
    in_layout = _as_layout(in_layout)
    out = in_layout if out_labels is None else FactorLayout(tuple(zip(out_labels, in_layout.dims)))
    return KrausChannel(in_layout, out, [np.eye(in_layout.dim)], name="identity")


def _check_p(p: float) -> float:
    p = float(p)
    if not 0 <= p <= 1 or math.isnan(p):
        raise BadProbability(f"p = {p} is not a probability")
    return p


def bit_flip(p: float, in_label: str = "A'", out_label: str = "B") -> KrausChannel:
    """Single-qubit ``rho -> (1-p) rho + p X rho X``."""
    p = _check_p(p)
    return KrausChannel([(in_label, 2)], [(out_label, 2)],
                        [math.sqrt(1 - p) * np.eye(2), math.sqrt(p) * SIGMA_X],
                        name=f"bit_flip({p:g})")


def dephasing(p: float = 1.0, in_label: str = "A'", out_label: str = "B") -> KrausChannel:
    """``rho -> (1 - p/2) rho + (p/2) Z rho Z``; ``p = 1`` is complete dephasing."""
    p = _check_p(p)
    return KrausChannel([(in_label, 2)], [(out_label, 2)],
                        [math.sqrt(1 - p / 2) * np.eye(2), math.sqrt(p / 2) * SIGMA_Z],
                        name=f"dephasing({p:g})")


def collective_qubit_flip(p: float) -> KrausChannel:
    """Two-sender channel ``rho -> (1-p) rho + p (X(x)X) rho (X(x)X)``.

    Inputs ``A'`` (Alice) and ``B'`` (Bob); outputs ``CA``, ``CB`` together
    form the receiver's system.
    """
    p = _check_p(p)
    return KrausChannel([("A'", 2), ("B'", 2)], [("CA", 2), ("CB", 2)],
                        [math.sqrt(1 - p) * np.eye(4), math.sqrt(p) * np.kron(SIGMA_X, SIGMA_X)],
                        name=f"collective_qubit_flip({p:g})")


def erasure_mac() -> KrausChannel:
    """Alice's bit arrives intact; Bob's qubit is erased whenever that bit is 1.

    Alice's input is dephased in the computational basis.  Bob's output is a
    qutrit with basis ``|0>, |1>, |e>``, where ``|e>`` flags an erasure.
    """
    e0 = np.diag([1.0, 0.0])
    e1 = np.diag([0.0, 1.0])
    embed = np.array([[1, 0], [0, 1], [0, 0]], dtype=complex)
    ops = [np.kron(e0, embed)]
    for b in range(2):
        flag = np.zeros((3, 2))
        flag[2, b] = 1
        ops.append(np.kron(e1, flag))
    return KrausChannel([("A'", 2), ("B'", 2)], [("CA", 2), ("CB", 3)], ops, name="erasure_mac")


def channel_to_dict(ch: KrausChannel) -> dict:
    return {
        "in_factors": layout_to_json(ch.in_layout),
        "out_factors": layout_to_json(ch.out_layout),
        "kraus": [_matrix_to_json(k) for k in ch.kraus],
    }


def channel_from_dict(obj: dict) -> KrausChannel:
    if not isinstance(obj, dict):
        raise ParseError("channel file must hold a JSON object")
    try:
        in_layout = layout_from_json(obj["in_factors"])
        out_layout = layout_from_json(obj["out_factors"])
        raw = obj["kraus"]
    except KeyError as exc:
        raise ParseError(f"channel object missing key {exc}") from None
    ops = [_matrix_from_json(k, f"kraus[{i}]") for i, k in enumerate(raw)]
    for i, k in enumerate(ops):
        if k.shape != (out_layout.dim, in_layout.dim):
            raise ParseError(f"kraus[{i}] has shape {k.shape}, "
                             f"expected {(out_layout.dim, in_layout.dim)}")
    return KrausChannel(in_layout, out_layout, ops, name=obj.get("name", ""))


def save_channel(ch: KrausChannel, path):
    obj = channel_to_dict(ch)
    if ch.name:
        obj["name"] = ch.name
    with open(path, "w") as fh:
        json.dump(obj, fh)


def load_channel(path) -> KrausChannel:
    """Read a channel file; completeness is re-validated."""
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from None
    return channel_from_dict(obj)
