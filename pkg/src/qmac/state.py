"""Labeled multipartite states and the linear algebra kernels on them.

Basis convention: the computational basis of a multipartite space is ordered
lexicographically over the factor indices with the leftmost factor most
significant, i.e. exactly the ordering produced by ``np.kron``.  The same
convention is used for every file format in the package.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    BadDistribution,
    BadPermutation,
    DuplicateLabel,
    InvalidState,
    LayoutMismatch,
    ParseError,
    UnknownLabel,
)

TOL_HERM = 1e-9
TOL_TRACE = 1e-9
TOL_NORM = 1e-9
TOL_PROB = 1e-9
TOL_PSD = 1e-9
TOL_RECON = 1e-8


@dataclass(frozen=True)
class FactorLayout:
    """Ordered tensor factors, each a ``(label, dim)`` pair."""

    factors: tuple[tuple[str, int], ...]

    def __post_init__(self):
        factors = tuple((str(label), int(dim)) for label, dim in self.factors)
        labels = [label for label, _ in factors]
        if len(set(labels)) != len(labels):
            raise DuplicateLabel(f"repeated label in layout {labels}")
        for label, dim in factors:
            if dim < 1:
                raise InvalidState(f"factor {label!r} has non-positive dimension {dim}")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def of(cls, *pairs: tuple[str, int]) -> "FactorLayout":
        return cls(tuple(pairs))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(dim for _, dim in self.factors)

    @property
    def dim(self) -> int:
        return math.prod(self.dims)

    def __len__(self):
        return len(self.factors)

    def __contains__(self, label):
        return label in self.labels

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownLabel(f"label {label!r} not in layout {self.labels}") from None

    def dim_of(self, labels: Iterable[str]) -> int:
        return math.prod(self.dims[self.index(label)] for label in labels)

    def concat(self, other: "FactorLayout") -> "FactorLayout":
        clash = set(self.labels) & set(other.labels)
        if clash:
            raise DuplicateLabel(f"labels {sorted(clash)} appear in both layouts")
        return FactorLayout(self.factors + other.factors)

    def relabel(self, mapping: dict[str, str]) -> "FactorLayout":
        for old in mapping:
            self.index(old)
        return FactorLayout(tuple((mapping.get(label, label), dim) for label, dim in self.factors))


def _as_layout(layout) -> FactorLayout:
    if isinstance(layout, FactorLayout):
        return layout
    return FactorLayout(tuple(layout))


def _check_labels(layout: FactorLayout, labels: Iterable[str]) -> list[str]:
    labels = list(labels)
    for label in labels:
        layout.index(label)
    return labels


class LabeledState:
    """Density matrix over an ordered list of named tensor factors.

    Parameters
    ----------
    layout : FactorLayout or sequence of (label, dim)
    matrix : array_like
        Square complex matrix of size ``layout.dim``.
    check : bool
        Validate Hermiticity, trace and positivity.  Internal operations that
        provably preserve these properties pass ``check=False``.
    """

    __slots__ = ("layout", "matrix")

    def __init__(self, layout, matrix, check: bool = True):
        layout = _as_layout(layout)
        matrix = np.array(matrix, dtype=complex)
        if matrix.shape != (layout.dim, layout.dim):
            raise LayoutMismatch(
                f"matrix shape {matrix.shape} does not match layout dimension {layout.dim}"
            )
        matrix.setflags(write=False)
        object.__setattr__(self, "layout", layout)
        object.__setattr__(self, "matrix", matrix)
        if check:
            self.validate()

    def __setattr__(self, name, value):
        raise AttributeError("LabeledState is immutable")

    def __repr__(self):
        return f"LabeledState({list(self.layout.factors)}, trace={self.trace():.6g})"

    @property
    def labels(self) -> tuple[str, ...]:
        return self.layout.labels

    @property
    def dims(self) -> tuple[int, ...]:
        return self.layout.dims

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def eigvals(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def validate(self):
        m = self.matrix
        herm = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
        if herm > TOL_HERM:
            raise InvalidState(f"matrix not Hermitian (residual {herm:.3g})")
        tr = np.trace(m)
        if abs(tr - 1) > TOL_TRACE:
            raise InvalidState(f"trace {tr.real:.12g} differs from 1")
        lam = np.linalg.eigvalsh(m)
        if lam[0] < -TOL_PSD:
            raise InvalidState(f"negative eigenvalue {lam[0]:.3g}")

    def relabel(self, mapping: dict[str, str]) -> "LabeledState":
        return LabeledState(self.layout.relabel(mapping), self.matrix, check=False)


class PureState:
    """Unit vector over a :class:`FactorLayout`."""

    __slots__ = ("layout", "vector")

    def __init__(self, layout, vector, check: bool = True):
        layout = _as_layout(layout)
        vector = np.array(vector, dtype=complex).reshape(-1)
        if vector.shape != (layout.dim,):
            raise LayoutMismatch(
                f"vector length {vector.size} does not match layout dimension {layout.dim}"
            )
        if check and abs(np.linalg.norm(vector) - 1) > TOL_NORM:
            raise InvalidState(f"vector norm {np.linalg.norm(vector):.12g} differs from 1")
        vector.setflags(write=False)
        object.__setattr__(self, "layout", layout)
        object.__setattr__(self, "vector", vector)

    def __setattr__(self, name, value):
        raise AttributeError("PureState is immutable")

    def __repr__(self):
        return f"PureState({list(self.layout.factors)})"

    @property
    def labels(self) -> tuple[str, ...]:
        return self.layout.labels

    def density(self) -> LabeledState:
        v = self.vector
        return LabeledState(self.layout, np.outer(v, v.conj()), check=False)

    def relabel(self, mapping: dict[str, str]) -> "PureState":
        return PureState(self.layout.relabel(mapping), self.vector, check=False)


def as_density(s) -> LabeledState:
    return s.density() if isinstance(s, PureState) else s


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Probability-weighted list of states, ``{p(x), state_x}``."""

    probs: tuple[float, ...]
    states: tuple

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float).reshape(-1)
        states = tuple(self.states)
        if len(probs) != len(states) or len(states) == 0:
            raise BadDistribution("need one probability per state and at least one state")
        if np.any(probs < -TOL_PROB) or abs(probs.sum() - 1) > TOL_PROB:
            raise BadDistribution(f"probabilities {probs.tolist()} are not a distribution")
        layouts = {s.layout for s in states}
        if len(layouts) != 1:
            raise LayoutMismatch("ensemble members must share one layout")
        object.__setattr__(self, "probs", tuple(float(p) for p in np.clip(probs, 0, None)))
        object.__setattr__(self, "states", states)

    def __len__(self):
        return len(self.states)

    def __iter__(self):
        return iter(zip(self.probs, self.states))

    @property
    def layout(self) -> FactorLayout:
        return self.states[0].layout


def tensor(a, b):
    """Tensor product; the layout of ``a`` comes first.

    Works on two :class:`LabeledState` or two :class:`PureState` objects.
    """
    layout = a.layout.concat(b.layout)
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(layout, np.kron(a.vector, b.vector), check=False)
    a, b = as_density(a), as_density(b)
    return LabeledState(layout, np.kron(a.matrix, b.matrix), check=False)


def partial_trace(s, keep: Iterable[str]) -> LabeledState:
    """Reduced state on ``keep``, retaining the original factor order."""
    s = as_density(s)
    keep = set(_check_labels(s.layout, keep))
    labels, dims = s.layout.labels, s.layout.dims
    n = len(dims)
    kept = [i for i, label in enumerate(labels) if label in keep]
    if len(kept) == n:
        return s
    traced = [i for i in range(n) if i not in kept]
    dk = math.prod(dims[i] for i in kept)
    dt = math.prod(dims[i] for i in traced)
    t = s.matrix.reshape(dims + dims)
    t = t.transpose(kept + traced + [n + i for i in kept] + [n + i for i in traced])
    out = np.einsum("ijkj->ik", t.reshape(dk, dt, dk, dt))
    layout = FactorLayout(tuple(s.layout.factors[i] for i in kept))
    return LabeledState(layout, out, check=False)


def permute_factors(s, new_order: Sequence[str]):
    """Reorder tensor factors.  Accepts pure or mixed states."""
    new_order = list(new_order)
    labels = s.layout.labels
    if sorted(new_order) != sorted(labels) or len(set(new_order)) != len(new_order):
        raise BadPermutation(f"{new_order} is not a permutation of {list(labels)}")
    perm = [labels.index(label) for label in new_order]
    layout = FactorLayout(tuple(s.layout.factors[i] for i in perm))
    dims = s.layout.dims
    if isinstance(s, PureState):
        v = s.vector.reshape(dims).transpose(perm).reshape(-1)
        return PureState(layout, v, check=False)
    n = len(dims)
    t = s.matrix.reshape(dims + dims).transpose(perm + [n + i for i in perm])
    return LabeledState(layout, t.reshape(layout.dim, layout.dim), check=False)


def purify(rho: LabeledState, ref_label: str) -> PureState:
    """Purification on ``(ref_label, *rho.labels)``.

    The reference has the full dimension of ``rho``; eigenvalues are sorted in
    decreasing order so a rank-one input gives ``|0> (x) phi``.
    """
    rho = as_density(rho)
    if ref_label in rho.layout:
        raise DuplicateLabel(f"reference label {ref_label!r} already in use")
    d = rho.layout.dim
    lam, vecs = np.linalg.eigh(rho.matrix)
    order = np.argsort(lam)[::-1]
    lam = np.clip(lam[order], 0, None)
    vecs = vecs[:, order]
    # psi[r, i] = sqrt(lam_r) * vecs[i, r]
    psi = (np.sqrt(lam)[:, None] * vecs.T).reshape(-1)
    psi = psi / np.linalg.norm(psi)
    layout = FactorLayout(((ref_label, d),)).concat(rho.layout)
    return PureState(layout, psi, check=False)


def _support(m: np.ndarray, floor: float = 1e-14):
    """Eigenvectors of ``m`` with eigenvalue above ``floor``, scaled by the square roots."""
    lam, vecs = np.linalg.eigh(m)
    keep = lam > floor
    return vecs[:, keep] * np.sqrt(lam[keep])


def fidelity(rho, sigma) -> float:
    """``(tr sqrt(sqrt(rho) sigma sqrt(rho)))**2``, clipped to [0, 1].

    The inner matrix is formed on the support of the lower-rank argument, so
    numerically-zero eigenvalues are never square-rooted.
    """
    rho, sigma = as_density(rho), as_density(sigma)
    if rho.layout != sigma.layout:
        raise LayoutMismatch(f"{rho.layout.factors} vs {sigma.layout.factors}")
    a, b = _support(rho.matrix), _support(sigma.matrix)
    if a.shape[1] > b.shape[1]:
        a, b = b, a
    # sqrt(rho) sigma sqrt(rho) has the nonzero spectrum of (a^+ b)(a^+ b)^+
    s = np.linalg.svd(a.conj().T @ b, compute_uv=False)
    f = float(np.sum(s) ** 2)
    return min(max(f, 0.0), 1.0)


def maximally_entangled(dim: int, labels: tuple[str, str] = ("A", "B")) -> PureState:
    """``sum_b |b>|b> / sqrt(dim)`` on two factors of dimension ``dim``."""
    if dim < 1:
        raise InvalidState("dimension must be positive")
    v = np.eye(dim, dtype=complex).reshape(-1) / math.sqrt(dim)
    return PureState(FactorLayout(((labels[0], dim), (labels[1], dim))), v, check=False)


def basis_state(layout, index: int | Sequence[int]) -> PureState:
    """Computational basis vector; ``index`` is flat or one index per factor."""
    layout = _as_layout(layout)
    if not isinstance(index, (int, np.integer)):
        index = int(np.ravel_multi_index(tuple(index), layout.dims))
    v = np.zeros(layout.dim, dtype=complex)
    v[index] = 1
    return PureState(layout, v, check=False)


def maximally_mixed(layout) -> LabeledState:
    layout = _as_layout(layout)
    return LabeledState(layout, np.eye(layout.dim) / layout.dim, check=False)


def cq_state(ensemble: Ensemble, classical_label: str = "X") -> LabeledState:
    """Block-diagonal ``sum_x p(x) |x><x| (x) sigma_x`` with the classical factor first."""
    layout = FactorLayout(((classical_label, len(ensemble)),)).concat(ensemble.layout)
    d = ensemble.layout.dim
    out = np.zeros((layout.dim, layout.dim), dtype=complex)
    for x, (p, s) in enumerate(ensemble):
        out[x * d:(x + 1) * d, x * d:(x + 1) * d] = p * as_density(s).matrix
    return LabeledState(layout, out, check=False)


def bell_state(sign: int = +1, labels: tuple[str, str] = ("A", "B")) -> PureState:
    """``(|00> + sign |11>) / sqrt(2)``."""
    v = np.array([1, 0, 0, sign], dtype=complex) / math.sqrt(2)
    return PureState(FactorLayout(((labels[0], 2), (labels[1], 2))), v, check=False)


def _matrix_to_json(m: np.ndarray) -> dict:
    return {"re": np.real(m).tolist(), "im": np.imag(m).tolist()}


def _matrix_from_json(obj: dict, what: str) -> np.ndarray:
    try:
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{what}: expected numeric 're'/'im' arrays ({exc})") from None
    if re.shape != im.shape:
        raise ParseError(f"{what}: 're' and 'im' shapes differ")
    return re + 1j * im


def layout_to_json(layout: FactorLayout) -> list[dict]:
    return [{"label": label, "dim": dim} for label, dim in layout.factors]


def layout_from_json(items) -> FactorLayout:
    try:
        return FactorLayout(tuple((f["label"], int(f["dim"])) for f in items))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad factor list: {exc}") from None


def state_to_dict(s) -> dict:
    s = as_density(s)
    return {"factors": layout_to_json(s.layout), **_matrix_to_json(s.matrix)}


def state_from_dict(obj: dict) -> LabeledState:
    """Inverse of :func:`state_to_dict`.  A 1-D ``re``/``im`` pair is read as a pure vector."""
    if not isinstance(obj, dict) or "factors" not in obj:
        raise ParseError("state object needs 'factors', 're' and 'im'")
    layout = layout_from_json(obj["factors"])
    m = _matrix_from_json(obj, "state")
    if m.ndim == 1:
        return PureState(layout, m).density()
    return LabeledState(layout, m)


def save_state(s, path):
    with open(path, "w") as fh:
        json.dump(state_to_dict(s), fh)


def load_state(path) -> LabeledState:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from None
    return state_from_dict(obj)
