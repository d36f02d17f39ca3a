"""Entropic functionals, all in bits.

Subsystems are given as iterables of factor labels.  A conditioning system in
:func:`conditional_coherent_information` may span several labels (``{"X", "Y"}``).
"""

from __future__ import annotations

import math
from typing import Iterable

import numpy as np

from .channel import KrausChannel, apply
from .errors import BadProbability, DimMismatch, NotClassicalConditioner, OverlappingSubsystems
from .state import LabeledState, _check_labels, as_density, partial_trace, permute_factors, purify

EIG_FLOOR = 1e-12
TOL_ENTROPIC = 1e-7
TOL_CQ = 1e-9


def spectrum_entropy(eigs) -> float:
    """Shannon entropy of a spectrum; entries at or below ``EIG_FLOOR`` count as zero."""
    lam = np.asarray(eigs, dtype=float)
    lam = lam[lam > EIG_FLOOR]
    return float(max(-np.sum(lam * np.log2(lam)), 0.0))


def matrix_entropy(m: np.ndarray) -> float:
    return spectrum_entropy(np.linalg.eigvalsh(m))


def _labels(s, subsystem) -> list[str]:
    if isinstance(subsystem, str):
        subsystem = [subsystem]
    return _check_labels(s.layout, subsystem)


def entropy(s, subsystem: Iterable[str] | None = None) -> float:
    """Von Neumann entropy ``-tr rho log2 rho`` of the reduced state on ``subsystem``.

    ``subsystem=None`` means the whole state; an empty subsystem has entropy 0.
    """
    s = as_density(s)
    labels = s.layout.labels if subsystem is None else _labels(s, subsystem)
    if not labels:
        return 0.0
    return matrix_entropy(partial_trace(s, labels).matrix)


def binary_entropy(p: float) -> float:
    p = float(p)
    if not 0 <= p <= 1 or math.isnan(p):
        raise BadProbability(f"p = {p} is not a probability")
    if p == 0 or p == 1:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def _disjoint(s, *groups) -> list[list[str]]:
    out = [_labels(s, g) for g in groups]
    seen: set[str] = set()
    for g in out:
        if seen & set(g):
            raise OverlappingSubsystems(f"subsystems overlap on {sorted(seen & set(g))}")
        seen |= set(g)
    return out


def mutual_information(s, X, B) -> float:
    """``I(X;B) = H(X) + H(B) - H(XB)``."""
    s = as_density(s)
    X, B = _disjoint(s, X, B)
    return entropy(s, X) + entropy(s, B) - entropy(s, X + B)


def conditional_mutual_information(s, X, B, Z) -> float:
    """``I(X;B|Z) = H(XZ) + H(BZ) - H(Z) - H(XBZ)``."""
    s = as_density(s)
    X, B, Z = _disjoint(s, X, B, Z)
    return entropy(s, X + Z) + entropy(s, B + Z) - entropy(s, Z) - entropy(s, X + B + Z)


def coherent_information(s, A, B) -> float:
    """``I_c(A>B) = H(B) - H(AB)``."""
    s = as_density(s)
    A, B = _disjoint(s, A, B)
    return entropy(s, B) - entropy(s, A + B)


def channel_coherent_information(rho, ch: KrausChannel, ref_label: str = "R") -> float:
    """``I_c(rho, N) = H(N(rho)) - H((1 (x) N)(Phi_rho))`` for a purification ``Phi_rho``."""
    rho = as_density(rho)
    if rho.layout.dims != ch.in_layout.dims:
        raise DimMismatch(f"state dims {rho.layout.dims} vs channel input {ch.in_layout.dims}")
    while ref_label in rho.layout or ref_label in ch.out_layout:
        ref_label += "'"
    phi = purify(rho, ref_label)
    out = apply(ch, phi, list(rho.layout.labels))
    return coherent_information(out, [ref_label], list(ch.out_layout.labels))


def classicality_residual(s, X) -> float:
    """Largest off-diagonal-block entry of ``s`` with respect to the factors ``X``."""
    s = as_density(s)
    X = _labels(s, X)
    rest = [label for label in s.layout.labels if label not in X]
    t = permute_factors(s, X + rest)
    dx = s.layout.dim_of(X)
    dr = t.layout.dim // dx
    blocks = t.matrix.reshape(dx, dr, dx, dr)
    mask = ~np.eye(dx, dtype=bool)
    if not mask.any():
        return 0.0
    return float(np.max(np.abs(blocks.transpose(0, 2, 1, 3)[mask])))


def conditional_coherent_information(s, A, B, X) -> float:
    """``I_c(A>BX) = H(BX) - H(ABX)`` with ``X`` required to be classical.

    For a block-diagonal state this equals ``sum_x p(x) I_c(A>B)`` on the branches.
    """
    s = as_density(s)
    A, B, X = _disjoint(s, A, B, X)
    reduced = partial_trace(s, A + B + X)
    res = classicality_residual(reduced, X)
    if res > TOL_CQ:
        raise NotClassicalConditioner(f"off-diagonal blocks of {X} reach {res:.3g}")
    return entropy(reduced, B + X) - entropy(reduced, A + B + X)


def branch_states(s: LabeledState, X) -> list[tuple[float, LabeledState]]:
    """Split a state that is block diagonal in ``X`` into ``(p(x), normalized branch)`` pairs."""
    s = as_density(s)
    X = _labels(s, X)
    rest = [label for label in s.layout.labels if label not in X]
    t = permute_factors(s, X + rest)
    dx = s.layout.dim_of(X)
    dr = t.layout.dim // dx
    blocks = t.matrix.reshape(dx, dr, dx, dr)
    layout = partial_trace(t, rest).layout
    out = []
    for x in range(dx):
        b = blocks[x, :, x, :]
        p = float(np.trace(b).real)
        if p > EIG_FLOOR:
            out.append((p, LabeledState(layout, b / p, check=False)))
    return out
