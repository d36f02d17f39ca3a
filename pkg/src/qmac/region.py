"""Rate-region bounds for two-sender channels, plus the 2-D geometry they feed.

Channel convention: a multiple-access channel is a :class:`KrausChannel` whose
input layout has exactly two factors, Alice's first and Bob's second.  With
``k`` copies the joint input is ordered copy by copy.

Input convention: a bipartite input ``|Psi>`` on ``(purifier, channel part)``
is a :class:`PureState` whose first factor is the purifier (its dimension may
be 1) and whose remaining factors span ``d**k`` dimensions, copy 1 most
significant.  Ensemble members for classical senders carry no purifier.

Every bound record stores its values clamped at zero (rates are nonnegative);
the signed values are kept in ``provenance["raw"]``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .channel import KrausChannel, apply, tensor_power
from .entropic import (
    TOL_ENTROPIC,
    coherent_information,
    conditional_coherent_information,
    conditional_mutual_information,
    mutual_information,
)
from .errors import DimMismatch, InvariantViolation
from .state import Ensemble, FactorLayout, LabeledState, PureState, cq_state, tensor

TOL_GEOM = 1e-7


class CardinalityWarning(UserWarning):
    """An ensemble is larger than the size known to suffice."""


# --------------------------------------------------------------------------- bounds


@dataclass(frozen=True)
class RectBound2:
    r_max: float
    q_max: float
    provenance: dict = field(default_factory=dict, compare=False)

    kind = "rectangle"

    @property
    def bounds(self) -> list[float]:
        return [self.r_max, self.q_max]


@dataclass(frozen=True)
class PentBound2:
    """``x <= a_max, y <= b_max, x + y <= sum_max``."""

    a_max: float
    b_max: float
    sum_max: float
    provenance: dict = field(default_factory=dict, compare=False)

    kind = "pentagon"

    def __post_init__(self):
        if self.a_max + self.b_max < self.sum_max - TOL_ENTROPIC:
            raise InvariantViolation(
                f"pentagon bounds a+b={self.a_max + self.b_max:.12g} below sum {self.sum_max:.12g}")

    @property
    def bounds(self) -> list[float]:
        return [self.a_max, self.b_max, self.sum_max]


@dataclass(frozen=True)
class SixBound4:
    ra_max: float
    rb_max: float
    rab_max: float
    qa_max: float
    qb_max: float
    qab_max: float
    provenance: dict = field(default_factory=dict, compare=False)

    kind = "six"

    @property
    def bounds(self) -> list[float]:
        return [self.ra_max, self.rb_max, self.rab_max, self.qa_max, self.qb_max, self.qab_max]


def _clamp(values):
    return [max(float(v), 0.0) for v in values]


# --------------------------------------------------------------------------- state construction


@dataclass(frozen=True)
class _MacCopies:
    channel: KrausChannel
    alice: tuple[str, ...]
    bob: tuple[str, ...]
    outputs: tuple[str, ...]
    d_alice: int
    d_bob: int
    d_out: int


def _mac_copies(ch: KrausChannel, k: int) -> _MacCopies:
    if len(ch.in_layout) != 2:
        raise DimMismatch("a multiple-access channel needs exactly two input factors (Alice, Bob)")
    (la, da), (lb, db) = ch.in_layout.factors
    base = ch.relabel({la: "a'", lb: "b'"}, {label: f"C:{label}" for label in ch.out_layout.labels})
    power = tensor_power(base, k)
    if k == 1:
        alice, bob = ("a'",), ("b'",)
    else:
        alice = tuple(f"a'_{j}" for j in range(1, k + 1))
        bob = tuple(f"b'_{j}" for j in range(1, k + 1))
    return _MacCopies(power, alice, bob, power.out_layout.labels, da, db, ch.out_layout.dim)


def _as_input(psi: PureState, purifier: str | None, labels: Sequence[str], d: int,
              who: str) -> PureState:
    k = len(labels)
    v = np.asarray(psi.vector)
    if purifier is None:
        if v.size != d ** k:
            raise DimMismatch(f"{who} state has dimension {v.size}, expected {d}^{k}")
        factors = tuple((label, d) for label in labels)
    else:
        dp = psi.layout.dims[0]
        if v.size != dp * d ** k:
            raise DimMismatch(
                f"{who} input has channel part of dimension {v.size // dp}, expected {d}^{k}")
        factors = ((purifier, dp),) + tuple((label, d) for label in labels)
    return PureState(FactorLayout(factors), v, check=False)


def _output(mac: _MacCopies, joint: PureState) -> LabeledState:
    targets = [label for pair in zip(mac.alice, mac.bob) for label in pair]
    return apply(mac.channel, joint, targets)


def qq_state(ch: KrausChannel, k: int, alice_input: PureState, bob_input: PureState) -> LabeledState:
    """``N^{(x)k}(Psi_1 (x) Psi_2)`` on purifiers ``A``, ``B`` and the outputs."""
    mac = _mac_copies(ch, k)
    a = _as_input(alice_input, "A", mac.alice, mac.d_alice, "Alice")
    b = _as_input(bob_input, "B", mac.bob, mac.d_bob, "Bob")
    return _output(mac, tensor(a, b))


def cq_state_for(ch: KrausChannel, k: int, ensemble: Ensemble, bob_input: PureState) -> LabeledState:
    """``sum_x p_x |x><x| (x) N^{(x)k}(phi_x (x) Psi)`` with classical factor ``X``."""
    mac = _mac_copies(ch, k)
    bound = max(mac.d_alice, ch.out_layout.dim) ** (2 * k)
    if len(ensemble) > bound:
        warnings.warn(f"ensemble of {len(ensemble)} exceeds max{{|A'|,|C|}}^(2k) = {bound}",
                      CardinalityWarning, stacklevel=3)
    b = _as_input(bob_input, "B", mac.bob, mac.d_bob, "Bob")
    branches = [_output(mac, tensor(_as_input(phi, None, mac.alice, mac.d_alice, "Alice"), b))
                for _, phi in ensemble]
    return cq_state(Ensemble(ensemble.probs, branches), "X")


def full_state(ch: KrausChannel, k: int, alice_ens: Ensemble, bob_ens: Ensemble) -> LabeledState:
    """``sum_{x,y} p(x) p(y) |x><x| (x) |y><y| (x) N^{(x)k}(psi_x (x) phi_y)`` on ``X, Y, ...``."""
    mac = _mac_copies(ch, k)
    nx, ny = len(alice_ens), len(bob_ens)
    for n, d, who in ((nx, mac.d_alice, "X"), (ny, mac.d_bob, "Y")):
        bound = min(d, ch.out_layout.dim) ** (2 * k)
        if n > bound:
            warnings.warn(f"|{who}| = {n} exceeds min{{|in|,|C|}}^(2k) = {bound}",
                          CardinalityWarning, stacklevel=3)
    probs, branches = [], []
    for px, psi in alice_ens:
        a = _as_input(psi, "A", mac.alice, mac.d_alice, "Alice")
        for py, phi in bob_ens:
            b = _as_input(phi, "B", mac.bob, mac.d_bob, "Bob")
            probs.append(px * py)
            branches.append(_output(mac, tensor(a, b)))
    joint = cq_state(Ensemble(probs, branches), "XY")
    rest = joint.layout.factors[1:]
    layout = FactorLayout((("X", nx), ("Y", ny)) + rest)
    return LabeledState(layout, joint.matrix, check=False)


def _outputs_of(s: LabeledState) -> list[str]:
    return [label for label in s.layout.labels if label.startswith("C:")]


# --------------------------------------------------------------------------- evaluators


def cq_rectangle(ch: KrausChannel, k: int, ensemble: Ensemble, bob_input: PureState) -> RectBound2:
    """Classical Alice / quantum Bob rectangle ``(I(X;C^k)/k, I_c(B>C^k X)/k)``."""
    w = cq_state_for(ch, k, ensemble, bob_input)
    C = _outputs_of(w)
    r = mutual_information(w, ["X"], C) / k
    q = conditional_coherent_information(w, ["B"], C, ["X"]) / k
    return RectBound2(*_clamp([r, q]), provenance={"raw": [r, q], "k": k, "form": "cq"})


def cq_pentagon(ch: KrausChannel, k: int, ensemble: Ensemble, bob_input: PureState) -> PentBound2:
    """Pentagon with ``R <= I(X;BC^k)/k``, ``Q <= I_c(B>C^k X)/k`` and the sum bound
    ``[I(X;C^k) + I_c(B>C^k X)]/k``, checked against ``[I(X;BC^k) + I_c(B>C^k)]/k``.
    """
    w = cq_state_for(ch, k, ensemble, bob_input)
    C = _outputs_of(w)
    i_x_bc = mutual_information(w, ["X"], ["B"] + C)
    i_x_c = mutual_information(w, ["X"], C)
    q_cx = conditional_coherent_information(w, ["B"], C, ["X"])
    q_c = coherent_information(w, ["B"], C)
    s1, s2 = i_x_c + q_cx, i_x_bc + q_c
    if abs(s1 - s2) > TOL_ENTROPIC:
        raise InvariantViolation(f"sum-rate expressions disagree: {s1:.12g} vs {s2:.12g}")
    raw = [i_x_bc / k, q_cx / k, s1 / k]
    prov = {"raw": raw, "k": k, "form": "cq",
            "corner": [i_x_bc / k, q_c / k], "sum_alt": s2 / k}
    return PentBound2(*_clamp(raw), provenance=prov)


def qq_pentagon(ch: KrausChannel, k: int, alice_input: PureState, bob_input: PureState) -> PentBound2:
    """``(I_c(A>BC^k), I_c(B>AC^k), I_c(AB>C^k)) / k``."""
    w = qq_state(ch, k, alice_input, bob_input)
    C = _outputs_of(w)
    raw = [coherent_information(w, ["A"], ["B"] + C) / k,
           coherent_information(w, ["B"], ["A"] + C) / k,
           coherent_information(w, ["A", "B"], C) / k]
    return PentBound2(*_clamp(raw), provenance={"raw": raw, "k": k, "form": "qq"})


def qq_rectangle(ch: KrausChannel, k: int, alice_input: PureState, bob_input: PureState) -> RectBound2:
    """The superseded rectangle ``(I_c(A>C^k)/k, I_c(B>C^k)/k)``."""
    w = qq_state(ch, k, alice_input, bob_input)
    C = _outputs_of(w)
    raw = [coherent_information(w, ["A"], C) / k, coherent_information(w, ["B"], C) / k]
    return RectBound2(*_clamp(raw), provenance={"raw": raw, "k": k, "form": "qq"})


def full_region_bounds(ch: KrausChannel, k: int, alice_ens: Ensemble, bob_ens: Ensemble) -> SixBound4:
    """The six bounds on ``(R_a, R_b, Q_a, Q_b)``, each divided by ``k``."""
    w = full_state(ch, k, alice_ens, bob_ens)
    C = _outputs_of(w)
    raw = [conditional_mutual_information(w, ["X"], C, ["Y"]) / k,
           conditional_mutual_information(w, ["Y"], C, ["X"]) / k,
           mutual_information(w, ["X", "Y"], C) / k,
           conditional_coherent_information(w, ["A"], C + ["B"], ["X", "Y"]) / k,
           conditional_coherent_information(w, ["B"], C + ["A"], ["X", "Y"]) / k,
           conditional_coherent_information(w, ["A", "B"], C, ["X", "Y"]) / k]
    if not all(math.isfinite(v) for v in raw):
        raise InvariantViolation(f"non-finite bound in {raw}")
    return SixBound4(*_clamp(raw), provenance={"raw": raw, "k": k})


# --------------------------------------------------------------------------- geometry


def rect_corners(r: float, q: float) -> list[tuple[float, float]]:
    r, q = max(r, 0.0), max(q, 0.0)
    return _dedupe([(0.0, 0.0), (r, 0.0), (0.0, q), (r, q)])


def pent_corners(a: float, b: float, s: float) -> list[tuple[float, float]]:
    """Vertices of ``{x, y >= 0, x <= a, y <= b, x + y <= s}``."""
    a, b, s = max(a, 0.0), max(b, 0.0), max(s, 0.0)
    x1 = min(a, s)
    y1 = min(b, s - x1)
    y2 = min(b, s)
    x2 = min(a, s - y2)
    return _dedupe([(0.0, 0.0), (x1, 0.0), (x1, y1), (x2, y2), (0.0, y2)])


def corners(bound) -> list[tuple]:
    if isinstance(bound, RectBound2):
        return rect_corners(bound.r_max, bound.q_max)
    if isinstance(bound, PentBound2):
        return pent_corners(bound.a_max, bound.b_max, bound.sum_max)
    if isinstance(bound, SixBound4):
        rs = pent_corners(bound.ra_max, bound.rb_max, bound.rab_max)
        qs = pent_corners(bound.qa_max, bound.qb_max, bound.qab_max)
        return [r + q for r in rs for q in qs]
    raise TypeError(f"not a bound record: {bound!r}")


def _dedupe(points, tol: float = TOL_GEOM) -> list[tuple]:
    out: list[tuple] = []
    for p in points:
        if all(max(abs(u - v) for u, v in zip(p, q)) > tol for q in out):
            out.append(tuple(float(u) for u in p))
    return out


def _key(p, tol=TOL_GEOM):
    return tuple(round(u / tol) for u in p)


@dataclass(frozen=True)
class RegionCloud:
    """Achievable corner points with the bound records that generated them.

    The origin is always present.  ``axes`` names the coordinates for export.
    """

    k: int = 1
    axes: tuple[str, ...] = ("x", "y")
    points: tuple[tuple, ...] = ((0.0, 0.0),)
    generators: tuple = ()
    channel: str = ""

    @property
    def hull2d(self) -> list[tuple[float, float]]:
        if len(self.axes) != 2:
            raise ValueError("hulls are only computed for 2-D regions")
        return hull_2d(self.points)

    def support(self, direction) -> float:
        """``max_p <direction, p>`` over the cloud (equal to the support of its hull)."""
        u = np.asarray(direction, dtype=float)
        return float(np.max(np.asarray(self.points) @ u))


def empty_cloud(k: int = 1, axes=("x", "y"), channel: str = "") -> RegionCloud:
    return RegionCloud(k=k, axes=tuple(axes), points=(tuple(0.0 for _ in axes),), channel=channel)


def accumulate(cloud: RegionCloud, bound) -> RegionCloud:
    """New cloud with the (clamped) polygon vertices of ``bound`` added."""
    seen = {_key(p) for p in cloud.points}
    new = list(cloud.points)
    for p in corners(bound):
        if len(p) != len(cloud.axes):
            raise ValueError(f"{len(p)}-D corner does not fit a {len(cloud.axes)}-D cloud")
        key = _key(p)
        if key not in seen:
            seen.add(key)
            new.append(p)
    return replace(cloud, points=tuple(new), generators=cloud.generators + (bound,))


def merge(*clouds: RegionCloud) -> RegionCloud:
    out = clouds[0]
    for c in clouds[1:]:
        for g in c.generators:
            out = accumulate(out, g)
    return out


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def hull_2d(points, tol: float = TOL_GEOM) -> list[tuple[float, float]]:
    """Convex hull by monotone chain, counterclockwise from the lowest-x point.

    Vertices within ``tol`` of the line through their neighbours are dropped.
    """
    unique: dict = {}
    for p in points:
        q = (float(p[0]), float(p[1]))
        unique.setdefault(_key(q, tol), q)
    pts = sorted(unique.values())
    if len(pts) <= 1:
        return pts

    def chain(seq):
        h: list[tuple[float, float]] = []
        for p in seq:
            while len(h) >= 2:
                # drop h[-1] when it turns right, or lies within tol of the chord h[-2] -> p
                cross = _cross(h[-2], h[-1], p)
                cx, cy = p[0] - h[-2][0], p[1] - h[-2][1]
                along = (h[-1][0] - h[-2][0]) * cx + (h[-1][1] - h[-2][1]) * cy
                inside = 0 <= along <= cx * cx + cy * cy
                if cross < 0 or (inside and cross <= tol * math.hypot(cx, cy)):
                    h.pop()
                else:
                    break
            h.append(p)
        return h

    lower, upper = chain(pts), chain(reversed(pts))
    hull = lower[:-1] + upper[:-1]
    if len(hull) == 2 and math.dist(hull[0], hull[1]) <= tol:
        return hull[:1]
    return hull


def _segment_distance(p, a, b) -> float:
    ab = (b[0] - a[0], b[1] - a[1])
    L2 = ab[0] ** 2 + ab[1] ** 2
    t = 0.0 if L2 == 0 else max(0.0, min(1.0, ((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / L2))
    return math.hypot(p[0] - a[0] - t * ab[0], p[1] - a[1] - t * ab[1])


def distance_to_hull(hull: Sequence, point) -> float:
    """Euclidean distance from ``point`` to a convex CCW polygon (0 inside)."""
    hull = [tuple(v) for v in hull]
    if len(hull) == 1:
        return math.dist(hull[0], point)
    if len(hull) == 2:
        return _segment_distance(point, hull[0], hull[1])
    n = len(hull)
    if all(_cross(hull[i], hull[(i + 1) % n], point) >= 0 for i in range(n)):
        return 0.0
    return min(_segment_distance(point, hull[i], hull[(i + 1) % n]) for i in range(n))


def contains(region, point, tol: float = TOL_GEOM) -> bool:
    """True when ``point`` lies within ``tol`` of the hull of ``region``.

    ``region`` is a :class:`RegionCloud` or an already computed hull.
    """
    hull = region.hull2d if isinstance(region, RegionCloud) else region
    return distance_to_hull(hull, point) <= tol


def hausdorff(hull_a: Sequence, hull_b: Sequence) -> float:
    """Hausdorff distance between two convex polygons (exact: attained at vertices)."""
    da = max(distance_to_hull(hull_b, v) for v in hull_a)
    db = max(distance_to_hull(hull_a, v) for v in hull_b)
    return max(da, db)


def pentagon_hull(a: float, b: float, s: float) -> list[tuple[float, float]]:
    return hull_2d(pent_corners(a, b, s))


# --------------------------------------------------------------------------- export


def generator_record(bound) -> dict:
    rec = {"type": bound.kind, "bounds": list(bound.bounds)}
    rec["input_seed"] = bound.provenance.get("seed")
    return rec


def region_to_dict(cloud: RegionCloud) -> dict:
    out = {"k": cloud.k, "channel": cloud.channel, "axes": list(cloud.axes),
           "points": [list(p) for p in cloud.points]}
    out["hull"] = [list(p) for p in cloud.hull2d] if len(cloud.axes) == 2 else None
    out["generators"] = [generator_record(g) for g in cloud.generators]
    return out
