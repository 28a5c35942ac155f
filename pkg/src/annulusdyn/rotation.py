"""Rotation quantities: periodic orbits, chain-class intervals, end estimates.

The rotation interval of a recurrent chain class is computed from extremal
cycle means of the class subgraph: ergodic extremal invariant measures
correspond to (limits of) weighted cycles, so minimum/maximum cycle means
are the natural finite analog, with discretization slack of order
(eps + boxdiam) * Lipschitz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import _graph
from .annulus import (AnnulusMap, Basin, LiftPoint, annulus_dist, classify_basin,
                      lift_of, project)
from .conley import BoxDigraph, ChainClass, transition_graph
from .errors import NotInBasinError, NotLiftedError, NotPeriodicError, OutOfDomainError

# Karp stays exact but needs O(n^2) memory; beyond this node count the
# policy-iteration solver takes over (cross-validated in the test suite).
KARP_NODE_LIMIT = 3000


@dataclass(frozen=True)
class RationalRot:
    """Rational rotation number p/q, deliberately unreduced."""

    p: int
    q: int

    @property
    def value(self) -> float:
        return self.p / self.q

    def reduced(self) -> Fraction:
        return Fraction(self.p, self.q)

    def __str__(self):
        return f"{self.p}/{self.q}"


@dataclass(frozen=True)
class RotationInterval:
    lo: float
    hi: float
    method: str = "cycle-mean"

    def __post_init__(self):
        if self.lo > self.hi + 1e-15:
            raise ValueError("lo must not exceed hi")

    def contains(self, other: "RotationInterval | tuple", slack: float = 0.0) -> bool:
        lo, hi = (other.lo, other.hi) if isinstance(other, RotationInterval) else other
        return self.lo <= lo + slack and hi - slack <= self.hi

    def within(self, lo: float, hi: float) -> bool:
        return lo <= self.lo and self.hi <= hi


def rotation_of_periodic(m: AnnulusMap, point, q: int, tol: float = 1e-6) -> RationalRot:
    """Rotation number p/q of a period-q point via its lift displacement.

    Checks h^q(z) = z within tol on the annulus, reads the integer deck
    shift p from the lift (h~^q(z~) = T^p(z~)), and returns p/q unreduced.
    Exact inputs (Fractions, on maps that support them) take the exact path
    with zero tolerance.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    z = LiftPoint(*point)
    exact = isinstance(z.x, Fraction)
    w = z
    for _ in range(q):
        w = m.lift_eval(w)
    if exact:
        delta = Fraction(w.x - z.x)
        if w.t != z.t or delta.denominator != 1:
            raise NotPeriodicError(f"{point} is not exactly q={q} periodic")
        return RationalRot(int(delta), q)
    if annulus_dist(project(w), project(z)) > tol:
        raise NotPeriodicError(
            f"h^{q} moves {point} by {annulus_dist(project(w), project(z)):.3e} > tol")
    delta = w.x - z.x
    p = round(delta)
    if abs(delta - p) > tol:
        raise NotLiftedError(f"lift displacement {delta} is not near an integer")
    return RationalRot(int(p), q)


def _subgraph_csr(dg: BoxDigraph, nodes: np.ndarray):
    """Induced subgraph on `nodes` (sorted), local ids, CSR + weights."""
    nodes = np.asarray(nodes, np.int64)
    nodes.sort()
    local = -np.ones(dg.n_nodes, np.int64)
    local[nodes] = np.arange(len(nodes))
    src = dg.edge_sources().astype(np.int64)
    dst = dg.indices.astype(np.int64)
    keep = (local[src] >= 0) & (local[dst] >= 0)
    lu = local[src[keep]]
    lv = local[dst[keep]]
    w = dg.weights[keep]
    order = np.argsort(lu, kind="stable")
    lu, lv, w = lu[order], lv[order], w[order]
    indptr = np.zeros(len(nodes) + 1, np.int64)
    np.cumsum(np.bincount(lu, minlength=len(nodes)), out=indptr[1:])
    return indptr, lv.astype(np.int64), w


def _min_mean(indptr, indices, weights, n) -> float:
    if indptr[-1] == 0:
        raise ValueError("subgraph has no edges")
    if n <= KARP_NODE_LIMIT:
        return float(_graph.karp_min_mean(indptr, indices, weights, n))
    mu, converged = _graph.howard_min_mean(indptr, indices, weights, n)
    if not converged:
        raise RuntimeError("policy iteration failed to converge")
    return float(mu)


def cycle_mean_extremes(indptr, indices, weights, n) -> tuple[float, float]:
    """(min, max) cycle mean over a strongly connected weighted digraph."""
    lo = _min_mean(indptr, indices, weights, n)
    hi = -_min_mean(indptr, indices, -weights, n)
    return lo, hi


def rotation_interval_of_class(dg: BoxDigraph, cls: ChainClass) -> RotationInterval:
    """Extremal cycle means of the class subgraph (lift-coordinate weights)."""
    if not cls.recurrent:
        raise ValueError("rotation interval is defined for recurrent classes")
    indptr, indices, weights = _subgraph_csr(dg, cls.boxes)
    lo, hi = cycle_mean_extremes(indptr, indices, weights, len(cls.boxes))
    return RotationInterval(lo, hi, "cycle-mean")


def rotation_interval_of_boxes(dg: BoxDigraph, boxes: np.ndarray) -> RotationInterval:
    """Hull of cycle means over the subgraph induced on an arbitrary box set.

    Cycles only live inside strongly connected pieces, so each piece
    contributes its extremes; transient boxes contribute nothing.
    """
    boxes = np.asarray(boxes, np.int64)
    indptr, indices, weights = _subgraph_csr(dg, boxes)
    n = len(boxes)
    mat = csr_matrix((np.ones(len(indices), np.int8), indices.astype(np.int32),
                      indptr), shape=(n, n))
    n_comp, labels = connected_components(mat, directed=True, connection="strong")
    src = np.repeat(np.arange(n), np.diff(indptr))
    sizes = np.bincount(labels, minlength=n_comp)
    selfloop = np.zeros(n_comp, bool)
    same_node = src == indices
    np.logical_or.at(selfloop, labels[src[same_node]], True)
    lo = math.inf
    hi = -math.inf
    for comp in np.nonzero((sizes >= 2) | selfloop)[0]:
        local_nodes = np.nonzero(labels == comp)[0]
        keep = (labels[src] == comp) & (labels[indices] == comp)
        remap = -np.ones(n, np.int64)
        remap[local_nodes] = np.arange(len(local_nodes))
        lu = remap[src[keep]]
        lv = remap[indices[keep]]
        w = weights[keep]
        order = np.argsort(lu, kind="stable")
        sub_indptr = np.zeros(len(local_nodes) + 1, np.int64)
        np.cumsum(np.bincount(lu, minlength=len(local_nodes)), out=sub_indptr[1:])
        clo, chi = cycle_mean_extremes(sub_indptr, lv[order], w[order], len(local_nodes))
        lo = min(lo, clo)
        hi = max(hi, chi)
    if not math.isfinite(lo):
        raise ValueError("box set carries no cycles")
    return RotationInterval(lo, hi, "cycle-mean")


class PowerMap(AnnulusMap):
    """q-fold composition of a map, leaving the domain as soon as any step does."""

    def __init__(self, base: AnnulusMap, q: int):
        if q < 1:
            raise ValueError("q must be >= 1")
        self.base = base
        self.q = q
        self.variant = f"{base.variant}^{q}"

    def lift_eval(self, p):
        for _ in range(self.q):
            p = self.base.lift_eval(p)
        return p

    def lift_inverse(self, p):
        for _ in range(self.q):
            p = self.base.lift_inverse(p)
        return p

    def eval_batch(self, xs, ts):
        xs = np.asarray(xs, float)
        ts = np.asarray(ts, float)
        ok = np.ones(xs.shape, bool)
        for _ in range(self.q):
            xs, ts, step_ok = self.base.eval_batch(np.where(ok, xs, 0.0),
                                                   np.where(ok, ts, 0.0))
            ok &= step_ok
        return xs, ts, ok

    def displacement_bounds(self):
        lo, hi = self.base.displacement_bounds()
        return (self.q * lo, self.q * hi)


@dataclass
class PowerCheckReport:
    """Outcome of the q-power rotation-interval scaling check."""

    q: int
    base_interval: RotationInterval
    power_interval: RotationInterval
    deviation: float
    slack: float

    @property
    def passed(self) -> bool:
        return self.deviation <= self.slack


def power_rotation_check(m: AnnulusMap, dg: BoxDigraph, cls: ChainClass, q: int,
                         slack: float = 0.3) -> PowerCheckReport:
    """Check rot-interval(h^q on the class boxes) = q * rot-interval(h).

    Builds the h^q transition graph on the same grid (same eps and seed),
    restricts it to the class's box set, and compares extremal cycle means.
    """
    base = rotation_interval_of_class(dg, cls)
    if q == 1:
        return PowerCheckReport(1, base, base, 0.0, slack)
    dg_q = transition_graph(PowerMap(m, q), dg.grid, dg.eps, seed=dg.seed)
    power = rotation_interval_of_boxes(dg_q, cls.boxes)
    deviation = max(abs(power.lo - q * base.lo), abs(power.hi - q * base.hi))
    return PowerCheckReport(q, base, power, deviation, slack)


def atkinson_small_sums(m: AnnulusMap, point, p: int, q: int, eps: float,
                        n_max: int):
    """All n in 1..n_max with |Pi_1((h~^q o T^-p)^n(z~)) - Pi_1(z~)| < eps.

    Exact inputs run in exact arithmetic end to end (on maps that support
    it), so exact lift periodicity reports every n.
    """
    if q < 1 or n_max < 1:
        raise ValueError("q and n_max must be >= 1")
    z = LiftPoint(*point)
    hits = []
    w = z
    for n in range(1, n_max + 1):
        for _ in range(q):
            w = m.lift_eval(w)
        w = LiftPoint(w.x - p, w.t)
        if abs(w.x - z.x) < eps:
            hits.append(n)
    return hits


def prime_end_rotation_estimate(m: AnnulusMap, seed_point, n: int, end: str,
                                t_hi: float = 15.0, t_lo: float = -15.0,
                                max_iter: int = 10000) -> float:
    """Birkhoff estimate of the end rotation number from a basin seed.

    plus end: backward average (the seed must lie in the upper-end basin);
    minus end: forward average.  For the built-in twist family the deep
    basin dynamics is exactly (circle lift, t -+ 1), so the estimate
    converges to the true end rotation number at rate O(1/n); for arbitrary
    maps this is an estimator only.

    A seed classified into the opposite basin raises NotInBasinError; an
    Undetermined classification proceeds (the classification is only
    semi-decidable, and the calibration variants never classify).
    """
    if end not in ("plus", "minus"):
        raise ValueError("end must be 'plus' or 'minus'")
    basin = classify_basin(m, seed_point, t_hi, t_lo, max_iter)
    want = Basin.PLUS if end == "plus" else Basin.MINUS
    opposite = Basin.MINUS if end == "plus" else Basin.PLUS
    if basin == opposite:
        raise NotInBasinError(f"seed {seed_point} classifies as {basin.value}, "
                              f"not {want.value}")
    direction = "backward" if end == "plus" else "forward"
    from .annulus import birkhoff_rotation
    res = birkhoff_rotation(m, lift_of(seed_point) if not isinstance(seed_point, LiftPoint)
                            else seed_point, n, direction)
    if not res.complete:
        raise OutOfDomainError(f"orbit left the domain after {res.steps} steps")
    return res.value
