"""Lifted annulus homeomorphisms: evaluation, inverses, orbits, basins.

Points live either on the annulus A = S^1 x R (``AnnulusPoint``, theta in
[0,1)) or on the universal cover R x R (``LiftPoint``).  The deck
transformation T shifts the first lift coordinate by 1; every map here
commutes with it, so the angular displacement of a point is well defined
independently of the chosen lift.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import NoConvergenceError, OutOfDomainError


class LiftPoint(NamedTuple):
    x: float
    t: float


class AnnulusPoint(NamedTuple):
    theta: float
    t: float


def project(p) -> AnnulusPoint:
    x, t = p
    return AnnulusPoint(x - math.floor(x), t)


def lift_of(p, k: int = 0) -> LiftPoint:
    """Canonical lift of an annulus point, shifted by deck power k."""
    theta, t = p
    return LiftPoint(theta - math.floor(theta) + k, t)


def deck(p, k: int) -> LiftPoint:
    """Deck transformation T^k on the cover: (x, t) -> (x + k, t)."""
    x, t = p
    return LiftPoint(x + k, t)


def circle_dist(a: float, b: float) -> float:
    d = abs(a - b) % 1.0
    return min(d, 1.0 - d)


def annulus_dist(p, q) -> float:
    """Product metric on S^1 x R."""
    return math.hypot(circle_dist(p[0], q[0]), p[1] - q[1])


class AnnulusMap:
    """Base interface for lifted annulus homeomorphisms.

    Subclasses implement ``lift_eval`` / ``lift_inverse`` on the cover and
    may provide vectorized ``eval_batch`` for grid work.  Instances are
    immutable after construction.
    """

    variant = "abstract"

    def lift_eval(self, p) -> LiftPoint:
        raise NotImplementedError

    def lift_inverse(self, p) -> LiftPoint:
        raise NotImplementedError

    def eval_batch(self, xs, ts):
        """Vectorized lift evaluation.

        Returns (xs', ts', ok) where ok flags points inside the domain;
        coordinates of points with ok == False are unspecified.
        """
        xs = np.asarray(xs, float)
        ts = np.asarray(ts, float)
        out_x = np.empty_like(xs)
        out_t = np.empty_like(ts)
        ok = np.ones(xs.shape, bool)
        for i in range(xs.size):
            try:
                q = self.lift_eval(LiftPoint(float(xs.flat[i]), float(ts.flat[i])))
                out_x.flat[i], out_t.flat[i] = q
            except OutOfDomainError:
                ok.flat[i] = False
                out_x.flat[i] = np.nan
                out_t.flat[i] = np.nan
        return out_x, out_t, ok

    def domain_strips(self):
        """Angular strips [lo, hi] where the map is defined; None = everywhere."""
        return None

    def displacement_bounds(self):
        """Conservative (lo, hi) bounds on the angular displacement."""
        return (-2.0, 2.0)

    def to_config(self) -> dict:
        raise NotImplementedError


class RigidTranslation(AnnulusMap):
    """h(theta, t) = (theta + alpha, t): the simplest calibration variant."""

    variant = "rigid_translation"

    def __init__(self, alpha: float):
        self.alpha = float(alpha)

    def lift_eval(self, p) -> LiftPoint:
        x, t = p
        return LiftPoint(x + self.alpha, t)

    def lift_inverse(self, p) -> LiftPoint:
        x, t = p
        return LiftPoint(x - self.alpha, t)

    def eval_batch(self, xs, ts):
        xs = np.asarray(xs, float)
        ts = np.asarray(ts, float)
        return xs + self.alpha, ts.copy(), np.ones(xs.shape, bool)

    def displacement_bounds(self):
        return (self.alpha, self.alpha)

    def to_config(self):
        return {"variant": self.variant, "alpha": {"value": repr(self.alpha)}}


def displacement(m: AnnulusMap, p) -> float:
    """Angular displacement Pi_1(h~(p~)) - Pi_1(p~); deck-invariant."""
    q = lift_of(p) if not isinstance(p, LiftPoint) else p
    return m.lift_eval(q).x - q.x


@dataclass(frozen=True)
class BirkhoffResult:
    value: float
    steps: int
    complete: bool

    def __float__(self):
        return self.value


def birkhoff_rotation(m: AnnulusMap, p, n: int, direction: str = "forward") -> BirkhoffResult:
    """Birkhoff rotation average over n steps of the lifted orbit.

    forward:  (Pi_1(h~^n(p)) - Pi_1(p)) / n
    backward: (Pi_1(p) - Pi_1(h~^{-n}(p))) / n

    If the orbit leaves the domain mid-way the partial average is returned
    with ``complete=False`` and the realized step count.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if direction not in ("forward", "backward"):
        raise ValueError("direction must be 'forward' or 'backward'")
    step = m.lift_eval if direction == "forward" else m.lift_inverse
    q = LiftPoint(*p)
    x0 = q.x
    done = 0
    for _ in range(n):
        try:
            q = step(q)
        except OutOfDomainError:
            break
        done += 1
    if done == 0:
        raise OutOfDomainError("orbit left the domain before the first step")
    delta = (q.x - x0) if direction == "forward" else (x0 - q.x)
    return BirkhoffResult(delta / done, done, done == n)


class Basin(enum.Enum):
    PLUS = "PlusBasin"
    MINUS = "MinusBasin"
    BOTH = "BothBasins"
    UNDETERMINED = "Undetermined"


def classify_basin(m: AnnulusMap, p, t_hi: float, t_lo: float, max_iter: int) -> Basin:
    """Semi-decidable basin classification.

    PLUS:  some backward iterate rises above t_hi (point escapes to the
           upper end in backward time, i.e. lies in the repellor basin).
    MINUS: some forward iterate drops below t_lo.
    BOTH:  both certificates found (the basins may genuinely intersect).
    UNDETERMINED: neither within max_iter steps.

    Orbits that leave a restricted domain simply stop contributing.
    """
    if not t_lo < t_hi:
        raise ValueError("t_lo must be below t_hi")
    q0 = lift_of(p) if not isinstance(p, LiftPoint) else p

    plus = False
    q = q0
    for _ in range(max_iter):
        try:
            q = m.lift_inverse(q)
        except OutOfDomainError:
            break
        if q.t > t_hi:
            plus = True
            break

    minus = False
    q = q0
    for _ in range(max_iter):
        try:
            q = m.lift_eval(q)
        except OutOfDomainError:
            break
        if q.t < t_lo:
            minus = True
            break

    if plus and minus:
        return Basin.BOTH
    if plus:
        return Basin.PLUS
    if minus:
        return Basin.MINUS
    return Basin.UNDETERMINED


def orbit(m: AnnulusMap, p, n: int, direction: str = "forward"):
    """Lifted orbit segment [p, h(p), ..., h^n(p)]; stops early on domain exit."""
    step = m.lift_eval if direction == "forward" else m.lift_inverse
    q = LiftPoint(*p)
    points = [q]
    for _ in range(n):
        try:
            q = step(q)
        except OutOfDomainError:
            break
        points.append(q)
    return points


def bisect_increasing(f, lo: float, hi: float, iters: int = 60) -> float:
    """Root of an increasing function on [lo, hi] by plain bisection."""
    flo = f(lo)
    fhi = f(hi)
    if flo > 0.0 or fhi < 0.0:
        raise NoConvergenceError(
            f"bisection bracket [{lo}, {hi}] does not enclose a root "
            f"(f(lo)={flo:.3e}, f(hi)={fhi:.3e})"
        )
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
