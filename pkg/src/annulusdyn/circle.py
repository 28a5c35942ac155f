"""Circle homeomorphism lifts: rigid rotations and Denjoy-type maps.

A lift is a strictly increasing map F: R -> R with F(x+1) = F(x) + 1.
Two kinds are provided:

* ``rigid`` -- translation by alpha.
* ``denjoy`` -- a map with a single orbit of inserted ("wandering")
  intervals whose complement is a positive-measure minimal set.  The
  interval lengths follow the telescoping law

      l_i = 1 / (3 (|i|+1) (|i|+2)),   sum over all i in Z = 1/2,

  truncated at |i| <= N where the tail 2/(3(N+2)) drops below the
  construction tolerance.  The map is realized as H o (x -> x+alpha) o H^-1
  for an explicit piecewise-affine "thickened devil's staircase"
  homeomorphism H, which keeps evaluation monotone, makes the deck law
  F(x+1) = F(x)+1 exact, and pins the rotation number to alpha.

Every lift also carries the height profile ``g``: a continuous function
vanishing exactly on the minimal set, with the scaling g(f^i(theta)) =
g(theta)/|i| along the inserted-interval orbit (denjoy kind) or the closed
form (1/2) sin^2(pi q theta) (rigid kind with rotation p/q).  The range is
capped at 1/2; downstream constructions rely on that cap.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from numba import njit

from .errors import NearRationalError

# Denominator bound used when deciding whether a float "is" a rational.
MAX_GUARD_DENOMINATOR = 10**6
# Every real is within 1/(q*10^6) of some p/q with q <= 10^6 (Dirichlet), so
# the guard threshold must sit below the best approximation quality of the
# target irrationals; 1e-13 separates decimal/parsed rationals from
# noble-number floats while staying far above 1 ulp.
GUARD_DISTANCE = 1e-13

_GAP = 2**31  # sentinel interval index for staircase segments between insertions


def nearest_rational(alpha: float, max_den: int = MAX_GUARD_DENOMINATOR) -> Fraction:
    """Best rational approximation of alpha with denominator <= max_den."""
    return Fraction(alpha).limit_denominator(max_den)


def rational_guard(alpha: float, tol: float) -> tuple[Fraction, float]:
    """Distance from alpha to the nearest small-denominator rational.

    Returns (fraction, distance).  Callers treat alpha as rational when the
    distance falls below min(tol, GUARD_DISTANCE).
    """
    frac = nearest_rational(alpha)
    return frac, abs(alpha - float(frac))


def is_near_rational(alpha: float, tol: float) -> bool:
    _, dist = rational_guard(alpha, tol)
    return dist < min(tol, GUARD_DISTANCE)


@njit(cache=True)
def _fill_orbit(us: np.ndarray, n_side: int, alpha0: float) -> None:
    """Wrapped rotation orbit u_i = {i*alpha0}, built iteratively.

    Consecutive entries satisfy u_{i+1} = u_i + alpha0 (mod 1) to within one
    rounding each, which the staircase needs so that inserted interval i maps
    onto interval i+1 with sub-tolerance endpoint error.
    """
    mid = n_side
    us[mid] = 0.0
    v = 0.0
    for i in range(1, n_side + 1):
        v = v + alpha0
        if v >= 1.0:
            v -= 1.0
        us[mid + i] = v
    v = 0.0
    for i in range(1, n_side + 1):
        v = v - alpha0
        if v < 0.0:
            v += 1.0
        us[mid - i] = v


class _Staircase:
    """Piecewise-affine circle homeomorphism H with H(u+1) = H(u)+1.

    Breakpoints ``bs`` (source) and ``cs`` (image) partition [0, 1]; segment
    k maps [bs[k], bs[k+1]] affinely onto [cs[k], cs[k+1]].  ``seg_idx``
    tags each segment with the inserted-interval index it carries on the
    image side (_GAP for the minimal-set part).
    """

    def __init__(self, bs, cs, seg_idx):
        self.bs = bs
        self.cs = cs
        self.seg_idx = seg_idx
        self.slope = np.diff(cs) / np.diff(bs)
        self.inv_slope = np.diff(bs) / np.diff(cs)

    def forward(self, u):
        k = np.floor(u)
        r = u - k
        seg = np.clip(np.searchsorted(self.bs, r, side="right") - 1, 0, len(self.bs) - 2)
        return self.cs[seg] + (r - self.bs[seg]) * self.slope[seg] + k

    def backward(self, y):
        k = np.floor(y)
        r = y - k
        seg = np.clip(np.searchsorted(self.cs, r, side="right") - 1, 0, len(self.cs) - 2)
        return self.bs[seg] + (r - self.cs[seg]) * self.inv_slope[seg] + k

    def locate_interval(self, theta):
        """Inserted-interval index and relative position at circle point theta.

        Returns (None, 0.0) when theta lies in the minimal-set part.
        """
        r = theta - math.floor(theta)
        seg = min(max(np.searchsorted(self.cs, r, side="right") - 1, 0), len(self.cs) - 2)
        idx = int(self.seg_idx[seg])
        if idx == _GAP:
            return None, 0.0
        rel = (r - self.cs[seg]) / (self.cs[seg + 1] - self.cs[seg])
        return idx, float(rel)


class CircleLift:
    """Strictly increasing degree-one lift of a circle homeomorphism.

    Use :func:`make_rigid_rotation` or :func:`make_denjoy` to construct one.
    Instances are immutable and safe to share between threads.
    """

    def __init__(self, kind, alpha, *, rational=None, tol=None, staircase=None,
                 lengths=None, n_side=None, pos=None):
        self.kind = kind
        self.alpha = float(alpha)
        self.rational = rational  # Fraction when the rigid rotation is rational
        self.tol = tol
        self._stairs = staircase
        self._lengths = lengths
        self._n_side = n_side
        self._pos = pos  # orbit index + n_side -> inserted-interval segment

    # -- evaluation ---------------------------------------------------

    def eval(self, x):
        """Lift evaluation; accepts scalars or numpy arrays."""
        if self.kind == "rigid":
            return x + self.alpha
        return self._denjoy_step(x, +1)

    def inverse(self, y):
        """Exact inverse of :meth:`eval` (same composition run backwards)."""
        if self.kind == "rigid":
            return y - self.alpha
        return self._denjoy_step(y, -1)

    def _denjoy_step(self, x, sign):
        """One step of the denjoy map (sign=+1) or its inverse (sign=-1).

        Points inside inserted interval i go directly through the stored
        affine identification with interval i +- sign, which avoids
        amplifying rounding noise through the steep staircase segments;
        minimal-set points go through the staircase conjugacy, whose slopes
        are mild there.  Both branches produce the same lift value: the
        image fundamental-domain coordinate plus a unit carry whenever the
        underlying rotation orbit wraps.
        """
        stairs = self._stairs
        scalar = np.isscalar(x)
        x = np.asarray(x, float)
        k = np.floor(x)
        r = x - k
        alpha_int = math.floor(self.alpha)
        alpha0 = self.alpha - alpha_int
        seg = np.clip(np.searchsorted(stairs.cs, r, side="right") - 1, 0, len(stairs.cs) - 2)
        ival = stairs.seg_idx[seg]
        direct = (ival != _GAP) & (np.abs(ival + sign) <= self._n_side)
        out = np.empty_like(r)

        stair_mask = ~direct
        if np.any(stair_mask):
            out[stair_mask] = stairs.forward(stairs.backward(r[stair_mask]) + sign * alpha0)
        if np.any(direct):
            src = seg[direct]
            dst = self._pos[(ival[direct] + sign) + self._n_side]
            ratio = (stairs.cs[dst + 1] - stairs.cs[dst]) / (stairs.cs[src + 1] - stairs.cs[src])
            val = stairs.cs[dst] + (r[direct] - stairs.cs[src]) * ratio
            # unit carry exactly when the rotation orbit wraps (H monotone,
            # so the wrap shows as the target interval sorting backwards)
            if sign > 0:
                val = val + (stairs.cs[dst] < stairs.cs[src])
            else:
                val = val - (stairs.cs[dst] > stairs.cs[src])
            out[direct] = val

        out = out + k + sign * alpha_int
        return float(out) if scalar else out

    def __call__(self, x):
        return self.eval(x)

    # -- structure ----------------------------------------------------

    def collapse(self, x):
        """Semiconjugacy coordinate: collapse(eval(x)) = collapse(x) + alpha.

        For the denjoy kind this is the staircase inverse, which squeezes
        every inserted interval into a slot of width delta (the orbit
        thickening) around the corresponding rotation-orbit point.  For the
        rigid kind it is the identity.
        """
        if self.kind == "rigid":
            return x
        return self._stairs.backward(x)

    def g(self, theta):
        """Height profile in [0, 1/2]; zero exactly on the minimal set."""
        if self.kind == "rigid":
            if self.rational is None:
                return 0.0 if np.isscalar(theta) else np.zeros_like(np.asarray(theta, float))
            q = self.rational.denominator
            s = np.sin(np.pi * q * np.asarray(theta, float))
            out = 0.5 * s * s
            return float(out) if np.isscalar(theta) else out
        stairs = self._stairs
        y = np.asarray(theta, dtype=float)
        r = y - np.floor(y)
        seg = np.clip(np.searchsorted(stairs.cs, r, side="right") - 1, 0, len(stairs.cs) - 2)
        idx = stairs.seg_idx[seg]
        rel = (r - stairs.cs[seg]) / (stairs.cs[seg + 1] - stairs.cs[seg])
        tent = 0.5 * (1.0 - np.abs(2.0 * rel - 1.0))
        out = np.where(idx == _GAP, 0.0, tent / np.maximum(np.abs(idx), 1))
        return float(out) if np.isscalar(theta) else out

    def interval(self, i):
        """Endpoints (lo, hi) of inserted interval i (denjoy kind only)."""
        if self.kind != "denjoy":
            raise ValueError("only denjoy lifts carry inserted intervals")
        if abs(i) > self._n_side:
            raise ValueError(f"interval index {i} beyond truncation {self._n_side}")
        stairs = self._stairs
        pos = np.nonzero(stairs.seg_idx == i)[0]
        k = int(pos[0])
        return float(stairs.cs[k]), float(stairs.cs[k + 1])

    def minimal_point(self):
        """A point of the minimal set with exactly tracked dynamics."""
        return 0.0

    def gap_center(self):
        """Center of the widest complementary gap (maximal g)."""
        if self.kind == "denjoy":
            lo, hi = self.interval(0)
            return 0.5 * (lo + hi)
        if self.rational is None:
            raise ValueError("an irrational rigid rotation has no complementary gap")
        return 1.0 / (2 * self.rational.denominator)

    def rotation_estimate(self, x0: float, n: int) -> float:
        """Birkhoff estimate (F^n(x0) - x0)/n of the rotation number."""
        if n < 1:
            raise ValueError("n must be >= 1")
        x = x0
        for _ in range(n):
            x = self.eval(x)
        return (x - x0) / n


def make_rigid_rotation(alpha: float) -> CircleLift:
    """Translation lift x -> x + alpha.

    When alpha is (indistinguishable from) a rational p/q with q <= 10^6 the
    lift records it, which selects the closed-form height profile
    (1/2) sin^2(pi q theta).
    """
    frac, dist = rational_guard(alpha, GUARD_DISTANCE)
    rational = frac if dist < GUARD_DISTANCE else None
    return CircleLift("rigid", alpha, rational=rational)


def interval_length(i: int) -> float:
    """Length law of the inserted intervals; total over Z is 1/2."""
    a = abs(i)
    return 1.0 / (3.0 * (a + 1) * (a + 2))


def truncation_index(tol: float) -> int:
    """Smallest N with tail sum 2/(3(N+2)) below tol."""
    n = int(math.ceil(2.0 / (3.0 * tol)))
    return max(n, 8)


def make_denjoy(alpha: float, tol: float = 1e-6) -> CircleLift:
    """Denjoy-type lift with rotation number alpha.

    The complement of the inserted intervals has measure 1/2 + tail(N) with
    tail(N) < tol; the inserted intervals form a single orbit and the map
    identifies interval i with interval i+1 affinely.

    Raises NearRationalError when alpha is within min(tol, 1e-13) of a
    rational with denominator <= 10^6: such a float cannot carry the
    wandering-orbit combinatorics.
    """
    frac, dist = rational_guard(alpha, tol)
    if dist < min(tol, GUARD_DISTANCE):
        raise NearRationalError(alpha, frac.numerator, frac.denominator, dist)
    if not 0.0 < tol < 0.5:
        raise ValueError("tol must lie in (0, 0.5)")

    n_side = truncation_index(tol)
    if n_side > 5_000_000:
        raise ValueError(f"tol={tol} needs truncation {n_side}, beyond the supported range")
    alpha0 = alpha - math.floor(alpha)

    count = 2 * n_side + 1
    us = np.empty(count)
    _fill_orbit(us, n_side, alpha0)
    idx = np.arange(-n_side, n_side + 1, dtype=np.int64)

    order = np.argsort(us, kind="stable")
    us = us[order]
    idx = idx[order]

    gaps = np.diff(us)
    wrap_gap = us[0] + 1.0 - us[-1]
    gap_min = min(float(gaps.min()), float(wrap_gap))
    if gap_min < 1e-12:
        raise NearRationalError(alpha, frac.numerator, frac.denominator, gap_min)
    delta = min(gap_min / 4.0, 1e-7)

    lengths = 1.0 / (3.0 * (np.abs(idx) + 1.0) * (np.abs(idx) + 2.0))
    total_inserted = float(lengths.sum())
    cantor_scale = (1.0 - total_inserted) / (1.0 - count * delta)

    # Breakpoints: [u_0, u_0+delta, u_1, u_1+delta, ..., 1.0]; u_0 = 0 since
    # the i = 0 orbit point wraps to exactly 0 and nothing sorts below it.
    bs = np.empty(2 * count + 1)
    cs = np.empty(2 * count + 1)
    seg_idx = np.full(2 * count, _GAP, dtype=np.int64)
    bs[0:-1:2] = us
    bs[1:-1:2] = us + delta
    bs[-1] = us[0] + 1.0
    y = 0.0
    for k in range(count):
        cs[2 * k] = y
        y += lengths[k]
        cs[2 * k + 1] = y
        u_next = us[k + 1] if k + 1 < count else us[0] + 1.0
        y += cantor_scale * (u_next - us[k] - delta)
        seg_idx[2 * k] = idx[k]
    cs[-1] = 1.0  # absorb cumulative rounding in the final gap segment

    if np.any(np.diff(bs) <= 0.0) or np.any(np.diff(cs) <= 0.0):
        raise NearRationalError(alpha, frac.numerator, frac.denominator, gap_min)

    pos = np.empty(count, dtype=np.int64)
    pos[idx + n_side] = 2 * np.arange(count)

    stairs = _Staircase(bs, cs, seg_idx)
    return CircleLift("denjoy", alpha, tol=tol, staircase=stairs,
                      lengths=lengths, n_side=n_side, pos=pos)


def rotation_number_estimate(lift: CircleLift, x0: float, n: int) -> float:
    """Module-level alias for :meth:`CircleLift.rotation_estimate`."""
    return lift.rotation_estimate(x0, n)
