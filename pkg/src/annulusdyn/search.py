"""Certified periodic-point search, fixed point index, delta-chain calculus.

Periodic points of rotation number p/q are zeros of G = h~^q o T^{-p} - Id
on the cover.  The search subdivides the window adaptively: boxes whose
corner evaluations reveal an affine cell are pruned by exact corner ranges
(the branches of the built-in horseshoe are affine, so this is exact
there); incoherent boxes split along the dynamically longest axis.
Survivors are polished by damped Newton and certified by their residual and
their lift displacement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .annulus import AnnulusMap, LiftPoint, deck, lift_of
from .errors import (AmbiguousLiftError, InvalidChainError, OutOfDomainError,
                     UnresolvedWindingError, ZeroOnBoundaryError)
from .rotation import RationalRot, rotation_of_periodic
from .systems import is_valid_chain


@dataclass(frozen=True)
class PeriodicOrbit:
    """A certified zero of h~^q o T^{-p} - Id."""

    point: LiftPoint
    q: int
    p: int
    residual: float
    index: int | None
    rotation: RationalRot


def folded_power(m: AnnulusMap, q: int, p: int):
    """Callable z -> h~^q(T^{-p} ... ) with the deck shift folded in."""

    def F(x, t):
        z = LiftPoint(x, t)
        for _ in range(q):
            z = m.lift_eval(z)
        return (z.x - p, z.t)

    return F


def _G(m: AnnulusMap, q: int, p: int, x: float, t: float):
    """Displacement field h~^q(z) - T^p(z); None when the orbit exits."""
    z = LiftPoint(x, t)
    try:
        for _ in range(q):
            z = m.lift_eval(z)
    except OutOfDomainError:
        return None
    return (z.x - p - x, z.t - t)


def _fd_column(m, q, p, x, t, g, axis, h=1e-8):
    """One-sided difference column of DG, stepping back at domain edges."""
    for sign in (1.0, -1.0):
        if axis == 0:
            g2 = _G(m, q, p, x + sign * h, t)
        else:
            g2 = _G(m, q, p, x, t + sign * h)
        if g2 is not None:
            return ((g2[0] - g[0]) / (sign * h), (g2[1] - g[1]) / (sign * h))
    return None


def _polish(m, q, p, x, t, tol, max_iter=60):
    """Damped Newton with one-sided finite-difference Jacobian."""
    g = _G(m, q, p, x, t)
    if g is None:
        return None
    for _ in range(max_iter):
        r = max(abs(g[0]), abs(g[1]))
        if r < tol:
            return (x, t, r)
        cx = _fd_column(m, q, p, x, t, g, 0)
        ct = _fd_column(m, q, p, x, t, g, 1)
        if cx is None or ct is None:
            return None
        j00, j10 = cx
        j01, j11 = ct
        det = j00 * j11 - j01 * j10
        if abs(det) < 1e-14:
            return None
        dx = (g[0] * j11 - g[1] * j01) / det
        dt = (j00 * g[1] - j10 * g[0]) / det
        lam = 1.0
        stepped = False
        for _ in range(30):
            g2 = _G(m, q, p, x - lam * dx, t - lam * dt)
            if g2 is not None and max(abs(g2[0]), abs(g2[1])) < max(abs(g[0]), abs(g[1])):
                x, t = x - lam * dx, t - lam * dt
                g = g2
                stepped = True
                break
            lam *= 0.5
        if not stepped:
            return None
    r = max(abs(g[0]), abs(g[1]))
    return (x, t, r) if r < tol else None


def find_fixed_points_of_power(m: AnnulusMap, q: int, p: int, window,
                               depth: int = 8, tol: float = 1e-10,
                               max_boxes: int = 400_000):
    """All period-q points with lift displacement p inside the window.

    Adaptive subdivision: coherent (affine-looking) boxes are pruned by the
    corner ranges of both components of G; incoherent boxes split along the
    axis with the larger expansion-weighted width, down to a floor well
    below the 2^-depth scale.  Surviving candidates seed damped Newton; the
    polished hits are deduplicated, certified by residual < tol, checked by
    rotation_of_periodic, and, when a surrounding loop stays in-domain,
    carry a winding-number index.

    An empty result is NOT a certificate of absence (the subdivision floor
    and sampling can miss pathological configurations).
    """
    x_lo, x_hi, t_lo, t_hi = window
    lip = getattr(m, "lipschitz", lambda: 4.0)() ** q
    cells_hook = getattr(m, "domain_cells", None)
    strips = cells_hook(q) if cells_hook is not None else m.domain_strips()
    floor_x = max((x_hi - x_lo) / 2**depth / max(lip, 1.0), 1e-13)
    floor_t = max((t_hi - t_lo) / 2**depth / max(lip, 1.0), 1e-13)
    work = [(x_lo, x_hi, t_lo, t_hi)]
    candidates = []
    seen = 0
    while work and seen < max_boxes:
        bx0, bx1, bt0, bt1 = work.pop()
        seen += 1
        if strips is not None and not _meets_strips(bx0, bx1, strips):
            continue
        pts = [(bx0, bt0), (bx0, bt1), (bx1, bt0), (bx1, bt1),
               (0.5 * (bx0 + bx1), 0.5 * (bt0 + bt1))]
        vals = [_G(m, q, p, *z) for z in pts]
        n_ok = sum(v is not None for v in vals)
        wx, wt = bx1 - bx0, bt1 - bt0
        can_x = wx > floor_x
        can_t = wt > floor_t
        if n_ok == 0:
            # no evidence the domain meets this box; split until tiny
            if can_x or can_t:
                work.extend(_split(bx0, bx1, bt0, bt1, lip, can_x, can_t))
            continue
        if n_ok == 5:
            corner = vals[:4]
            center = vals[4]
            mean0 = sum(v[0] for v in corner) / 4.0
            mean1 = sum(v[1] for v in corner) / 4.0
            scale = max(max(abs(v[0]), abs(v[1])) for v in vals) + 1.0
            affine = (abs(center[0] - mean0) <= 1e-9 * scale
                      and abs(center[1] - mean1) <= 1e-9 * scale)
            if affine:
                lo0 = min(v[0] for v in corner)
                hi0 = max(v[0] for v in corner)
                lo1 = min(v[1] for v in corner)
                hi1 = max(v[1] for v in corner)
                if lo0 <= 0.0 <= hi0 and lo1 <= 0.0 <= hi1:
                    candidates.append((0.5 * (bx0 + bx1), 0.5 * (bt0 + bt1)))
                continue
        if not can_x and not can_t:
            # depth floor: keep as a candidate when samples admit a zero,
            # seeded at an in-domain sample (zeros can hug the domain edge)
            slack = lip * (wx + wt)
            gmin = min(max(abs(v[0]), abs(v[1])) for v in vals if v is not None)
            if gmin <= slack:
                start = next(z for z, v in zip(reversed(pts), reversed(vals))
                             if v is not None)
                candidates.append(start)
            continue
        if 0 < n_ok < 5:
            # domain boundary inside the box: split the axis the okness
            # varies along; at the floor keep an in-domain seed instead
            o = [v is not None for v in vals]
            if (o[0] or o[1]) != (o[2] or o[3]):
                if can_x:
                    work.extend(_split_axis(bx0, bx1, bt0, bt1, "x"))
                else:
                    candidates.append(next(z for z, v in zip(pts, vals) if v is not None))
                continue
            if (o[0] or o[2]) != (o[1] or o[3]):
                if can_t:
                    work.extend(_split_axis(bx0, bx1, bt0, bt1, "t"))
                else:
                    candidates.append(next(z for z, v in zip(pts, vals) if v is not None))
                continue
        work.extend(_split(bx0, bx1, bt0, bt1, lip, can_x, can_t))

    hits = []
    for cx, ct in candidates:
        res = _polish(m, q, p, cx, ct, tol)
        if res is None:
            continue
        x, t, r = res
        if not (x_lo - 1e-9 <= x <= x_hi + 1e-9 and t_lo - 1e-9 <= t <= t_hi + 1e-9):
            continue
        hits.append((x, t, r))
    hits.sort()
    orbits = []
    for x, t, r in hits:
        if any(abs(x - o.point.x) < 1e-7 and abs(t - o.point.t) < 1e-7
               for o in orbits):
            continue
        try:
            rot = rotation_of_periodic(m, LiftPoint(x, t), q, tol=1e-6)
        except Exception:
            continue
        if rot.p != p:
            continue
        idx = _try_index(m, q, p, x, t)
        orbits.append(PeriodicOrbit(LiftPoint(x, t), q, p, r, idx, rot))
    return orbits


def _split_axis(bx0, bx1, bt0, bt1, axis):
    if axis == "x":
        xm = 0.5 * (bx0 + bx1)
        return [(bx0, xm, bt0, bt1), (xm, bx1, bt0, bt1)]
    tm = 0.5 * (bt0 + bt1)
    return [(bx0, bx1, bt0, tm), (bx0, bx1, tm, bt1)]


def _split(bx0, bx1, bt0, bt1, lip, can_x=True, can_t=True):
    wx, wt = bx1 - bx0, bt1 - bt0
    if can_x and (wx * lip >= wt or not can_t):
        return _split_axis(bx0, bx1, bt0, bt1, "x")
    return _split_axis(bx0, bx1, bt0, bt1, "t")


def _meets_strips(bx0, bx1, strips):
    """Whether [bx0, bx1] meets any of the angular domain strips (mod 1)."""
    m0 = math.floor(bx0)
    for k in (m0, m0 + 1):
        for (a, b) in strips:
            if bx0 <= b + k and a + k <= bx1:
                return True
    return False


def _try_index(m, q, p, x, t, radius_factor=0.25):
    radius = radius_factor * 5.0 ** (-q)
    F = folded_power(m, q, p)
    loop = square_loop((x, t), radius)
    try:
        return fixed_point_index(F, loop, samples=512)
    except (OutOfDomainError, ZeroOnBoundaryError, UnresolvedWindingError):
        return None


def square_loop(center, radius):
    """Closed square polygon around a point, counterclockwise."""
    cx, ct = center
    return [LiftPoint(cx - radius, ct - radius), LiftPoint(cx + radius, ct - radius),
            LiftPoint(cx + radius, ct + radius), LiftPoint(cx - radius, ct + radius),
            LiftPoint(cx - radius, ct - radius)]


def fixed_point_index(map_power, loop, samples: int = 1024) -> int:
    """Winding number of Id - F along a closed polygon avoiding Fix(F).

    ``map_power`` is a plain callable (x, t) -> (x, t) on the cover with any
    deck shift already folded in.  The polygon is sampled uniformly by
    arclength; each angular increment must stay below pi/2 or
    UnresolvedWindingError asks for more samples.  A (near-)zero of the
    field on the loop raises ZeroOnBoundaryError.
    """
    pts = [LiftPoint(*z) for z in loop]
    if pts[0] != pts[-1]:
        pts.append(pts[0])
    seg = [math.hypot(b.x - a.x, b.t - a.t) for a, b in zip(pts[:-1], pts[1:])]
    total_len = sum(seg)
    if total_len <= 0.0:
        raise ValueError("degenerate loop")
    gx = np.empty(samples)
    gt = np.empty(samples)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    s_vals = np.arange(samples) * (total_len / samples)
    k = 0
    for i, s in enumerate(s_vals):
        while k + 1 < len(cum) - 1 and cum[k + 1] <= s:
            k += 1
        frac = (s - cum[k]) / (cum[k + 1] - cum[k])
        x = pts[k].x + frac * (pts[k + 1].x - pts[k].x)
        t = pts[k].t + frac * (pts[k + 1].t - pts[k].t)
        fx, ft = map_power(x, t)
        gx[i] = x - fx
        gt[i] = t - ft
    norms = np.hypot(gx, gt)
    variation = np.max(np.hypot(np.diff(np.append(gx, gx[0])),
                                np.diff(np.append(gt, gt[0]))))
    if norms.min() <= 10.0 * variation:
        raise ZeroOnBoundaryError(
            f"min |G| = {norms.min():.3e} within 10x the sample variation {variation:.3e}")
    ang = np.arctan2(gt, gx)
    inc = np.diff(np.append(ang, ang[0]))
    inc = (inc + np.pi) % (2.0 * np.pi) - np.pi
    if np.max(np.abs(inc)) >= 0.5 * np.pi:
        raise UnresolvedWindingError("angular step >= pi/2; raise the sample count")
    total = float(np.sum(inc))
    winding = total / (2.0 * np.pi)
    rounded = round(winding)
    if abs(winding - rounded) > 1e-6:
        raise UnresolvedWindingError(f"winding {winding} is not near an integer")
    return int(rounded)


def chain_dynamical_index(m: AnnulusMap, chain, delta: float) -> tuple[int, int]:
    """Dynamical index (length, deck displacement) of a delta-chain.

    The chain is lifted step by step; each lifted jump is the unique one of
    length < delta (unique because delta < 1/2).  The second component is
    the deck power j with the lifted endpoint at T^j(canonical lift of the
    final point).
    """
    if delta >= 0.5:
        raise AmbiguousLiftError("delta >= 1/2 makes the lifted jump non-unique")
    if len(chain) < 2:
        raise InvalidChainError("a chain needs at least two points")
    if not is_valid_chain(m, chain, delta):
        raise InvalidChainError("d(h(x_i), x_{i+1}) < delta fails somewhere")
    cur = lift_of(chain[0])
    for nxt in chain[1:]:
        img = m.lift_eval(cur)
        base = lift_of(nxt)
        shift = round(img.x - base.x)
        cand = deck(base, shift)
        if math.hypot(img.x - cand.x, img.t - cand.t) >= delta:
            raise InvalidChainError("no lifted jump below delta")
        cur = cand
    j = cur.x - lift_of(chain[-1]).x
    return (len(chain) - 1, int(round(j)))


def concat_solver(a: int, b: int, p1: int, p2: int, eta_min: int = 1):
    """Cycle counts (eta, xi, zeta) splicing chains into a forbidden index.

    Solves  a + zeta + eta = xi  and  b + zeta*p1 + eta*p2 = xi*(p1+1)
    in positive integers via the closed form
        xi   = eta*(p2 - p1) + (b - p1*a)
        zeta = eta*(p2 - p1 - 1) + (b - p1*a - a),
    returning the smallest eta >= eta_min making xi >= 1 and zeta >= 1
    (zeta counts traversals of a periodic-orbit cycle, so it must be a
    positive count).  Both identities are verified exactly.
    """
    if a < 1:
        raise ValueError("a must be >= 1")
    if not p1 + 1 < p2:
        raise ValueError("need p1 + 1 < p2")
    if eta_min < 1:
        raise ValueError("eta_min must be >= 1")
    c = b - p1 * a
    eta = eta_min
    # xi, zeta are strictly increasing in eta, so the first feasible eta wins
    need_xi = math.ceil((1 - c) / (p2 - p1))
    need_zeta = math.ceil((1 - (c - a)) / (p2 - p1 - 1))
    eta = max(eta_min, need_xi, need_zeta)
    xi = eta * (p2 - p1) + c
    zeta = eta * (p2 - p1 - 1) + (c - a)
    assert xi >= 1 and zeta >= 1
    assert a + zeta + eta == xi
    assert b + zeta * p1 + eta * p2 == xi * (p1 + 1)
    return eta, xi, zeta
