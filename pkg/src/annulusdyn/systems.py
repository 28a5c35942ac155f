"""The two built-in annulus systems and their exact oracles.

``PaperExampleMap`` is a two-parameter family

    h(theta, t) = (phi_t(theta), t - g(theta, t))

whose end rotation numbers are alpha (upper) and beta (lower) by
construction.  The height drop g equals 1 outside two bump bands and
vanishes exactly on M_alpha x {10} and M_beta x {-10}, the minimal sets of
the two circle maps; the angular isotopy phi_t interpolates linearly
between the beta-lift (t <= -5) and the alpha-lift (t >= 5).

``HorseshoeCore`` is the exact two-branch affine model of an area
preserving map that stretches the rectangle R = [0,1/4] x [-1/4,0] by 5,
winds it once around the annulus, and lays it back across R.  Restricted
to the two vertical strips it is exactly affine, which makes every
periodic-orbit computation available in rational arithmetic.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from . import circle
from .annulus import (AnnulusMap, AnnulusPoint, LiftPoint, annulus_dist,
                      bisect_increasing, lift_of)
from .errors import ItineraryViolationError, OutOfDomainError


# ---------------------------------------------------------------------------
# The twist family with prescribed end rotation numbers
# ---------------------------------------------------------------------------

def _bump(t, center):
    """C^1 cosine bump: peak 1 exactly at ``center``, support radius 4.

    The slope bound pi/8 < 1 keeps t -> t - g(theta, t) strictly increasing.
    """
    t = np.asarray(t, float)
    u = t - center
    out = np.where(np.abs(u) < 4.0, 0.5 * (1.0 + np.cos(np.pi * u / 4.0)), 0.0)
    return out


class PaperExampleMap(AnnulusMap):
    """Annulus homeomorphism with end rotation numbers (alpha, beta)."""

    variant = "paper_example"

    def __init__(self, alpha: float, beta: float, tol: float = 1e-6):
        self.alpha = float(alpha)
        self.beta = float(beta)
        self.tol = float(tol)
        self.f_alpha = self._resolve(alpha, tol)
        self.f_beta = self._resolve(beta, tol)
        self.alpha_kind = self.f_alpha.kind
        self.beta_kind = self.f_beta.kind

    @staticmethod
    def _resolve(value, tol):
        if circle.is_near_rational(value, tol):
            return circle.make_rigid_rotation(value)
        return circle.make_denjoy(value, tol)

    # -- building blocks ------------------------------------------------

    def g(self, theta, t):
        """Height drop in [0, 1]; zero exactly at the two minimal levels."""
        lam = _bump(t, 10.0)
        mu = _bump(t, -10.0)
        theta = np.asarray(theta, float)
        out = np.ones(np.broadcast(theta, np.asarray(t, float)).shape)
        out = out - lam * (1.0 - self._ga(theta, lam)) - mu * (1.0 - self._gb(theta, mu))
        if out.shape == ():
            return float(out)
        return out

    def _ga(self, theta, lam):
        # evaluate the circle profile only where the bump is active
        if np.all(lam == 0.0):
            return np.zeros(np.broadcast(theta, lam).shape)
        return self.f_alpha.g(theta)

    def _gb(self, theta, mu):
        if np.all(mu == 0.0):
            return np.zeros(np.broadcast(theta, mu).shape)
        return self.f_beta.g(theta)

    def isotopy_weight(self, t):
        return float(np.clip((t + 5.0) / 10.0, 0.0, 1.0))

    def phi_lift(self, x, t):
        """Lift of the angular isotopy: convex combination of the two lifts."""
        w = self.isotopy_weight(t)
        if w == 1.0:
            return self.f_alpha.eval(x)
        if w == 0.0:
            return self.f_beta.eval(x)
        return x + (w * (self.f_alpha.eval(x) - x) + (1.0 - w) * (self.f_beta.eval(x) - x))

    def phi_lift_inverse(self, xp, t):
        w = self.isotopy_weight(t)
        if w == 1.0:
            return self.f_alpha.inverse(xp)
        if w == 0.0:
            return self.f_beta.inverse(xp)
        lo_d, hi_d = self.displacement_bounds()
        return bisect_increasing(lambda x: self.phi_lift(x, t) - xp,
                                 xp - hi_d - 1.0, xp - lo_d + 1.0)

    # -- map interface ----------------------------------------------------

    def lift_eval(self, p) -> LiftPoint:
        x, t = p
        theta = x - math.floor(x)
        return LiftPoint(self.phi_lift(x, t), t - float(self.g(theta, t)))

    def lift_inverse(self, p) -> LiftPoint:
        xp, tp = p
        if tp >= 4.0:
            x = self.f_alpha.inverse(xp)
            theta = x - math.floor(x)
            t = bisect_increasing(lambda s: s - float(self.g(theta, s)) - tp,
                                  max(5.0, tp), tp + 1.0)
            return LiftPoint(x, t)
        if tp <= -6.0:
            x = self.f_beta.inverse(xp)
            theta = x - math.floor(x)
            t = bisect_increasing(lambda s: s - float(self.g(theta, s)) - tp,
                                  tp, min(-5.0, tp + 1.0))
            return LiftPoint(x, t)
        # middle band: g == 1, so the source height is t' + 1 exactly
        t = tp + 1.0
        return LiftPoint(self.phi_lift_inverse(xp, t), t)

    def eval_batch(self, xs, ts):
        xs = np.asarray(xs, float)
        ts = np.asarray(ts, float)
        thetas = xs - np.floor(xs)
        w = np.clip((ts + 5.0) / 10.0, 0.0, 1.0)
        fa = self.f_alpha.eval(xs)
        fb = self.f_beta.eval(xs)
        xp = xs + (w * (fa - xs) + (1.0 - w) * (fb - xs))
        lam = _bump(ts, 10.0)
        mu = _bump(ts, -10.0)
        ga = self.f_alpha.g(thetas)
        gb = self.f_beta.g(thetas)
        g = 1.0 - lam * (1.0 - ga) - mu * (1.0 - gb)
        return xp, ts - g, np.ones(xs.shape, bool)

    def displacement_bounds(self):
        lo = min(self.alpha, self.beta)
        hi = max(self.alpha, self.beta)
        return (lo - 1.0, hi + 1.0)

    def to_config(self):
        def side(value, lift):
            doc = {"value": repr(float(value)), "kind": lift.kind}
            if lift.kind == "rigid" and lift.rational is not None:
                doc["p"] = lift.rational.numerator
                doc["q"] = lift.rational.denominator
            return doc

        return {
            "variant": self.variant,
            "alpha": side(self.alpha, self.f_alpha),
            "beta": side(self.beta, self.f_beta),
            "tolerances": {"denjoy_tol": repr(self.tol)},
        }


def build_paper_example(alpha: float, beta: float, tol: float = 1e-6) -> PaperExampleMap:
    """Construct the twist family member with end rotation numbers (alpha, beta).

    Near-rational parameters resolve to rigid circle factors, irrational-in-
    practice ones to Denjoy factors; the decision is recorded on the map
    (``alpha_kind`` / ``beta_kind``), never raised as an error.
    """
    return PaperExampleMap(alpha, beta, tol)


# ---------------------------------------------------------------------------
# The winding horseshoe core
# ---------------------------------------------------------------------------

# Rectangle data, exact.
R_THETA = (Fraction(0), Fraction(1, 4))
R_T = (Fraction(-1, 4), Fraction(0))
R0_THETA = (Fraction(0), Fraction(1, 20))
R1_THETA = (Fraction(1, 5), Fraction(1, 4))

_FIVE = Fraction(5)
_DOM_EPS = 1e-12  # float-path slack at the branch boundaries


class HorseshoeCore(AnnulusMap):
    """Two-branch affine horseshoe on R0 u R1, exact on Fractions.

    Branch 0 (theta in [0, 1/20]):   (theta, t) -> (5 theta, t/5)
    Branch 1 (theta in [1/5, 1/4]):  (theta, t) -> (5 theta - 1, t/5 - 1/5)

    The lift fixes every lift of a = (0, 0); the lift displacement of
    b = (1/4, -1/4) is then exactly 1.  Both fixed points sit at corners of
    the window R = [0, 1/4] x [-1/4, 0].
    """

    variant = "horseshoe_core"

    fixed_a = AnnulusPoint(0.0, 0.0)
    fixed_b = AnnulusPoint(0.25, -0.25)

    def _branch(self, theta, t, exact):
        if exact:
            in_t = R_T[0] <= t <= R_T[1]
            if in_t and R0_THETA[0] <= theta <= R0_THETA[1]:
                return 0
            if in_t and R1_THETA[0] <= theta <= R1_THETA[1]:
                return 1
            return -1
        e = _DOM_EPS
        in_t = -0.25 - e <= t <= 0.0 + e
        if in_t and -e <= theta <= 0.05 + e:
            return 0
        if in_t and 0.2 - e <= theta <= 0.25 + e:
            return 1
        return -1

    def lift_eval(self, p) -> LiftPoint:
        x, t = p
        exact = isinstance(x, Fraction)
        m = math.floor(x)
        theta = x - m
        branch = self._branch(theta, t, exact)
        if branch < 0:
            raise OutOfDomainError(f"point {p} outside R0 u R1")
        five = _FIVE if exact else 5.0
        if branch == 0:
            return LiftPoint(m + five * theta, t / five)
        return LiftPoint(m + five * theta, t / five - 1 / five)

    def lift_inverse(self, p) -> LiftPoint:
        xp, tp = p
        exact = isinstance(xp, Fraction)
        five = _FIVE if exact else 5.0
        mp = math.floor(xp)
        thetap = xp - mp
        e = 0 if exact else _DOM_EPS
        if thetap > 0.25 + e:
            raise OutOfDomainError(f"point {p} outside h(R0 u R1)")
        if -0.05 - e <= tp <= 0.0 + e:
            # branch 0 image
            return LiftPoint(mp + thetap / five, five * tp)
        if -0.25 - e <= tp <= -0.2 + e:
            # branch 1 image; the lift coordinate came from one deck lower
            return LiftPoint(mp - 1 + (thetap + 1) / five, five * tp + 1)
        raise OutOfDomainError(f"point {p} outside h(R0 u R1)")

    def eval_batch(self, xs, ts):
        xs = np.asarray(xs, float)
        ts = np.asarray(ts, float)
        m = np.floor(xs)
        th = xs - m
        e = _DOM_EPS
        in_t = (ts >= -0.25 - e) & (ts <= 0.0 + e)
        b0 = in_t & (th >= -e) & (th <= 0.05 + e)
        b1 = in_t & (th >= 0.2 - e) & (th <= 0.25 + e)
        ok = b0 | b1
        out_x = np.where(ok, m + 5.0 * th, np.nan)
        out_t = np.where(b0, ts / 5.0, np.where(b1, ts / 5.0 - 0.2, np.nan))
        return out_x, out_t, ok

    def domain_strips(self):
        return [(0.0, 0.05), (0.2, 0.25)]

    def domain_cells(self, q: int):
        """Angular intervals whose orbits stay in R0 u R1 for q steps.

        Exact branch pullback: 2^q closed intervals, padded outward by a
        rounding guard so the float test never drops a genuine cell.
        """
        cells = [(R0_THETA[0], R0_THETA[1]), (R1_THETA[0], R1_THETA[1])]
        for _ in range(q - 1):
            nxt = []
            for lo, hi in cells:
                nxt.append((lo / 5, hi / 5))
                nxt.append(((lo + 1) / 5, (hi + 1) / 5))
            cells = sorted(nxt)
        return [(float(lo) - 1e-12, float(hi) + 1e-12) for lo, hi in cells]

    def displacement_bounds(self):
        return (0.0, 1.0)

    def lipschitz(self):
        return 5.0

    def to_config(self):
        return {"variant": self.variant}

    # -- exact symbolic machinery ----------------------------------------

    def branch_extension(self, word: str):
        """Affine extension of h~^q o T^{-p} agreeing with the map on the
        itinerary cell of ``word``'s periodic point.

        Returns (F, fixed_point, p) with F a float callable on R^2.  Used for
        fixed point index loops, which must evaluate in a full neighbourhood
        of the point (the restricted map is undefined across the window
        edge, the affine branch formulas are not).
        """
        pt, p, orbit_pts = horseshoe_symbolic_point(word, with_orbit=True)
        # compose x -> 5x - 4*m_k and t -> t/5 - w_k/5 along the exact orbit
        ax, bx = Fraction(1), Fraction(0)
        at, bt = Fraction(1), Fraction(0)
        for k, ch in enumerate(word):
            m_k = math.floor(orbit_pts[k][0])
            ax, bx = 5 * ax, 5 * bx - 4 * m_k
            at, bt = at / 5, bt / 5 - (Fraction(1, 5) if ch == "1" else 0)
        bx -= p
        cax, cbx, cat, cbt = float(ax), float(bx), float(at), float(bt)

        def ext(x, t):
            return (cax * x + cbx, cat * t + cbt)

        return ext, LiftPoint(float(pt[0]), float(pt[1])), p


def build_horseshoe_core() -> HorseshoeCore:
    return HorseshoeCore()


def horseshoe_symbolic_point(word: str, with_orbit: bool = False):
    """Exact period-q point of the horseshoe core with itinerary ``word``.

    Returns ((theta, t) as Fractions, p) where p counts the 1-letters; a
    lift of the point satisfies h~^q = T^p on it exactly (checked).  Every
    binary word is realized; if exact arithmetic ever contradicted the
    itinerary an ItineraryViolationError would be raised.
    """
    if not word or any(c not in "01" for c in word):
        raise ValueError("word must be a nonempty string over {0,1}")
    q = len(word)
    digits = [int(c) for c in word]
    denom = 5**q - 1
    theta0 = Fraction(sum(d * 5 ** (q - 1 - k) for k, d in enumerate(digits)), denom)
    t0 = -Fraction(sum(d * 5**k for k, d in enumerate(digits)), denom)

    core = HorseshoeCore()
    pt = (theta0, t0)
    orbit_pts = [pt]
    z = (theta0, t0)
    for k, d in enumerate(digits):
        theta, t = z
        frac_theta = theta - math.floor(theta)
        if d == 0 and not (R0_THETA[0] <= frac_theta <= R0_THETA[1]):
            raise ItineraryViolationError(f"step {k} of {word!r} leaves R0")
        if d == 1 and not (R1_THETA[0] <= frac_theta <= R1_THETA[1]):
            raise ItineraryViolationError(f"step {k} of {word!r} leaves R1")
        if not (R_T[0] <= t <= R_T[1]):
            raise ItineraryViolationError(f"step {k} of {word!r} leaves R")
        z = core.lift_eval(z)
        orbit_pts.append(z)
    p = sum(digits)
    if z[0] != theta0 + p or z[1] != t0:
        raise ItineraryViolationError(
            f"exact lift relation failed for {word!r}: got {z}, want ({theta0 + p}, {t0})"
        )
    if with_orbit:
        return pt, p, orbit_pts
    return pt, p


def is_valid_chain(m: AnnulusMap, points, eps: float) -> bool:
    """Check d(h(x_i), x_{i+1}) < eps for every consecutive pair."""
    for a, b in zip(points[:-1], points[1:]):
        try:
            img = m.lift_eval(lift_of(a))
        except OutOfDomainError:
            return False
        if annulus_dist((img.x, img.t), (b[0], b[1])) >= eps:
            return False
    return True


def horseshoe_heteroclinic_chain(eps: float):
    """Finite eps-chain a -> b -> a through the two heteroclinic corners.

    The only nonzero jumps happen within eps of a and b; all other steps are
    exact orbit segments through (1/4, 0) in W^u(a) n W^s(b) and (0, -1/4)
    in W^u(b) n W^s(a).  Points are returned as float AnnulusPoints.
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    a = (Fraction(0), Fraction(0))
    b = (Fraction(1, 4), Fraction(-1, 4))
    quarter = Fraction(1, 4)
    # strict exact threshold: jump distances round to floats, so stay a
    # safety factor below eps to keep every float comparison strict
    eps_frac = Fraction(eps) * Fraction(999, 1000)

    def depth(target_eps):
        k = 0
        while quarter / 5**k >= target_eps:
            k += 1
        return k

    k_jump = depth(eps_frac)  # 1/(4 * 5^k) < 0.999 eps

    pts = [a]
    # unstable a -> (1/4, 0): backward orbit points (1/4 / 5^k, 0)
    for k in range(k_jump, -1, -1):
        pts.append((quarter / 5**k, Fraction(0)))
    # forward through R1 toward b: (1/4, t_j), t_{j+1} = t_j/5 - 1/5
    t = Fraction(0)
    while True:
        t_next = t / 5 - Fraction(1, 5)
        if abs(t_next + quarter) < eps_frac:
            break
        t = t_next
        pts.append((quarter, t))
    pts.append(b)
    # unstable b -> (0, -1/4): backward orbit ( (1 - 5^-k)/4, -1/4 )
    for k in range(k_jump, -1, -1):
        pts.append(((1 - Fraction(1, 5**k)) / 4, -quarter))
    # forward through R0 toward a: (0, -1/4 / 5^j)
    t = -quarter
    while True:
        t_next = t / 5
        if abs(t_next) < eps_frac:
            break
        t = t_next
        pts.append((Fraction(0), t))
    pts.append(a)

    return [AnnulusPoint(float(th), float(tt)) for th, tt in pts]
