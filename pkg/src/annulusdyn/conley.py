"""Grid-level chain recurrence: box digraphs, chain classes, Lyapunov data.

The transition digraph is an outer approximation: every one-step move of
the map, relaxed by an eps-jump, is covered by an edge, so grid recurrence
over-covers true chain recurrence.  Boxes whose (dilated) images poke out
of the window feed a distinguished EXIT sink that earns no recurrence
credit -- the isolating-neighbourhood convention that makes window-restricted
analysis sound.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import _graph
from .annulus import AnnulusMap

_CHUNK = 1 << 16


@dataclass(frozen=True)
class Grid:
    """Uniform box grid over a window, 2^depth boxes per axis.

    The angular direction is treated cyclically when the window spans the
    full circle.  Box ids are ix * ny + it with it counting upward in t.
    """

    window: tuple[float, float, float, float]
    depth: int

    def __post_init__(self):
        x_lo, x_hi, t_lo, t_hi = self.window
        if not (x_hi > x_lo and t_hi > t_lo):
            raise ValueError("window must have positive extent")
        if x_hi - x_lo > 1.0 + 1e-12:
            raise ValueError("angular extent must be <= 1")

    @property
    def nx(self) -> int:
        return 1 << self.depth

    @property
    def ny(self) -> int:
        return 1 << self.depth

    @property
    def n_boxes(self) -> int:
        return self.nx * self.ny

    @property
    def wx(self) -> float:
        return (self.window[1] - self.window[0]) / self.nx

    @property
    def wt(self) -> float:
        return (self.window[3] - self.window[2]) / self.ny

    @property
    def cyclic(self) -> bool:
        return abs((self.window[1] - self.window[0]) - 1.0) < 1e-12

    @property
    def boxdiam(self) -> float:
        return math.hypot(self.wx, self.wt)

    def box_of(self, theta: float, t: float) -> int:
        """Box id containing (theta, t); -1 outside the window."""
        x_lo, x_hi, t_lo, t_hi = self.window
        if self.cyclic:
            theta = theta - math.floor(theta - x_lo)
        if not (x_lo <= theta <= x_hi and t_lo <= t <= t_hi):
            return -1
        ix = min(int((theta - x_lo) / self.wx), self.nx - 1)
        it = min(int((t - t_lo) / self.wt), self.ny - 1)
        return ix * self.ny + it

    def box_bounds(self, box: int):
        ix, it = divmod(box, self.ny)
        x_lo, _, t_lo, _ = self.window
        return (x_lo + ix * self.wx, x_lo + (ix + 1) * self.wx,
                t_lo + it * self.wt, t_lo + (it + 1) * self.wt)

    def box_center(self, box: int):
        x0, x1, t0, t1 = self.box_bounds(box)
        return (0.5 * (x0 + x1), 0.5 * (t0 + t1))


class BoxDigraph:
    """Outer-approximation transition graph in CSR form.

    Nodes 0..n_boxes-1 are boxes; node n_boxes is the EXIT sink (no
    out-edges).  Edge weights are angular lift displacements at the witness
    sample that generated the edge (deck increments included).
    """

    def __init__(self, grid, eps, seed, indptr, indices, weights, n_boxes=None):
        self.grid = grid
        self.eps = eps
        self.seed = seed
        self.indptr = indptr
        self.indices = indices
        self.weights = weights
        self.n_boxes = grid.n_boxes if n_boxes is None else n_boxes

    @property
    def exit_id(self) -> int:
        return self.n_boxes

    @property
    def n_nodes(self) -> int:
        return self.n_boxes + 1

    @property
    def n_edges(self) -> int:
        return int(self.indices.shape[0])

    def out_edges(self, box: int):
        sl = slice(self.indptr[box], self.indptr[box + 1])
        return self.indices[sl], self.weights[sl]

    def edge_sources(self) -> np.ndarray:
        return np.repeat(np.arange(self.n_nodes, dtype=np.int32),
                         np.diff(self.indptr))

    @classmethod
    def from_edges(cls, n_boxes, edges, weights=None, grid=None, eps=0.0, seed=0):
        """Small-graph constructor for tests and toy examples.

        ``edges`` is an iterable of (u, v); node n_boxes is EXIT.
        """
        edges = list(edges)
        if weights is None:
            weights = [0.0] * len(edges)
        order = sorted(range(len(edges)), key=lambda k: edges[k])
        indptr = np.zeros(n_boxes + 2, np.int64)
        for u, _ in edges:
            indptr[u + 1] += 1
        indptr = np.cumsum(indptr)
        indices = np.empty(len(edges), np.int32)
        w = np.empty(len(edges), np.float64)
        fill = indptr[:-1].copy()
        for k in order:
            u, v = edges[k]
            indices[fill[u]] = v
            w[fill[u]] = weights[k]
            fill[u] += 1
        if grid is None:
            grid = Grid((0.0, 1.0, 0.0, 1.0), 0)
        return cls(grid, eps, seed, indptr, indices, w, n_boxes=n_boxes)


def _sample_points(m: AnnulusMap, grid: Grid, seed: int, n_random: int):
    """Deterministic + random sample points per box, with activity mask.

    Layout per box: 4 corners, center, strip-clipped corners (4 per strip),
    then n_random uniform interior points.  Strip corners are inactive when
    the strip misses the box; they make the affine-branch hulls exact.
    """
    nx, ny = grid.nx, grid.ny
    x_lo, _, t_lo, _ = grid.window
    wx, wt = grid.wx, grid.wt
    ix = np.repeat(np.arange(nx), ny)
    it = np.tile(np.arange(ny), nx)
    x0 = x_lo + ix * wx
    x1 = x0 + wx
    t0 = t_lo + it * wt
    t1 = t0 + wt

    strips = m.domain_strips() or []
    parts_x = [x0, x0, x1, x1, 0.5 * (x0 + x1)]
    parts_t = [t0, t1, t0, t1, 0.5 * (t0 + t1)]
    parts_active = [np.ones(grid.n_boxes, bool)] * 5
    strip_slots = []
    for (a, b) in strips:
        lo = np.maximum(x0, a)
        hi = np.minimum(x1, b)
        act = lo <= hi
        lo = np.where(act, lo, x0)
        hi = np.where(act, hi, x0)
        strip_slots.append((len(parts_x), len(parts_x) + 4))
        parts_x += [lo, lo, hi, hi]
        parts_t += [t0, t1, t0, t1]
        parts_active += [act] * 4
    rng = np.random.default_rng(seed)
    rx = rng.uniform(0.0, 1.0, size=(grid.n_boxes, n_random))
    rt = rng.uniform(0.0, 1.0, size=(grid.n_boxes, n_random))
    for k in range(n_random):
        parts_x.append(x0 + rx[:, k] * wx)
        parts_t.append(t0 + rt[:, k] * wt)
        parts_active.append(np.ones(grid.n_boxes, bool))

    xs = np.stack(parts_x, axis=1)
    ts = np.stack(parts_t, axis=1)
    active = np.stack(parts_active, axis=1)
    return xs, ts, active, strip_slots


def transition_graph(m: AnnulusMap, grid: Grid, eps="auto", seed: int = 0,
                     n_random: int = 8) -> BoxDigraph:
    """Outer-approximation digraph: sample images dilated by eps.

    Edges go from each box to every box met by a dilated sample image, plus
    per-strip hull fill when the map declares affine strips (making the
    cover deterministic there); EXIT collects domain exits and window
    leaks.  Edge weights are witness displacements, first witness wins.
    """
    if eps == "auto":
        eps = 2.0 * grid.boxdiam
    eps = float(eps)
    if eps < grid.boxdiam:
        warnings.warn("eps below box diameter: the sampled cover may be unsound")

    xs, ts, active, strip_slots = _sample_points(m, grid, seed, n_random)
    n_boxes, S = xs.shape
    G = max(len(strip_slots), 1)
    x_lo = grid.window[0]
    t_lo = grid.window[2]

    all_idx = []
    all_w = []
    counts_full = np.zeros(n_boxes, np.int64)
    scratch_cells = 1 << 22
    stamp = np.zeros(scratch_cells, np.int64)
    wbuf = np.zeros(scratch_cells, np.float64)
    cells = np.zeros(scratch_cells, np.int64)

    for start in range(0, n_boxes, _CHUNK):
        stop = min(start + _CHUNK, n_boxes)
        cx = xs[start:stop]
        ct = ts[start:stop]
        ca = active[start:stop]
        ix, it_, ok = m.eval_batch(cx, ct)
        ok = ok & ca
        circ_u = 1.0 / grid.wx  # boxes per full circle turn
        with np.errstate(invalid="ignore"):
            disp = ix - cx
            img_u = ((ix - x_lo) / grid.wx) % circ_u
            img_v = (it_ - t_lo) / grid.wt
        img_u = np.where(ok, img_u, 0.0)
        img_v = np.where(ok, img_v, 0.0)
        disp = np.where(ok, disp, 0.0)

        nb = stop - start
        # hulls need contiguous (unreduced) u intervals: rebuild from raw
        # lift coordinates, then shift each interval near the canonical turn
        with np.errstate(invalid="ignore"):
            raw_u = (ix - x_lo) / grid.wx
        raw_u = np.where(ok, raw_u, 0.0)
        hull = np.zeros((nb, G, 4), np.float64)
        hull_ok = np.zeros((nb, G), bool)
        hull_w = np.zeros((nb, G), np.float64)
        for g, (s0, s1) in enumerate(strip_slots):
            sub_ok = ok[:, s0:s1]
            any_ok = sub_ok.any(axis=1)
            uu = np.where(sub_ok, raw_u[:, s0:s1], np.inf)
            vv = np.where(sub_ok, img_v[:, s0:s1], np.inf)
            u0 = uu.min(axis=1)
            hull[:, g, 2] = vv.min(axis=1)
            uu = np.where(sub_ok, raw_u[:, s0:s1], -np.inf)
            vv = np.where(sub_ok, img_v[:, s0:s1], -np.inf)
            u1 = uu.max(axis=1)
            hull[:, g, 3] = vv.max(axis=1)
            with np.errstate(invalid="ignore"):
                shift = np.floor(0.5 * (u0 + u1) / circ_u) * circ_u
            hull[:, g, 0] = u0 - shift
            hull[:, g, 1] = u1 - shift
            hull_ok[:, g] = any_ok
            first = np.argmax(sub_ok, axis=1)
            hull_w[:, g] = disp[np.arange(nb), s0 + first]
        hull = np.where(np.isfinite(hull), hull, 0.0)

        ex = eps / grid.wx
        et = eps / grid.wt
        counts = np.zeros(nb, np.int64)
        dummy_i = np.zeros(1, np.int32)
        dummy_w = np.zeros(1, np.float64)
        dummy_o = np.zeros(nb, np.int64)
        _graph.mark_edges(grid.nx, grid.ny, grid.cyclic, circ_u,
                          img_u, img_v, ok, ca, disp, hull, hull_ok, hull_w,
                          ex, et, stamp, wbuf, cells,
                          counts, dummy_i, dummy_w, dummy_o, 0)
        offsets = np.zeros(nb, np.int64)
        np.cumsum(counts[:-1], out=offsets[1:])
        total = int(counts.sum())
        idx_arr = np.empty(total, np.int32)
        w_arr = np.empty(total, np.float64)
        stamp[:] = 0
        _graph.mark_edges(grid.nx, grid.ny, grid.cyclic, circ_u,
                          img_u, img_v, ok, ca, disp, hull, hull_ok, hull_w,
                          ex, et, stamp, wbuf, cells,
                          counts, idx_arr, w_arr, offsets, 1)
        stamp[:] = 0
        counts_full[start:stop] = counts
        all_idx.append(idx_arr)
        all_w.append(w_arr)

    indices = np.concatenate(all_idx) if all_idx else np.zeros(0, np.int32)
    weights = np.concatenate(all_w) if all_w else np.zeros(0, np.float64)
    indptr = np.zeros(n_boxes + 2, np.int64)
    np.cumsum(counts_full, out=indptr[1:-1])
    indptr[-1] = indptr[-2]  # EXIT: no out-edges
    return BoxDigraph(grid, eps, seed, indptr, indices, weights)


@dataclass
class ChainClass:
    """One condensation class: id is its topological position."""

    class_id: int
    boxes: np.ndarray
    recurrent: bool

    def __len__(self):
        return len(self.boxes)


class ChainDecomposition:
    """SCC condensation of a box digraph, topologically sorted.

    Acts as a sequence of ChainClass (sources first).  ``labels`` maps each
    box to its class id; the EXIT node carries ``exit_class``.
    """

    def __init__(self, dg: BoxDigraph):
        self.digraph = dg
        n = dg.n_nodes
        mat = csr_matrix((np.ones(dg.n_edges, np.int8), dg.indices, dg.indptr),
                         shape=(n, n))
        n_comp, raw = connected_components(mat, directed=True, connection="strong")
        src = dg.edge_sources()
        lu = raw[src].astype(np.int64)
        lv = raw[dg.indices].astype(np.int64)
        cross = lu != lv
        enc = np.unique(lu[cross] * n_comp + lv[cross])
        cu = (enc // n_comp).astype(np.int64)
        cv = (enc % n_comp).astype(np.int64)
        order_e = np.argsort(cu, kind="stable")
        cu, cv = cu[order_e], cv[order_e]
        cond_indptr = np.zeros(n_comp + 1, np.int64)
        np.add.at(cond_indptr, cu + 1, 1)
        cond_indptr = np.cumsum(cond_indptr)
        topo, rank, is_dag = _graph.kahn_topo(n_comp, cond_indptr, cv)
        assert is_dag, "condensation must be acyclic"

        # relabel classes by topological position
        self.labels = rank[raw].astype(np.int64)
        self.n_classes = n_comp
        self.exit_class = int(self.labels[dg.exit_id])
        self.cond_indptr, self.cond_indices = self._relabel(cu, cv, rank, n_comp)

        sizes = np.bincount(self.labels, minlength=n_comp)
        selfloop = np.zeros(n_comp, bool)
        same = self.labels[src] == self.labels[dg.indices]
        np.logical_or.at(selfloop, self.labels[src][same], True)
        box_labels = self.labels[:dg.n_boxes]
        box_sizes = np.bincount(box_labels, minlength=n_comp)
        self.recurrent_mask = (box_sizes >= 2) | (selfloop & (box_sizes >= 1))
        self.recurrent_mask[self.exit_class] = False
        self._sizes = sizes
        self._order = np.argsort(box_labels, kind="stable")
        self._bounds = np.searchsorted(box_labels[self._order],
                                       np.arange(n_comp + 1))

    @staticmethod
    def _relabel(cond_srcs, cond_dsts, rank, n_comp):
        ru = rank[cond_srcs]
        rv = rank[cond_dsts]
        order = np.argsort(ru, kind="stable")
        new_indptr = np.zeros(n_comp + 1, np.int64)
        np.cumsum(np.bincount(ru, minlength=n_comp), out=new_indptr[1:])
        return new_indptr, rv[order]

    def __len__(self):
        return self.n_classes

    def __getitem__(self, class_id: int) -> ChainClass:
        if not 0 <= class_id < self.n_classes:
            raise IndexError(class_id)
        boxes = self._order[self._bounds[class_id]:self._bounds[class_id + 1]]
        return ChainClass(class_id, boxes, bool(self.recurrent_mask[class_id]))

    def class_of_box(self, box: int) -> int:
        return int(self.labels[box])

    def recurrent_classes(self):
        return [self[c] for c in np.nonzero(self.recurrent_mask)[0]]

    def recurrent_boxes(self) -> np.ndarray:
        mask = self.recurrent_mask[self.labels[:self.digraph.n_boxes]]
        return np.nonzero(mask)[0]


def chain_classes(dg: BoxDigraph) -> ChainDecomposition:
    """SCC condensation with recurrence flags, topologically sorted."""
    return ChainDecomposition(dg)


@dataclass
class GridLyapunov:
    """Per-box Lyapunov values in [0, 1].

    Values strictly decrease across every condensation edge; each recurrent
    class sits on a plateau drawn from the middle-thirds Cantor set, with
    distinct plateaus for distinct classes (ternary digit width ``digits``).
    """

    box_values: np.ndarray
    node_values: np.ndarray
    digits: int
    decomposition: ChainDecomposition

    def plateau(self, class_id: int) -> float:
        return float(self.node_values[class_id])


def _cantor_endpoint(k: np.ndarray, digits: int) -> np.ndarray:
    """Order-preserving embedding of 1..K into middle-thirds endpoints."""
    val = np.zeros(k.shape, np.float64)
    for j in range(1, digits + 1):
        bit = (k >> (digits - j)) & 1
        val = val + bit * (2.0 * 3.0 ** (-j))
    return val


def lyapunov(dg: BoxDigraph) -> GridLyapunov:
    """Combinatorial complete Lyapunov function on the box grid.

    Condensation classes are slotted by their longest-path distance to a
    sink (strictly decreasing along edges); recurrent classes receive
    successive middle-thirds Cantor endpoints, transient classes sit half a
    ternary unit above their slot so their values never collide.
    """
    dec = chain_classes(dg)
    n = dec.n_classes
    order = np.arange(n, dtype=np.int64)  # labels are already topological
    level = _graph.sink_levels(n, dec.cond_indptr, dec.cond_indices.astype(np.int64),
                               order)
    slot = np.lexsort((np.arange(n), level))
    slot_rank = np.empty(n, np.int64)
    slot_rank[slot] = np.arange(n)
    digits = max(int(np.ceil(np.log2(n + 2))), 2)
    base = _cantor_endpoint(slot_rank + 1, digits)
    values = np.where(dec.recurrent_mask, base, base + 0.5 * 3.0 ** (-digits))
    box_values = values[dec.labels[:dg.n_boxes]]
    return GridLyapunov(box_values, values, digits, dec)


def is_cantor_endpoint(value: float, digits: int, tol: float = 1e-9) -> bool:
    """Exact ternary-representation membership check (digits 0/2 only)."""
    scaled = value * 3.0**digits
    nearest = round(scaled)
    if abs(scaled - nearest) > tol * 3.0**digits:
        return False
    n = int(nearest)
    for _ in range(digits):
        n, r = divmod(n, 3)
        if r == 1:
            return False
    return n == 0


@dataclass
class AttractorPair:
    """Forward-closed attractor box set and its dual repellor box set."""

    attractor: np.ndarray
    repellor: np.ndarray
    attractor_has_exit: bool
    repellor_has_exit: bool
    class_ids: tuple


@dataclass
class AttractorAnalysis:
    pairs: list
    complete: bool
    identity_holds: bool | None
    recurrent_boxes: np.ndarray


def attractor_pairs(dg: BoxDigraph, cap: int = 4096) -> AttractorAnalysis:
    """Attractor / dual-repellor pairs from recurrent-class downsets.

    Attractors are forward closures of downward-closed families of
    recurrent classes (EXIT acting as an absorbing pseudo-class); the dual
    repellor of A is the set of boxes from which some infinite path avoids
    A.  When enumeration completes (at most ``cap`` downsets) the analysis
    verifies the identity  recurrent = intersection of (A u A*).
    """
    dec = chain_classes(dg)
    n_nodes = dg.n_nodes
    indptr64 = dg.indptr.astype(np.int64)
    indices64 = dg.indices.astype(np.int64)

    rec_ids = list(np.nonzero(dec.recurrent_mask)[0])
    units = rec_ids + [dec.exit_class]

    # reachability closure among the unit classes
    reach_masks = {}
    for c in units:
        seeds = np.zeros(n_nodes, np.bool_)
        if c == dec.exit_class:
            seeds[dg.exit_id] = True
        else:
            seeds[dec[c].boxes] = True
        reach_masks[c] = _graph.bfs_forward(indptr64, indices64, n_nodes, seeds)
    closure = {c: frozenset(d for d in units
                            if d == c or _unit_hit(reach_masks[c], dec, dg, d))
               for c in units}

    downsets = {frozenset()}
    complete = True
    for c in units:
        additions = {s | closure[c] for s in downsets}
        downsets |= additions
        if len(downsets) > cap:
            warnings.warn(f"attractor enumeration capped at {cap} downsets")
            complete = False
            downsets = set(list(downsets)[:cap])
            break

    pairs = []
    inter = np.ones(dg.n_boxes, np.bool_)
    for D in sorted(downsets, key=lambda s: (len(s), sorted(s))):
        seeds = np.zeros(n_nodes, np.bool_)
        for c in D:
            if c == dec.exit_class:
                seeds[dg.exit_id] = True
            else:
                seeds[dec[c].boxes] = True
        a_mask = _graph.bfs_forward(indptr64, indices64, n_nodes, seeds) if D else \
            np.zeros(n_nodes, np.bool_)
        r_mask = _graph.may_avoid(indptr64, indices64, n_nodes, a_mask, dg.exit_id)
        pairs.append(AttractorPair(
            attractor=np.nonzero(a_mask[:dg.n_boxes])[0],
            repellor=np.nonzero(r_mask[:dg.n_boxes])[0],
            attractor_has_exit=bool(a_mask[dg.exit_id]),
            repellor_has_exit=bool(r_mask[dg.exit_id]),
            class_ids=tuple(sorted(D)),
        ))
        inter &= a_mask[:dg.n_boxes] | r_mask[:dg.n_boxes]

    recurrent = dec.recurrent_boxes()
    identity = None
    if complete:
        mask_rec = np.zeros(dg.n_boxes, np.bool_)
        mask_rec[recurrent] = True
        identity = bool(np.array_equal(inter, mask_rec))
    return AttractorAnalysis(pairs, complete, identity, recurrent)


def _unit_hit(reach_mask, dec: ChainDecomposition, dg: BoxDigraph, d: int) -> bool:
    if d == dec.exit_class:
        return bool(reach_mask[dg.exit_id])
    boxes = dec[d].boxes
    return bool(reach_mask[boxes[0]]) if len(boxes) else False
