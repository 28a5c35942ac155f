"""Numba kernels for box-digraph construction and analysis.

All graphs are CSR triples (indptr, indices, weights) over int32 node ids.
The EXIT sink, when present, is the last node and has no out-edges.
"""

from __future__ import annotations

import numpy as np
from numba import njit

INF = 1e30


@njit(cache=True, inline="always")
def _range_marks(ulo, uhi, vlo, vhi, ex, et, nx, ny, circ_u, cyclic):
    """Clipped index ranges of the dilated image rect, over circle copies.

    Returns (i0a, i1a, i0b, i1b, j0, j1, fits): two candidate column ranges
    (second may be empty, i0b > i1b) from the shifted circle copies, one row
    range, and whether the dilated rect fits inside the window.  A window on
    the annulus catches every deck translate of the image, so membership is
    tested on the canonical copy and its two unit shifts.
    """
    j0 = int(np.floor(vlo - et))
    j1 = int(np.floor(vhi + et))
    fits_t = vlo - et >= 0.0 and vhi + et <= ny
    if j0 < 0:
        j0 = 0
    if j1 > ny - 1:
        j1 = ny - 1

    i0a = 0
    i1a = -1
    i0b = 0
    i1b = -1
    fits_u = cyclic
    for copy in range(-1, 2):
        s = copy * circ_u
        lo = ulo + s - ex
        hi = uhi + s + ex
        if not cyclic and lo >= 0.0 and hi <= nx:
            fits_u = True
        i0 = int(np.floor(lo))
        i1 = int(np.floor(hi))
        if i0 < 0:
            i0 = 0
        if i1 > nx - 1:
            i1 = nx - 1
        if i0 > i1:
            continue
        if i1a < i0a:
            i0a, i1a = i0, i1
        elif i0 <= i1a + 1 and i1 >= i0a - 1:
            if i0 < i0a:
                i0a = i0
            if i1 > i1a:
                i1a = i1
        elif i1b < i0b:
            i0b, i1b = i0, i1
        else:
            # three disjoint clipped copies only occur for huge eps; widen
            # the second range (a sound superset) rather than dropping one
            if i0 < i0b:
                i0b = i0
            if i1 > i1b:
                i1b = i1
    return i0a, i1a, i0b, i1b, j0, j1, fits_t and fits_u


@njit(cache=True)
def mark_edges(nx, ny, cyclic, circ_u,
               img_u, img_v, ok, active, disp,
               hull, hull_ok, hull_w,
               ex, et,
               stamp, wbuf, cells,
               counts, out_indices, out_weights, out_offsets, write):
    """Per-box outer-approximation edges, deterministic order.

    img_u/img_v: sample images in box-index units, u canonical in
    [0, circ_u).  hull: per-group image bounding rects (same units); hull
    cells not claimed by a sample range get the group witness weight.
    counts[b] receives the edge count; with write=1 edges go to
    out_indices/out_weights at out_offsets[b].
    """
    n_boxes = img_u.shape[0]
    S = img_u.shape[1]
    G = hull.shape[1]
    exit_id = nx * ny

    for b in range(n_boxes):
        exit_flag = False
        gx0 = 2**60
        gx1 = -(2**60)
        gt0 = 2**60
        gt1 = -(2**60)
        any_range = False
        for s in range(S + G):
            if s < S:
                if not active[b, s] or not ok[b, s]:
                    continue
                ulo = img_u[b, s]
                uhi = ulo
                vlo = img_v[b, s]
                vhi = vlo
            else:
                g = s - S
                if not hull_ok[b, g]:
                    continue
                ulo = hull[b, g, 0]
                uhi = hull[b, g, 1]
                vlo = hull[b, g, 2]
                vhi = hull[b, g, 3]
            i0a, i1a, i0b, i1b, j0, j1, fits = _range_marks(
                ulo, uhi, vlo, vhi, ex, et, nx, ny, circ_u, cyclic)
            if i1a >= i0a and j1 >= j0:
                if i0a < gx0:
                    gx0 = i0a
                if i1a > gx1:
                    gx1 = i1a
                any_range = True
            if i1b >= i0b and j1 >= j0:
                if i0b < gx0:
                    gx0 = i0b
                if i1b > gx1:
                    gx1 = i1b
                any_range = True
            if any_range:
                if j0 < gt0:
                    gt0 = j0
                if j1 > gt1:
                    gt1 = j1

        count = 0
        if any_range:
            lt = gt1 - gt0 + 1
            token = b + 1
            for s in range(S + G):
                if s < S:
                    if not active[b, s]:
                        continue
                    if not ok[b, s]:
                        exit_flag = True
                        continue
                    ulo = img_u[b, s]
                    uhi = ulo
                    vlo = img_v[b, s]
                    vhi = vlo
                    w = disp[b, s]
                else:
                    g = s - S
                    if not hull_ok[b, g]:
                        continue
                    ulo = hull[b, g, 0]
                    uhi = hull[b, g, 1]
                    vlo = hull[b, g, 2]
                    vhi = hull[b, g, 3]
                    w = hull_w[b, g]
                i0a, i1a, i0b, i1b, j0, j1, fits = _range_marks(
                    ulo, uhi, vlo, vhi, ex, et, nx, ny, circ_u, cyclic)
                if not fits:
                    exit_flag = True
                if j0 > j1:
                    continue
                for rng in range(2):
                    i0 = i0a if rng == 0 else i0b
                    i1 = i1a if rng == 0 else i1b
                    for i in range(i0, i1 + 1):
                        for j in range(j0, j1 + 1):
                            cell = (i - gx0) * lt + (j - gt0)
                            if stamp[cell] != token:
                                stamp[cell] = token
                                wbuf[cell] = w
                                cells[count] = cell
                                count += 1
        else:
            exit_flag = True

        total = count + (1 if exit_flag else 0)
        counts[b] = total
        if write == 1:
            base = out_offsets[b]
            lt = gt1 - gt0 + 1 if any_range else 1
            for c in range(count):
                cell = cells[c]
                i = gx0 + cell // lt
                j = gt0 + cell % lt
                out_indices[base + c] = i * ny + j
                out_weights[base + c] = wbuf[cell]
            if exit_flag:
                out_indices[base + count] = exit_id
                out_weights[base + count] = 0.0


@njit(cache=True)
def kahn_topo(n, indptr, indices):
    """Topological order of a DAG; rank[v] = position in the order."""
    indeg = np.zeros(n, np.int64)
    for e in range(indices.shape[0]):
        indeg[indices[e]] += 1
    order = np.empty(n, np.int64)
    rank = np.empty(n, np.int64)
    head = 0
    tail = 0
    for v in range(n):
        if indeg[v] == 0:
            order[tail] = v
            tail += 1
    while head < tail:
        v = order[head]
        head += 1
        for e in range(indptr[v], indptr[v + 1]):
            u = indices[e]
            indeg[u] -= 1
            if indeg[u] == 0:
                order[tail] = u
                tail += 1
    for k in range(n):
        rank[order[k]] = k
    return order, rank, tail == n


@njit(cache=True)
def sink_levels(n, indptr, indices, order):
    """level[v] = longest path length from v to a sink; strict drop on edges."""
    level = np.zeros(n, np.int64)
    for k in range(n - 1, -1, -1):
        v = order[k]
        best = -1
        for e in range(indptr[v], indptr[v + 1]):
            u = indices[e]
            if level[u] > best:
                best = level[u]
        level[v] = best + 1
    return level


@njit(cache=True)
def karp_min_mean(indptr, indices, weights, n):
    """Exact minimum cycle mean on a strongly connected graph (Karp).

    O(n*m) time and O(n^2) memory; callers keep n small.
    """
    d = np.full((n + 1, n), INF)
    d[0, 0] = 0.0
    for k in range(1, n + 1):
        for v in range(n):
            dv = d[k - 1, v]
            if dv >= INF:
                continue
            for e in range(indptr[v], indptr[v + 1]):
                u = indices[e]
                nd = dv + weights[e]
                if nd < d[k, u]:
                    d[k, u] = nd
    best = INF
    for v in range(n):
        if d[n, v] >= INF:
            continue
        worst = -INF
        for k in range(n):
            if d[k, v] < INF:
                val = (d[n, v] - d[k, v]) / (n - k)
                if val > worst:
                    worst = val
        if worst > -INF and worst < best:
            best = worst
    return best


@njit(cache=True)
def howard_min_mean(indptr, indices, weights, n, max_iter=100000):
    """Minimum cycle mean by policy iteration on a strongly connected graph.

    Returns (mu, converged).  Gains/biases follow the classical mean-payoff
    policy iteration; ties are broken with a small tolerance so float noise
    cannot cycle the policy.
    """
    tol = 1e-12
    policy = np.empty(n, np.int64)
    for v in range(n):
        best = indptr[v]
        bw = weights[best]
        for e in range(indptr[v] + 1, indptr[v + 1]):
            if weights[e] < bw:
                bw = weights[e]
                best = e
        policy[v] = best
    gain = np.zeros(n)
    bias = np.zeros(n)
    visited = np.zeros(n, np.int64)
    onstack = np.zeros(n, np.int64)
    stack = np.empty(n + 1, np.int64)
    cyc = np.empty(n + 1, np.int64)

    for it in range(1, max_iter + 1):
        for v0 in range(n):
            if visited[v0] == it:
                continue
            depth = 0
            v = v0
            while visited[v] != it and onstack[v] != it:
                onstack[v] = it
                stack[depth] = v
                depth += 1
                v = indices[policy[v]]
            if onstack[v] == it and visited[v] != it:
                total = 0.0
                clen = 0
                u = v
                while True:
                    cyc[clen] = u
                    clen += 1
                    total += weights[policy[u]]
                    u = indices[policy[u]]
                    if u == v:
                        break
                mu = total / clen
                gain[v] = mu
                bias[v] = 0.0
                visited[v] = it
                for k in range(clen - 1, 0, -1):
                    u = cyc[k]
                    nxt = cyc[(k + 1) % clen]
                    bias[u] = weights[policy[u]] - mu + bias[nxt]
                    gain[u] = mu
                    visited[u] = it
            for k in range(depth - 1, -1, -1):
                u = stack[k]
                if visited[u] == it:
                    continue
                nxt = indices[policy[u]]
                gain[u] = gain[nxt]
                bias[u] = weights[policy[u]] - gain[nxt] + bias[nxt]
                visited[u] = it

        improved = False
        for v in range(n):
            g = gain[v]
            change = -1
            for e in range(indptr[v], indptr[v + 1]):
                u = indices[e]
                if gain[u] < g - tol:
                    g = gain[u]
                    change = e
            if change >= 0:
                policy[v] = change
                improved = True
        if not improved:
            for v in range(n):
                e0 = policy[v]
                bestval = weights[e0] - gain[v] + bias[indices[e0]]
                change = -1
                for e in range(indptr[v], indptr[v + 1]):
                    u = indices[e]
                    if gain[u] <= gain[v] + tol:
                        val = weights[e] - gain[v] + bias[u]
                        if val < bestval - 1e-10:
                            bestval = val
                            change = e
                if change >= 0:
                    policy[v] = change
                    improved = True
        if not improved:
            mu = INF
            for v in range(n):
                if gain[v] < mu:
                    mu = gain[v]
            return mu, True
    mu = INF
    for v in range(n):
        if gain[v] < mu:
            mu = gain[v]
    return mu, False


@njit(cache=True)
def bfs_forward(indptr, indices, n, seeds):
    """Reachability mask from the seed mask (seeds included)."""
    reach = seeds.copy()
    queue = np.empty(n, np.int64)
    tail = 0
    for v in range(n):
        if reach[v]:
            queue[tail] = v
            tail += 1
    head = 0
    while head < tail:
        v = queue[head]
        head += 1
        for e in range(indptr[v], indptr[v + 1]):
            u = indices[e]
            if not reach[u]:
                reach[u] = True
                queue[tail] = u
                tail += 1
    return reach


@njit(cache=True)
def may_avoid(indptr, indices, n, banned, exit_id):
    """Greatest U disjoint from `banned` with an out-edge into U from each node.

    EXIT is treated as absorbing: once there, paths stay outside the window
    forever, so EXIT itself survives unless banned.  The result is the set
    of nodes from which some infinite path avoids `banned`.
    """
    alive = np.empty(n, np.bool_)
    for v in range(n):
        alive[v] = not banned[v]
    # peel by repeated scans; runs at identity-check scale (small depth)
    changed = True
    while changed:
        changed = False
        for v in range(n):
            if not alive[v] or v == exit_id:
                continue
            cnt = 0
            for e in range(indptr[v], indptr[v + 1]):
                if alive[indices[e]]:
                    cnt += 1
            if cnt == 0:
                alive[v] = False
                changed = True
    return alive
