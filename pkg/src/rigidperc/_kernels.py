"""Compiled lattice kernels shared by the public modules.

Bonds of a ``W x H`` window are numbered flat: horizontal bond ``(i, j)-(i+1, j)``
is ``j*(W-1) + i``, vertical bond ``(i, j)-(i, j+1)`` is ``nh + j*W + i`` with
``nh = (W-1)*H``.  Two bonds are adjacent when they share a *junction*: a Z^2
vertex for the primal adjacency, a face centre of the shifted lattice
``Z^2 + (1/2, 1/2)`` for the dual adjacency.  Face ``(x, y)`` is the unit square
with lower-left corner ``(x, y)``, ``-1 <= x <= W-1``, ``-1 <= y <= H-1``.
"""

import numpy as np
from numba import njit

_M30 = np.uint64(30)
_M27 = np.uint64(27)
_M31 = np.uint64(31)
_C1 = np.uint64(0xBF58476D1CE4E5B9)
_C2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_SH32 = np.uint64(32)
_SH11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0


@njit(cache=True)
def mix64(z):
    z = (z ^ (z >> _M30)) * _C1
    z = (z ^ (z >> _M27)) * _C2
    return z ^ (z >> _M31)


@njit(cache=True)
def bond_uniforms(W, H, ox, oy, seed):
    """Per-bond uniforms in [0, 1) keyed by (seed, global bond position)."""
    nh = (W - 1) * H
    n = nh + W * (H - 1)
    out = np.empty(n, dtype=np.float64)
    s = mix64(np.uint64(seed) + _GOLDEN)
    for b in range(n):
        if b < nh:
            i = b % (W - 1)
            j = b // (W - 1)
            orient = np.uint64(1)
        else:
            i = (b - nh) % W
            j = (b - nh) // W
            orient = np.uint64(2)
        gx = np.uint64(np.int64(i + ox) & 0xFFFFFFFF)
        gy = np.uint64(np.int64(j + oy) & 0xFFFFFFFF)
        h = mix64(s ^ ((gx << _SH32) | gy))
        h = mix64(h + orient * _GOLDEN)
        out[b] = np.float64(h >> _SH11) * _INV53
    return out


@njit(cache=True)
def bond_junctions(b, W, H, dual):
    """Return the two junctions ``(x0, y0, x1, y1)`` of flat bond ``b``."""
    nh = (W - 1) * H
    if b < nh:
        i = b % (W - 1)
        j = b // (W - 1)
        if dual:
            return i, j - 1, i, j
        return i, j, i + 1, j
    i = (b - nh) % W
    j = (b - nh) // W
    if dual:
        return i - 1, j, i, j
    return i, j, i, j + 1


@njit(cache=True)
def junction_bonds(x, y, W, H, dual, out):
    """Fill ``out`` with the in-window bonds meeting at junction ``(x, y)``."""
    nh = (W - 1) * H
    k = 0
    if dual:
        if 0 <= x <= W - 2:
            if 0 <= y <= H - 1:
                out[k] = y * (W - 1) + x
                k += 1
            if 0 <= y + 1 <= H - 1:
                out[k] = (y + 1) * (W - 1) + x
                k += 1
        if 0 <= y <= H - 2:
            if 0 <= x <= W - 1:
                out[k] = nh + y * W + x
                k += 1
            if 0 <= x + 1 <= W - 1:
                out[k] = nh + y * W + x + 1
                k += 1
    else:
        if 0 <= y <= H - 1:
            if x >= 1 and x <= W - 1:
                out[k] = y * (W - 1) + x - 1
                k += 1
            if 0 <= x <= W - 2:
                out[k] = y * (W - 1) + x
                k += 1
        if 0 <= x <= W - 1:
            if y >= 1 and y <= H - 1:
                out[k] = nh + (y - 1) * W + x
                k += 1
            if 0 <= y <= H - 2:
                out[k] = nh + y * W + x
                k += 1
    return k


@njit(cache=True)
def _junction_index(x, y, W, dual):
    if dual:
        return (y + 1) * (W + 1) + (x + 1)
    return y * W + x


@njit(cache=True)
def _find(parent, a):
    root = a
    while parent[root] != root:
        root = parent[root]
    while parent[a] != root:
        nxt = parent[a]
        parent[a] = root
        a = nxt
    return root


@njit(cache=True)
def label_clusters(selected, W, H, dual):
    """Connected components of the selected bonds.

    Union-find over junctions with path compression and union by size.
    Returns ``(ids, sizes)``; ``ids[b] = -1`` for unselected bonds and
    cluster ids are numbered by their smallest bond index.
    """
    if dual:
        nj = (W + 1) * (H + 1)
    else:
        nj = W * H
    parent = np.arange(nj)
    size = np.ones(nj, dtype=np.int64)
    n = selected.shape[0]
    for b in range(n):
        if not selected[b]:
            continue
        x0, y0, x1, y1 = bond_junctions(b, W, H, dual)
        ra = _find(parent, _junction_index(x0, y0, W, dual))
        rb = _find(parent, _junction_index(x1, y1, W, dual))
        if ra == rb:
            continue
        if size[ra] < size[rb]:
            ra, rb = rb, ra
        parent[rb] = ra
        size[ra] += size[rb]
    ids = np.full(n, -1, dtype=np.int64)
    remap = np.full(nj, -1, dtype=np.int64)
    counts = np.zeros(n + 1, dtype=np.int64)
    nclusters = 0
    for b in range(n):
        if not selected[b]:
            continue
        x0, y0, _, _ = bond_junctions(b, W, H, dual)
        r = _find(parent, _junction_index(x0, y0, W, dual))
        if remap[r] < 0:
            remap[r] = nclusters
            nclusters += 1
        ids[b] = remap[r]
        counts[remap[r]] += 1
    return ids, counts[:nclusters].copy()


@njit(cache=True)
def bfs_bonds(selected, W, H, dual, src, dst):
    """Unit-weight BFS on selected bonds; returns ``(dist, parent)``.

    ``dist[b]`` counts bonds on the path including both ends, so the source
    has distance 1.  Stops as soon as ``dst`` is settled (``dst < 0``: never).
    """
    n = selected.shape[0]
    dist = np.full(n, -1, dtype=np.int64)
    parent = np.full(n, -1, dtype=np.int64)
    if not selected[src]:
        return dist, parent
    queue = np.empty(n, dtype=np.int64)
    nb = np.empty(4, dtype=np.int64)
    head = 0
    tail = 0
    queue[tail] = src
    tail += 1
    dist[src] = 1
    while head < tail:
        a = queue[head]
        head += 1
        if a == dst:
            break
        x0, y0, x1, y1 = bond_junctions(a, W, H, dual)
        for side in range(2):
            if side == 0:
                k = junction_bonds(x0, y0, W, H, dual, nb)
            else:
                k = junction_bonds(x1, y1, W, H, dual, nb)
            for t in range(k):
                c = nb[t]
                if selected[c] and dist[c] < 0:
                    dist[c] = dist[a] + 1
                    parent[c] = a
                    queue[tail] = c
                    tail += 1
    return dist, parent


@njit(cache=True)
def _heap_push(hk, hv, size, key, val):
    i = size
    hk[i] = key
    hv[i] = val
    while i > 0:
        p = (i - 1) >> 1
        if hk[p] <= hk[i]:
            break
        hk[p], hk[i] = hk[i], hk[p]
        hv[p], hv[i] = hv[i], hv[p]
        i = p
    return size + 1


@njit(cache=True)
def _heap_pop(hk, hv, size):
    key = hk[0]
    val = hv[0]
    size -= 1
    hk[0] = hk[size]
    hv[0] = hv[size]
    i = 0
    while True:
        left = 2 * i + 1
        if left >= size:
            break
        c = left
        if left + 1 < size and hk[left + 1] < hk[left]:
            c = left + 1
        if hk[i] <= hk[c]:
            break
        hk[c], hk[i] = hk[i], hk[c]
        hv[c], hv[i] = hv[i], hv[c]
        i = c
    return key, val, size


@njit(cache=True)
def dijkstra_vertices(strong, W, H, beta, rigid, src, dst):
    """Binary-heap Dijkstra on window vertices.

    Bond weight is ``beta`` for strong bonds and 1 otherwise; with ``rigid``
    strong bonds are impassable.  Returns ``(dist, parent)`` with ``inf``
    for unreached vertices.
    """
    nv = W * H
    nh = (W - 1) * H
    dist = np.full(nv, np.inf)
    parent = np.full(nv, -1, dtype=np.int64)
    done = np.zeros(nv, dtype=np.bool_)
    cap = 4 * nv + 4
    hk = np.empty(cap, dtype=np.float64)
    hv = np.empty(cap, dtype=np.int64)
    size = 0
    dist[src] = 0.0
    size = _heap_push(hk, hv, size, 0.0, src)
    nbv = np.empty(4, dtype=np.int64)
    nbb = np.empty(4, dtype=np.int64)
    while size > 0:
        d, v, size = _heap_pop(hk, hv, size)
        if done[v]:
            continue
        done[v] = True
        if v == dst:
            break
        x = v % W
        y = v // W
        k = 0
        if x >= 1:
            nbv[k] = v - 1
            nbb[k] = y * (W - 1) + x - 1
            k += 1
        if x <= W - 2:
            nbv[k] = v + 1
            nbb[k] = y * (W - 1) + x
            k += 1
        if y >= 1:
            nbv[k] = v - W
            nbb[k] = nh + (y - 1) * W + x
            k += 1
        if y <= H - 2:
            nbv[k] = v + W
            nbb[k] = nh + y * W + x
            k += 1
        for t in range(k):
            u = nbv[t]
            if done[u]:
                continue
            if strong[nbb[t]]:
                if rigid:
                    continue
                w = beta
            else:
                w = 1.0
            nd = d + w
            if nd < dist[u]:
                dist[u] = nd
                parent[u] = v
                size = _heap_push(hk, hv, size, nd, u)
    return dist, parent


@njit(cache=True)
def _relax_level(allowed, strong, W, H, dual, cur, hk, hv, nb):
    """Settle ``cur`` under unit steps into weak allowed bonds (Dijkstra)."""
    n = cur.shape[0]
    big = np.iinfo(np.int64).max
    size = 0
    for b in range(n):
        if cur[b] < big:
            size = _heap_push(hk, hv, size, float(cur[b]), b)
    while size > 0:
        d, a, size = _heap_pop(hk, hv, size)
        if d > cur[a]:
            continue
        x0, y0, x1, y1 = bond_junctions(a, W, H, dual)
        for side in range(2):
            if side == 0:
                k = junction_bonds(x0, y0, W, H, dual, nb)
            else:
                k = junction_bonds(x1, y1, W, H, dual, nb)
            for t in range(k):
                c = nb[t]
                if not allowed[c] or strong[c]:
                    continue
                if cur[a] + 1 < cur[c]:
                    cur[c] = cur[a] + 1
                    size = _heap_push(hk, hv, size, float(cur[c]), c)


@njit(cache=True)
def min_strong_within_budget(allowed, strong, start, end, W, H, dual, budget):
    """Fewest strong bonds on a start-to-end path of at most ``budget`` bonds.

    Label setting over strong-count levels: level ``k`` holds, per bond, the
    shortest path length using at most ``k`` strong bonds.  Returns ``-1``
    when no path meets the budget.
    """
    n = allowed.shape[0]
    big = np.iinfo(np.int64).max
    prev = np.full(n, big, dtype=np.int64)
    cur = np.full(n, big, dtype=np.int64)
    hk = np.empty(8 * n + 8, dtype=np.float64)
    hv = np.empty(8 * n + 8, dtype=np.int64)
    nb = np.empty(4, dtype=np.int64)
    for level in range(n + 1):
        for b in range(n):
            cur[b] = prev[b]
        if level > 0:
            for b in range(n):
                if not (allowed[b] and strong[b]):
                    continue
                best = big
                if start[b]:
                    best = 1
                else:
                    x0, y0, x1, y1 = bond_junctions(b, W, H, dual)
                    for side in range(2):
                        if side == 0:
                            k = junction_bonds(x0, y0, W, H, dual, nb)
                        else:
                            k = junction_bonds(x1, y1, W, H, dual, nb)
                        for t in range(k):
                            c = nb[t]
                            if allowed[c] and prev[c] < big and prev[c] + 1 < best:
                                best = prev[c] + 1
                if best < cur[b]:
                    cur[b] = best
        else:
            for b in range(n):
                if allowed[b] and start[b] and not strong[b]:
                    cur[b] = 1
        _relax_level(allowed, strong, W, H, dual, cur, hk, hv, nb)
        best_end = big
        changed = False
        for b in range(n):
            if end[b] and allowed[b] and cur[b] < best_end:
                best_end = cur[b]
            if cur[b] != prev[b]:
                changed = True
        if best_end <= budget:
            return level
        if level > 0 and not changed:
            return -1
        for b in range(n):
            prev[b] = cur[b]
    return -1


@njit(cache=True)
def bond_adjacency(selected, W, H, dual):
    """Directed adjacency pairs ``(a, c)`` among selected bonds."""
    n = selected.shape[0]
    rows = np.empty(6 * n, dtype=np.int64)
    cols = np.empty(6 * n, dtype=np.int64)
    nb = np.empty(4, dtype=np.int64)
    m = 0
    for a in range(n):
        if not selected[a]:
            continue
        x0, y0, x1, y1 = bond_junctions(a, W, H, dual)
        for side in range(2):
            if side == 0:
                k = junction_bonds(x0, y0, W, H, dual, nb)
            else:
                k = junction_bonds(x1, y1, W, H, dual, nb)
            for t in range(k):
                c = nb[t]
                if c != a and selected[c]:
                    rows[m] = a
                    cols[m] = c
                    m += 1
    return rows[:m].copy(), cols[:m].copy()


@njit(cache=True)
def cluster_edge_flags(ids, nclusters, W, H, dual):
    """Per-cluster flags: touches left, right, bottom, top window edge.

    Primal bonds touch an edge through a Z^2 endpoint on it; dual bonds
    through a face centre outside the window's vertex range.
    """
    flags = np.zeros((nclusters, 4), dtype=np.bool_)
    if dual:
        lo_x, hi_x, lo_y, hi_y = -1, W - 1, -1, H - 1
    else:
        lo_x, hi_x, lo_y, hi_y = 0, W - 1, 0, H - 1
    for b in range(ids.shape[0]):
        c = ids[b]
        if c < 0:
            continue
        x0, y0, x1, y1 = bond_junctions(b, W, H, dual)
        if x0 == lo_x or x1 == lo_x:
            flags[c, 0] = True
        if x0 == hi_x or x1 == hi_x:
            flags[c, 1] = True
        if y0 == lo_y or y1 == lo_y:
            flags[c, 2] = True
        if y0 == hi_y or y1 == hi_y:
            flags[c, 3] = True
    return flags
