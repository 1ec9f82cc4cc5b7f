"""Pure-Python kernels.

Reference implementations of the hot loops. ``_ckernels.pyx`` mirrors each
function statement for statement; both must return identical results for
identical inputs (checked in tests/test_kernels.py).

Graphs are passed as endpoint arrays ``eu``/``ev`` plus a presence mask over
edge ids; adjacency is always scanned in increasing edge-id order.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def _adjacency(n, eu, ev, mask):
    adj = [[] for _ in range(n)]
    for e in range(len(eu)):
        if mask[e]:
            u, v = int(eu[e]), int(ev[e])
            adj[u].append((v, e))
            adj[v].append((u, e))
    return adj


# --- maximum cardinality matching (Edmonds, BFS with blossom contraction) ---


def matching_mates(n, eu, ev, mask):
    """Edge id matched at each vertex (or -1) in a maximum matching."""
    adj = _adjacency(n, eu, ev, mask)
    match = [-1] * n
    medge = [-1] * n
    for v in range(n):
        if match[v] == -1:
            for u, e in adj[v]:
                if match[u] == -1:
                    match[v], match[u] = u, v
                    break

    p = [-1] * n
    base = list(range(n))
    used = [False] * n
    blossom = [False] * n

    def lca(a, b):
        seen = [False] * n
        while True:
            a = base[a]
            seen[a] = True
            if match[a] == -1:
                break
            a = p[match[a]]
        while True:
            b = base[b]
            if seen[b]:
                return b
            b = p[match[b]]

    def mark_path(v, b, child):
        while base[v] != b:
            blossom[base[v]] = True
            blossom[base[match[v]]] = True
            p[v] = child
            child = match[v]
            v = p[match[v]]

    def find_path(root):
        for i in range(n):
            used[i] = False
            p[i] = -1
            base[i] = i
        used[root] = True
        q = [root]
        qh = 0
        while qh < len(q):
            v = q[qh]
            qh += 1
            for to, _e in adj[v]:
                if base[v] == base[to] or match[v] == to:
                    continue
                if to == root or (match[to] != -1 and p[match[to]] != -1):
                    cur = lca(v, to)
                    for i in range(n):
                        blossom[i] = False
                    mark_path(v, cur, to)
                    mark_path(to, cur, v)
                    for i in range(n):
                        if blossom[base[i]]:
                            base[i] = cur
                            if not used[i]:
                                used[i] = True
                                q.append(i)
                elif p[to] == -1:
                    p[to] = v
                    if match[to] == -1:
                        return to
                    used[match[to]] = True
                    q.append(match[to])
        return -1

    for root in range(n):
        if match[root] == -1 and adj[root]:
            v = find_path(root)
            while v != -1:
                pv = p[v]
                ppv = match[pv]
                match[v] = pv
                match[pv] = v
                v = ppv

    for v in range(n):
        if match[v] != -1:
            for u, e in adj[v]:
                if u == match[v]:
                    medge[v] = e
                    break
    return np.array(medge, dtype=np.int64)


def matching_batch(n, eu, ev, masks):
    """Row t: indicator over edge ids of the maximum matching of mask row t."""
    masks = np.asarray(masks)
    out = np.zeros(masks.shape, dtype=np.uint8)
    for t in range(masks.shape[0]):
        me = matching_mates(n, eu, ev, masks[t])
        for e in me:
            if e >= 0:
                out[t, e] = 1
    return out


# --- optimal fractional vertex cover via the bipartite double cover ---------


def frac_vc2(n, eu, ev, mask):
    """Twice the optimal half-integral fractional vertex cover, per vertex.

    Left copy L_v and right copy R_v per vertex; every edge uv yields L_u-R_v
    and L_v-R_u. A maximum matching there plus the Konig construction gives a
    minimum cover x; the fractional value of v is (x[L_v] + x[R_v]) / 2.
    """
    ladj = [[] for _ in range(n)]
    for e in range(len(eu)):
        if mask[e]:
            u, v = int(eu[e]), int(ev[e])
            ladj[u].append(v)
            ladj[v].append(u)
    match_l = [-1] * n
    match_r = [-1] * n
    for u in range(n):
        for v in ladj[u]:
            if match_r[v] == -1:
                match_l[u] = v
                match_r[v] = u
                break
    pr = [-1] * n
    vis = [False] * n
    for u in range(n):
        if match_l[u] != -1 or not ladj[u]:
            continue
        for i in range(n):
            pr[i] = -1
            vis[i] = False
        vis[u] = True
        q = [u]
        qh = 0
        found = -1
        while qh < len(q) and found < 0:
            x = q[qh]
            qh += 1
            for v in ladj[x]:
                if pr[v] == -1:
                    pr[v] = x
                    if match_r[v] == -1:
                        found = v
                        break
                    y = match_r[v]
                    if not vis[y]:
                        vis[y] = True
                        q.append(y)
        v = found
        while v != -1:
            x = pr[v]
            nxt = match_l[x]
            match_l[x] = v
            match_r[v] = x
            v = nxt

    vis_l = [False] * n
    vis_r = [False] * n
    q = [u for u in range(n) if match_l[u] == -1]
    for u in q:
        vis_l[u] = True
    qh = 0
    while qh < len(q):
        x = q[qh]
        qh += 1
        for v in ladj[x]:
            if not vis_r[v]:
                vis_r[v] = True
                y = match_r[v]
                if y != -1 and not vis_l[y]:
                    vis_l[y] = True
                    q.append(y)
    return np.array([(0 if vis_l[v] else 1) + (1 if vis_r[v] else 0) for v in range(n)], dtype=np.int8)


def frac_vc2_batch(n, eu, ev, masks):
    masks = np.asarray(masks)
    out = np.empty((masks.shape[0], n), dtype=np.int8)
    for t in range(masks.shape[0]):
        out[t] = frac_vc2(n, eu, ev, masks[t])
    return out


# --- exact minimum vertex cover (bitmask branch and bound) ------------------


def _popcount(x):
    return bin(x).count("1")


def _bits(x):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def _greedy_matching_size(adj, alive):
    size = 0
    free = alive
    for v in _bits(alive):
        if free >> v & 1:
            nb = adj[v] & free & ~(1 << v)
            if nb:
                u = (nb & -nb).bit_length() - 1
                free &= ~((1 << v) | (1 << u))
                size += 1
    return size


def mvc_exact(n, eu, ev, mask):
    """Membership vector of a minimum vertex cover."""
    adj = [0] * n
    for e in range(len(eu)):
        if mask[e]:
            u, v = int(eu[e]), int(ev[e])
            adj[u] |= 1 << v
            adj[v] |= 1 << u
    alive = 0
    for v in range(n):
        if adj[v]:
            alive |= 1 << v
    # Both endpoints of a maximal matching form a valid starting cover.
    best_cover = 0
    free = alive
    for v in _bits(alive):
        if free >> v & 1:
            nb = adj[v] & free
            if nb:
                u = (nb & -nb).bit_length() - 1
                free &= ~((1 << v) | (1 << u))
                best_cover |= (1 << v) | (1 << u)
    best = [_popcount(best_cover), best_cover]

    def search(alive, chosen, size):
        changed = True
        while changed:
            changed = False
            for v in _bits(alive):
                if not alive >> v & 1:
                    continue
                nb = adj[v] & alive
                d = _popcount(nb)
                if d == 0:
                    alive &= ~(1 << v)
                    changed = True
                elif d == 1:
                    u = nb.bit_length() - 1
                    chosen |= 1 << u
                    size += 1
                    alive &= ~((1 << u) | (1 << v))
                    changed = True
        if size >= best[0]:
            return
        if alive == 0:
            best[0], best[1] = size, chosen
            return
        if size + _greedy_matching_size(adj, alive) >= best[0]:
            return
        bv, bd = -1, -1
        for v in _bits(alive):
            d = _popcount(adj[v] & alive)
            if d > bd:
                bv, bd = v, d
        nb = adj[bv] & alive
        search(alive & ~(1 << bv), chosen | (1 << bv), size + 1)
        search(alive & ~nb & ~(1 << bv), chosen | nb, size + bd)

    search(alive, 0, 0)
    out = np.zeros(n, dtype=np.uint8)
    for v in _bits(best[1]):
        out[v] = 1
    return out


def mvc_size_batch(n, eu, ev, masks):
    masks = np.asarray(masks)
    return np.array([int(mvc_exact(n, eu, ev, masks[t]).sum()) for t in range(masks.shape[0])], dtype=np.int64)


# --- exact minimum dominating set (bitmask branch and bound) ----------------


def mds_exact(n, eu, ev, mask):
    """Membership vector of a minimum dominating set."""
    nb = [1 << v for v in range(n)]
    for e in range(len(eu)):
        if mask[e]:
            u, v = int(eu[e]), int(ev[e])
            nb[u] |= 1 << v
            nb[v] |= 1 << u
    full = (1 << n) - 1
    undom = full
    greedy = 0
    while undom:
        bw, bc = -1, -1
        for w in range(n):
            c = _popcount(nb[w] & undom)
            if c > bc:
                bw, bc = w, c
        greedy |= 1 << bw
        undom &= ~nb[bw]
    best = [_popcount(greedy), greedy]

    def search(undom, chosen, size):
        if undom == 0:
            if size < best[0]:
                best[0], best[1] = size, chosen
            return
        if size + 1 >= best[0]:
            return
        maxcov = 0
        for w in range(n):
            c = _popcount(nb[w] & undom)
            if c > maxcov:
                maxcov = c
        cnt = _popcount(undom)
        if size + (cnt + maxcov - 1) // maxcov >= best[0]:
            return
        bu, bd = -1, n + 1
        for u in _bits(undom):
            d = _popcount(nb[u])
            if d < bd:
                bu, bd = u, d
        cands = sorted(_bits(nb[bu]), key=lambda w: (-_popcount(nb[w] & undom), w))
        for w in cands:
            search(undom & ~nb[w], chosen | (1 << w), size + 1)

    search(full, 0, 0)
    out = np.zeros(n, dtype=np.uint8)
    for v in _bits(best[1]):
        out[v] = 1
    return out


def mds_size_batch(n, eu, ev, masks):
    masks = np.asarray(masks)
    return np.array([int(mds_exact(n, eu, ev, masks[t]).sum()) for t in range(masks.shape[0])], dtype=np.int64)


# --- discretized distributed water-filling, event driven --------------------


def dwf_events(n, eu, ev, qmask, thresholds):
    """Simulate uniform-increment water-filling on the edges flagged in ``qmask``.

    Every iteration adds one increment to each active edge; a vertex turns
    inactive after the iteration in which its increment count reaches
    ``thresholds[v]`` and an edge is active while both endpoints are. Instead
    of stepping, the loop jumps straight to the next deactivation.

    Returns:
        (edge_counts, vertex_counts, iterations, seg_len, seg_active) where
        segment ``s`` lasted ``seg_len[s]`` iterations with ``seg_active[s]``
        active edges each.
    """
    m = len(eu)
    ecount = np.zeros(m, dtype=np.int64)
    vcount = [0] * n
    thr = [int(t) for t in thresholds]
    inc = [[] for _ in range(n)]
    active_e = []
    for e in range(m):
        if qmask[e]:
            active_e.append(e)
            inc[int(eu[e])].append(e)
            inc[int(ev[e])].append(e)
    deg = [len(x) for x in inc]
    alive = [True] * n
    e_alive = [bool(q) for q in qmask]
    total = 0
    seg_len = []
    seg_act = []
    while active_e:
        k = -1
        for v in range(n):
            if alive[v] and deg[v] > 0:
                s = (thr[v] - vcount[v] + deg[v] - 1) // deg[v]
                if k < 0 or s < k:
                    k = s
        for e in active_e:
            ecount[e] += k
        for v in range(n):
            if alive[v] and deg[v] > 0:
                vcount[v] += k * deg[v]
        total += k
        seg_len.append(k)
        seg_act.append(len(active_e))
        dead = [v for v in range(n) if alive[v] and deg[v] > 0 and vcount[v] >= thr[v]]
        for v in dead:
            alive[v] = False
        for v in dead:
            for e in inc[v]:
                if e_alive[e]:
                    e_alive[e] = False
                    deg[int(eu[e])] -= 1
                    deg[int(ev[e])] -= 1
        active_e = [e for e in active_e if e_alive[e]]
    return (
        ecount,
        np.array(vcount, dtype=np.int64),
        total,
        np.array(seg_len, dtype=np.int64),
        np.array(seg_act, dtype=np.int64),
    )
