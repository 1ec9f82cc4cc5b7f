# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; statement-for-statement mirror of ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t

cnp.import_array()

BACKEND = "cython"


cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil
    int __builtin_ctzll(unsigned long long) nogil


cdef inline int _popc(uint64_t x) nogil:
    return __builtin_popcountll(x)


cdef inline int _low(uint64_t x) nogil:
    return __builtin_ctzll(x)


cdef inline uint64_t _bit(int v) nogil:
    return (<uint64_t>1) << v


cdef tuple _csr(int n, const int64_t[::1] eu, const int64_t[::1] ev, const unsigned char[::1] mask):
    cdef Py_ssize_t m = eu.shape[0], e
    cdef int i
    cdef int64_t u, v
    off_a = np.zeros(n + 1, dtype=np.int64)
    cdef int64_t[::1] off = off_a
    for e in range(m):
        if mask[e]:
            off[eu[e] + 1] += 1
            off[ev[e] + 1] += 1
    for i in range(n):
        off[i + 1] += off[i]
    fill_a = off_a[:n].copy()
    cdef int64_t[::1] fill = fill_a
    nbr_a = np.empty(off[n], dtype=np.int64)
    eid_a = np.empty(off[n], dtype=np.int64)
    cdef int64_t[::1] nbr = nbr_a
    cdef int64_t[::1] eid = eid_a
    for e in range(m):
        if mask[e]:
            u = eu[e]
            v = ev[e]
            nbr[fill[u]] = v
            eid[fill[u]] = e
            fill[u] += 1
            nbr[fill[v]] = u
            eid[fill[v]] = e
            fill[v] += 1
    return off_a, nbr_a, eid_a


# --- maximum cardinality matching -------------------------------------------


cdef int64_t _lca(int n, int64_t a, int64_t b, int64_t[::1] base, int64_t[::1] match,
                  int64_t[::1] p, unsigned char[::1] seen) nogil:
    cdef int i
    for i in range(n):
        seen[i] = 0
    while True:
        a = base[a]
        seen[a] = 1
        if match[a] == -1:
            break
        a = p[match[a]]
    while True:
        b = base[b]
        if seen[b]:
            return b
        b = p[match[b]]


cdef void _mark_path(int64_t v, int64_t b, int64_t child, int64_t[::1] base, int64_t[::1] match,
                     int64_t[::1] p, unsigned char[::1] blossom) nogil:
    while base[v] != b:
        blossom[base[v]] = 1
        blossom[base[match[v]]] = 1
        p[v] = child
        child = match[v]
        v = p[match[v]]


cdef int64_t _find_path(int n, int64_t root, int64_t[::1] off, int64_t[::1] nbr,
                        int64_t[::1] base, int64_t[::1] match, int64_t[::1] p,
                        unsigned char[::1] used, unsigned char[::1] blossom,
                        unsigned char[::1] seen, int64_t[::1] q) nogil:
    cdef int i
    cdef int64_t qh = 0, qt = 0, v, to, cur, j
    for i in range(n):
        used[i] = 0
        p[i] = -1
        base[i] = i
    used[root] = 1
    q[qt] = root
    qt += 1
    while qh < qt:
        v = q[qh]
        qh += 1
        for j in range(off[v], off[v + 1]):
            to = nbr[j]
            if base[v] == base[to] or match[v] == to:
                continue
            if to == root or (match[to] != -1 and p[match[to]] != -1):
                cur = _lca(n, v, to, base, match, p, seen)
                for i in range(n):
                    blossom[i] = 0
                _mark_path(v, cur, to, base, match, p, blossom)
                _mark_path(to, cur, v, base, match, p, blossom)
                for i in range(n):
                    if blossom[base[i]]:
                        base[i] = cur
                        if not used[i]:
                            used[i] = 1
                            q[qt] = i
                            qt += 1
            elif p[to] == -1:
                p[to] = v
                if match[to] == -1:
                    return to
                used[match[to]] = 1
                q[qt] = match[to]
                qt += 1
    return -1


cdef void _matching_into(int n, int64_t[::1] off, int64_t[::1] nbr, int64_t[::1] eid,
                         int64_t[::1] match, int64_t[::1] medge, int64_t[::1] base,
                         int64_t[::1] p, unsigned char[::1] used, unsigned char[::1] blossom,
                         unsigned char[::1] seen, int64_t[::1] q) nogil:
    cdef int64_t v, u, j, pv, ppv, root
    for v in range(n):
        match[v] = -1
        medge[v] = -1
    for v in range(n):
        if match[v] == -1:
            for j in range(off[v], off[v + 1]):
                u = nbr[j]
                if match[u] == -1:
                    match[v] = u
                    match[u] = v
                    break
    for root in range(n):
        if match[root] == -1 and off[root + 1] > off[root]:
            v = _find_path(n, root, off, nbr, base, match, p, used, blossom, seen, q)
            while v != -1:
                pv = p[v]
                ppv = match[pv]
                match[v] = pv
                match[pv] = v
                v = ppv
    for v in range(n):
        if match[v] != -1:
            for j in range(off[v], off[v + 1]):
                if nbr[j] == match[v]:
                    medge[v] = eid[j]
                    break


def matching_mates(int n, const int64_t[::1] eu, const int64_t[::1] ev, const unsigned char[::1] mask):
    off, nbr, eid = _csr(n, eu, ev, mask)
    medge = np.empty(n, dtype=np.int64)
    _matching_into(n, off, nbr, eid, np.empty(n, dtype=np.int64), medge, np.empty(n, dtype=np.int64),
                   np.empty(n, dtype=np.int64), np.empty(n, dtype=np.uint8), np.empty(n, dtype=np.uint8),
                   np.empty(n, dtype=np.uint8), np.empty(3 * n + 1, dtype=np.int64))
    return medge


def matching_batch(int n, const int64_t[::1] eu, const int64_t[::1] ev, const unsigned char[:, ::1] masks):
    cdef Py_ssize_t t, T = masks.shape[0], m = eu.shape[0]
    cdef int v
    out_a = np.zeros((T, m), dtype=np.uint8)
    cdef unsigned char[:, ::1] out = out_a
    cdef int64_t[::1] match = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] medge = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] base = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] p = np.empty(n, dtype=np.int64)
    cdef unsigned char[::1] used = np.empty(n, dtype=np.uint8)
    cdef unsigned char[::1] blossom = np.empty(n, dtype=np.uint8)
    cdef unsigned char[::1] seen = np.empty(n, dtype=np.uint8)
    cdef int64_t[::1] q = np.empty(3 * n + 1, dtype=np.int64)
    cdef int64_t[::1] off
    cdef int64_t[::1] nbr
    cdef int64_t[::1] eid
    for t in range(T):
        off, nbr, eid = _csr(n, eu, ev, masks[t])
        _matching_into(n, off, nbr, eid, match, medge, base, p, used, blossom, seen, q)
        for v in range(n):
            if medge[v] >= 0:
                out[t, medge[v]] = 1
    return out_a


# --- optimal fractional vertex cover ----------------------------------------


cdef void _frac_vc2_into(int n, int64_t[::1] off, int64_t[::1] nbr, int64_t[::1] match_l,
                         int64_t[::1] match_r, int64_t[::1] pr, unsigned char[::1] vis,
                         unsigned char[::1] vis_r, int64_t[::1] q, cnp.int8_t[::1] out) nogil:
    cdef int64_t u, v, x, y, j, qh, qt, found, nxt
    for u in range(n):
        match_l[u] = -1
        match_r[u] = -1
    for u in range(n):
        for j in range(off[u], off[u + 1]):
            v = nbr[j]
            if match_r[v] == -1:
                match_l[u] = v
                match_r[v] = u
                break
    for u in range(n):
        if match_l[u] != -1 or off[u + 1] == off[u]:
            continue
        for x in range(n):
            pr[x] = -1
            vis[x] = 0
        vis[u] = 1
        q[0] = u
        qh = 0
        qt = 1
        found = -1
        while qh < qt and found < 0:
            x = q[qh]
            qh += 1
            for j in range(off[x], off[x + 1]):
                v = nbr[j]
                if pr[v] == -1:
                    pr[v] = x
                    if match_r[v] == -1:
                        found = v
                        break
                    y = match_r[v]
                    if not vis[y]:
                        vis[y] = 1
                        q[qt] = y
                        qt += 1
        v = found
        while v != -1:
            x = pr[v]
            nxt = match_l[x]
            match_l[x] = v
            match_r[v] = x
            v = nxt

    qt = 0
    for u in range(n):
        vis[u] = 0
        vis_r[u] = 0
    for u in range(n):
        if match_l[u] == -1:
            vis[u] = 1
            q[qt] = u
            qt += 1
    qh = 0
    while qh < qt:
        x = q[qh]
        qh += 1
        for j in range(off[x], off[x + 1]):
            v = nbr[j]
            if not vis_r[v]:
                vis_r[v] = 1
                y = match_r[v]
                if y != -1 and not vis[y]:
                    vis[y] = 1
                    q[qt] = y
                    qt += 1
    for v in range(n):
        out[v] = (0 if vis[v] else 1) + (1 if vis_r[v] else 0)


def frac_vc2_batch(int n, const int64_t[::1] eu, const int64_t[::1] ev, const unsigned char[:, ::1] masks):
    cdef Py_ssize_t t, T = masks.shape[0]
    out_a = np.empty((T, n), dtype=np.int8)
    cdef cnp.int8_t[:, ::1] out = out_a
    cdef int64_t[::1] match_l = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] match_r = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] pr = np.empty(n, dtype=np.int64)
    cdef unsigned char[::1] vis = np.empty(n, dtype=np.uint8)
    cdef unsigned char[::1] vis_r = np.empty(n, dtype=np.uint8)
    cdef int64_t[::1] q = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] off
    cdef int64_t[::1] nbr
    for t in range(T):
        off, nbr, _ = _csr(n, eu, ev, masks[t])
        _frac_vc2_into(n, off, nbr, match_l, match_r, pr, vis, vis_r, q, out[t])
    return out_a


def frac_vc2(int n, eu, ev, mask):
    return frac_vc2_batch(n, eu, ev, np.ascontiguousarray(mask, dtype=np.uint8).reshape(1, -1))[0]


# --- exact minimum vertex cover ---------------------------------------------


cdef int _greedy_matching_size(uint64_t* adj, uint64_t alive) nogil:
    cdef int size = 0, v
    cdef uint64_t free = alive, rest = alive, nb
    while rest:
        v = _low(rest)
        rest &= rest - 1
        if (free >> v) & 1:
            nb = adj[v] & free & ~_bit(v)
            if nb:
                free &= ~(_bit(v) | _bit(_low(nb)))
                size += 1
    return size


cdef void _mvc_search(uint64_t* adj, uint64_t alive, uint64_t chosen, int size,
                      int* best_size, uint64_t* best_cover) nogil:
    cdef bint changed = True
    cdef uint64_t snap, nb
    cdef int v, u, d, bv, bd
    while changed:
        changed = False
        snap = alive
        while snap:
            v = _low(snap)
            snap &= snap - 1
            if not ((alive >> v) & 1):
                continue
            nb = adj[v] & alive
            d = _popc(nb)
            if d == 0:
                alive &= ~_bit(v)
                changed = True
            elif d == 1:
                u = _low(nb)
                chosen |= _bit(u)
                size += 1
                alive &= ~(_bit(u) | _bit(v))
                changed = True
    if size >= best_size[0]:
        return
    if alive == 0:
        best_size[0] = size
        best_cover[0] = chosen
        return
    if size + _greedy_matching_size(adj, alive) >= best_size[0]:
        return
    bv = -1
    bd = -1
    snap = alive
    while snap:
        v = _low(snap)
        snap &= snap - 1
        d = _popc(adj[v] & alive)
        if d > bd:
            bv = v
            bd = d
    nb = adj[bv] & alive
    _mvc_search(adj, alive & ~_bit(bv), chosen | _bit(bv), size + 1, best_size, best_cover)
    _mvc_search(adj, alive & ~nb & ~_bit(bv), chosen | nb, size + bd, best_size, best_cover)


cdef uint64_t _mvc_mask(int n, const int64_t[::1] eu, const int64_t[::1] ev, const unsigned char[::1] mask) nogil:
    cdef uint64_t adj[64]
    cdef Py_ssize_t e, m = eu.shape[0]
    cdef int v, u
    cdef uint64_t alive = 0, free, rest, nb, cover = 0
    cdef int best_size
    for v in range(n):
        adj[v] = 0
    for e in range(m):
        if mask[e]:
            adj[eu[e]] |= _bit(<int>ev[e])
            adj[ev[e]] |= _bit(<int>eu[e])
    for v in range(n):
        if adj[v]:
            alive |= _bit(v)
    free = alive
    rest = alive
    while rest:
        v = _low(rest)
        rest &= rest - 1
        if (free >> v) & 1:
            nb = adj[v] & free
            if nb:
                u = _low(nb)
                free &= ~(_bit(v) | _bit(u))
                cover |= _bit(v) | _bit(u)
    best_size = _popc(cover)
    _mvc_search(adj, alive, 0, 0, &best_size, &cover)
    return cover


def mvc_exact(int n, const int64_t[::1] eu, const int64_t[::1] ev, const unsigned char[::1] mask):
    if n > 64:
        raise ValueError("compiled vertex cover kernel supports at most 64 vertices")
    cdef uint64_t cover = _mvc_mask(n, eu, ev, mask)
    out = np.zeros(n, dtype=np.uint8)
    for v in range(n):
        if (cover >> v) & 1:
            out[v] = 1
    return out


def mvc_size_batch(int n, const int64_t[::1] eu, const int64_t[::1] ev, const unsigned char[:, ::1] masks):
    if n > 64:
        raise ValueError("compiled vertex cover kernel supports at most 64 vertices")
    cdef Py_ssize_t t, T = masks.shape[0]
    out_a = np.empty(T, dtype=np.int64)
    cdef int64_t[::1] out = out_a
    for t in range(T):
        out[t] = _popc(_mvc_mask(n, eu, ev, masks[t]))
    return out_a


# --- exact minimum dominating set -------------------------------------------


cdef void _mds_search(int n, uint64_t* nb, uint64_t undom, uint64_t chosen, int size,
                      int* best_size, uint64_t* best_set) nogil:
    cdef int w, c, maxcov, cnt, bu, bd, d, k, i, j
    cdef uint64_t snap
    cdef int cand[64]
    cdef int cov[64]
    if undom == 0:
        if size < best_size[0]:
            best_size[0] = size
            best_set[0] = chosen
        return
    if size + 1 >= best_size[0]:
        return
    maxcov = 0
    for w in range(n):
        c = _popc(nb[w] & undom)
        if c > maxcov:
            maxcov = c
    cnt = _popc(undom)
    if size + (cnt + maxcov - 1) // maxcov >= best_size[0]:
        return
    bu = -1
    bd = n + 1
    snap = undom
    while snap:
        w = _low(snap)
        snap &= snap - 1
        d = _popc(nb[w])
        if d < bd:
            bu = w
            bd = d
    k = 0
    snap = nb[bu]
    while snap:
        w = _low(snap)
        snap &= snap - 1
        c = _popc(nb[w] & undom)
        # insertion keeps order: coverage descending, vertex id ascending
        i = k
        while i > 0 and cov[i - 1] < c:
            cand[i] = cand[i - 1]
            cov[i] = cov[i - 1]
            i -= 1
        cand[i] = w
        cov[i] = c
        k += 1
    for j in range(k):
        w = cand[j]
        _mds_search(n, nb, undom & ~nb[w], chosen | _bit(w), size + 1, best_size, best_set)


cdef uint64_t _mds_mask(int n, const int64_t[::1] eu, const int64_t[::1] ev, const unsigned char[::1] mask) nogil:
    cdef uint64_t nb[64]
    cdef Py_ssize_t e, m = eu.shape[0]
    cdef int v, w, c, bw, bc, best_size
    cdef uint64_t full, undom, greedy = 0
    for v in range(n):
        nb[v] = _bit(v)
    for e in range(m):
        if mask[e]:
            nb[eu[e]] |= _bit(<int>ev[e])
            nb[ev[e]] |= _bit(<int>eu[e])
    full = (~(<uint64_t>0)) if n == 64 else (_bit(n) - 1)
    undom = full
    while undom:
        bw = -1
        bc = -1
        for w in range(n):
            c = _popc(nb[w] & undom)
            if c > bc:
                bw = w
                bc = c
        greedy |= _bit(bw)
        undom &= ~nb[bw]
    best_size = _popc(greedy)
    _mds_search(n, nb, full, 0, 0, &best_size, &greedy)
    return greedy


def mds_exact(int n, const int64_t[::1] eu, const int64_t[::1] ev, const unsigned char[::1] mask):
    if n > 64:
        raise ValueError("compiled dominating set kernel supports at most 64 vertices")
    cdef uint64_t s = _mds_mask(n, eu, ev, mask)
    out = np.zeros(n, dtype=np.uint8)
    for v in range(n):
        if (s >> v) & 1:
            out[v] = 1
    return out


def mds_size_batch(int n, const int64_t[::1] eu, const int64_t[::1] ev, const unsigned char[:, ::1] masks):
    if n > 64:
        raise ValueError("compiled dominating set kernel supports at most 64 vertices")
    cdef Py_ssize_t t, T = masks.shape[0]
    out_a = np.empty(T, dtype=np.int64)
    cdef int64_t[::1] out = out_a
    for t in range(T):
        out[t] = _popc(_mds_mask(n, eu, ev, masks[t]))
    return out_a


# --- discretized distributed water-filling ----------------------------------


def dwf_events(int n, const int64_t[::1] eu, const int64_t[::1] ev, const unsigned char[::1] qmask,
               const int64_t[::1] thresholds):
    cdef Py_ssize_t m = eu.shape[0], e, i, na = 0, w
    cdef int v
    cdef int64_t k, s, total = 0
    ecount_a = np.zeros(m, dtype=np.int64)
    vcount_a = np.zeros(n, dtype=np.int64)
    cdef int64_t[::1] ecount = ecount_a
    cdef int64_t[::1] vcount = vcount_a
    cdef int64_t[::1] deg = np.zeros(n, dtype=np.int64)
    cdef unsigned char[::1] alive = np.ones(n, dtype=np.uint8)
    cdef unsigned char[::1] e_alive = np.zeros(m, dtype=np.uint8)
    cdef unsigned char[::1] dead = np.zeros(n, dtype=np.uint8)
    cdef int64_t[::1] active = np.empty(m, dtype=np.int64)
    seg_len = []
    seg_act = []
    for e in range(m):
        if qmask[e]:
            active[na] = e
            na += 1
            e_alive[e] = 1
            deg[eu[e]] += 1
            deg[ev[e]] += 1
    while na > 0:
        k = -1
        for v in range(n):
            if alive[v] and deg[v] > 0:
                s = (thresholds[v] - vcount[v] + deg[v] - 1) // deg[v]
                if k < 0 or s < k:
                    k = s
        for i in range(na):
            ecount[active[i]] += k
        for v in range(n):
            if alive[v] and deg[v] > 0:
                vcount[v] += k * deg[v]
        total += k
        seg_len.append(k)
        seg_act.append(na)
        for v in range(n):
            dead[v] = alive[v] and deg[v] > 0 and vcount[v] >= thresholds[v]
        for v in range(n):
            if dead[v]:
                alive[v] = 0
        for i in range(na):
            e = active[i]
            if dead[eu[e]] or dead[ev[e]]:
                e_alive[e] = 0
                deg[eu[e]] -= 1
                deg[ev[e]] -= 1
        w = 0
        for i in range(na):
            if e_alive[active[i]]:
                active[w] = active[i]
                w += 1
        na = w
    return (
        ecount_a,
        vcount_a,
        total,
        np.array(seg_len, dtype=np.int64),
        np.array(seg_act, dtype=np.int64),
    )
