"""Array kernels for index construction over a CSR homogeneous graph.

The loops are written for numba; without it they run as plain Python.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - exercised only without numba
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


@njit(cache=True)
def core_numbers(indptr, indices):
    """Batagelj-Zaversnik bin-sort core decomposition."""
    n = indptr.shape[0] - 1
    deg = np.empty(n, np.int64)
    md = 0
    for v in range(n):
        deg[v] = indptr[v + 1] - indptr[v]
        if deg[v] > md:
            md = deg[v]
    bins = np.zeros(md + 2, np.int64)
    for v in range(n):
        bins[deg[v]] += 1
    start = 0
    for d in range(md + 1):
        c = bins[d]
        bins[d] = start
        start += c
    pos = np.empty(n, np.int64)
    vert = np.empty(n, np.int64)
    for v in range(n):
        pos[v] = bins[deg[v]]
        vert[pos[v]] = v
        bins[deg[v]] += 1
    for d in range(md, 0, -1):
        bins[d] = bins[d - 1]
    bins[0] = 0
    for i in range(n):
        v = vert[i]
        for e in range(indptr[v], indptr[v + 1]):
            u = indices[e]
            if deg[u] > deg[v]:
                du = deg[u]
                pu = pos[u]
                pw = bins[du]
                w = vert[pw]
                if u != w:
                    pos[u] = pw
                    vert[pu] = w
                    pos[w] = pu
                    vert[pw] = u
                bins[du] += 1
                deg[u] -= 1
    return deg


@njit(cache=True)
def level_thresholds(indptr, indices, core, k, order, sig):
    """Per-vertex best threshold at cohesion ``k``.

    For every vertex of the k-core, the largest significance threshold whose
    k-core (of the subgraph above the threshold) still contains the vertex;
    ``-inf`` elsewhere. ``order`` lists vertices by ascending significance.
    Equal-significance vertices are removed together, then the cascade runs.
    """
    n = core.shape[0]
    alive = core >= k
    deg = np.zeros(n, np.int64)
    for v in range(n):
        if alive[v]:
            c = 0
            for e in range(indptr[v], indptr[v + 1]):
                if alive[indices[e]]:
                    c += 1
            deg[v] = c
    tau = np.full(n, -np.inf)
    stack = np.empty(n, np.int64)
    i = 0
    m = order.shape[0]
    while i < m:
        theta = sig[order[i]]
        sp = 0
        j = i
        while j < m and sig[order[j]] == theta:
            u = order[j]
            if alive[u]:
                alive[u] = False
                tau[u] = theta
                stack[sp] = u
                sp += 1
            j += 1
        while sp > 0:
            sp -= 1
            u = stack[sp]
            for e in range(indptr[u], indptr[u + 1]):
                w = indices[e]
                if alive[w]:
                    deg[w] -= 1
                    if deg[w] < k:
                        alive[w] = False
                        tau[w] = theta
                        stack[sp] = w
                        sp += 1
        i = j
    return tau


@njit(cache=True)
def _find(uf, x):
    while uf[x] != x:
        uf[x] = uf[uf[x]]
        x = uf[x]
    return x


@njit(cache=True)
def merge_tree(indptr, indices, tau, order):
    """Component tree of the vertices in ``order`` (sorted by descending tau).

    Vertices are switched on one tau value at a time. Every component that
    contains a newly switched-on vertex becomes a node whose batch is those
    vertices; the nodes of the components it absorbed become its children.
    Returns (node of each vertex, node threshold, node parent), with nodes
    numbered in creation order so children precede parents.
    """
    n = tau.shape[0]
    m = order.shape[0]
    uf = np.arange(n)
    active = np.zeros(n, np.bool_)
    top = np.full(n, -1, np.int64)
    stamp = np.full(n, -1, np.int64)
    rootnode = np.empty(n, np.int64)
    vnode = np.full(n, -1, np.int64)
    theta_out = np.empty(m, np.float64)
    parent = np.full(m, -1, np.int64)
    pair_v = np.empty(indices.shape[0] + 1, np.int64)
    pair_r = np.empty(indices.shape[0] + 1, np.int64)
    nn = 0
    i = 0
    group = 0
    while i < m:
        theta = tau[order[i]]
        j = i
        while j < m and tau[order[j]] == theta:
            active[order[j]] = True
            j += 1
        npairs = 0
        for t in range(i, j):
            v = order[t]
            for e in range(indptr[v], indptr[v + 1]):
                w = indices[e]
                if active[w] and tau[w] > theta:
                    pair_v[npairs] = v
                    pair_r[npairs] = _find(uf, w)
                    npairs += 1
        for t in range(i, j):
            v = order[t]
            for e in range(indptr[v], indptr[v + 1]):
                w = indices[e]
                if active[w]:
                    a = _find(uf, v)
                    b = _find(uf, w)
                    if a != b:
                        if a < b:
                            uf[b] = a
                        else:
                            uf[a] = b
        for t in range(i, j):
            v = order[t]
            r = _find(uf, v)
            if stamp[r] != group:
                stamp[r] = group
                rootnode[r] = nn
                theta_out[nn] = theta
                nn += 1
            vnode[v] = rootnode[r]
        for t in range(npairs):
            parent[top[pair_r[t]]] = vnode[pair_v[t]]
        for t in range(i, j):
            v = order[t]
            top[_find(uf, v)] = vnode[v]
        group += 1
        i = j
    return vnode, theta_out[:nn].copy(), parent[:nn].copy()


@njit(cache=True)
def preorder_layout(parent, own, child_ptr, child_list, roots):
    """Depth-first preorder of a forest with contiguous subtree ranges.

    ``child_list[child_ptr[x]:child_ptr[x+1]]`` are x's children in output
    order. Returns (preorder node sequence, start, end, depth) where a node's
    own vertices occupy [start, start+own) and its subtree [start, end).
    """
    nn = parent.shape[0]
    seq = np.empty(nn, np.int64)
    start = np.empty(nn, np.int64)
    end = np.empty(nn, np.int64)
    depth = np.empty(nn, np.int64)
    stack = np.empty(nn + 1, np.int64)
    cursor = 0
    out = 0
    sp = 0
    for ri in range(roots.shape[0] - 1, -1, -1):
        stack[sp] = roots[ri]
        sp += 1
    while sp > 0:
        sp -= 1
        x = stack[sp]
        seq[out] = x
        out += 1
        start[x] = cursor
        cursor += own[x]
        p = parent[x]
        depth[x] = 1 if p < 0 else depth[p] + 1
        for c in range(child_ptr[x + 1] - 1, child_ptr[x] - 1, -1):
            stack[sp] = child_list[c]
            sp += 1
    # subtree ends: children finish before parents in reverse preorder
    for t in range(nn):
        end[t] = 0
    for t in range(nn - 1, -1, -1):
        x = seq[t]
        e = start[x] + own[x]
        if end[x] > e:
            e = end[x]
        end[x] = e
        p = parent[x]
        if p >= 0 and e > end[p]:
            end[p] = e
    return seq, start, end, depth


@njit(cache=True)
def subtree_stats(parent, own, minv):
    """Subtree sizes and smallest vertex ids (children numbered before parents)."""
    nn = parent.shape[0]
    size = own.copy()
    low = minv.copy()
    for x in range(nn):
        p = parent[x]
        if p >= 0:
            size[p] += size[x]
            if low[x] < low[p]:
                low[p] = low[x]
    return size, low


@njit(cache=True)
def subtree_ends(parent, start, own):
    """Subtree ends for a forest already in preorder (parents precede children)."""
    nn = parent.shape[0]
    end = start + own
    for x in range(nn - 1, -1, -1):
        p = parent[x]
        if p >= 0 and end[x] > end[p]:
            end[p] = end[x]
    return end


@njit(cache=True)
def lineage_members(root, k, child_ptr, child_rows, piece_lin, piece_lo, piece_hi, ent_ptr, ent_vert, ent_level, ent_below):
    """Vertices of the lineage subtree under ``root`` at level k.

    Children of x are ``piece_lin[child_rows[child_ptr[x]:child_ptr[x+1]]]``
    for pieces whose level range covers k. An entry counts when its level is
    at least k and the same vertex's next lower entry (``ent_below``, 0 if
    none) is below k, so each vertex is reported once.
    """
    cap = 64
    stack = np.empty(cap, np.int64)
    out = np.empty(cap, np.int64)
    stack[0] = root
    sp = 1
    t = 0
    while sp > 0:
        sp -= 1
        x = stack[sp]
        e = ent_ptr[x]
        while e < ent_ptr[x + 1] and ent_level[e] >= k:
            if ent_below[e] < k:
                if t == out.shape[0]:
                    grown = np.empty(2 * t, np.int64)
                    grown[:t] = out
                    out = grown
                out[t] = ent_vert[e]
                t += 1
            e += 1
        for c in range(child_ptr[x], child_ptr[x + 1]):
            r = child_rows[c]
            if piece_lo[r] <= k and k <= piece_hi[r]:
                if sp == stack.shape[0]:
                    grown = np.empty(2 * sp, np.int64)
                    grown[:sp] = stack
                    stack = grown
                stack[sp] = piece_lin[r]
                sp += 1
    return out[:t].copy()
