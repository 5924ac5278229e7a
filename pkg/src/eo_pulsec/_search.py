"""Compiled 0-1 BFS over routing states, plus the integer tables it runs on.

A state is ``(k, conf, m)`` flattened to ``(k * 720 + conf) * n_match + m`` where
``conf`` indexes a permutation (dot position -> spin label) and ``m`` indexes a
matching of topology edges (the unblocked pulses).
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numba
import numpy as np

PERMS = list(itertools.permutations(range(6)))
PERM_INDEX = {p: i for i, p in enumerate(PERMS)}
N_CONF = len(PERMS)
# POS[c, label] = dot position of label in configuration c
POS = np.zeros((N_CONF, 6), dtype=np.int8)
for _c, _p in enumerate(PERMS):
    for _i, _lab in enumerate(_p):
        POS[_c, _lab] = _i


def _matchings(edges: list[tuple[int, int]]) -> list[int]:
    out = []
    for mask in range(1 << len(edges)):
        used = set()
        ok = True
        for e, (i, j) in enumerate(edges):
            if mask >> e & 1:
                if i in used or j in used:
                    ok = False
                    break
                used.update((i, j))
        if ok:
            out.append(mask)
    return out


@lru_cache(maxsize=1024)
def tables(edges: tuple[tuple[int, int], ...]):
    """Transition tables for a topology given as sorted position pairs."""
    ne = len(edges)
    trans = np.zeros((N_CONF, ne), dtype=np.int32)
    for c, p in enumerate(PERMS):
        for e, (i, j) in enumerate(edges):
            q = list(p)
            q[i], q[j] = q[j], q[i]
            trans[c, e] = PERM_INDEX[tuple(q)]
    eidx = -np.ones((6, 6), dtype=np.int32)
    for e, (i, j) in enumerate(edges):
        eidx[i, j] = eidx[j, i] = e
    masks = _matchings(list(edges))
    mindex = {m: k for k, m in enumerate(masks)}
    touch = [0] * 6
    for e, (i, j) in enumerate(edges):
        touch[i] |= 1 << e
        touch[j] |= 1 << e
    mpay = np.zeros((len(masks), ne), dtype=np.int32)
    mhas = np.zeros((len(masks), ne), dtype=np.bool_)
    for k, m in enumerate(masks):
        for e, (i, j) in enumerate(edges):
            mhas[k, e] = bool(m >> e & 1)
            mpay[k, e] = mindex[(m & ~touch[i] & ~touch[j]) | (1 << e)]
    return trans, eidx, mpay, mhas, masks


@numba.njit(cache=True)
def zero_one_bfs(trans, pos, eidx, mpay, mhas, ref_pairs, start, dest):
    """Return (goal state, dist, parent state, parent move); move < ne is a swap, ne + e a reference pulse."""
    n = ref_pairs.shape[0]
    ncf = trans.shape[0]
    ne = trans.shape[1]
    nm = mpay.shape[0]
    total = (n + 1) * ncf * nm
    big = 1 << 30
    dist = np.full(total, big, dtype=np.int32)
    done = np.zeros(total, dtype=np.bool_)
    par = np.full(total, -1, dtype=np.int32)
    pmove = np.full(total, -1, dtype=np.int16)
    cap = 1 << 20
    buf = np.empty(cap, dtype=np.int32)
    head = 0
    size = 0
    s0 = (0 * ncf + start) * nm
    dist[s0] = 0
    buf[0] = s0
    size = 1
    goal = -1
    while size > 0:
        s = buf[head]
        head = (head + 1) % cap
        size -= 1
        if done[s]:
            continue
        done[s] = True
        d = dist[s]
        m = s % nm
        kc = s // nm
        c = kc % ncf
        k = kc // ncf
        if k == n and dest[c]:
            goal = s
            break
        for mv in range(ne + 1):
            if mv < ne:
                e = mv
                nk = k
                nc = trans[c, e]
            else:
                if k >= n:
                    continue
                e = eidx[pos[c, ref_pairs[k, 0]], pos[c, ref_pairs[k, 1]]]
                if e < 0:
                    continue
                nk = k + 1
                nc = c
            if mhas[m, e]:
                w = 0
                nmat = m
            else:
                w = 1
                nmat = mpay[m, e]
            t = (nk * ncf + nc) * nm + nmat
            nd = d + w
            if nd < dist[t]:
                dist[t] = nd
                par[t] = s
                pmove[t] = mv if mv < ne else ne + e
                if size == cap:
                    # grow the ring buffer, unrolling it from head
                    nb = np.empty(cap * 2, dtype=np.int32)
                    for q in range(size):
                        nb[q] = buf[(head + q) % cap]
                    buf = nb
                    head = 0
                    cap *= 2
                if w == 0:
                    head = (head - 1) % cap
                    buf[head] = t
                else:
                    buf[(head + size) % cap] = t
                size += 1
    return goal, dist, par, pmove


@numba.njit(cache=True)
def _geodesic_frontier(w, trans, mpay, mhas):
    """Relax every (conf, matching) cost along all shortest swap chains leaving its configuration."""
    ncf, ne = trans.shape
    nm = mpay.shape[0]
    big = 1 << 30
    out = w.copy()
    dist = np.empty(ncf, dtype=np.int32)
    order = np.empty(ncf, dtype=np.int32)
    cur = np.empty((ncf, nm), dtype=np.int32)
    for c0 in range(ncf):
        live = False
        for m in range(nm):
            if w[c0, m] < big:
                live = True
                break
        if not live:
            continue
        dist[:] = -1
        dist[c0] = 0
        order[0] = c0
        head, tail = 0, 1
        while head < tail:
            c = order[head]
            head += 1
            for e in range(ne):
                n = trans[c, e]
                if dist[n] < 0:
                    dist[n] = dist[c] + 1
                    order[tail] = n
                    tail += 1
        cur[:, :] = big
        cur[c0, :] = w[c0, :]
        for q in range(tail):
            c = order[q]
            for m in range(nm):
                x = cur[c, m]
                if x >= big:
                    continue
                if x < out[c, m]:
                    out[c, m] = x
                for e in range(ne):
                    n = trans[c, e]
                    if dist[n] != dist[c] + 1:
                        continue
                    if mhas[m, e]:
                        nmat, nx = m, x
                    else:
                        nmat, nx = mpay[m, e], x + 1
                    if nx < cur[n, nmat]:
                        cur[n, nmat] = nx
    return out


@numba.njit(cache=True)
def layered_oracle(trans, pos, eidx, mpay, mhas, ref_pairs, start, dest):
    """Minimum weight over the layered graph: geodesic swap chains between consecutive reference pulses."""
    ncf = trans.shape[0]
    nm = mpay.shape[0]
    big = 1 << 30
    w = np.full((ncf, nm), big, dtype=np.int32)
    w[start, 0] = 0
    for k in range(ref_pairs.shape[0]):
        w = _geodesic_frontier(w, trans, mpay, mhas)
        nw = np.full((ncf, nm), big, dtype=np.int32)
        for c in range(ncf):
            e = eidx[pos[c, ref_pairs[k, 0]], pos[c, ref_pairs[k, 1]]]
            if e < 0:
                continue
            for m in range(nm):
                x = w[c, m]
                if x >= big:
                    continue
                if mhas[m, e]:
                    t, y = m, x
                else:
                    t, y = mpay[m, e], x + 1
                if y < nw[c, t]:
                    nw[c, t] = y
        w = nw
    w = _geodesic_frontier(w, trans, mpay, mhas)
    best = big
    for c in range(ncf):
        if dest[c]:
            for m in range(nm):
                if w[c, m] < best:
                    best = w[c, m]
    return best
