# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Mirrors ``_pykernels`` operation for operation."""

import numpy as np

from libc.stdlib cimport malloc, free

cdef long long _NO_PATH = 1LL << 60


cdef class BeliefKernel:
    cdef long long sink
    cdef long long n_beliefs
    cdef const long long[::1] sup_ptr
    cdef const long long[::1] sup_edge
    cdef const long long[::1] sup_tail
    cdef const long long[::1] sup_head
    cdef const double[::1] psi
    cdef const double[::1] delta
    cdef const double[::1] dtilde
    cdef const double[::1] weights
    cdef double[::1] reach

    def __init__(self, node_count, tails, heads, sup_ptr, sup_edge, sup_psi, sup_delta,
                 sup_dtilde, weights):
        se = np.ascontiguousarray(sup_edge, dtype=np.int64)
        t = np.asarray(tails, dtype=np.int64)
        h = np.asarray(heads, dtype=np.int64)
        self.sink = int(node_count) - 1
        self.sup_edge = se
        self.sup_tail = np.ascontiguousarray(t[se], dtype=np.int64)
        self.sup_head = np.ascontiguousarray(h[se], dtype=np.int64)
        self.sup_ptr = np.ascontiguousarray(sup_ptr, dtype=np.int64)
        self.psi = np.ascontiguousarray(sup_psi, dtype=np.float64)
        self.delta = np.ascontiguousarray(sup_delta, dtype=np.float64)
        self.dtilde = np.ascontiguousarray(sup_dtilde, dtype=np.float64)
        self.weights = np.ascontiguousarray(weights, dtype=np.float64)
        self.n_beliefs = self.weights.shape[0]
        self.reach = np.zeros(int(node_count), dtype=np.float64)

    cdef double _success(self, const unsigned char[::1] cov) noexcept nogil:
        cdef double total = 0.0
        cdef double r, v, rel
        cdef long long a, s, e
        for a in range(self.n_beliefs):
            self.reach[0] = 1.0
            for s in range(self.sup_ptr[a], self.sup_ptr[a + 1]):
                r = self.reach[self.sup_tail[s]]
                if r == 0.0:
                    continue
                e = self.sup_edge[s]
                rel = self.dtilde[s] if cov[e] else self.delta[s]
                v = r * self.psi[s] * rel
                self.reach[self.sup_head[s]] = self.reach[self.sup_head[s]] + v
            total += self.weights[a] * self.reach[self.sink]
            self.reach[0] = 0.0
            for s in range(self.sup_ptr[a], self.sup_ptr[a + 1]):
                self.reach[self.sup_head[s]] = 0.0
        return total

    def success(self, covered):
        cdef const unsigned char[::1] cov = np.ascontiguousarray(covered, dtype=np.uint8)
        return self._success(cov)

    def success_batch(self, covered, ctrl_ptr, ctrl_edges, candidates):
        cdef unsigned char[::1] cov = np.array(covered, dtype=np.uint8, copy=True)
        cdef const long long[::1] cp = np.ascontiguousarray(ctrl_ptr, dtype=np.int64)
        cdef const long long[::1] ce = np.ascontiguousarray(ctrl_edges, dtype=np.int64)
        cdef const long long[::1] cand = np.ascontiguousarray(candidates, dtype=np.int64)
        out_np = np.empty(cand.shape[0], dtype=np.float64)
        cdef double[::1] out = out_np
        cdef long long k, m, s, n_set
        cdef long long n_ce = ce.shape[0]
        cdef long long *flipped = <long long *> malloc(max(n_ce, 1) * sizeof(long long))
        if flipped == NULL:
            raise MemoryError()
        try:
            for k in range(cand.shape[0]):
                m = cand[k]
                n_set = 0
                for s in range(cp[m], cp[m + 1]):
                    if cov[ce[s]] == 0:
                        cov[ce[s]] = 1
                        flipped[n_set] = ce[s]
                        n_set += 1
                out[k] = self._success(cov)
                for s in range(n_set):
                    cov[flipped[s]] = 0
        finally:
            free(flipped)
        return out_np


def best_path(node_count, heads, out_ptr, rel):
    cdef long long n = node_count
    cdef const long long[::1] hd = np.ascontiguousarray(heads, dtype=np.int64)
    cdef const long long[::1] ptr = np.ascontiguousarray(out_ptr, dtype=np.int64)
    cdef const double[::1] rl = np.ascontiguousarray(rel, dtype=np.float64)
    zero_np = np.full(n, _NO_PATH, dtype=np.int64)
    prod_np = np.zeros(n, dtype=np.float64)
    succ_np = np.full(n, -1, dtype=np.int64)
    cdef long long[::1] zero = zero_np
    cdef double[::1] prod = prod_np
    cdef long long[::1] succ = succ_np
    cdef long long v, e, w, bz, be, cz
    cdef double bp, cp, r
    zero[n - 1] = 0
    prod[n - 1] = 1.0
    for v in range(n - 2, -1, -1):
        bz = _NO_PATH
        bp = -1.0
        be = -1
        for e in range(ptr[v], ptr[v + 1]):
            w = hd[e]
            if zero[w] == _NO_PATH:
                continue
            r = rl[e]
            if r > 0.0:
                cz = zero[w]
                cp = r * prod[w]
            else:
                cz = zero[w] + 1
                cp = prod[w]
            if cz < bz or (cz == bz and cp > bp):
                bz = cz
                bp = cp
                be = e
        zero[v] = bz
        prod[v] = bp
        succ[v] = be
    if zero[0] == _NO_PATH:
        return None
    path = []
    v = 0
    while v != n - 1:
        e = succ[v]
        path.append(e)
        v = hd[e]
    return path
