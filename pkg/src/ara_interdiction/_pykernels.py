"""Pure-Python kernels. Same interface and arithmetic order as ``_ckernels``."""

from __future__ import annotations

import numpy as np

_NO_PATH = 1 << 60


class BeliefKernel:
    """Attack-success DP restricted to the support of each belief's edge choices.

    Support entries ``sup_ptr[a]:sup_ptr[a+1]`` of belief ``a`` list edge
    indices in ascending (topological) order with their ``psi``, ``delta`` and
    ``delta_tilde`` values. Edges with ``psi == 0`` carry no flow and are
    omitted by the caller.
    """

    def __init__(self, node_count, tails, heads, sup_ptr, sup_edge, sup_psi, sup_delta,
                 sup_dtilde, weights):
        self.sink = int(node_count) - 1
        self._sup_edge_np = np.asarray(sup_edge, dtype=np.int64)
        tails = np.asarray(tails, dtype=np.int64)
        heads = np.asarray(heads, dtype=np.int64)
        self._sup_tail = tails[self._sup_edge_np].tolist() if len(self._sup_edge_np) else []
        self._sup_head = heads[self._sup_edge_np].tolist() if len(self._sup_edge_np) else []
        self._sup_ptr = np.asarray(sup_ptr, dtype=np.int64).tolist()
        self._psi = np.asarray(sup_psi, dtype=float).tolist()
        self._delta = np.asarray(sup_delta, dtype=float).tolist()
        self._dtilde = np.asarray(sup_dtilde, dtype=float).tolist()
        self._weights = np.asarray(weights, dtype=float).tolist()

    def _success(self, cov) -> float:
        total = 0.0
        ptr = self._sup_ptr
        tail, head, psi = self._sup_tail, self._sup_head, self._psi
        delta, dtilde = self._delta, self._dtilde
        sink = self.sink
        for a, w in enumerate(self._weights):
            reach = {0: 1.0}
            for s in range(ptr[a], ptr[a + 1]):
                r = reach.get(tail[s], 0.0)
                if r == 0.0:
                    continue
                v = r * psi[s] * (dtilde[s] if cov[s] else delta[s])
                h = head[s]
                reach[h] = reach.get(h, 0.0) + v
            total += w * reach.get(sink, 0.0)
        return total

    def success(self, covered) -> float:
        if len(self._sup_edge_np) == 0:
            return 0.0
        cov = np.asarray(covered)[self._sup_edge_np].tolist()
        return self._success(cov)

    def success_batch(self, covered, ctrl_ptr, ctrl_edges, candidates) -> np.ndarray:
        covered = np.asarray(covered, dtype=np.uint8)
        out = np.empty(len(candidates), dtype=float)
        for k, m in enumerate(candidates):
            trial = covered.copy()
            trial[ctrl_edges[ctrl_ptr[m]:ctrl_ptr[m + 1]]] = 1
            out[k] = self.success(trial)
        return out


def best_path(node_count, heads, out_ptr, rel):
    """Maximum-reliability source-sink path as a list of edge indices.

    Ranks completions by (number of zero-reliability edges, product of the
    non-zero reliabilities), preferring the smallest successor node on ties so
    the walk yields the lexicographically smallest optimal node sequence.
    Returns ``None`` when the sink is unreachable.
    """
    n = int(node_count)
    heads = np.asarray(heads).tolist()
    ptr = np.asarray(out_ptr).tolist()
    rel = np.asarray(rel, dtype=float).tolist()
    zero = [_NO_PATH] * n
    prod = [0.0] * n
    succ = [-1] * n
    zero[n - 1] = 0
    prod[n - 1] = 1.0
    for v in range(n - 2, -1, -1):
        bz, bp, be = _NO_PATH, -1.0, -1
        for e in range(ptr[v], ptr[v + 1]):
            w = heads[e]
            if zero[w] == _NO_PATH:
                continue
            r = rel[e]
            if r > 0.0:
                cz, cp = zero[w], r * prod[w]
            else:
                cz, cp = zero[w] + 1, prod[w]
            if cz < bz or (cz == bz and cp > bp):
                bz, bp, be = cz, cp, e
        zero[v], prod[v], succ[v] = bz, bp, be
    if zero[0] == _NO_PATH:
        return None
    path = []
    v = 0
    while v != n - 1:
        e = succ[v]
        path.append(e)
        v = heads[e]
    return path
