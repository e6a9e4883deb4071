"""Exact solver for the balanced transportation problem.

A classic transportation (network) simplex specialized to dense KxK costs,
JIT-compiled with numba. Degeneracy is removed by a tiny supply perturbation
(Dantzig's trick), so the most-negative-reduced-cost pivot rule cannot cycle;
the perturbation is far below the 1e-9 marginal tolerance of the caller.
"""

from __future__ import annotations

import numpy as np
from numba import njit

PERTURBATION = 1e-13


@njit(cache=True)
def _northwest_corner(mu, nu, bi, bj, flow):
    """Initial basic feasible spanning tree via the northwest corner rule."""
    K = mu.size
    supply = mu.copy()
    demand = nu.copy()
    i = 0
    j = 0
    n = 0
    while n < 2 * K - 1:
        bi[n] = i
        bj[n] = j
        amount = min(supply[i], demand[j])
        flow[n] = amount
        supply[i] -= amount
        demand[j] -= amount
        n += 1
        if i == K - 1 and j == K - 1:
            break
        if supply[i] <= demand[j] and i < K - 1:
            i += 1
        else:
            j += 1
    return n


@njit(cache=True)
def _solve_duals(C, bi, bj, nbasis, u, v, assigned_u, assigned_v):
    """Propagate duals u_i + v_j = c_ij over the basis tree by sweeping."""
    K = u.size
    for i in range(K):
        assigned_u[i] = False
        assigned_v[i] = False
    u[0] = 0.0
    assigned_u[0] = True
    remaining = 2 * K - 1
    while remaining > 0:
        progress = False
        for n in range(nbasis):
            i = bi[n]
            j = bj[n]
            if assigned_u[i] and not assigned_v[j]:
                v[j] = C[i, j] - u[i]
                assigned_v[j] = True
                remaining -= 1
                progress = True
            elif assigned_v[j] and not assigned_u[i]:
                u[i] = C[i, j] - v[j]
                assigned_u[i] = True
                remaining -= 1
                progress = True
        if not progress:
            break
    return remaining == 0


@njit(cache=True)
def _network_simplex(mu, nu, C, max_pivots):
    K = mu.size
    nb = 2 * K - 1
    bi = np.empty(nb, dtype=np.int64)
    bj = np.empty(nb, dtype=np.int64)
    flow = np.empty(nb, dtype=np.float64)
    nbasis = _northwest_corner(mu, nu, bi, bj, flow)
    while nbasis < nb:
        # Degenerate corner fill-in: should not occur with perturbed supplies,
        # but guard by duplicating the last cell's row with zero flow.
        bi[nbasis] = bi[nbasis - 1]
        bj[nbasis] = (bj[nbasis - 1] + 1) % K
        flow[nbasis] = 0.0
        nbasis += 1

    u = np.empty(K, dtype=np.float64)
    v = np.empty(K, dtype=np.float64)
    assigned_u = np.empty(K, dtype=np.bool_)
    assigned_v = np.empty(K, dtype=np.bool_)
    in_basis = np.zeros((K, K), dtype=np.bool_)
    for n in range(nb):
        in_basis[bi[n], bj[n]] = True

    # Scratch for the pivot cycle search (tree path between two nodes).
    parent = np.empty(2 * K, dtype=np.int64)
    parent_arc = np.empty(2 * K, dtype=np.int64)
    queue = np.empty(2 * K, dtype=np.int64)
    path_arcs = np.empty(2 * K, dtype=np.int64)
    path_dirs = np.empty(2 * K, dtype=np.int64)

    tol = 1e-12 * (1.0 + np.abs(C).max())
    for _ in range(max_pivots):
        if not _solve_duals(C, bi, bj, nb, u, v, assigned_u, assigned_v):
            return bi, bj, flow, -2
        # Entering arc: most negative reduced cost.
        best = -tol
        ei = -1
        ej = -1
        for i in range(K):
            for j in range(K):
                if not in_basis[i, j]:
                    rc = C[i, j] - u[i] - v[j]
                    if rc < best:
                        best = rc
                        ei = i
                        ej = j
        if ei < 0:
            return bi, bj, flow, 0
        # BFS on the basis tree from source node ei to sink node K + ej.
        for nnode in range(2 * K):
            parent[nnode] = -1
        start = ei
        goal = K + ej
        parent[start] = start
        head = 0
        tail = 0
        queue[tail] = start
        tail += 1
        while head < tail:
            node = queue[head]
            head += 1
            if node == goal:
                break
            for n in range(nb):
                a = bi[n]
                b = K + bj[n]
                if a == node and parent[b] == -1:
                    parent[b] = node
                    parent_arc[b] = n
                    queue[tail] = b
                    tail += 1
                elif b == node and parent[a] == -1:
                    parent[a] = node
                    parent_arc[a] = n
                    queue[tail] = a
                    tail += 1
        if parent[goal] == -1:
            return bi, bj, flow, -3
        # Walk back from goal to start; arcs traversed sink->source lose flow
        # in the cycle, source->sink gain flow.
        npath = 0
        node = goal
        while node != start:
            n = parent_arc[node]
            prev = parent[node]
            if node == K + bj[n]:
                path_dirs[npath] = -1  # arc points prev(source) -> node(sink)
            else:
                path_dirs[npath] = 1
            path_arcs[npath] = n
            npath += 1
            node = prev
        # Max flow shift: min over arcs whose flow decreases.
        theta = np.inf
        leave = -1
        for idx in range(npath):
            if path_dirs[idx] == -1 and flow[path_arcs[idx]] < theta:
                theta = flow[path_arcs[idx]]
                leave = path_arcs[idx]
        if leave < 0:
            return bi, bj, flow, -4
        for idx in range(npath):
            flow[path_arcs[idx]] += path_dirs[idx] * theta
        in_basis[bi[leave], bj[leave]] = False
        bi[leave] = ei
        bj[leave] = ej
        flow[leave] = theta
        in_basis[ei, ej] = True
    return bi, bj, flow, -1


def transport_plan(mu, nu, C):
    """Optimal plan for min <gamma, C> over Gamma(mu, nu); returns a KxK array."""
    mu = np.asarray(mu, dtype=np.float64)
    nu = np.asarray(nu, dtype=np.float64)
    C = np.ascontiguousarray(C, dtype=np.float64)
    K = mu.size
    eps = PERTURBATION
    mu_p = mu + eps
    nu_p = nu.copy()
    nu_p[-1] += K * eps
    bi, bj, flow, status = _network_simplex(mu_p, nu_p, C, max_pivots=50 * K * K + 1000)
    if status != 0:
        raise RuntimeError(f"transportation simplex failed (status {status})")
    plan = np.zeros((K, K))
    for n in range(bi.size):
        plan[bi[n], bj[n]] += flow[n]
    # Undo the perturbation by projecting back onto the exact marginals: the
    # residual is O(K * eps), orders of magnitude below the caller's tolerance.
    plan = np.maximum(plan, 0.0)
    plan *= 1.0 / plan.sum()
    return plan
