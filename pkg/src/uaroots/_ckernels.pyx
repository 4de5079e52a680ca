# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for tree growth and centrality prefix sums.

Mirrors ``_pykernels`` exactly; see that module for the contracts.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()

NAME = "cython"

ctypedef cnp.int64_t i64


def ua_parents(const double[::1] u):
    cdef Py_ssize_t n = u.shape[0] + 1
    cdef Py_ssize_t k
    cdef i64 p
    out = np.empty(n, dtype=np.int64)
    cdef i64[::1] parent = out
    parent[0] = -1
    for k in range(1, n):
        p = <i64>(u[k - 1] * <double>k)
        if p > k - 1:
            p = k - 1
        parent[k] = p
    return out


def birth_ranks(const i64[::1] parent):
    cdef Py_ssize_t n = parent.shape[0]
    cdef Py_ssize_t i
    out = np.zeros(n, dtype=np.int64)
    count_arr = np.zeros(n, dtype=np.int64)
    cdef i64[::1] rank = out
    cdef i64[::1] count = count_arr
    for i in range(1, n):
        count[parent[i]] += 1
        rank[i] = count[parent[i]]
    return out


def ua_regular_tree(int d, const double[::1] u):
    cdef Py_ssize_t steps = u.shape[0]
    cdef Py_ssize_t size = d * (steps + 1) + 2
    cdef Py_ssize_t nleaves = 0, idx, j, s
    cdef i64 v, nxt
    par_arr = np.empty(size, dtype=np.int64)
    rank_arr = np.empty(size, dtype=np.int64)
    leaf_arr = np.empty((d - 1) * (steps + 1) + 2, dtype=np.int64)
    cdef i64[::1] parent = par_arr
    cdef i64[::1] rank = rank_arr
    cdef i64[::1] leaves = leaf_arr
    parent[0] = -1
    rank[0] = 0
    for j in range(1, d + 2):
        parent[j] = 0
        rank[j] = j
        leaves[nleaves] = j
        nleaves += 1
    nxt = d + 2
    for s in range(steps):
        idx = <Py_ssize_t>(u[s] * <double>nleaves)
        if idx >= nleaves:
            idx = nleaves - 1
        v = leaves[idx]
        for j in range(d):
            parent[nxt + j] = v
            rank[nxt + j] = j + 1
        leaves[idx] = nxt
        for j in range(1, d):
            leaves[nleaves] = nxt + j
            nleaves += 1
        nxt += d
    return par_arr, rank_arr


def subtree_sizes(const i64[::1] parent):
    cdef Py_ssize_t n = parent.shape[0]
    cdef Py_ssize_t i
    out = np.ones(n, dtype=np.int64)
    cdef i64[::1] sizes = out
    for i in range(n - 1, 0, -1):
        sizes[parent[i]] += sizes[i]
    return out


def log_ratios(const i64[::1] parent, const i64[::1] sizes, const double[::1] logtab):
    cdef Py_ssize_t n = parent.shape[0]
    cdef Py_ssize_t i
    cdef i64 total = sizes[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] lr = out
    lr[0] = 0.0
    for i in range(1, n):
        lr[i] = lr[parent[i]] + (logtab[total - sizes[i]] - logtab[sizes[i]])
    return out


def weights_heights(const i64[::1] parent, const i64[::1] rank):
    cdef Py_ssize_t n = parent.shape[0]
    cdef Py_ssize_t i
    w_arr = np.zeros(n, dtype=np.int64)
    h_arr = np.zeros(n, dtype=np.int64)
    cdef i64[::1] weight = w_arr
    cdef i64[::1] height = h_arr
    for i in range(1, n):
        weight[i] = weight[parent[i]] + rank[i]
        height[i] = height[parent[i]] + 1
    return w_arr, h_arr


def polya_urn(counts, i64 replacement, const double[::1] u, Py_ssize_t thin=0):
    c_arr = np.array(counts, dtype=np.int64)
    cdef i64[::1] c = c_arr
    cdef Py_ssize_t k = c.shape[0]
    cdef Py_ssize_t draws = u.shape[0]
    cdef Py_ssize_t t, j, colour, row = 0
    cdef i64 total = 0, acc
    cdef double target
    for j in range(k):
        total += c[j]
    nsnap = draws // thin if thin > 0 else 0
    snap_arr = np.empty((nsnap, k), dtype=np.int64)
    cdef i64[:, ::1] snaps = snap_arr
    for t in range(draws):
        target = u[t] * <double>total
        acc = 0
        colour = k - 1
        for j in range(k):
            acc += c[j]
            if target < <double>acc:
                colour = j
                break
        c[colour] += replacement
        total += replacement
        if thin > 0 and (t + 1) % thin == 0:
            for j in range(k):
                snaps[row, j] = c[j]
            row += 1
    return c_arr, snap_arr
