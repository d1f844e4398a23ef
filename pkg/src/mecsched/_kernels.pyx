# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled exhaustive search kernels; see _kernels_py for the reference."""
import numpy as np
cimport numpy as cnp
from libc.math cimport pow, fabs
from libc.stdlib cimport malloc, calloc, free

cnp.import_array()

cdef double TIE_TOL = 1e-12


cdef inline bint improves(double value, double best, bint have) noexcept nogil:
    cdef double scale = fabs(best)
    if not have:
        return True
    if scale < 1.0:
        scale = 1.0
    return value < best - TIE_TOL * scale


cdef struct PartCtx:
    int n
    int k
    int width
    double *cols        # n * width
    double *scales      # width
    int *back_start     # n + 1
    int *back_idx
    double *back_w
    double mu_c
    double mu_b
    double theta
    double cut_factor
    double edge_norm
    int *labels
    int *best_labels
    double best
    bint have
    long visited
    double *V           # k * width


cdef void part_leaf(PartCtx *c, double cross) noexcept nogil:
    cdef int i, j, col
    cdef double bal = 0.0, value
    for j in range(c.k * c.width):
        c.V[j] = 0.0
    for i in range(c.n):
        for col in range(c.width):
            c.V[c.labels[i] * c.width + col] += c.cols[i * c.width + col]
    for j in range(c.k):
        for col in range(c.width):
            bal += pow(c.V[j * c.width + col] / (c.scales[col] / <double>c.k), c.theta)
    value = c.mu_c * (c.cut_factor * cross) / c.edge_norm + c.mu_b / <double>c.k * bal
    c.visited += 1
    if improves(value, c.best, c.have):
        c.best = value
        c.have = True
        for i in range(c.n):
            c.best_labels[i] = c.labels[i]


cdef void part_descend(PartCtx *c, int i, int blocks, double cross) noexcept nogil:
    cdef int lab, after, remaining, top, e
    cdef double add
    if i == c.n:
        if blocks == c.k:
            part_leaf(c, cross)
        return
    remaining = c.n - i - 1
    top = blocks if blocks < c.k - 1 else c.k - 1
    for lab in range(top + 1):
        after = blocks + (1 if lab == blocks else 0)
        if after + remaining < c.k:
            continue
        c.labels[i] = lab
        add = 0.0
        for e in range(c.back_start[i], c.back_start[i + 1]):
            if c.labels[c.back_idx[e]] != lab:
                add += c.back_w[e]
        part_descend(c, i + 1, after, cross + add)


def _csr_back(int n, src, dst, w):
    back = [[] for _ in range(n)]
    for e in range(len(w)):
        a, b = int(src[e]), int(dst[e])
        if a < b:
            back[b].append((a, float(w[e])))
        elif b < a:
            back[a].append((b, float(w[e])))
    start = np.zeros(n + 1, dtype=np.intc)
    idx = []
    wt = []
    for i in range(n):
        for j, x in back[i]:
            idx.append(j)
            wt.append(x)
        start[i + 1] = len(idx)
    return start, np.array(idx, dtype=np.intc), np.array(wt, dtype=np.float64)


def search_partitions(n_tasks, n_sets, src, dst, w, cols, scales, double mu_c, double mu_b,
                      double theta, double cut_factor, double edge_norm):
    cdef int n = n_tasks, k = n_sets
    if n == 0 or k < 1 or k > n:
        raise ValueError("need 1 <= n_sets <= n_tasks")
    cdef cnp.ndarray[double, ndim=2, mode="c"] colarr = np.ascontiguousarray(cols, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1, mode="c"] scalearr = np.ascontiguousarray(scales, dtype=np.float64)
    start, idx, wt = _csr_back(n, src, dst, w)
    cdef int[::1] start_v = start
    cdef int[::1] idx_v = idx
    cdef double[::1] wt_v = wt
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out = np.zeros(n, dtype=np.int64)
    cdef PartCtx c
    cdef int i
    c.n = n
    c.k = k
    c.width = colarr.shape[1]
    c.cols = &colarr[0, 0] if n * c.width > 0 else NULL
    c.scales = &scalearr[0]
    c.back_start = &start_v[0]
    c.back_idx = &idx_v[0] if idx.shape[0] > 0 else NULL
    c.back_w = &wt_v[0] if wt.shape[0] > 0 else NULL
    c.mu_c = mu_c
    c.mu_b = mu_b
    c.theta = theta
    c.cut_factor = cut_factor
    c.edge_norm = edge_norm
    c.best = 0.0
    c.have = False
    c.visited = 0
    c.labels = <int *>calloc(n, sizeof(int))
    c.best_labels = <int *>calloc(n, sizeof(int))
    c.V = <double *>calloc(k * c.width, sizeof(double))
    try:
        with nogil:
            part_descend(&c, 1, 1, 0.0)
        for i in range(n):
            out[i] = c.best_labels[i]
    finally:
        free(c.labels)
        free(c.best_labels)
        free(c.V)
    return out, c.best, c.visited


cdef struct JointCtx:
    int n
    int k
    int R
    int S
    int E
    double *dem        # n * R
    double *cap        # S * R
    int *src
    int *dst
    double *w
    double mu_c
    double mu_b
    double comm_den
    double eps
    int *labels
    int *servers
    int *best_labels
    int *best_servers
    double best
    bint have
    long feasible
    double *beta       # k * R
    double *F          # k * k
    double *load       # S * R


cdef void joint_leaf(JointCtx *c) noexcept nogil:
    cdef int i, j, r, e, a, b, lo, hi, p, q, s, pos
    cdef double num, coh, btot, mean, dev, d, value
    cdef bint ok
    for j in range(c.k * c.R):
        c.beta[j] = 0.0
    for i in range(c.n):
        for r in range(c.R):
            c.beta[c.labels[i] * c.R + r] += c.dem[i * c.R + r]
    for j in range(c.k * c.k):
        c.F[j] = 0.0
    for e in range(c.E):
        a = c.labels[c.src[e]]
        b = c.labels[c.dst[e]]
        if a != b:
            if a < b:
                lo = a
                hi = b
            else:
                lo = b
                hi = a
            c.F[lo * c.k + hi] += c.w[e]
    for j in range(c.k):
        c.servers[j] = 0
    while True:
        for j in range(c.S * c.R):
            c.load[j] = 0.0
        for j in range(c.k):
            for r in range(c.R):
                c.load[c.servers[j] * c.R + r] += c.beta[j * c.R + r]
        ok = True
        for s in range(c.S):
            for r in range(c.R):
                if c.load[s * c.R + r] > c.cap[s * c.R + r] + c.eps:
                    ok = False
        if ok:
            num = 0.0
            for p in range(c.k):
                for q in range(p + 1, c.k):
                    if c.servers[p] != c.servers[q]:
                        num += c.F[p * c.k + q]
            coh = num / c.comm_den if c.comm_den > 0.0 else 0.0
            btot = 0.0
            for s in range(c.S):
                mean = 0.0
                for r in range(c.R):
                    mean += c.load[s * c.R + r] / c.cap[s * c.R + r]
                mean /= c.R
                dev = 0.0
                for r in range(c.R):
                    d = c.load[s * c.R + r] / c.cap[s * c.R + r] - mean
                    dev += d * d
                btot += dev / c.R
            value = c.mu_c * coh + c.mu_b * btot
            c.feasible += 1
            if improves(value, c.best, c.have):
                c.best = value
                c.have = True
                for i in range(c.n):
                    c.best_labels[i] = c.labels[i]
                for j in range(c.k):
                    c.best_servers[j] = c.servers[j]
        pos = c.k - 1
        while pos >= 0 and c.servers[pos] == c.S - 1:
            c.servers[pos] = 0
            pos -= 1
        if pos < 0:
            break
        c.servers[pos] += 1


cdef void joint_descend(JointCtx *c, int i, int blocks) noexcept nogil:
    cdef int lab, after, remaining, top
    if i == c.n:
        if blocks == c.k:
            joint_leaf(c)
        return
    remaining = c.n - i - 1
    top = blocks if blocks < c.k - 1 else c.k - 1
    for lab in range(top + 1):
        after = blocks + (1 if lab == blocks else 0)
        if after + remaining < c.k:
            continue
        c.labels[i] = lab
        joint_descend(c, i + 1, after)


def search_joint(n_tasks, n_sets, src, dst, w, demand, capacity, double mu_c, double mu_b,
                 double comm_den, double eps):
    cdef int n = n_tasks, k = n_sets
    cdef cnp.ndarray[double, ndim=2, mode="c"] demarr = np.ascontiguousarray(demand, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2, mode="c"] caparr = np.ascontiguousarray(capacity, dtype=np.float64)
    if n == 0 or k < 1 or k > n or caparr.shape[0] < 1:
        raise ValueError("need 1 <= n_sets <= n_tasks and at least one server")
    cdef int[::1] src_v = np.ascontiguousarray(src, dtype=np.intc)
    cdef int[::1] dst_v = np.ascontiguousarray(dst, dtype=np.intc)
    cdef double[::1] w_v = np.ascontiguousarray(w, dtype=np.float64)
    cdef JointCtx c
    cdef int i
    c.n = n
    c.k = k
    c.R = demarr.shape[1]
    c.S = caparr.shape[0]
    c.E = w_v.shape[0]
    c.dem = &demarr[0, 0]
    c.cap = &caparr[0, 0]
    c.src = &src_v[0] if c.E > 0 else NULL
    c.dst = &dst_v[0] if c.E > 0 else NULL
    c.w = &w_v[0] if c.E > 0 else NULL
    c.mu_c = mu_c
    c.mu_b = mu_b
    c.comm_den = comm_den
    c.eps = eps
    c.best = 0.0
    c.have = False
    c.feasible = 0
    c.labels = <int *>calloc(n, sizeof(int))
    c.servers = <int *>calloc(k, sizeof(int))
    c.best_labels = <int *>calloc(n, sizeof(int))
    c.best_servers = <int *>calloc(k, sizeof(int))
    c.beta = <double *>calloc(k * c.R, sizeof(double))
    c.F = <double *>calloc(k * k, sizeof(double))
    c.load = <double *>calloc(c.S * c.R, sizeof(double))
    try:
        with nogil:
            joint_descend(&c, 1, 1)
        if not c.have:
            return None, None, float("inf"), 0
        labels = np.array([c.best_labels[i] for i in range(n)], dtype=np.int64)
        servers = np.array([c.best_servers[i] for i in range(k)], dtype=np.int64)
        return labels, servers, c.best, c.feasible
    finally:
        free(c.labels)
        free(c.servers)
        free(c.best_labels)
        free(c.best_servers)
        free(c.beta)
        free(c.F)
        free(c.load)
