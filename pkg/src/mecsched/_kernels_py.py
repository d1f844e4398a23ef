"""Pure-Python exhaustive search kernels (fallback for the compiled module).

Partitions are enumerated as restricted growth strings: label vectors where
task 0 has label 0 and every later label is at most one more than the
largest label seen so far. Each unordered partition appears exactly once and
its string is the lexicographically smallest labelling of it, so a
lexicographic scan with a strict improvement test returns the
lexicographically smallest optimal labelling overall.

The arithmetic here is mirrored operation for operation in ``_kernels.pyx``.
"""
import numpy as np

TIE_TOL = 1e-12


def _earlier_edges(n, src, dst, w):
    # For each task, the edges joining it to lower-indexed tasks.
    back = [[] for _ in range(n)]
    for e in range(len(w)):
        a, b = int(src[e]), int(dst[e])
        if a < b:
            back[b].append((a, float(w[e])))
        elif b < a:
            back[a].append((b, float(w[e])))
    return back


def _improves(value, best):
    return value < best - TIE_TOL * max(1.0, abs(best))


def search_partitions(n_tasks, n_sets, src, dst, w, cols, scales, mu_c, mu_b, theta, cut_factor, edge_norm):
    """Minimize the partition objective over all partitions into exactly n_sets sets.

    Returns (labels, value, visited).
    """
    n, k = int(n_tasks), int(n_sets)
    cols = np.asarray(cols, dtype=np.float64)
    width = cols.shape[1]
    colv = [[float(cols[i, c]) for c in range(width)] for i in range(n)]
    scalev = [float(s) for s in scales]
    back = _earlier_edges(n, src, dst, w)
    labels = [0] * n
    best = [float("inf"), None, 0]

    def leaf(cross):
        V = [[0.0] * width for _ in range(k)]
        for i in range(n):
            row = V[labels[i]]
            for c in range(width):
                row[c] += colv[i][c]
        bal = 0.0
        for j in range(k):
            for c in range(width):
                bal += (V[j][c] / (scalev[c] / k)) ** theta
        value = mu_c * (cut_factor * cross) / edge_norm + mu_b / k * bal
        best[2] += 1
        if best[1] is None or _improves(value, best[0]):
            best[0] = value
            best[1] = list(labels)

    def descend(i, blocks, cross):
        if i == n:
            if blocks == k:
                leaf(cross)
            return
        remaining = n - i - 1
        for lab in range(min(blocks, k - 1) + 1):
            after = blocks + (1 if lab == blocks else 0)
            if after + remaining < k:
                continue
            labels[i] = lab
            add = 0.0
            for j, wt in back[i]:
                if labels[j] != lab:
                    add += wt
            descend(i + 1, after, cross + add)

    if n == 0 or k < 1 or k > n:
        raise ValueError("need 1 <= n_sets <= n_tasks")
    labels[0] = 0
    descend(1, 1, 0.0)
    return np.array(best[1], dtype=np.int64), best[0], best[2]


def search_joint(n_tasks, n_sets, src, dst, w, demand, capacity, mu_c, mu_b, comm_den, eps):
    """Minimize mu_c * C_OH + mu_b * B_tot over partitions and placements.

    Returns (labels, servers, value, n_feasible); labels is None when no
    feasible pair exists.
    """
    n, k = int(n_tasks), int(n_sets)
    demand = np.asarray(demand, dtype=np.float64)
    capacity = np.asarray(capacity, dtype=np.float64)
    R = demand.shape[1]
    S = capacity.shape[0]
    dem = [[float(demand[i, r]) for r in range(R)] for i in range(n)]
    cap = [[float(capacity[s, r]) for r in range(R)] for s in range(S)]
    srcv = [int(x) for x in src]
    dstv = [int(x) for x in dst]
    wv = [float(x) for x in w]
    labels = [0] * n
    best = [float("inf"), None, None, 0]

    def leaf():
        beta = [[0.0] * R for _ in range(k)]
        for i in range(n):
            row = beta[labels[i]]
            for r in range(R):
                row[r] += dem[i][r]
        F = [[0.0] * k for _ in range(k)]
        for e in range(len(wv)):
            a, b = labels[srcv[e]], labels[dstv[e]]
            if a != b:
                lo, hi = (a, b) if a < b else (b, a)
                F[lo][hi] += wv[e]
        servers = [0] * k
        while True:
            load = [[0.0] * R for _ in range(S)]
            for j in range(k):
                row = load[servers[j]]
                for r in range(R):
                    row[r] += beta[j][r]
            ok = True
            for s in range(S):
                for r in range(R):
                    if load[s][r] > cap[s][r] + eps:
                        ok = False
            if ok:
                num = 0.0
                for p in range(k):
                    for q in range(p + 1, k):
                        if servers[p] != servers[q]:
                            num += F[p][q]
                coh = num / comm_den if comm_den > 0.0 else 0.0
                btot = 0.0
                for s in range(S):
                    mean = 0.0
                    for r in range(R):
                        mean += load[s][r] / cap[s][r]
                    mean /= R
                    dev = 0.0
                    for r in range(R):
                        d = load[s][r] / cap[s][r] - mean
                        dev += d * d
                    btot += dev / R
                value = mu_c * coh + mu_b * btot
                best[3] += 1
                if best[1] is None or _improves(value, best[0]):
                    best[0] = value
                    best[1] = list(labels)
                    best[2] = list(servers)
            # next placement vector in lexicographic order
            pos = k - 1
            while pos >= 0 and servers[pos] == S - 1:
                servers[pos] = 0
                pos -= 1
            if pos < 0:
                break
            servers[pos] += 1

    def descend(i, blocks):
        if i == n:
            if blocks == k:
                leaf()
            return
        remaining = n - i - 1
        for lab in range(min(blocks, k - 1) + 1):
            after = blocks + (1 if lab == blocks else 0)
            if after + remaining < k:
                continue
            labels[i] = lab
            descend(i + 1, after)

    if n == 0 or k < 1 or k > n or S < 1:
        raise ValueError("need 1 <= n_sets <= n_tasks and at least one server")
    labels[0] = 0
    descend(1, 1)
    if best[1] is None:
        return None, None, float("inf"), 0
    return np.array(best[1], dtype=np.int64), np.array(best[2], dtype=np.int64), best[0], best[3]
