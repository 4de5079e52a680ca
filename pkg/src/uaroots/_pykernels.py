"""Pure-Python reference kernels.

Same signatures and bit-identical outputs as the compiled ``_ckernels``
module. Every function consumes pre-drawn uniforms instead of a generator,
so a tree is a deterministic function of its uniform stream on either
backend.
"""
import numpy as np

NAME = "python"


def ua_parents(u):
    """Parent array of a UA tree grown from ``len(u) + 1`` nodes."""
    u = np.asarray(u, dtype=np.float64)
    n = u.shape[0] + 1
    k = np.arange(1, n, dtype=np.int64)
    parent = np.empty(n, dtype=np.int64)
    parent[0] = -1
    # u*k can round up to k when u is the largest double below 1
    parent[1:] = np.minimum((u * k).astype(np.int64), k - 1)
    return parent


def birth_ranks(parent):
    parent = np.asarray(parent, dtype=np.int64).tolist()
    count = [0] * len(parent)
    rank = [0] * len(parent)
    for i in range(1, len(parent)):
        p = parent[i]
        count[p] += 1
        rank[i] = count[p]
    return np.array(rank, dtype=np.int64)


def ua_regular_tree(d, u):
    """(parent, rank) of the (d+1)-regular plane tree after ``len(u)`` leaf expansions."""
    u = np.asarray(u, dtype=np.float64).tolist()
    steps = len(u)
    size = d * (steps + 1) + 2
    parent = [0] * size
    rank = [0] * size
    parent[0] = -1
    leaves = []
    for j in range(1, d + 2):
        parent[j] = 0
        rank[j] = j
        leaves.append(j)
    nxt = d + 2
    for x in u:
        nl = len(leaves)
        idx = int(x * nl)
        if idx >= nl:
            idx = nl - 1
        v = leaves[idx]
        for j in range(d):
            parent[nxt + j] = v
            rank[nxt + j] = j + 1
        leaves[idx] = nxt
        leaves.extend(range(nxt + 1, nxt + d))
        nxt += d
    return np.array(parent, dtype=np.int64), np.array(rank, dtype=np.int64)


def subtree_sizes(parent):
    parent = np.asarray(parent, dtype=np.int64).tolist()
    sizes = [1] * len(parent)
    for i in range(len(parent) - 1, 0, -1):
        sizes[parent[i]] += sizes[i]
    return np.array(sizes, dtype=np.int64)


def log_ratios(parent, sizes, logtab):
    """log(phi(v)/phi(root)) for every node, by prefix sums down the tree."""
    parent = np.asarray(parent, dtype=np.int64)
    sizes = np.asarray(sizes, dtype=np.int64)
    logtab = np.asarray(logtab, dtype=np.float64)
    total = int(sizes[0])
    inc = (logtab[total - sizes] - logtab[sizes]).tolist()
    par = parent.tolist()
    lr = [0.0] * len(par)
    for i in range(1, len(par)):
        lr[i] = lr[par[i]] + inc[i]
    return np.array(lr, dtype=np.float64)


def weights_heights(parent, rank):
    par = np.asarray(parent, dtype=np.int64).tolist()
    rk = np.asarray(rank, dtype=np.int64).tolist()
    weight = [0] * len(par)
    height = [0] * len(par)
    for i in range(1, len(par)):
        p = par[i]
        weight[i] = weight[p] + rk[i]
        height[i] = height[p] + 1
    return np.array(weight, dtype=np.int64), np.array(height, dtype=np.int64)


def polya_urn(counts, replacement, u, thin=0):
    """Run ``len(u)`` urn draws in place on a copy of ``counts``.

    Returns the final counts and, when ``thin > 0``, a snapshot of the
    counts after every ``thin`` draws (shape ``(len(u) // thin, k)``).
    """
    c = np.asarray(counts, dtype=np.int64).tolist()
    k = len(c)
    total = sum(c)
    u = np.asarray(u, dtype=np.float64).tolist()
    snaps = []
    for t, x in enumerate(u, start=1):
        target = x * total
        acc = 0
        colour = k - 1
        for j in range(k):
            acc += c[j]
            if target < acc:
                colour = j
                break
        c[colour] += replacement
        total += replacement
        if thin and t % thin == 0:
            snaps.append(list(c))
    traj = np.array(snaps, dtype=np.int64).reshape(-1, k)
    return np.array(c, dtype=np.int64), traj
