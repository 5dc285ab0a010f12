"""Random graph, tree and branching-process samplers.

Every sampler takes a ``seed`` (int, ``None`` or a ``numpy`` Generator) and is
deterministic given it.  Vertices are 0-indexed.
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, ParameterError
from .kernels import WeightMatrix
from .rng import make_rng

DENSE_THRESHOLD = 0.1  # above this dominating probability the O(n^2) sweep is cheaper


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on ``range(n)``; ``edges`` is a sorted (E, 2) array with i < j."""

    n: int
    edges: np.ndarray = field(repr=False)

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if len(e):
            if (e[:, 0] >= e[:, 1]).any():
                raise InputError("edges must satisfy i < j (no self-loops)")
            if e.min() < 0 or e.max() >= self.n:
                raise InputError("edge endpoint out of range")
            order = np.lexsort((e[:, 1], e[:, 0]))
            e = e[order]
            if (np.diff(e, axis=0) == 0).all(axis=1).any():
                raise InputError("duplicate edge")
        e.flags.writeable = False
        object.__setattr__(self, "edges", e)

    @classmethod
    def from_pairs(cls, n: int, pairs) -> "Graph":
        """Build from arbitrary pairs: orients, drops loops and duplicates."""
        p = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        p = np.sort(p, axis=1)
        p = p[p[:, 0] != p[:, 1]]
        if len(p):
            p = np.unique(p, axis=0)
        return cls(n, p)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def adjacency(self):
        from scipy.sparse import coo_matrix

        e = self.edges
        data = np.ones(2 * len(e), dtype=np.int8)
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        return coo_matrix((data, (rows, cols)), shape=(self.n, self.n)).tocsr()

    def to_csv(self) -> str:
        lines = [f"# n={self.n}"] + [f"{i},{j}" for i, j in self.edges.tolist()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "Graph":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("#"):
            raise InputError("graph CSV needs a '# n=<n>' header")
        n = int(lines[0].lstrip("#").strip().split("=", 1)[1])
        pairs = [tuple(int(v) for v in ln.split(",")) for ln in lines[1:]]
        return cls(n, np.array(pairs, dtype=np.int64).reshape(-1, 2))


@dataclass(frozen=True)
class RootedOrderedTree:
    """Plane rooted tree; ``parent[root] == -1`` and ``children[v]`` is left-to-right."""

    n: int
    root: int
    parent: tuple
    children: tuple

    def __post_init__(self):
        if self.parent[self.root] != -1:
            raise InputError("root must have parent -1")
        if sum(p == -1 for p in self.parent) != 1:
            raise InputError("exactly one root expected")
        for v, kids in enumerate(self.children):
            if sorted(kids) != sorted(u for u in range(self.n) if self.parent[u] == v):
                raise InputError(f"child list of {v} inconsistent with parent array")
        # connected and acyclic: every vertex reaches the root
        for v in range(self.n):
            seen, u = 0, v
            while u != self.root:
                u = self.parent[u]
                seen += 1
                if seen > self.n:
                    raise InputError("parent array has a cycle")

    @classmethod
    def from_children(cls, root: int, children) -> "RootedOrderedTree":
        m = len(children)
        parent = [-1] * m
        for v, kids in enumerate(children):
            for u in kids:
                parent[u] = v
        return cls(m, root, tuple(parent), tuple(tuple(k) for k in children))

    @property
    def degrees(self) -> np.ndarray:
        return np.array([len(k) for k in self.children])

    def edges(self) -> list[tuple[int, int]]:
        return sorted((min(v, p), max(v, p)) for v, p in enumerate(self.parent) if p >= 0)

    def key(self):
        return (self.root, self.children)

    def to_csv(self) -> str:
        return f"# n={self.n} root={self.root}\n" + "\n".join(
            f"{v},{p},{' '.join(map(str, self.children[v]))}" for v, p in enumerate(self.parent)) + "\n"


@dataclass(frozen=True)
class BPSummary:
    total: int
    height: int
    weighted_depth: int
    generation_sizes: tuple
    truncated: bool


# ----------------------------------------------------------------------------
# low-level edge samplers


def _pair_from_index(k: np.ndarray, n: int):
    """Map linear indices of the strict upper triangle (row-major) to (i, j)."""
    k = np.asarray(k, dtype=np.int64)
    total = n * (n - 1) // 2
    r = total - 1 - k  # index counted from the end
    m = np.floor((np.sqrt(8.0 * r + 1) - 1) / 2).astype(np.int64)
    # fix floating-point slop
    m = np.where(m * (m + 1) // 2 > r, m - 1, m)
    m = np.where((m + 1) * (m + 2) // 2 <= r, m + 1, m)
    i = n - 2 - m
    row_start = i * (2 * n - i - 1) // 2
    j = k - row_start + i + 1
    return i, j


def _distinct_offsets(rng, sizes: np.ndarray, counts: np.ndarray):
    """For each row r draw ``counts[r]`` distinct offsets uniformly from ``range(sizes[r])``.

    Draw with replacement, keep the distinct ones, redraw the deficit; the
    procedure is exchangeable in the labels so each row's set is a uniform
    subset.
    """
    sizes = np.asarray(sizes, dtype=np.int64)
    counts = np.asarray(counts, dtype=np.int64)
    if (counts > sizes).any():
        raise ValueError("count exceeds range size")
    rows = np.repeat(np.arange(len(sizes)), counts)
    offs = (rng.random(len(rows)) * sizes[rows]).astype(np.int64)
    kept_r = np.empty(0, dtype=np.int64)
    kept_o = np.empty(0, dtype=np.int64)
    while True:
        allr = np.concatenate([kept_r, rows])
        allo = np.concatenate([kept_o, offs])
        key = np.unique(allr * (sizes.max() + 1) + allo)
        width = sizes.max() + 1
        kept_r, kept_o = key // width, key % width
        have = np.bincount(kept_r, minlength=len(sizes))
        deficit = counts - have
        if not deficit.any():
            return kept_r, kept_o
        rows = np.repeat(np.arange(len(sizes)), deficit)
        offs = (rng.random(len(rows)) * sizes[rows]).astype(np.int64)


def _erdos_renyi_pairs(rng, n: int, p: float):
    """All pairs independently with probability p via a binomial count of distinct pair indices."""
    total = n * (n - 1) // 2
    if total == 0 or p <= 0:
        return np.empty((0, 2), dtype=np.int64)
    k = int(rng.binomial(total, min(p, 1.0)))
    idx = np.sort(rng.choice(total, size=k, replace=False)) if k < total else np.arange(total)
    i, j = _pair_from_index(idx, n)
    return np.stack([i, j], axis=1)


def _row_thinned_pairs(rng, n: int, row_bound: np.ndarray, prob_fn):
    """Pairs i < j with probability prob_fn(i, j) <= row_bound[i], by per-row dominating
    binomial counts followed by thinning."""
    sizes = n - 1 - np.arange(n)
    counts = rng.binomial(sizes, np.clip(row_bound, 0.0, 1.0))
    r, o = _distinct_offsets(rng, sizes, counts)
    j = r + 1 + o
    if len(r) == 0:
        return np.empty((0, 2), dtype=np.int64)
    p = prob_fn(r, j)
    keep = rng.random(len(r)) * row_bound[r] < p
    return np.stack([r[keep], j[keep]], axis=1)


def _dense_pairs(rng, P: np.ndarray):
    n = P.shape[0]
    i, j = np.triu_indices(n, k=1)
    keep = rng.random(len(i)) < P[i, j]
    return np.stack([i[keep], j[keep]], axis=1)


def edge_probabilities(beta, n: int, rule: str):
    if rule == "capped":
        return np.minimum(1.0, beta / n)
    if rule == "exponential":
        return -np.expm1(-beta / n)
    raise ParameterError(f"unknown rule {rule!r}")


# ----------------------------------------------------------------------------
# public samplers


def sample_graphon_graph(weights: WeightMatrix, rule: str = "capped", seed=None) -> Graph:
    """Each pair {i, j} independently with probability 1 ^ beta/n (capped) or 1 - exp(-beta/n)."""
    rng = make_rng(seed)
    n = weights.n
    beta = weights.beta
    if rule not in ("capped", "exponential"):
        raise ParameterError(f"unknown rule {rule!r}")
    bmax = beta.max(axis=1) if n else np.zeros(0)
    bound = edge_probabilities(bmax, n, rule)
    if n < 2 or not bound.any():
        return Graph(n, np.empty((0, 2), dtype=np.int64))
    if bound.max() > DENSE_THRESHOLD:
        return Graph(n, _dense_pairs(rng, edge_probabilities(beta, n, rule)))
    pairs = _row_thinned_pairs(rng, n, bound, lambda i, j: edge_probabilities(beta[i, j], n, rule))
    return Graph(n, pairs)


def erdos_renyi(n: int, p: float, seed=None) -> Graph:
    return Graph(n, _erdos_renyi_pairs(make_rng(seed), n, p))


def _check_rank_one(x, q):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or len(x) == 0:
        raise InputError("x must be a nonempty vector")
    if not (x > 0).all() or not np.isfinite(x).all():
        raise ParameterError("weights must be positive and finite")
    if not q > 0 or not math.isfinite(q):
        raise ParameterError("q must be positive")
    return x


def _rank_one_direct(rng, x: np.ndarray, q: float) -> np.ndarray:
    n = len(x)
    if n < 2:
        return np.empty((0, 2), dtype=np.int64)
    if np.all(x == x[0]):
        return _erdos_renyi_pairs(rng, n, -math.expm1(-q * x[0] * x[0]))
    order = np.argsort(-x, kind="stable")
    xs = x[order]
    # in decreasing order, row i is dominated by its first partner i + 1
    bound = -np.expm1(-q * xs * np.append(xs[1:], 0.0))
    pairs = _row_thinned_pairs(rng, n, bound, lambda i, j: -np.expm1(-q * xs[i] * xs[j]))
    lab = order[pairs]
    return np.sort(lab, axis=1)


def _rank_one_exploration(rng, x: np.ndarray, q: float):
    """Breadth-first construction with exponential clocks; returns (pairs, order)."""
    n = len(x)
    undiscovered = np.ones(n, dtype=bool)
    order = []
    pairs = []
    head = 0
    while head < n:
        if head == len(order):
            cand = np.flatnonzero(undiscovered)
            root = int(rng.choice(cand, p=x[cand] / x[cand].sum()))
            undiscovered[root] = False
            order.append(root)
        v = order[head]
        head += 1
        # surplus edges to discovered-but-unexplored vertices
        queue = np.array(order[head:], dtype=np.int64)
        if len(queue):
            hit = rng.random(len(queue)) < -np.expm1(-q * x[v] * x[queue])
            pairs.extend((v, int(u)) for u in queue[hit])
        cand = np.flatnonzero(undiscovered)
        if len(cand):
            xi = rng.exponential(1.0 / (q * x[cand]))
            hit = xi <= x[v]
            kids = cand[hit][np.argsort(xi[hit], kind="stable")]
            undiscovered[kids] = False
            order.extend(int(u) for u in kids)
            pairs.extend((v, int(u)) for u in kids)
    pairs = np.array(pairs, dtype=np.int64).reshape(-1, 2)
    return np.sort(pairs, axis=1), np.array(order, dtype=np.int64)


def sample_rank_one(x, q: float, mode: str = "direct", seed=None):
    """G(x, q): edges independently with probability 1 - exp(-q x_i x_j).

    ``mode="exploration"`` returns ``(graph, order)`` where ``order`` is the
    size-biased breadth-first exploration order.
    """
    x = _check_rank_one(x, q)
    rng = make_rng(seed)
    if mode == "direct":
        return Graph.from_pairs(len(x), _rank_one_direct(rng, x, q))
    if mode == "exploration":
        pairs, order = _rank_one_exploration(rng, x, q)
        return Graph.from_pairs(len(x), pairs), order
    raise ParameterError(f"unknown mode {mode!r}")


def sample_rgiv(n: int, lam: float, seed=None) -> Graph:
    """Random graph with immigrating vertices observed at time pi/2 + lam n^(-1/3).

    Given N ~ Poisson(n t) vertices with sorted uniform arrival fractions V,
    pair {i, j} is an edge with probability 1 - exp(-t (V_i ^ V_j) / n).  With
    V sorted ascending, row i has the same probability for every j > i.
    """
    if n < 10:
        raise ParameterError("n must be >= 10")
    rng = make_rng(seed)
    t = math.pi / 2 + lam * n ** (-1 / 3)
    N = int(rng.poisson(n * t))
    V = np.sort(rng.random(N))
    if N < 2:
        return Graph(N, np.empty((0, 2), dtype=np.int64))
    p = -np.expm1(-t * V / n)
    sizes = N - 1 - np.arange(N)
    counts = rng.binomial(sizes, p)
    r, o = _distinct_offsets(rng, sizes, counts)
    return Graph(N, np.stack([r, r + 1 + o], axis=1))


# ----------------------------------------------------------------------------
# p-trees


def _check_pmf(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or len(p) == 0:
        raise InputError("p must be a nonempty vector")
    if (p <= 0).any():
        raise ParameterError("p must be strictly positive")
    if abs(p.sum() - 1) > 1e-9:
        raise ParameterError("p must sum to 1")
    return p


def sample_p_tree(p, seed=None) -> RootedOrderedTree:
    """Ordered p-tree via the first-repeat device on an i.i.d. p-sequence.

    The parent of a non-root vertex is the value just before its first
    appearance.  Children orders are then uniformly shuffled: ordering by
    first appearance is not uniform for non-uniform p.
    """
    p = _check_pmf(p)
    m = len(p)
    rng = make_rng(seed)
    parent = [-1] * m
    seen = np.zeros(m, dtype=bool)
    root = prev = None
    found = 0
    while found < m:
        batch = rng.choice(m, size=4 * m, p=p)
        for v in batch.tolist():
            if root is None:
                root = v
                seen[v] = True
                found = 1
            elif not seen[v]:
                seen[v] = True
                parent[v] = prev
                found += 1
            prev = v
            if found == m:
                break
    children = [[] for _ in range(m)]
    for v in range(m):
        if parent[v] >= 0:
            children[parent[v]].append(v)
    for kids in children:
        rng.shuffle(kids)
    return RootedOrderedTree.from_children(root, children)


def p_ord_probability(t: RootedOrderedTree, p) -> float:
    p = np.asarray(p, dtype=float)
    d = t.degrees
    return float(np.prod(p ** d / np.array([math.factorial(k) for k in d])))


def enumerate_ordered_trees(m: int):
    """All plane rooted trees on vertex set range(m)."""
    out = []
    for parent in itertools.product(range(-1, m), repeat=m):
        if parent.count(-1) != 1 or any(parent[v] == v for v in range(m)):
            continue
        root = parent.index(-1)
        ok = True
        for v in range(m):
            u, steps = v, 0
            while u != root and steps <= m:
                u = parent[u]
                steps += 1
            if u != root:
                ok = False
                break
        if not ok:
            continue
        kid_sets = [[u for u in range(m) if parent[u] == v] for v in range(m)]
        for perms in itertools.product(*(itertools.permutations(k) for k in kid_sets)):
            out.append(RootedOrderedTree(m, root, tuple(parent), tuple(perms)))
    return out


def permitted_edges(t: RootedOrderedTree) -> set[tuple[int, int]]:
    """{v, u} for non-root v and u a right sibling of some vertex on the root-to-v path."""
    out = set()
    for v in range(t.n):
        if v == t.root:
            continue
        u = v
        while u != t.root:
            par = t.parent[u]
            kids = t.children[par]
            for w in kids[kids.index(u) + 1:]:
                out.add((min(v, w), max(v, w)))
            u = par
    return out


def tree_tilt_weight(t: RootedOrderedTree, p, a: float):
    """(L(t), permitted edge set) of the tilted p-tree density."""
    p = np.asarray(p, dtype=float)
    if not a > 0:
        raise ParameterError("a must be positive")
    log_l = 0.0
    for i, j in t.edges():
        s = a * p[i] * p[j]
        log_l += math.log(math.expm1(s) / s)
    perm = permitted_edges(t)
    log_l += sum(a * p[i] * p[j] for i, j in perm)
    return math.exp(log_l), perm


@dataclass(frozen=True)
class ComponentDraw:
    graph: Graph
    ess: float


def _add_permitted(rng, t: RootedOrderedTree, perm, p, a) -> Graph:
    pairs = list(t.edges())
    for i, j in sorted(perm):
        if rng.random() < -math.expm1(-a * p[i] * p[j]):
            pairs.append((i, j))
    return Graph.from_pairs(t.n, pairs)


def sample_connected_component(p, a: float, pool: int = 1024, seed=None, exact: bool | None = None) -> ComponentDraw:
    """Connected graph from P_con(.; p, a) via a tilted p-tree plus permitted edges.

    The tilted tree is drawn exactly by enumeration when ``m <= 4`` (default)
    and otherwise by importance resampling from ``pool`` p-trees.
    """
    p = _check_pmf(p)
    if pool < 1:
        raise ParameterError("pool must be >= 1")
    if not a > 0:
        raise ParameterError("a must be positive")
    rng = make_rng(seed)
    m = len(p)
    if exact is None:
        exact = m <= 4
    if exact:
        if m > 6:
            raise ParameterError("exact enumeration limited to m <= 6")
        trees = _ordered_trees_cached(m)
        w = _tilted_tree_law(tuple(p.tolist()), float(a))
        t = trees[int(rng.choice(len(trees), p=w))]
        ess = float("inf")
    else:
        trees = [sample_p_tree(p, rng) for _ in range(pool)]
        logw = np.array([math.log(tree_tilt_weight(t, p, a)[0]) for t in trees])
        w = np.exp(logw - logw.max())
        w /= w.sum()
        ess = float(1.0 / (w ** 2).sum())
        t = trees[int(rng.choice(pool, p=w))]
    return ComponentDraw(_add_permitted(rng, t, permitted_edges(t), p, a), ess)


_TREE_CACHE: dict[int, list] = {}


def _ordered_trees_cached(m: int):
    if m not in _TREE_CACHE:
        _TREE_CACHE[m] = enumerate_ordered_trees(m)
    return _TREE_CACHE[m]


@functools.lru_cache(maxsize=64)
def _tilted_tree_law(p: tuple, a: float) -> np.ndarray:
    trees = _ordered_trees_cached(len(p))
    w = np.array([p_ord_probability(t, p) * tree_tilt_weight(t, p, a)[0] for t in trees])
    return w / w.sum()


def connected_graph_law(p, a: float) -> dict[tuple, float]:
    """Exact P_con over all connected simple graphs on range(m), keyed by sorted edge tuples."""
    p = np.asarray(p, dtype=float)
    m = len(p)
    all_pairs = list(itertools.combinations(range(m), 2))
    law = {}
    for mask in range(1 << len(all_pairs)):
        edges = tuple(e for k, e in enumerate(all_pairs) if mask >> k & 1)
        if not _connected(m, edges):
            continue
        w = 1.0
        for k, (u, v) in enumerate(all_pairs):
            s = a * p[u] * p[v]
            w *= -math.expm1(-s) if mask >> k & 1 else math.exp(-s)
        law[edges] = w
    z = sum(law.values())
    return {g: w / z for g, w in law.items()}


def _connected(m: int, edges) -> bool:
    parent = list(range(m))

    def find(u):
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    for u, v in edges:
        parent[find(u)] = find(v)
    return len({find(u) for u in range(m)}) == 1


# ----------------------------------------------------------------------------
# branching process


def sample_branching_process(K, root_type=None, cap: int | None = None, seed=None) -> BPSummary:
    """Multitype branching process: a type-i individual has Bernoulli(K_ij/n) type-j children.

    ``root_type=None`` picks the root type uniformly.  Stops with
    ``truncated=True`` once the total reaches ``cap`` (default 10 n).
    """
    K = np.asarray(K, dtype=float)
    n = K.shape[0]
    cap = 10 * n if cap is None else cap
    if cap < 1:
        raise ParameterError("cap must be >= 1")
    rng = make_rng(seed)
    P = np.clip(K / n, 0.0, 1.0)
    if root_type is None:
        root_type = int(rng.integers(n))
    counts = np.zeros(n, dtype=np.int64)
    counts[root_type] = 1
    sizes = [1]
    total = 1
    truncated = total >= cap
    while not truncated:
        active = np.flatnonzero(counts)
        nxt = rng.binomial(counts[active][:, None], P[active]).sum(axis=0)
        size = int(nxt.sum())
        if size == 0:
            break
        sizes.append(size)
        total += size
        counts = nxt
        if total >= cap:
            truncated = True
    wd = sum(level * s for level, s in enumerate(sizes))
    return BPSummary(total, len(sizes) - 1, wd, tuple(sizes), truncated)
