import itertools
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats as sst

from critgraph.errors import InputError, ParameterError
from critgraph.graphgen import (
    Graph,
    RootedOrderedTree,
    _distinct_offsets,
    _pair_from_index,
    connected_graph_law,
    enumerate_ordered_trees,
    erdos_renyi,
    p_ord_probability,
    permitted_edges,
    sample_branching_process,
    sample_connected_component,
    sample_graphon_graph,
    sample_p_tree,
    sample_rank_one,
    sample_rgiv,
    tree_tilt_weight,
)
from critgraph.graphstats import components
from critgraph.kernels import explicit_weights
from critgraph.rng import make_rng
from critgraph.spectral import resolvent_mean, resolvent_second_moment, weighted_depth_mean


def const_weights(n, c):
    beta = np.full((n, n), float(c))
    np.fill_diagonal(beta, 0.0)
    return explicit_weights(beta)


def chi2_p(counts: Counter, probs: dict, draws: int) -> float:
    """Pearson test of observed counts against an exact law; cells expecting < 5 are pooled."""
    keys = list(probs)
    obs = np.array([counts.get(k, 0) for k in keys], dtype=float)
    assert sum(counts.values()) == obs.sum(), "sample outside the support"
    exp = np.array([probs[k] for k in keys]) * draws
    small = exp < 5
    if small.any():
        obs = np.append(obs[~small], obs[small].sum())
        exp = np.append(exp[~small], exp[small].sum())
    return sst.chisquare(obs, exp).pvalue


# ---------------------------------------------------------------------------
# Graph container


def test_graph_validation():
    with pytest.raises(InputError):
        Graph(3, [[1, 1]])
    with pytest.raises(InputError):
        Graph(3, [[0, 3]])
    with pytest.raises(InputError):
        Graph(3, [[0, 1], [0, 1]])
    g = Graph.from_pairs(4, [(2, 1), (1, 2), (3, 3), (0, 3)])
    assert g.edges.tolist() == [[0, 3], [1, 2]]


def test_graph_csv_round_trip():
    g = Graph(5, [[3, 4], [0, 2]])
    text = g.to_csv()
    assert text == "# n=5\n0,2\n3,4\n"
    assert np.array_equal(Graph.from_csv(text).edges, g.edges)
    assert Graph.from_csv("# n=3\n").num_edges == 0


@given(n=st.integers(2, 60))
@settings(max_examples=40, deadline=None)
def test_pair_index_bijection(n):
    i, j = _pair_from_index(np.arange(n * (n - 1) // 2), n)
    ti, tj = np.triu_indices(n, k=1)
    assert np.array_equal(i, ti) and np.array_equal(j, tj)


def test_pair_index_large_n():
    n = 10 ** 6
    total = n * (n - 1) // 2
    i, j = _pair_from_index(np.array([0, total - 1, n - 2, n - 1]), n)
    assert list(zip(i.tolist(), j.tolist())) == [(0, 1), (n - 2, n - 1), (0, n - 1), (1, 2)]


def test_distinct_offsets_uniform_subsets():
    rng = make_rng(5)
    sizes = np.array([4] * 30000)
    counts = np.array([2] * 30000)
    r, o = _distinct_offsets(rng, sizes, counts)
    assert np.array_equal(np.bincount(r), counts)
    pairs = Counter(zip(o[0::2].tolist(), o[1::2].tolist()))
    assert all(a < b for a, b in pairs)
    probs = {k: 1 / 6 for k in itertools.combinations(range(4), 2)}
    assert chi2_p(pairs, probs, 30000) > 1e-3


# ---------------------------------------------------------------------------
# graphon graphs


def test_zero_and_full_weights():
    assert sample_graphon_graph(const_weights(20, 0.0), seed=1).num_edges == 0
    g = sample_graphon_graph(const_weights(20, 20.0), "capped", seed=1)
    assert g.num_edges == 190


def test_edge_count_mean():
    n, c, R = 10 ** 4, 1.5, 1000
    counts = [erdos_renyi(n, c / n, seed=r).num_edges for r in range(R)]
    mean = np.mean(counts)
    se = np.std(counts, ddof=1) / math.sqrt(R)
    assert abs(mean - n * (n - 1) / 2 * c / n) < 4 * se


@pytest.mark.parametrize("rule", ["capped", "exponential"])
def test_heterogeneous_edge_frequencies(rule):
    n, R = 12, 6000
    x = np.arange(1, n + 1) / n
    beta = 6 * np.minimum(x[:, None], x[None, :])
    np.fill_diagonal(beta, 0.0)
    wm = explicit_weights(beta)
    freq = np.zeros((n, n))
    for r in range(R):
        e = sample_graphon_graph(wm, rule, seed=r).edges
        freq[e[:, 0], e[:, 1]] += 1
    p = np.minimum(1, beta / n) if rule == "capped" else -np.expm1(-beta / n)
    iu = np.triu_indices(n, 1)
    z = (freq[iu] / R - p[iu]) / np.sqrt(p[iu] * (1 - p[iu]) / R)
    assert np.abs(z).max() < 4.5


def test_graphon_determinism():
    wm = const_weights(300, 2.0)
    a = sample_graphon_graph(wm, seed=17)
    b = sample_graphon_graph(wm, seed=17)
    assert a.to_csv() == b.to_csv()
    assert a.to_csv() != sample_graphon_graph(wm, seed=18).to_csv()


# ---------------------------------------------------------------------------
# rank-one graphs


def test_rank_one_two_vertices():
    R = 20000
    hits = sum(sample_rank_one([1.0, 1.0], math.log(2), seed=r).num_edges for r in range(R))
    assert sst.binomtest(hits, R, 0.5).pvalue > 1e-3


def test_rank_one_errors():
    with pytest.raises(ParameterError):
        sample_rank_one([1.0, 0.0], 1.0)
    with pytest.raises(ParameterError):
        sample_rank_one([1.0, 1.0], 0.0)
    with pytest.raises(ParameterError):
        sample_rank_one([1.0, 1.0], 1.0, mode="dfs")


def test_rank_one_critical_median():
    n = 10 ** 4
    x = np.full(n, n ** (-2 / 3))
    sizes = [components(sample_rank_one(x, n ** (1 / 3), seed=r)).sizes[0] for r in range(500)]
    assert 0.5 <= np.median(sizes) / n ** (2 / 3) <= 2.5


def test_rank_one_heterogeneous_direct():
    x = np.array([0.9, 0.2, 1.4, 0.5, 0.05, 1.1])
    q, R = 1.3, 20000
    freq = np.zeros((6, 6))
    for r in range(R):
        e = sample_rank_one(x, q, seed=r).edges
        freq[e[:, 0], e[:, 1]] += 1
    p = -np.expm1(-q * np.outer(x, x))
    iu = np.triu_indices(6, 1)
    z = (freq[iu] / R - p[iu]) / np.sqrt(p[iu] * (1 - p[iu]) / R)
    assert np.abs(z).max() < 4.5


def test_exploration_first_vertex_and_direct_equivalence():
    x = np.array([0.3, 1.0, 0.6, 1.7])
    q, R = 0.8, 100000
    first = np.zeros(4)
    explored, direct = Counter(), Counter()
    rng_e, rng_d = make_rng(1), make_rng(2)
    for _ in range(R):
        g, order = sample_rank_one(x, q, "exploration", rng_e)
        first[order[0]] += 1
        explored[tuple(map(tuple, g.edges.tolist()))] += 1
        direct[tuple(map(tuple, sample_rank_one(x, q, seed=rng_d).edges.tolist()))] += 1
    assert sst.chisquare(first, x / x.sum() * R).pvalue > 1e-3
    # exact law of the graph: product over the six pairs
    pairs = list(itertools.combinations(range(4), 2))
    law = {}
    for mask in range(64):
        edges = tuple(pr for k, pr in enumerate(pairs) if mask >> k & 1)
        law[edges] = math.prod(-math.expm1(-q * x[a] * x[b]) if mask >> k & 1 else math.exp(-q * x[a] * x[b])
                               for k, (a, b) in enumerate(pairs))
    for sample in (explored, direct):
        assert chi2_p(sample, law, R) > 1e-3


# ---------------------------------------------------------------------------
# RGIV


def test_rgiv_vertex_count():
    n = 10 ** 4
    ratios = [sample_rgiv(n, 0.0, seed=r).n / (n * math.pi / 2) for r in range(200)]
    assert np.mean([0.95 <= v <= 1.05 for v in ratios]) >= 0.99


def test_rgiv_determinism_and_errors():
    assert sample_rgiv(500, 0.5, seed=3).to_csv() == sample_rgiv(500, 0.5, seed=3).to_csv()
    with pytest.raises(ParameterError):
        sample_rgiv(5, 0.0)


def test_rgiv_largest_v_pair_most_likely():
    # the last two vertices in sorted order (largest V) have the largest connection probability
    n, R = 40, 4000
    last, first = 0, 0
    for r in range(R):
        g = sample_rgiv(n, 0.0, seed=r)
        e = {tuple(p) for p in g.edges.tolist()}
        last += (g.n - 2, g.n - 1) in e
        first += (0, 1) in e
    assert last > first


# ---------------------------------------------------------------------------
# p-trees


def preorder(t: RootedOrderedTree):
    out, stack = [], [t.root]
    while stack:
        v = stack.pop()
        out.append(v)
        stack.extend(reversed(t.children[v]))
    return out


def permitted_bruteforce(t: RootedOrderedTree):
    # {v, u} is permitted iff u follows v in preorder and parent(u) is a strict ancestor of v
    pos = {v: k for k, v in enumerate(preorder(t))}
    out = set()
    for v in range(t.n):
        anc, u = set(), v
        while u != t.root:
            u = t.parent[u]
            anc.add(u)
        for w in range(t.n):
            if w != v and pos[w] > pos[v] and t.parent[w] in anc:
                out.add((min(v, w), max(v, w)))
    return out


@pytest.mark.parametrize("m", [1, 2, 3, 4, 5])
def test_enumeration_count_and_normalization(m):
    trees = enumerate_ordered_trees(m)
    assert len(trees) == math.factorial(2 * m - 2) // math.factorial(m - 1)
    assert len({t.key() for t in trees}) == len(trees)
    p = np.arange(1, m + 1) / (m * (m + 1) / 2)
    assert sum(p_ord_probability(t, p) for t in trees) == pytest.approx(1.0, abs=1e-12)


def test_p_tree_small_cases():
    t = sample_p_tree([1.0], seed=0)
    assert t.n == 1 and t.root == 0
    p = [0.3, 0.7]
    roots = [sample_p_tree(p, seed=r).root for r in range(20000)]
    assert sst.binomtest(roots.count(1), 20000, 0.7).pvalue > 1e-3


@pytest.mark.parametrize("p,R", [([1 / 3] * 3, 100000), ([0.5, 0.3, 0.2], 100000), ([0.1, 0.2, 0.3, 0.4], 60000)])
def test_p_tree_law(p, R):
    trees = enumerate_ordered_trees(len(p))
    probs = {t.key(): p_ord_probability(t, p) for t in trees}
    rng = make_rng(11)
    counts = Counter(sample_p_tree(p, rng).key() for _ in range(R))
    obs = np.array([counts.get(k, 0) for k in probs], dtype=float)
    assert obs.sum() == R
    assert sst.chisquare(obs, np.array(list(probs.values())) * R).pvalue > 1e-3


def test_p_tree_csv():
    t = RootedOrderedTree.from_children(1, [[], [2, 0], []])
    assert t.to_csv() == "# n=3 root=1\n0,1,\n1,-1,2 0\n2,1,\n"
    with pytest.raises(InputError):
        RootedOrderedTree(2, 0, (-1, -1), ((), ()))


@pytest.mark.parametrize("m", [3, 4])
def test_permitted_edges_bruteforce(m):
    for t in enumerate_ordered_trees(m):
        assert permitted_edges(t) == permitted_bruteforce(t)


def test_permitted_edges_example():
    # root 0 with children (1, 2); 1 has child 3: 3 may join 2, 1 may join 2
    t = RootedOrderedTree.from_children(0, [[1, 2], [3], [], []])
    assert permitted_edges(t) == {(1, 2), (2, 3)}


def test_tilt_weight():
    p = np.array([0.4, 0.6])
    t = RootedOrderedTree.from_children(0, [[1], []])
    L, perm = tree_tilt_weight(t, p, 2.0)
    s = 2.0 * 0.24
    assert perm == set() and L == pytest.approx(math.expm1(s) / s)
    for t in enumerate_ordered_trees(3):
        assert tree_tilt_weight(t, [0.2, 0.3, 0.5], 1e-9)[0] == pytest.approx(1.0, abs=1e-8)
        assert tree_tilt_weight(t, [0.2, 0.3, 0.5], 3.0)[0] >= 1.0


def pcon_bruteforce(p, a):
    m = len(p)
    pairs = list(itertools.combinations(range(m), 2))
    law = {}
    for keep in itertools.product((0, 1), repeat=len(pairs)):
        edges = tuple(pr for k, pr in zip(keep, pairs) if k)
        reach, frontier = {0}, [0]
        while frontier:
            v = frontier.pop()
            for a_, b_ in edges:
                for s, t in ((a_, b_), (b_, a_)):
                    if s == v and t not in reach:
                        reach.add(t)
                        frontier.append(t)
        if len(reach) < m:
            continue
        law[edges] = math.prod((1 - math.exp(-a * p[u] * p[v])) if k else math.exp(-a * p[u] * p[v])
                               for k, (u, v) in zip(keep, pairs))
    z = sum(law.values())
    return {g: w / z for g, w in law.items()}


def test_connected_graph_law_matches_bruteforce():
    p, a = [0.2, 0.3, 0.1, 0.4], 2.5
    ref = pcon_bruteforce(p, a)
    law = connected_graph_law(p, a)
    assert law.keys() == ref.keys()
    assert all(law[k] == pytest.approx(ref[k], rel=1e-12) for k in ref)


def test_pcon_two_vertices():
    for r in range(20):
        assert sample_connected_component([0.5, 0.5], 1.0, seed=r).graph.edges.tolist() == [[0, 1]]


@pytest.mark.parametrize("p,a", [([1 / 3] * 3, 1.0), ([0.5, 0.3, 0.2], 6.0)])
def test_pcon_exact_mode(p, a):
    R = 40000
    ref = pcon_bruteforce(p, a)
    rng = make_rng(4)
    counts = Counter(tuple(map(tuple, sample_connected_component(p, a, seed=rng).graph.edges.tolist()))
                     for _ in range(R))
    assert len(ref) == 4
    assert chi2_p(counts, ref, R) > 1e-3


def test_pcon_four_vertices_exact_mode():
    p, a, R = [0.1, 0.2, 0.3, 0.4], 4.0, 40000
    ref = pcon_bruteforce(p, a)
    rng = make_rng(9)
    counts = Counter(tuple(map(tuple, sample_connected_component(p, a, seed=rng).graph.edges.tolist()))
                     for _ in range(R))
    assert chi2_p(counts, ref, R) > 1e-3


def test_pcon_importance_mode_close_to_exact():
    p, a, R = [0.5, 0.3, 0.2], 3.0, 3000
    ref = pcon_bruteforce(p, a)
    rng = make_rng(21)
    draws = [sample_connected_component(p, a, pool=64, seed=rng, exact=False) for _ in range(R)]
    counts = Counter(tuple(map(tuple, d.graph.edges.tolist())) for d in draws)
    assert chi2_p(counts, ref, R) > 1e-3
    assert all(1 <= d.ess <= 64 for d in draws)


def test_pcon_errors():
    with pytest.raises(ParameterError):
        sample_connected_component([0.5, 0.5], 1.0, pool=0)
    with pytest.raises(ParameterError):
        sample_p_tree([0.5, 0.0, 0.5])


def test_pcon_surplus_stays_bounded():
    # p uniform, a = m: sum p^2 ~ 1/m, so the tilt stays of order one
    means = []
    for m in (5, 10, 20):
        rng = make_rng(m)
        sp = [d.graph.num_edges - m + 1 for d in
              (sample_connected_component(np.full(m, 1 / m), float(m), pool=128, seed=rng) for _ in range(200))]
        means.append(np.mean(sp))
    assert max(means) < 3.0


# ---------------------------------------------------------------------------
# branching processes


def test_branching_zero_kernel():
    s = sample_branching_process(np.zeros((5, 5)), seed=0)
    assert (s.total, s.height, s.weighted_depth, s.generation_sizes) == (1, 0, 0, (1,))


def test_branching_constant_kernel_moments():
    n, c, R = 20, 0.5, 100000
    K = np.full((n, n), c)
    rng = make_rng(3)
    runs = [sample_branching_process(K, seed=rng) for _ in range(R)]
    tot = np.array([r.total for r in runs], dtype=float)
    wd = np.array([r.weighted_depth for r in runs], dtype=float)
    assert abs(tot.mean() - 1 / (1 - c)) < 4 * tot.std(ddof=1) / math.sqrt(R)
    assert abs(wd.mean() - c / (1 - c) ** 2) < 4 * wd.std(ddof=1) / math.sqrt(R)
    for r in runs[:200]:
        assert r.total == sum(r.generation_sizes)
        assert r.height == len(r.generation_sizes) - 1
        assert r.weighted_depth == sum(k * s for k, s in enumerate(r.generation_sizes))


def test_branching_moments_match_resolvents():
    n, R = 30, 40000
    x = np.arange(1, n + 1) / n
    K = 1.6 * np.minimum(x[:, None], x[None, :]) + 0.3
    K *= 0.75 / np.linalg.eigvalsh(K / n).max()
    g = resolvent_mean(K)
    g2 = resolvent_second_moment(K, g)
    z = weighted_depth_mean(K, g)
    rng = make_rng(12)
    runs = [sample_branching_process(K, seed=rng) for _ in range(R)]
    assert not any(r.truncated for r in runs)
    for vals, oracle in (([r.total for r in runs], g.mean()),
                         ([r.total ** 2 for r in runs], g2.mean()),
                         ([r.weighted_depth for r in runs], z.mean())):
        v = np.asarray(vals, dtype=float)
        assert abs(v.mean() - oracle) < 4 * v.std(ddof=1) / math.sqrt(R)


def test_branching_truncation():
    s = sample_branching_process(np.full((10, 10), 3.0), root_type=0, cap=50, seed=1)
    assert s.truncated and s.total >= 50
    with pytest.raises(ParameterError):
        sample_branching_process(np.zeros((2, 2)), cap=0)


def test_component_dominated_by_branching():
    n, R = 200, 600
    x = np.arange(1, n + 1) / n
    beta = 1.8 * np.minimum(x[:, None], x[None, :])
    np.fill_diagonal(beta, 0.0)
    wm = explicit_weights(beta)
    rng = make_rng(2)
    comp, prog = [], []
    for _ in range(R):
        cs = components(sample_graphon_graph(wm, seed=rng))
        v = int(rng.integers(n))
        comp.append(cs.sizes[cs.labels[v]])
        prog.append(sample_branching_process(beta, root_type=v, seed=rng).total)
    prog = np.asarray(prog, dtype=float)
    assert np.mean(comp) <= prog.mean() + 4 * prog.std(ddof=1) / math.sqrt(R)
