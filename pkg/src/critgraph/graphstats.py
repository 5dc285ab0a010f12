"""Component structure, susceptibilities and distance statistics of a Graph."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import breadth_first_order, connected_components, shortest_path

from .errors import InputError
from .graphgen import Graph
from .metricspace import MetricMeasureSpace
from .rng import make_rng

BLOCK = 2000  # vertices per batched all-pairs BFS call


@dataclass(frozen=True)
class ComponentSummary:
    n: int
    labels: np.ndarray  # component rank of each vertex
    sizes: np.ndarray
    surplus: np.ndarray

    @property
    def count(self) -> int:
        return len(self.sizes)

    @property
    def components(self) -> list[np.ndarray]:
        order = np.argsort(self.labels, kind="stable")
        return np.split(order, np.cumsum(self.sizes)[:-1])


def components(g: Graph) -> ComponentSummary:
    """Components ranked by size (descending), ties broken by smallest vertex label."""
    n = g.n
    if n == 0:
        return ComponentSummary(0, np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64))
    _, raw = connected_components(g.adjacency(), directed=False)
    sizes = np.bincount(raw)
    first = np.full(len(sizes), n)
    np.minimum.at(first, raw, np.arange(n))
    rank_of = np.empty(len(sizes), dtype=np.int64)
    rank_of[np.lexsort((first, -sizes))] = np.arange(len(sizes))
    labels = rank_of[raw]
    sizes = np.bincount(labels)
    edge_count = np.bincount(labels[g.edges[:, 0]], minlength=len(sizes)) if g.num_edges else np.zeros(len(sizes), dtype=np.int64)
    return ComponentSummary(n, labels, sizes, edge_count - sizes + 1)


def susceptibilities(summary: ComponentSummary, n: int | None = None, ks=(1, 2, 3)):
    n = summary.n if n is None else n
    sizes = summary.sizes.astype(float)
    out = []
    for k in ks:
        if k < 1:
            raise InputError("k must be >= 1")
        out.append(float((sizes ** k).sum() / n))
    return out


def _component_blocks(summary: ComponentSummary):
    """Group components of size >= 2 into vertex blocks of bounded total size."""
    comps = [c for c in summary.components if len(c) > 1]
    block: list[np.ndarray] = []
    size = 0
    for c in comps:
        if block and size + len(c) > BLOCK:
            yield np.concatenate(block)
            block, size = [], 0
        block.append(c)
        size += len(c)
    if block:
        yield np.concatenate(block)


def component_distance_sums(g: Graph, summary: ComponentSummary | None = None):
    """Per-component (sum over ordered pairs of distance, diameter)."""
    summary = components(g) if summary is None else summary
    adj = g.adjacency()
    sums = np.zeros(summary.count)
    diam = np.zeros(summary.count, dtype=np.int64)
    for verts in _component_blocks(summary):
        d = shortest_path(adj[verts][:, verts], unweighted=True, directed=False)
        d[np.isinf(d)] = 0.0
        lab = summary.labels[verts]
        np.add.at(sums, lab, d.sum(axis=1))
        np.maximum.at(diam, lab, d.max(axis=1).astype(np.int64))
    return sums, diam


def distance_stats(g: Graph, summary: ComponentSummary | None = None):
    """(D, diam): D = (1/n) sum over ordered within-component pairs of the graph distance."""
    if g.n == 0:
        return 0.0, 0
    sums, diam = component_distance_sums(g, summary)
    return float(sums.sum() / g.n), int(diam.max(initial=0))


def distance_stats_sampled(g: Graph, samples: int, seed=None, summary: ComponentSummary | None = None):
    """Approximate D by sampling a uniform vertex i and a uniform partner in its component.

    Unbiased for D since D = E[|C(i)| d(i, J)].  Returns (estimate, standard error).
    """
    summary = components(g) if summary is None else summary
    rng = make_rng(seed)
    adj = g.adjacency()
    comps = summary.components
    vals = np.empty(samples)
    for s in range(samples):
        i = int(rng.integers(g.n))
        comp = comps[summary.labels[i]]
        if len(comp) == 1:
            vals[s] = 0.0
            continue
        j = int(comp[rng.integers(len(comp))])
        order, pred = breadth_first_order(adj, i, directed=False)
        depth = 0
        u = j
        while u != i:
            u = pred[u]
            depth += 1
        vals[s] = len(comp) * depth
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(samples)) if samples > 1 else float("nan")


def component_metric(g: Graph, component_index: int, mass_per_vertex: float = 1.0, summary=None) -> MetricMeasureSpace:
    """The component as a metric measure space: graph distance, constant mass per vertex."""
    summary = components(g) if summary is None else summary
    if not 0 <= component_index < summary.count:
        raise InputError(f"component index {component_index} out of range")
    verts = summary.components[component_index]
    d = shortest_path(g.adjacency()[verts][:, verts], unweighted=True, directed=False)
    return MetricMeasureSpace(d, np.full(len(verts), float(mass_per_vertex)), labels=verts)


def stats_csv(g: Graph) -> str:
    summary = components(g)
    sums, diam = component_distance_sums(g, summary)
    lines = ["rank,size,surplus,diameter,sum_distances"]
    for r in range(summary.count):
        lines.append(f"{r},{summary.sizes[r]},{summary.surplus[r]},{diam[r]},{int(sums[r])}")
    return "\n".join(lines) + "\n"
