"""Finite metric measure spaces, blob gluing, scaling and exact GH distance on tiny spaces."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from .errors import DegenerateInputError, InputError, ParameterError, SizeError
from .rng import make_rng

GH_MAX_POINTS = 7


@dataclass(frozen=True, eq=False)
class MetricMeasureSpace:
    """Distance matrix plus point masses.  Pseudometrics (zero off-diagonal entries) are allowed."""

    dist: np.ndarray = field(repr=False)
    mass: np.ndarray = field(repr=False)
    labels: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        d = np.array(self.dist, dtype=float, ndmin=2)
        mu = np.array(self.mass, dtype=float, ndmin=1)
        if d.shape != (len(mu), len(mu)):
            raise InputError("dist must be m x m with m = len(mass)")
        if not np.isfinite(d).all() or (d < 0).any():
            raise InputError("distances must be finite and nonnegative")
        if not np.allclose(d, d.T, rtol=0, atol=1e-12) or np.any(np.diag(d) != 0):
            raise InputError("dist must be symmetric with zero diagonal")
        if (mu < 0).any() or not np.isfinite(mu).all():
            raise InputError("masses must be finite and nonnegative")
        d.flags.writeable = False
        mu.flags.writeable = False
        object.__setattr__(self, "dist", d)
        object.__setattr__(self, "mass", mu)

    def __eq__(self, other):
        if not isinstance(other, MetricMeasureSpace):
            return NotImplemented
        return np.array_equal(self.dist, other.dist) and np.array_equal(self.mass, other.mass)

    __hash__ = None

    @property
    def m(self) -> int:
        return len(self.mass)

    @property
    def total_mass(self) -> float:
        return float(self.mass.sum())

    @property
    def diameter(self) -> float:
        return float(self.dist.max(initial=0.0))

    def triangle_violation(self) -> float:
        """Largest d(x,z) - d(x,y) - d(y,z) over all triples (<= 0 for a metric)."""
        d = self.dist
        if self.m == 0:
            return 0.0
        worst = -np.inf
        for y in range(self.m):
            worst = max(worst, float((d - d[:, y][:, None] - d[y][None, :]).max()))
        return worst

    def is_metric(self, tol: float = 1e-9) -> bool:
        return self.triangle_violation() <= tol

    def to_json(self) -> str:
        return json.dumps({"m": self.m, "dist": self.dist.tolist(), "mass": self.mass.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "MetricMeasureSpace":
        obj = json.loads(text)
        return cls(np.array(obj["dist"], dtype=float), np.array(obj["mass"], dtype=float))

    def to_csv(self) -> str:
        lines = [f"# m={self.m} mass={' '.join(repr(float(v)) for v in self.mass)}"]
        i, j = np.triu_indices(self.m, k=1)
        lines += [f"{a},{b},{v!r}" for a, b, v in zip(i.tolist(), j.tolist(), self.dist[i, j].tolist())]
        return "\n".join(lines) + "\n"


def scale(space: MetricMeasureSpace, a: float, b: float) -> MetricMeasureSpace:
    """scl(a, b): distances times a, masses times b."""
    if not (a > 0 and b > 0):
        raise ParameterError("scale factors must be positive")
    return MetricMeasureSpace(space.dist * a, space.mass * b, space.labels)


def point_space() -> MetricMeasureSpace:
    return MetricMeasureSpace(np.zeros((1, 1)), np.ones(1))


# ----------------------------------------------------------------------------
# blob gluing


@dataclass(frozen=True)
class BlobSystem:
    """Blobs (probability-mass metric spaces) glued along a superstructure graph.

    ``junctions[(i, j)]`` is the point of blob ``i`` attached to blob ``j``;
    missing entries are drawn from ``mu_i`` using ``seed``.
    """

    superstructure: object  # graphgen.Graph
    x: np.ndarray
    blobs: tuple
    junctions: dict | None = None
    seed: object = None

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        m = self.superstructure.n
        if x.shape != (m,) or (x <= 0).any():
            raise InputError("x must be a positive vector with one weight per blob")
        if len(self.blobs) != m:
            raise InputError("need one blob per superstructure vertex")
        for b in self.blobs:
            if abs(b.total_mass - 1.0) > 1e-9:
                raise InputError("each blob measure must be a probability measure")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "blobs", tuple(self.blobs))

    def resolved_junctions(self) -> dict:
        rng = make_rng(self.seed)
        out = {}
        given = self.junctions or {}
        for i, j in self.superstructure.edges.tolist():
            for a, b in ((i, j), (j, i)):
                if (a, b) in given:
                    k = int(given[(a, b)])
                    if not 0 <= k < self.blobs[a].m:
                        raise InputError(f"junction {(a, b)} -> {k} is not a point of blob {a}")
                else:
                    blob = self.blobs[a]
                    k = int(rng.choice(blob.m, p=blob.mass / blob.total_mass))
                out[(a, b)] = k
        return out


def blob_statistics(sys: BlobSystem):
    """(u, tau, diam_max): mean intra-blob distances, sum x_i^2 u_i, largest blob diameter."""
    u = np.array([float(b.mass @ b.dist @ b.mass) for b in sys.blobs])
    tau = float((sys.x ** 2 * u).sum())
    diam_max = max(b.diameter for b in sys.blobs)
    return u, tau, diam_max


def _glue_component(sys: BlobSystem, verts, junc) -> MetricMeasureSpace:
    blobs = [sys.blobs[v] for v in verts]
    local = {int(v): k for k, v in enumerate(verts)}
    offsets = np.concatenate([[0], np.cumsum([b.m for b in blobs])])
    total = int(offsets[-1])
    portals: list[set] = [set() for _ in verts]
    links = []
    for (a, b), k in junc.items():
        if a in local and b in local:
            portals[local[a]].add(k)
            if a < b:
                links.append((offsets[local[a]] + k, offsets[local[b]] + junc[(b, a)]))
    rows, cols, vals = [], [], []
    for bi, blob in enumerate(blobs):
        pts = np.arange(blob.m)
        for k in sorted(portals[bi]):
            # every point of the blob to each of its portals (covers portal-portal too)
            others = pts[pts != k]
            rows.append(offsets[bi] + others)
            cols.append(np.full(len(others), offsets[bi] + k))
            vals.append(blob.dist[others, k])
    for s, t in links:
        rows.append(np.array([s]))
        cols.append(np.array([t]))
        vals.append(np.array([1.0]))
    if rows:
        r = np.concatenate(rows)
        c = np.concatenate(cols)
        w = np.concatenate(vals)
        # portal-portal edges appear once from each end; keep a single copy
        r, c = np.minimum(r, c), np.maximum(r, c)
        key, first = np.unique(r * total + c, return_index=True)
        r, c, w = r[first], c[first], w[first]
        # zero-length intra-blob edges would be dropped by the sparse format
        w = np.where(w == 0, 1e-300, w)
        graph = coo_matrix((w, (r, c)), shape=(total, total)).tocsr()
        d = dijkstra(graph, directed=False)
        d[d < 1e-200] = 0.0
    else:
        d = np.full((total, total), np.inf)
        np.fill_diagonal(d, 0.0)
    for bi, blob in enumerate(blobs):
        s = slice(offsets[bi], offsets[bi + 1])
        d[s, s] = np.minimum(d[s, s], blob.dist)
    mass = np.concatenate([sys.x[v] * b.mass for v, b in zip(verts, blobs)])
    d = np.minimum(d, d.T)
    labels = np.concatenate([np.stack([np.full(b.m, v), np.arange(b.m)], axis=1) for v, b in zip(verts, blobs)])
    return MetricMeasureSpace(d, mass, labels)


def glue_blobs(sys: BlobSystem):
    """Glued space for a connected superstructure; a list of spaces (one per component) otherwise.

    Point ``(i, p)`` carries mass ``x_i mu_i(p)``; distances are shortest paths
    combining intra-blob distances and unit links between junction points.
    """
    from .graphstats import components

    junc = sys.resolved_junctions()
    summary = components(sys.superstructure)
    spaces = [_glue_component(sys, verts, junc) for verts in summary.components]
    return spaces[0] if len(spaces) == 1 else spaces


# ----------------------------------------------------------------------------
# Gromov-Hausdorff


def _covering_clique(compat: np.ndarray, m1: int, m2: int) -> bool:
    """Is there a set R of pairs, pairwise compatible, covering every row and column?"""
    pairs = m1 * m2

    def rec(allowed: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> bool:
        if rows.all() and cols.all():
            return True
        # most constrained uncovered element
        best, best_opts = None, None
        for x in np.flatnonzero(~rows):
            opts = [x * m2 + y for y in range(m2) if allowed[x * m2 + y]]
            if best is None or len(opts) < len(best_opts):
                best, best_opts = x, opts
        for y in np.flatnonzero(~cols):
            opts = [x * m2 + y for x in range(m1) if allowed[x * m2 + y]]
            if best is None or len(opts) < len(best_opts):
                best, best_opts = y, opts
        for k in best_opts:
            x, y = divmod(k, m2)
            r2, c2 = rows.copy(), cols.copy()
            r2[x] = c2[y] = True
            if rec(allowed & compat[k], r2, c2):
                return True
        return False

    return rec(np.ones(pairs, dtype=bool), np.zeros(m1, dtype=bool), np.zeros(m2, dtype=bool))


def gh_distance_exact(X1: MetricMeasureSpace, X2: MetricMeasureSpace) -> float:
    """Exact Gromov-Hausdorff distance: half the least distortion of a correspondence."""
    m1, m2 = X1.m, X2.m
    if max(m1, m2) > GH_MAX_POINTS:
        raise SizeError(f"exact GH limited to {GH_MAX_POINTS} points; use distance_profile")
    if m1 == 0 or m2 == 0:
        raise InputError("spaces must be nonempty")
    d1, d2 = X1.dist, X2.dist
    # gap[(x,y),(x',y')] = |d1(x,x') - d2(y,y')|
    gap = np.abs(d1[:, None, :, None] - d2[None, :, None, :]).reshape(m1 * m2, m1 * m2)
    cands = np.unique(gap)
    lo, hi = 0, len(cands) - 1  # the largest candidate always admits the full relation
    while lo < hi:
        mid = (lo + hi) // 2
        if _covering_clique(gap <= cands[mid], m1, m2):
            hi = mid
        else:
            lo = mid + 1
    return float(cands[lo]) / 2


# ----------------------------------------------------------------------------
# distance profiles


@dataclass(frozen=True)
class DistanceProfile:
    distances: np.ndarray
    total_mass: float


def distance_profile(space: MetricMeasureSpace, samples: int, seed=None) -> DistanceProfile:
    """Sorted d(U, V) for i.i.d. U, V drawn proportionally to mass."""
    total = space.total_mass
    if total <= 0:
        raise DegenerateInputError("space has zero total mass")
    rng = make_rng(seed)
    w = space.mass / total
    u = rng.choice(space.m, size=samples, p=w)
    v = rng.choice(space.m, size=samples, p=w)
    return DistanceProfile(np.sort(space.dist[u, v]), total)
