"""Continuum limit objects: excursions of reflected parabolic Brownian motion,
tilted Brownian excursions and discretized Crit spaces G(2e, e, P)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .metricspace import MetricMeasureSpace
from .rng import make_rng

MIN_STEPS = 5  # excursions shorter than this many grid steps are discarded


def default_horizon(lam: float) -> float:
    return 4 * abs(lam) + 12


@dataclass(frozen=True)
class LimitSample:
    lam: float
    T: float
    dt: float
    starts: np.ndarray = field(repr=False)
    lengths: np.ndarray = field(repr=False)
    areas: np.ndarray = field(repr=False)
    marks: np.ndarray = field(repr=False)
    truncated: bool = False

    @property
    def count(self) -> int:
        return len(self.lengths)

    def gamma(self, i: int = 0) -> float:
        """i-th largest excursion length (0 if fewer excursions)."""
        return float(self.lengths[i]) if i < self.count else 0.0

    def mark(self, i: int = 0) -> int:
        return int(self.marks[i]) if i < self.count else 0

    def to_csv(self) -> str:
        lines = ["rank,length,area,marks"]
        lines += [f"{r},{l!r},{a!r},{k}" for r, (l, a, k) in
                  enumerate(zip(self.lengths.tolist(), self.areas.tolist(), self.marks.tolist()))]
        return "\n".join(lines) + "\n"


def reflected_path(lam: float, T: float, dt: float, rng=None, noise: bool = True):
    """Grid values of W(t) = B(t) + lam t - t^2/2 reflected at its running minimum."""
    steps = int(round(T / dt))
    t = np.arange(steps + 1) * dt
    w = lam * t - t * t / 2
    if noise:
        b = np.empty(steps + 1)
        b[0] = 0.0
        np.cumsum(rng.standard_normal(steps) * math.sqrt(dt), out=b[1:])
        w = w + b
    return w - np.minimum.accumulate(np.minimum(w, 0.0))


def excursions_of(r: np.ndarray, dt: float, min_steps: int = MIN_STEPS):
    """Maximal runs of r > 0 bounded by zeros: (start index, end index) pairs, plus an open flag."""
    pos = r > 0
    edges = np.diff(pos.astype(np.int8))
    ups = np.flatnonzero(edges == 1)          # r[k] == 0, r[k+1] > 0
    downs = np.flatnonzero(edges == -1) + 1   # r[k-1] > 0, r[k] == 0
    if pos[0]:
        ups = np.concatenate([[0], ups])
    open_end = bool(pos[-1])
    if open_end:
        downs = np.concatenate([downs, [len(r) - 1]])
    keep = downs - ups >= min_steps
    return ups[keep], downs[keep], open_end


def sample_limit_sizes(lam: float, T: float | None = None, dt: float = 1e-4, seed=None,
                       noise: bool = True, extend: bool = True) -> LimitSample:
    """Excursion lengths, areas and Poisson marks of the reflected parabolic Brownian motion.

    With ``extend`` the horizon is doubled (fresh path) while the last
    excursion is still open at ``T``.  ``noise=False`` drops the Brownian part.
    """
    T = default_horizon(lam) if T is None else T
    if not dt > 0 or dt > 1e-3 * max(1.0, T):
        raise ParameterError("dt must lie in (0, 1e-3 max(1, T)]")
    rng = make_rng(seed)
    while True:
        r = reflected_path(lam, T, dt, rng, noise)
        starts, ends, open_end = excursions_of(r, dt)
        if not (open_end and extend):
            break
        T *= 2
    lengths = (ends - starts) * dt
    csum = np.concatenate([[0.0], np.cumsum((r[1:] + r[:-1]) * (dt / 2))])
    areas = csum[ends] - csum[starts]
    order = np.lexsort((starts, -lengths))
    lengths, areas, starts = lengths[order], areas[order], starts[order] * dt
    marks = rng.poisson(areas) if len(areas) else np.zeros(0, dtype=np.int64)
    return LimitSample(lam, T, dt, starts, lengths, areas, marks, open_end)


# ----------------------------------------------------------------------------
# excursions


@dataclass(frozen=True)
class ExcursionPath:
    length: float
    values: np.ndarray = field(repr=False)
    theta: float = 0.0
    ess: float = float("nan")

    @property
    def grid(self) -> int:
        return len(self.values) - 1

    @property
    def step(self) -> float:
        return self.length / self.grid

    @property
    def area(self) -> float:
        return float(np.trapezoid(self.values, dx=self.step))

    def rescaled(self, time_factor: float, space_factor: float) -> "ExcursionPath":
        return ExcursionPath(self.length * time_factor, self.values * space_factor, self.theta, self.ess)


def brownian_excursions(l: float, grid: int, count: int, rng) -> np.ndarray:
    """``count`` standard excursions of length l on ``grid`` steps (rows of length grid + 1).

    Brownian bridge from forward increments with linear drift correction, then
    the Vervaat rotation at the leftmost grid argmin.
    """
    dt = l / grid
    inc = rng.standard_normal((count, grid)) * math.sqrt(dt)
    walk = np.concatenate([np.zeros((count, 1)), np.cumsum(inc, axis=1)], axis=1)
    bridge = walk - np.outer(walk[:, -1], np.arange(grid + 1) / grid)
    core = bridge[:, :grid]
    tau = np.argmin(core, axis=1)
    idx = (tau[:, None] + np.arange(grid)[None, :]) % grid
    ex = np.take_along_axis(core, idx, axis=1) - core[np.arange(count), tau][:, None]
    return np.concatenate([ex, np.zeros((count, 1))], axis=1)


def excursion_areas(paths: np.ndarray, l: float) -> np.ndarray:
    grid = paths.shape[1] - 1
    return np.trapezoid(paths, dx=l / grid, axis=1)


def sample_tilted_excursion(l: float, theta: float = 0.0, grid: int = 1000, pool: int = 4096, seed=None) -> ExcursionPath:
    """Excursion of length l tilted by exp(theta * area), by importance resampling from a pool."""
    if pool < 1:
        raise ParameterError("pool must be >= 1")
    if grid < 100:
        raise ParameterError("grid must be >= 100")
    if theta < 0 or not l > 0:
        raise ParameterError("need theta >= 0 and l > 0")
    rng = make_rng(seed)
    if theta == 0:
        return ExcursionPath(l, brownian_excursions(l, grid, 1, rng)[0], 0.0, 1.0)
    paths = brownian_excursions(l, grid, pool, rng)
    logw = theta * excursion_areas(paths, l)
    w = np.exp(logw - logw.max())
    w /= w.sum()
    ess = float(1.0 / (w ** 2).sum())
    k = int(rng.choice(pool, p=w))
    return ExcursionPath(l, paths[k], theta, ess)


def sample_tilted_gamma(gamma: float, grid: int = 1000, pool: int = 4096, seed=None) -> ExcursionPath:
    """Tilted excursion of length gamma (tilt 1) via gamma^(1/2) e^(gamma^(3/2))(. / gamma)."""
    base = sample_tilted_excursion(1.0, gamma ** 1.5, grid, pool, seed)
    out = base.rescaled(gamma, math.sqrt(gamma))
    return ExcursionPath(out.length, out.values, 1.0, base.ess)


# ----------------------------------------------------------------------------
# Crit spaces


def tree_metric(h: np.ndarray) -> np.ndarray:
    """d(s, t) = h(s) + h(t) - 2 min over [s, t] of h, for all grid pairs."""
    N = len(h)
    d = np.zeros((N, N))
    for s in range(N):
        run = np.minimum.accumulate(h[s:])
        d[s, s:] = h[s] + h[s:] - 2 * run
    return np.maximum(d, d.T)


def sample_identifications(g: ExcursionPath, rng) -> np.ndarray:
    """Poisson(area of g) pairs (x, r(x, y)) of grid indices; x has density prop. to g and
    y is uniform on [0, g(x)); r is the first index >= x with g <= y."""
    vals = g.values
    k = int(rng.poisson(g.area))
    if k == 0:
        return np.zeros((0, 2), dtype=np.int64)
    weights = vals / vals.sum()
    xs = rng.choice(len(vals), size=k, p=weights)
    ys = rng.random(k) * vals[xs]
    out = np.empty((k, 2), dtype=np.int64)
    for a, (x, y) in enumerate(zip(xs, ys)):
        out[a] = (x, x + int(np.argmax(vals[x:] <= y)))
    return out


def _quotient(d: np.ndarray, links: np.ndarray) -> np.ndarray:
    """Shortest-path metric after adding zero-length links between the given index pairs."""
    if len(links) == 0:
        return d
    portals = np.unique(links)
    pos = {int(p): k for k, p in enumerate(portals)}
    D = d[np.ix_(portals, portals)].copy()
    for a, b in links:
        D[pos[int(a)], pos[int(b)]] = D[pos[int(b)], pos[int(a)]] = 0.0
    for k in range(len(portals)):  # Floyd-Warshall on the portals
        D = np.minimum(D, D[:, k][:, None] + D[k][None, :])
    M = d[:, portals]
    out = d.copy()
    for a in range(len(portals)):
        via = (D[a][None, :] + M).min(axis=1)  # best route from portal a to every point
        out = np.minimum(out, M[:, a][:, None] + via[None, :])
    return out


def build_limit_space(h: ExcursionPath, g: ExcursionPath, seed=None) -> MetricMeasureSpace:
    """G(h, g, P): tree metric of h quotiented by Poisson identification points from g.

    Grid points 0..N-1 carry mass l/N each; an identification reaching the
    right end is mapped to point 0 (both are the root of the tree).
    """
    if len(h.values) != len(g.values) or abs(h.length - g.length) > 1e-12 * max(1.0, h.length):
        raise ParameterError("h and g must share the grid")
    rng = make_rng(seed)
    links = sample_identifications(g, rng)
    N = h.grid
    links = np.where(links == N, 0, links)
    d = _quotient(tree_metric(h.values[:N]), links)
    return MetricMeasureSpace(d, np.full(N, h.length / N))


def sample_crit_space(gamma: float, grid: int = 500, pool: int = 4096, seed=None) -> MetricMeasureSpace:
    """Discretized G(2e, e, P) for the tilted excursion e of length gamma."""
    rng = make_rng(seed)
    e = sample_tilted_gamma(gamma, grid, pool, rng)
    return build_limit_space(e.rescaled(1.0, 2.0), e, rng)
