"""Graphon kernels, finite edge-weight matrices and their regularity diagnostics.

A kernel is described by a :class:`KernelSpec` (closed-form family or a
tabulated grid).  :func:`build_weight_matrix` turns a critical kernel ``W`` and
a window perturbation ``H`` into the array ``beta`` used by the samplers, where
``beta[i, j] / n`` is the connection probability of vertices ``i`` and ``j``.

Vertex ``k`` (0-indexed) sits at grid location ``(k + 1) / n``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .errors import InputError, ParameterError
from .rng import make_rng

FAMILIES = (
    "constant",          # 1
    "min",               # x ^ y
    "max",               # x v y
    "sum_pow",           # (x + y)^a
    "max_neg_pow",       # (x v y)^(-a)
    "absdiff_neg_pow",   # |x - y|^(-a)
    "eta_plus_max_pow",  # eta + (x v y)^a
    "tabulated",
)
SINGULAR_FAMILIES = frozenset({"max_neg_pow", "absdiff_neg_pow"})
SCHEMES = ("grid", "uniform-order-stat", "cell-average", "rgiv", "sbm", "explicit")
RANDOM_SCHEMES = frozenset({"uniform-order-stat", "rgiv", "sbm"})


@dataclass(frozen=True)
class KernelSpec:
    """Closed-form kernel ``c * lam * family(x, y)``.

    ``c`` is the nonnegative normalization (e.g. ``1/||T_K||`` to make the
    kernel critical); ``lam`` is a signed multiplier so that a window
    perturbation ``H = lam * K`` can be expressed without breaking ``c >= 0``.
    """

    family: str
    a: float = 0.0
    eta: float = 0.0
    c: float = 1.0
    lam: float = 1.0
    table: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        validate_spec(self)

    @property
    def singular(self) -> bool:
        return self.family in SINGULAR_FAMILIES

    def scaled(self, factor: float) -> "KernelSpec":
        """Same family with ``lam`` multiplied by ``factor`` (sign allowed)."""
        return replace(self, lam=self.lam * factor)

    def to_text(self) -> str:
        lines = [f"family={self.family}", f"a={self.a!r}", f"eta={self.eta!r}",
                 f"c={self.c!r}", f"lambda={self.lam!r}"]
        if self.table is not None:
            t = np.asarray(self.table)
            lines.append(f"grid={t.shape[0]}")
            lines.append("table=" + ";".join(",".join(repr(float(v)) for v in row) for row in t))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "KernelSpec":
        kv = parse_key_values(text)
        table = None
        if "table" in kv:
            table = np.array([[float(v) for v in row.split(",")] for row in kv["table"].split(";")])
        return cls(
            family=kv.get("family", "constant"),
            a=float(kv.get("a", 0.0)),
            eta=float(kv.get("eta", 0.0)),
            c=float(kv.get("c", 1.0)),
            lam=float(kv.get("lambda", 1.0)),
            table=table,
        )


def parse_key_values(text: str) -> dict[str, str]:
    """Parse ``key=value`` lines (``#`` comments, blank lines ignored)."""
    out: dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def validate_spec(spec: KernelSpec) -> None:
    fam = spec.family
    if fam not in FAMILIES:
        raise ParameterError(f"unknown kernel family {fam!r}")
    for name in ("a", "eta", "c", "lam"):
        if not math.isfinite(getattr(spec, name)):
            raise ParameterError(f"{name} must be finite")
    if spec.c < 0:
        raise ParameterError("normalization c must be >= 0")
    if fam == "max_neg_pow" and not 0 < spec.a < 2 / 3:
        raise ParameterError("(x v y)^-a needs 0 < a < 2/3")
    if fam == "absdiff_neg_pow" and not 0 < spec.a < 1 / 3:
        raise ParameterError("|x-y|^-a needs 0 < a < 1/3")
    if fam == "sum_pow" and spec.a < 0:
        raise ParameterError("(x+y)^a needs a >= 0")
    if fam == "eta_plus_max_pow" and not (spec.a > 0 and spec.eta > 0):
        raise ParameterError("eta + (x v y)^a needs a > 0 and eta > 0")
    if fam == "tabulated":
        t = spec.table
        if t is None:
            raise ParameterError("tabulated kernel needs a table")
        t = np.asarray(t, dtype=float)
        if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] < 2:
            raise ParameterError("tabulated grid must be square with at least 2 nodes")
        if not np.allclose(t, t.T) or (t < 0).any() or not np.isfinite(t).all():
            raise ParameterError("tabulated grid must be symmetric, finite and nonnegative")


def _family_values(spec: KernelSpec, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    fam = spec.family
    if fam == "constant":
        return np.ones(np.broadcast(x, y).shape)
    if fam == "min":
        return np.minimum(x, y)
    if fam == "max":
        return np.maximum(x, y)
    if fam == "sum_pow":
        return (x + y) ** spec.a
    if fam == "eta_plus_max_pow":
        return spec.eta + np.maximum(x, y) ** spec.a
    with np.errstate(divide="ignore"):
        if fam == "max_neg_pow":
            return np.maximum(x, y) ** (-spec.a)
        if fam == "absdiff_neg_pow":
            return np.abs(x - y) ** (-spec.a)
    # tabulated: bilinear interpolation on the uniform node grid of [0, 1]
    t = np.asarray(spec.table, dtype=float)
    nodes = np.linspace(0.0, 1.0, t.shape[0])
    interp = RegularGridInterpolator((nodes, nodes), t, method="linear")
    xb, yb = np.broadcast_arrays(x, y)
    pts = np.stack([xb.ravel(), yb.ravel()], axis=-1)
    return interp(pts).reshape(xb.shape)


def eval_kernel(spec: KernelSpec, x, y, cap: float | None = None):
    """Evaluate ``c * lam * family(x, y)``; arrays broadcast.

    ``cap`` bounds the magnitude of singular families (the builders pass
    ``n**(2/3)``); without a cap the singular set evaluates to ``inf``.
    """
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if np.isnan(xa).any() or np.isnan(ya).any():
        raise InputError("kernel evaluated at NaN")
    if (xa < 0).any() or (xa > 1).any() or (ya < 0).any() or (ya > 1).any():
        raise InputError("kernel arguments must lie in [0, 1]")
    vals = _family_values(spec, xa, ya)
    if cap is not None and spec.singular:
        vals = np.minimum(vals, cap)
    out = spec.c * spec.lam * vals
    if np.ndim(out) == 0:
        return float(out)
    return out


def tanh_root(tol: float = 1e-15) -> float:
    """Unique positive root ``z0`` of ``tanh(1/sqrt(z)) = sqrt(z)``; equals ``||T_{x v y}||``."""
    f = lambda z: math.tanh(1.0 / math.sqrt(z)) - math.sqrt(z)  # noqa: E731
    lo, hi = 1e-6, 1.0  # f(lo) > 0 > f(1)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def cosh_profile(x, z0: float | None = None):
    """Unit-L2 Perron eigenfunction of ``x v y``: sqrt(2) cosh(x/sqrt z0) / cosh(1/sqrt z0)."""
    z0 = tanh_root() if z0 is None else z0
    s = math.sqrt(z0)
    return math.sqrt(2.0) * np.cosh(np.asarray(x, dtype=float) / s) / math.cosh(1.0 / s)


def sine_profile(x):
    """Unit-L2 Perron eigenfunction of ``pi^2 (x ^ y) / 4``."""
    return math.sqrt(2.0) * np.sin(math.pi * np.asarray(x, dtype=float) / 2.0)


def rgiv_kernels(lam: float) -> tuple[KernelSpec, KernelSpec]:
    """Critical kernel and window perturbation of the immigrating-vertices graph."""
    W = KernelSpec("min", c=math.pi ** 2 / 4)
    H = KernelSpec("min", c=math.pi ** (4 / 3) / 2 ** (1 / 3), lam=lam)
    return W, H


@dataclass(frozen=True)
class WeightMatrix:
    """Symmetric edge-weight array with zero diagonal.

    ``beta`` is stored dense and read-only; :meth:`upper` yields the ``i < j``
    triangle used for export.  ``points`` holds the locations in [0, 1] the
    kernel was evaluated at (grid nodes or sorted uniforms) when applicable.
    """

    n: int
    beta: np.ndarray
    scheme: str
    seed: int | None = None
    exceptional_set: frozenset[int] | None = None
    points: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        b = np.asarray(self.beta, dtype=float)
        if b.shape != (self.n, self.n):
            raise InputError(f"beta has shape {b.shape}, expected {(self.n, self.n)}")
        if self.scheme not in SCHEMES:
            raise ParameterError(f"unknown scheme {self.scheme!r}")
        if not np.isfinite(b).all() or (b < 0).any():
            raise InputError("weights must be finite and nonnegative")
        if not np.array_equal(b, b.T):
            raise InputError("weights must be exactly symmetric")
        if np.any(np.diag(b) != 0):
            raise InputError("diagonal weights must be zero")
        b = b.copy()
        b.flags.writeable = False
        object.__setattr__(self, "beta", b)

    def upper(self):
        i, j = np.triu_indices(self.n, k=1)
        return i, j, self.beta[i, j]

    def to_csv(self) -> str:
        seed = "" if self.seed is None else str(self.seed)
        lines = [f"# n={self.n} scheme={self.scheme} seed={seed}"]
        i, j, b = self.upper()
        keep = b > 0
        lines += [f"{a},{c},{v!r}" for a, c, v in zip(i[keep].tolist(), j[keep].tolist(), b[keep].tolist())]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "WeightMatrix":
        lines = text.splitlines()
        header = dict(tok.split("=", 1) for tok in lines[0].lstrip("#").split())
        n = int(header["n"])
        beta = np.zeros((n, n))
        for line in lines[1:]:
            if not line.strip():
                continue
            a, c, v = line.split(",")
            beta[int(a), int(c)] = beta[int(c), int(a)] = float(v)
        seed = int(header["seed"]) if header.get("seed") else None
        return cls(n, beta, header["scheme"], seed)


def _symmetrize_zero_diag(b: np.ndarray) -> np.ndarray:
    b = np.triu(b, 1)
    return b + b.T


def _grid_values(spec: KernelSpec, pts: np.ndarray, cap: float) -> np.ndarray:
    return eval_kernel(spec, pts[:, None], pts[None, :], cap=cap)


_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(8)


def _cell_average(spec: KernelSpec, n: int, cap: float) -> np.ndarray:
    """Average of the kernel over each cell ((i-1)/n, i/n) x ((j-1)/n, j/n)."""
    left = np.arange(n) / n
    if spec.singular:
        k = 32
        offsets = (np.arange(k) + 0.5) / (k * n)
        weights = np.full(k, 1.0 / k)
    else:
        offsets = (_GAUSS_NODES + 1.0) / (2 * n)
        weights = _GAUSS_WEIGHTS / 2.0
    out = np.zeros((n, n))
    for oa, wa in zip(offsets, weights):
        xa = left + oa
        for ob, wb in zip(offsets, weights):
            out += wa * wb * eval_kernel(spec, xa[:, None], (left + ob)[None, :], cap=cap)
    return out


def build_weight_matrix(
    specW: KernelSpec,
    specH: KernelSpec | None,
    n: int,
    scheme: str = "grid",
    seed: int | None = None,
    exceptional_set=None,
) -> WeightMatrix:
    """Edge weights ``(W + n^{-1/3} H) v 0`` under the grid, uniform or cell-average scheme."""
    if n < 2:
        raise ParameterError("n must be >= 2")
    if scheme not in ("grid", "uniform-order-stat", "cell-average"):
        raise ParameterError(f"scheme {scheme!r} is not built from kernels; see rgiv_weights/sbm_weights")
    if scheme == "uniform-order-stat" and seed is None:
        raise ParameterError("uniform-order-stat scheme needs a seed")
    if scheme != "uniform-order-stat" and seed is not None:
        raise ParameterError(f"scheme {scheme!r} is deterministic; seed must be None")
    cap = n ** (2 / 3)
    shift = n ** (-1 / 3)
    pts = None
    if scheme == "cell-average":
        beta = _cell_average(specW, n, cap)
        if specH is not None:
            beta = beta + shift * _cell_average(specH, n, cap)
    else:
        if scheme == "grid":
            pts = np.arange(1, n + 1) / n
        else:
            pts = np.sort(make_rng(seed).random(n))
        beta = _grid_values(specW, pts, cap)
        if specH is not None:
            beta = beta + shift * _grid_values(specH, pts, cap)
    beta = _symmetrize_zero_diag(np.maximum(beta, 0.0))
    ex = None if exceptional_set is None else frozenset(int(v) for v in exceptional_set)
    return WeightMatrix(n, beta, scheme, seed, ex, pts)


def rgiv_weights(n: int, lam: float, seed) -> WeightMatrix:
    """Weights ``(N/n) t (V_i ^ V_j)`` of the immigrating-vertices graph given ``N ~ Poisson(n t)``.

    ``t = pi/2 + lam n^{-1/3}``.  The resulting matrix has ``N`` rows; edges
    then appear with probability ``1 - exp(-beta/N)`` (exponential rule).
    """
    rng = make_rng(seed)
    t = math.pi / 2 + lam * n ** (-1 / 3)
    N = max(int(rng.poisson(n * t)), 2)
    V = np.sort(rng.random(N))
    beta = _symmetrize_zero_diag((N / n) * t * np.minimum(V[:, None], V[None, :]))
    return WeightMatrix(N, beta, "rgiv", seed if isinstance(seed, int) else None, None, V)


def sbm_weights(kappa: np.ndarray, types: np.ndarray) -> WeightMatrix:
    """Block-model weights ``beta_ij = kappa[type_i, type_j]``."""
    kappa = np.asarray(kappa, dtype=float)
    types = np.asarray(types, dtype=int)
    beta = _symmetrize_zero_diag(kappa[types[:, None], types[None, :]])
    return WeightMatrix(len(types), beta, "sbm")


def explicit_weights(beta: np.ndarray, exceptional_set=None) -> WeightMatrix:
    beta = np.asarray(beta, dtype=float)
    ex = None if exceptional_set is None else frozenset(int(v) for v in exceptional_set)
    return WeightMatrix(beta.shape[0], beta, "explicit", None, ex)


@dataclass(frozen=True)
class ConditionReport:
    l3_norm: float
    theta_stat: float
    norm_deviation: float
    small_pair_count: int
    b_mass: float
    delta0: float
    varpi0: float
    theta0: float
    theta1: float


def condition_diagnostics(
    weights: WeightMatrix,
    specW: KernelSpec,
    specH: KernelSpec | None,
    delta0: float = 0.25,
    B=(),
    varpi0: float = 0.5,
) -> ConditionReport:
    """Finite-n statistics behind the L3, row-growth and small-weight conditions.

    The exponents ``theta1`` / ``theta0`` are the empirical growth exponents
    ``log(max(stat, 1)) / log n`` of the row statistic (and its 2/3 power).
    """
    from .spectral import operator_norm

    if not 0 < delta0 < 1 / 3:
        raise ParameterError("delta0 must lie in (0, 1/3)")
    n = weights.n
    beta = weights.beta
    l3 = float((beta ** 3).sum() / n ** 2)
    theta_stat = float(((beta ** 1.5).sum(axis=1) / n).max())

    pts = np.arange(1, n + 1) / n
    cap = n ** (2 / 3)
    Wg = eval_kernel(specW, pts[:, None], pts[None, :], cap=cap)
    Hg = np.zeros((n, n)) if specH is None else eval_kernel(specH, pts[:, None], pts[None, :], cap=cap)
    dev = Hg / n - n ** (1 / 3) * (beta - Wg) / n
    norm_dev = operator_norm(dev)

    Bset = np.zeros(n, dtype=bool)
    Bset[list(B)] = True
    outside = ~Bset
    small = (beta <= n ** (-delta0)) & outside[:, None] & outside[None, :]
    np.fill_diagonal(small, False)
    b_mass = float((beta[Bset] ** 2).sum())
    logn = math.log(n)
    theta1 = math.log(max(theta_stat, 1.0)) / logn
    return ConditionReport(
        l3_norm=l3,
        theta_stat=theta_stat,
        norm_deviation=float(norm_dev),
        small_pair_count=int(small.sum()),
        b_mass=b_mass,
        delta0=delta0,
        varpi0=varpi0,
        theta0=2 * theta1 / 3,
        theta1=theta1,
    )
