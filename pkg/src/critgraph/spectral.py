"""Spectral numerics for the discretized operators f -> (1/n) K f.

Integrals over [0, 1] are uniform-grid averages, so the L2 norm of a vector
``f`` is ``sqrt(mean(f**2))`` throughout.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from .errors import (
    ConvergenceError,
    CriticalityError,
    DegenerateInputError,
    InputError,
    SupercriticalError,
)

TOL = 1e-10
MAX_ITER = 100_000


@dataclass(frozen=True)
class SpectralSummary:
    n: int
    top_eigenvalue: float
    psi: np.ndarray
    second_abs_eigenvalue: float
    residual: float
    iterations: int

    @property
    def gap(self) -> float:
        return self.top_eigenvalue - self.second_abs_eigenvalue

    def to_json(self) -> str:
        return json.dumps({
            "n": self.n,
            "top_eigenvalue": self.top_eigenvalue,
            "second_abs_eigenvalue": self.second_abs_eigenvalue,
            "psi": self.psi.tolist(),
        })


@dataclass(frozen=True)
class LimitConstants:
    alpha: float
    chi: float
    zeta: float

    @property
    def window(self) -> float:
        """Effective window parameter zeta / chi^(2/3) of the limit Crit law."""
        return self.zeta / self.chi ** (2 / 3)


@dataclass(frozen=True)
class SBMInput:
    kappa: np.ndarray
    mu: np.ndarray
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        kappa = np.atleast_2d(np.asarray(self.kappa, dtype=float))
        mu = np.atleast_1d(np.asarray(self.mu, dtype=float))
        k = len(mu)
        if kappa.shape != (k, k) or not np.allclose(kappa, kappa.T) or (kappa <= 0).any():
            raise InputError("kappa must be a symmetric positive k x k matrix")
        if (mu <= 0).any() or abs(mu.sum() - 1) > 1e-12:
            raise InputError("mu must be a positive probability vector")
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if A.shape != (k, k) or not np.allclose(A, A.T) or b.shape != (k,):
            raise InputError("A must be symmetric k x k and b a k-vector")
        for name, val in (("kappa", kappa), ("mu", mu), ("A", A), ("b", b)):
            object.__setattr__(self, name, val)

    @property
    def k(self) -> int:
        return len(self.mu)


def _check_square(K) -> np.ndarray:
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise InputError("matrix must be square")
    if not np.isfinite(K).all():
        raise InputError("matrix has non-finite entries")
    return K


def _wnorm(f: np.ndarray) -> float:
    return float(np.sqrt(np.mean(f * f)))


def _start_vector(n: int) -> np.ndarray:
    # deterministic, not orthogonal to any fixed eigenvector with probability one
    return np.random.default_rng(0x5EED).standard_normal(n)


def abs_dominant_eigenvalue(A: np.ndarray, tol: float = 1e-13, max_iter: int = 20_000) -> float:
    """|largest-magnitude eigenvalue| of a symmetric matrix, i.e. its 2-norm.

    Power iteration on ``A @ A`` so that eigenvalue pairs of opposite sign do
    not make the iterate oscillate.
    """
    A = _check_square(A)
    v = _start_vector(A.shape[0])
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(max_iter):
        w = A @ (A @ v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        new = float(np.sqrt(nw))
        v = w / nw
        if abs(new - est) <= tol * max(new, 1e-300):
            return float(np.sqrt(v @ (A @ (A @ v))))
        est = new
    return est


def operator_norm(A) -> float:
    """Matrix 2-norm of a symmetric matrix (abs-dominant eigenvalue)."""
    return abs_dominant_eigenvalue(np.asarray(A, dtype=float))


def leading_eigenpair(K, tol: float = TOL, max_iter: int = MAX_ITER) -> SpectralSummary:
    """Perron eigenpair of f -> (1/n) K f by power iteration from the all-ones vector."""
    K = _check_square(K)
    n = K.shape[0]
    if (K < 0).any():
        raise InputError("kernel matrix must be entrywise nonnegative")
    if not K.any():
        raise DegenerateInputError("zero matrix has no Perron eigenpair")
    A = K / n
    x = np.ones(n)
    it = 0
    diff = np.inf
    while it < max_iter:
        it += 1
        y = A @ x
        ny = _wnorm(y)
        if ny == 0.0:
            raise DegenerateInputError("iterate collapsed to zero (nilpotent kernel)")
        y /= ny
        diff = _wnorm(y - x)
        x = y
        if diff <= tol:
            break
    else:
        raise ConvergenceError(f"power iteration did not converge in {max_iter} steps",
                               residual=diff, iterations=it)
    x = np.clip(x, 0.0, None)
    x /= _wnorm(x)
    Ax = A @ x
    theta = float(np.mean(x * Ax))
    residual = _wnorm(Ax - theta * x)
    second = _second_abs_eigenvalue(A, x, theta)
    return SpectralSummary(n, theta, x, second, residual, it)


def _second_abs_eigenvalue(A: np.ndarray, psi: np.ndarray, theta: float) -> float:
    # deflate the Perron direction (orthogonal projector in the plain inner product)
    u = psi / np.linalg.norm(psi)
    B = A - theta * np.outer(u, u)
    return abs_dominant_eigenvalue(B)


def limit_constants(summary: SpectralSummary, Hmat=None) -> LimitConstants:
    psi = summary.psi
    n = summary.n
    m1 = float(np.mean(psi))
    if m1 <= 0:
        raise DegenerateInputError("eigenfunction has zero mean")
    m3 = float(np.mean(psi ** 3))
    if Hmat is None:
        q = 0.0
    else:
        H = _check_square(Hmat)
        if H.shape[0] != n:
            raise InputError("H must match the summary dimension")
        q = float(psi @ (H @ psi)) / n ** 2
    return LimitConstants(1.0 / m1 ** 2, m3 / m1 ** 3, q / m1 ** 2)


def sbm_constants(inp: SBMInput, tol: float = 1e-8) -> LimitConstants:
    """Constants of the block model from the right/left Perron vectors of M = kappa Diag(mu)."""
    D = np.diag(inp.mu)
    M = inp.kappa @ D
    vals, right = np.linalg.eig(M)
    order = np.argsort(-vals.real)
    vals = vals[order].real
    right = right[:, order].real
    if abs(vals[0] - 1) > tol:
        raise CriticalityError(f"Perron root of M is {vals[0]!r}, not 1")
    if len(vals) > 1 and abs(vals[1] - vals[0]) <= tol:
        raise DegenerateInputError("Perron root of M is not simple")
    u = right[:, 0]
    u = u / u.sum()
    lvals, left = np.linalg.eig(M.T)
    v = left[:, np.argmax(lvals.real)].real
    v = v / (v @ u)
    ones = np.ones(inp.k)
    vt1 = float(v @ ones)
    mu_u = float(inp.mu @ u)
    alpha = 1.0 / (vt1 * mu_u)
    chi = float(v @ u ** 2) / (vt1 * mu_u ** 2)
    zeta = alpha * float(v @ ((inp.A @ D + inp.kappa @ np.diag(inp.b)) @ u))
    return LimitConstants(alpha, chi, zeta)


def _solve(K: np.ndarray, rhs: np.ndarray, tol: float = TOL) -> np.ndarray:
    """Solve (I - K/n) x = rhs; CG first, dense LU if CG misses the tolerance."""
    n = K.shape[0]
    op = LinearOperator((n, n), matvec=lambda f: f - K @ f / n, dtype=float)
    x, info = cg(op, rhs, rtol=0.0, atol=tol * 1e-2 * max(1.0, np.linalg.norm(rhs)), maxiter=10 * n)
    if info != 0 or np.linalg.norm(op.matvec(x) - rhs) > tol * max(1.0, np.linalg.norm(rhs)):
        x = np.linalg.solve(np.eye(n) - K / n, rhs)
    return x


def _check_subcritical(K: np.ndarray) -> None:
    if not K.any():
        return
    if (K < 0).any():
        raise InputError("kernel matrix must be entrywise nonnegative")
    rho = leading_eigenpair(K).top_eigenvalue
    if rho >= 1.0:
        raise SupercriticalError(f"spectral radius {rho!r} >= 1")


def resolvent_mean(K) -> np.ndarray:
    """g = (I - T)^{-1} 1: expected total progeny of the branching process by root type."""
    K = _check_square(K)
    _check_subcritical(K)
    return _solve(K, np.ones(K.shape[0]))


def resolvent_second_moment(K, g) -> np.ndarray:
    """g2 solving g2 = T g2 + (T g)^2 + 2 g - 1 - (1/n^2) sum_j K_ij^2 g_j^2."""
    K = _check_square(K)
    _check_subcritical(K)
    g = np.asarray(g, dtype=float)
    n = K.shape[0]
    Tg = K @ g / n
    rhs = Tg ** 2 + 2 * g - 1 - (K ** 2) @ (g ** 2) / n ** 2
    return _solve(K, rhs)


def weighted_depth_mean(K, g=None) -> np.ndarray:
    """E[sum_l l |G_l|] by root type, i.e. (I - T)^{-2} 1 - (I - T)^{-1} 1."""
    K = _check_square(K)
    if g is None:
        g = resolvent_mean(K)
    else:
        _check_subcritical(K)
    return _solve(K, np.asarray(g, dtype=float)) - g
