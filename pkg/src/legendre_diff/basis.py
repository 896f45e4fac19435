"""Orthonormal Legendre polynomials and Gauss-Legendre quadrature on [-1, 1].

The orthonormal system is ``phi_k = sqrt(k + 1/2) * P_k`` where ``P_k`` is the
classical Legendre polynomial, so that ``int_{-1}^{1} phi_j phi_k dt = delta_jk``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError

MAX_INDEX = 10_000


def _check_index(k: int, name: str = "k") -> int:
    if isinstance(k, bool) or int(k) != k:
        raise ValidationError(f"{name} must be an integer, got {k!r}")
    k = int(k)
    if k < 0:
        raise ValidationError(f"{name} must be >= 0, got {k}")
    if k > MAX_INDEX:
        raise ValidationError(f"{name} must be <= {MAX_INDEX}, got {k}")
    return k


def check_points(t) -> np.ndarray:
    """Return ``t`` as a float array, rejecting non-finite values or |t| > 1."""
    arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValidationError("evaluation points must be finite")
    if np.any(np.abs(arr) > 1.0):
        raise ValidationError("evaluation points must lie in [-1, 1]")
    return arr


def _scalar_or_array(values: np.ndarray, like):
    if np.ndim(like) == 0:
        return float(values)
    return values


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre nodes and weights on [-1, 1] (read-only arrays)."""

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        weights = np.array(self.weights, dtype=float)
        if nodes.ndim != 1 or nodes.shape != weights.shape or nodes.size == 0:
            raise ValidationError("nodes and weights must be equal-length 1-D arrays")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def size(self) -> int:
        return self.nodes.size

    def integrate(self, values) -> float:
        """Apply the rule to function values sampled at ``self.nodes``."""
        return float(np.dot(self.weights, values))


def legendre_table(K: int, t) -> np.ndarray:
    """Classical Legendre values ``P_0..P_K`` at ``t``; shape ``t.shape + (K+1,)``."""
    t = np.asarray(t, dtype=float)
    out = np.empty(t.shape + (K + 1,))
    out[..., 0] = 1.0
    if K >= 1:
        out[..., 1] = t
    for k in range(1, K):
        out[..., k + 1] = ((2 * k + 1) * t * out[..., k] - k * out[..., k - 1]) / (k + 1)
    return out


def phi_table(K: int, t) -> np.ndarray:
    """Orthonormal Legendre values ``phi_0..phi_K`` at ``t``; shape ``t.shape + (K+1,)``."""
    return legendre_table(K, t) * np.sqrt(np.arange(K + 1) + 0.5)


def eval_phi(k: int, t):
    """Evaluate the orthonormal Legendre polynomial ``phi_k`` at ``t``.

    Uses the three-term recurrence
    ``(k+1) P_{k+1} = (2k+1) t P_k - k P_{k-1}`` and scales by ``sqrt(k+1/2)``.
    Accepts a scalar or an array of points.
    """
    k = _check_index(k)
    arr = check_points(t)
    p_prev = np.ones_like(arr)
    if k == 0:
        p = p_prev
    else:
        p = arr.copy()
        for j in range(1, k):
            p, p_prev = ((2 * j + 1) * arr * p - j * p_prev) / (j + 1), p
    return _scalar_or_array(np.sqrt(k + 0.5) * p, t)


def eval_phi_deriv(k: int, r: int, t):
    """Evaluate the ``r``-th derivative of ``phi_k`` at ``t``.

    Differentiating the three-term recurrence ``r`` times gives

        (j+1) P_{j+1}^{(m)} = (2j+1) (t P_j^{(m)} + m P_j^{(m-1)}) - j P_{j-1}^{(m)}

    which is swept over ``j`` for all orders ``m = 0..r`` at once. The result is
    exactly zero when ``r > k``.
    """
    k = _check_index(k)
    if isinstance(r, bool) or int(r) != r or r < 1:
        raise ValidationError(f"derivative order r must be an integer >= 1, got {r!r}")
    r = int(r)
    arr = check_points(t)
    if r > k:
        return _scalar_or_array(np.zeros_like(arr), t)

    orders = np.arange(r + 1).reshape((r + 1,) + (1,) * arr.ndim)
    # rows are derivative orders 0..r of P_{j-1} and P_j
    prev = np.zeros((r + 1,) + arr.shape)
    prev[0] = 1.0
    cur = np.zeros_like(prev)
    cur[0] = arr
    cur[1] = 1.0
    for j in range(1, k):
        shifted = np.zeros_like(cur)
        shifted[1:] = cur[:-1]
        nxt = ((2 * j + 1) * (arr * cur + orders * shifted) - j * prev) / (j + 1)
        prev, cur = cur, nxt
    return _scalar_or_array(np.sqrt(k + 0.5) * cur[r], t)


def sup_norm_phi(k: int) -> float:
    """Maximum of ``|phi_k|`` on [-1, 1]; attained at ``t = 1``."""
    k = _check_index(k)
    return float(np.sqrt(k + 0.5))


def _legendre_and_derivative(n: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p_prev = np.ones_like(x)
    p = x.copy()
    for j in range(1, n):
        p, p_prev = ((2 * j + 1) * x * p - j * p_prev) / (j + 1), p
    dp = n * (x * p - p_prev) / (x * x - 1.0)
    return p, dp


def gauss_legendre(n: int, max_iter: int = 100) -> QuadratureRule:
    """Return the ``n``-point Gauss-Legendre rule on [-1, 1].

    Nodes are the roots of ``P_n``, located by Newton iteration from the
    Chebyshev-type initial guesses ``cos(pi (i - 1/4) / (n + 1/2))``.
    Weights are ``2 / ((1 - t^2) P_n'(t)^2)``.

    Raises
    ------
    NumericalError
        If some node has not converged after ``max_iter`` Newton steps.
    """
    n = _check_index(n, "n")
    if n < 1:
        raise ValidationError("quadrature size must be >= 1")
    if n == 1:
        return QuadratureRule(np.array([0.0]), np.array([2.0]))

    # only the nonnegative half is computed; the rule is symmetric
    m = (n + 1) // 2
    i = np.arange(1, m + 1)
    x = np.cos(np.pi * (i - 0.25) / (n + 0.5))
    active = np.ones(m, dtype=bool)
    steps = np.zeros(m, dtype=int)
    while np.any(active):
        xa = x[active]
        p, dp = _legendre_and_derivative(n, xa)
        dx = p / dp
        x[active] = xa - dx
        steps[active] += 1
        # the residual floor of |P_n| in double precision grows like n^1.5 * eps,
        # so a vanishing Newton step also counts as converged
        done = (np.abs(p) <= 1e-14) | (np.abs(dx) <= 2.0 * np.finfo(float).eps)
        idx = np.flatnonzero(active)
        active[idx[done]] = False
        if np.any(steps[active] >= max_iter):
            raise NumericalError(f"Newton iteration for {n}-point Gauss rule did not converge")
    if n % 2 == 1:
        x[-1] = 0.0
    _, dp = _legendre_and_derivative(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)

    half = n // 2
    nodes = np.concatenate([-x[:half], x[::-1]]) if n % 2 else np.concatenate([-x, x[::-1]])
    weights = np.concatenate([w[:half], w[::-1]]) if n % 2 else np.concatenate([w, w[::-1]])
    return QuadratureRule(nodes, weights)
