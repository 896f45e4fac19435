"""Fourier-Legendre coefficient sequences and operations on them.

A :class:`LegendreSeries` stores ``a_0..a_K`` where ``a_k`` multiplies the
orthonormal polynomial ``phi_k``. Differentiation acts directly on the
coefficients, so a truncated expansion never has to be re-sampled.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .basis import QuadratureRule, check_points, gauss_legendre, phi_table
from .errors import ValidationError


@lru_cache(maxsize=64)
def cached_rule(n: int) -> QuadratureRule:
    """Memoized :func:`gauss_legendre`; rules are immutable so sharing is safe."""
    return gauss_legendre(n)


@dataclass(frozen=True)
class LegendreSeries:
    """Finite orthonormal-Legendre expansion ``sum_k coeffs[k] * phi_k``.

    ``meta`` carries free-form provenance (e.g. the tail dropped by a
    generator) and does not take part in equality.
    """

    coeffs: np.ndarray
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        arr = np.array(self.coeffs, dtype=float).reshape(-1)
        if not np.all(np.isfinite(arr)):
            raise ValidationError("series coefficients must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    def __len__(self) -> int:
        return self.coeffs.size

    def __eq__(self, other):
        if not isinstance(other, LegendreSeries):
            return NotImplemented
        return np.array_equal(self.coeffs, other.coeffs)

    __hash__ = None

    @property
    def degree(self) -> int:
        """Highest stored index ``K`` (``-1`` for the empty series)."""
        return self.coeffs.size - 1

    @classmethod
    def unit(cls, k: int, length: int | None = None) -> "LegendreSeries":
        """Series with a single unit coefficient at index ``k``."""
        c = np.zeros(max(k + 1, length or 0))
        c[k] = 1.0
        return cls(c)

    def padded(self, length: int) -> np.ndarray:
        """Coefficients zero-padded (never truncated) to ``length`` entries."""
        if length < self.coeffs.size:
            raise ValidationError("cannot pad to a shorter length")
        out = np.zeros(length)
        out[: self.coeffs.size] = self.coeffs
        return out

    def __add__(self, other: "LegendreSeries") -> "LegendreSeries":
        n = max(len(self), len(other))
        return LegendreSeries(self.padded(n) + other.padded(n))

    def __sub__(self, other: "LegendreSeries") -> "LegendreSeries":
        n = max(len(self), len(other))
        return LegendreSeries(self.padded(n) - other.padded(n))

    def __mul__(self, scalar: float) -> "LegendreSeries":
        return LegendreSeries(self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __call__(self, t):
        return evaluate(self, t)

    def l2_norm(self) -> float:
        """L2 norm on [-1, 1], equal to the Euclidean norm of the coefficients."""
        return float(np.linalg.norm(self.coeffs))

    def to_json(self) -> str:
        return json.dumps({"coeffs": [float(c) for c in self.coeffs]})

    @classmethod
    def from_json(cls, text: str) -> "LegendreSeries":
        data = json.loads(text)
        if not isinstance(data, dict) or "coeffs" not in data:
            raise ValidationError('series JSON must be an object with a "coeffs" list')
        return cls(data["coeffs"])


@dataclass(frozen=True)
class WienerParams:
    """Parameters ``(s, mu)`` of the weighted Wiener class ``W_s^mu``."""

    s: float
    mu: float

    def __post_init__(self):
        if not (math.isfinite(self.s) and self.s >= 1):
            raise ValidationError(f"s must be a finite real >= 1, got {self.s}")
        if not (math.isfinite(self.mu) and self.mu > 0):
            raise ValidationError(f"mu must be > 0, got {self.mu}")


def default_rule_size(K: int) -> int:
    return max(2 * (K + 1), 64)


def project(f: Callable, K: int, rule: QuadratureRule | None = None) -> LegendreSeries:
    """Fourier-Legendre coefficients ``a_k = sum_i w_i f(t_i) phi_k(t_i)``, k = 0..K.

    ``f`` is called once with the array of quadrature nodes; scalar-only
    callables are vectorized automatically. Without an explicit rule a
    ``max(2(K+1), 64)``-point Gauss rule is used.
    """
    if int(K) != K or K < 0:
        raise ValidationError(f"K must be an integer >= 0, got {K}")
    K = int(K)
    if rule is None:
        rule = cached_rule(default_rule_size(K))
    if rule.size < K + 1:
        raise ValidationError(f"rule of size {rule.size} is too small for K = {K}")
    try:
        values = np.asarray(f(rule.nodes), dtype=float)
        if values.shape != rule.nodes.shape:
            raise TypeError
    except (TypeError, ValueError):
        values = np.array([float(f(x)) for x in rule.nodes])
    if not np.all(np.isfinite(values)):
        raise ValidationError("function returned non-finite values at quadrature nodes")
    table = phi_table(K, rule.nodes)
    return LegendreSeries(table.T @ (rule.weights * values))


def evaluate(series: LegendreSeries, t):
    """Evaluate ``sum_k a_k phi_k(t)`` by Clenshaw's backward recurrence.

    The recurrence runs on the classical ``P_k`` with the orthonormal scale
    ``sqrt(k + 1/2)`` folded into each coefficient.
    """
    arr = check_points(t)
    c = series.coeffs * np.sqrt(np.arange(series.coeffs.size) + 0.5)
    n = c.size
    if n == 0:
        out = np.zeros_like(arr)
    elif n == 1:
        out = np.full_like(arr, c[0])
    else:
        # P_{k+1} = alpha_k P_k + beta_k P_{k-1}, alpha_k = (2k+1) t/(k+1), beta_k = -k/(k+1)
        b1 = np.zeros_like(arr)
        b2 = np.zeros_like(arr)
        for k in range(n - 1, 0, -1):
            b1, b2 = c[k] + (2 * k + 1) / (k + 1) * arr * b1 - (k + 1) / (k + 2) * b2, b1
        out = c[0] + arr * b1 - 0.5 * b2
    if np.ndim(t) == 0:
        return float(out)
    return out


def differentiate_coeffs(series: LegendreSeries) -> LegendreSeries:
    """Coefficients of the exact first derivative of ``series``.

    ``b_l = 2 sqrt(l+1/2) * sum_{k>l, k+l odd} sqrt(k+1/2) a_k``. The inner
    sum obeys ``S_l = c_{l+1} + S_{l+2}``, so one downward sweep gives all
    ``b_l`` in O(K).
    """
    n = series.coeffs.size
    if n <= 1:
        return LegendreSeries(np.zeros(0))
    scale = np.sqrt(np.arange(n) + 0.5)
    c = scale * series.coeffs
    suffix = np.zeros(n + 1)
    for l in range(n - 2, -1, -1):
        suffix[l] = c[l + 1] + suffix[l + 2]
    return LegendreSeries(2.0 * scale[:-1] * suffix[: n - 1])


def differentiate_coeffs_r(series: LegendreSeries, r: int) -> LegendreSeries:
    """``r``-fold application of :func:`differentiate_coeffs`."""
    if isinstance(r, bool) or int(r) != r or r < 1:
        raise ValidationError(f"derivative order r must be an integer >= 1, got {r!r}")
    out = series
    for _ in range(int(r)):
        out = differentiate_coeffs(out)
    return out


def wiener_weights(n: int, params: WienerParams) -> np.ndarray:
    k = np.maximum(1, np.arange(n)).astype(float)
    return k ** (params.s * params.mu)


def wiener_norm(series: LegendreSeries, params: WienerParams) -> float:
    """Finite-range weighted Wiener norm ``(sum (max(1,k))^{s mu} |a_k|^s)^{1/s}``."""
    w = wiener_weights(series.coeffs.size, params)
    return float(np.sum(w * np.abs(series.coeffs) ** params.s) ** (1.0 / params.s))


def edge_function(params: WienerParams, eps: float, K: int) -> LegendreSeries:
    """Unit-norm member of ``W_s^mu`` with near-critical decay.

    Coefficients are ``kappa * max(1, k)^(-mu - 1/s - eps)`` for k = 0..K with
    ``kappa`` normalizing the finite-range Wiener norm to one. ``meta`` records
    the Wiener mass beyond ``K`` that an infinite series of the same law would
    carry (``tail_norm_bound``).
    """
    if not eps > 0:
        raise ValidationError("eps must be > 0")
    if int(K) != K or K < 1:
        raise ValidationError("K must be an integer >= 1")
    K = int(K)
    k = np.maximum(1, np.arange(K + 1)).astype(float)
    raw = k ** (-params.mu - 1.0 / params.s - eps)
    kappa = 1.0 / wiener_norm(LegendreSeries(raw), params)
    # sum_{k>K} k^{-1 - s eps} <= K^{-s eps} / (s eps)
    tail = (kappa**params.s * K ** (-params.s * eps) / (params.s * eps)) ** (1.0 / params.s)
    return LegendreSeries(kappa * raw, meta={"K": K, "eps": eps, "tail_norm_bound": tail})
