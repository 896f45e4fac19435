"""Truncated Legendre differentiation and its a-priori truncation rule."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .noise import parse_p
from .series import LegendreSeries, differentiate_coeffs_r


def rate_denominator(mu: float, p: float, s: float) -> float:
    """``mu - 1/p + 1/s`` with ``1/p = 0`` for ``p = inf``."""
    p = parse_p(p)
    return mu - (0.0 if math.isinf(p) else 1.0 / p) + 1.0 / s


def choose_N(delta: float, mu: float, p, s: float, C_N: float = 1.0) -> int:
    """Truncation level ``ceil(C_N * delta^(-1/(mu - 1/p + 1/s)))``.

    The floor ``N >= r + 1`` depends on the derivative order and is applied
    by :meth:`DerivativePlan.resolve`, not here.
    """
    if not (0.0 < delta < 1.0):
        raise ValidationError(f"delta must lie in (0, 1), got {delta}")
    if not mu > 0:
        raise ValidationError("mu must be > 0")
    if not (s >= 1 and math.isfinite(s)):
        raise ValidationError("s must be a finite real >= 1")
    if not C_N > 0:
        raise ValidationError("C_N must be > 0")
    denom = rate_denominator(mu, p, s)
    if denom <= 0:
        raise ValidationError("mu - 1/p + 1/s must be positive")
    value = C_N * delta ** (-1.0 / denom)
    # guard against 10.000000000000002 -> 11 when the exact value is an integer
    nearest = round(value)
    if abs(value - nearest) <= 1e-9 * max(1.0, value):
        return int(nearest)
    return int(math.ceil(value))


@dataclass(frozen=True)
class DerivativePlan:
    """Derivative order ``r`` with either a fixed ``N`` or a rule constant ``C_N``."""

    r: int
    N: int | None = None
    C_N: float | None = None

    def __post_init__(self):
        if isinstance(self.r, bool) or int(self.r) != self.r or self.r < 1:
            raise ValidationError(f"r must be an integer >= 1, got {self.r!r}")
        object.__setattr__(self, "r", int(self.r))
        if (self.N is None) == (self.C_N is None):
            raise ValidationError("a plan needs exactly one of N or C_N")
        if self.N is not None:
            if int(self.N) != self.N or self.N < 0:
                raise ValidationError(f"N must be an integer >= 0, got {self.N!r}")
            object.__setattr__(self, "N", int(self.N))
        elif not self.C_N > 0:
            raise ValidationError("C_N must be > 0")

    @property
    def resolved(self) -> bool:
        return self.N is not None

    def resolve(self, delta: float, mu: float, p, s: float) -> "DerivativePlan":
        """Concrete plan with ``N = max(choose_N(...), r + 1)``."""
        if self.resolved:
            return self
        N = max(choose_N(delta, mu, p, s, self.C_N), self.r + 1)
        return DerivativePlan(self.r, N=N)

    @classmethod
    def from_dict(cls, data: dict) -> "DerivativePlan":
        if "r" not in data:
            raise ValidationError('plan needs "r"')
        rule = data.get("rule")
        if rule is not None:
            if "N" in data:
                raise ValidationError('plan takes either "N" or "rule", not both')
            return cls(data["r"], C_N=float(rule.get("C_N", 1.0)))
        return cls(data["r"], N=data.get("N"))

    @classmethod
    def from_json(cls, text: str) -> "DerivativePlan":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        if self.resolved:
            return {"r": self.r, "N": self.N}
        return {"r": self.r, "rule": {"C_N": self.C_N}}


def apply(perturbed: LegendreSeries, plan: DerivativePlan) -> LegendreSeries:
    """Series of ``sum_{k=r}^{N} a_k phi_k^(r)`` for the input coefficients ``a_k``.

    Indices outside ``[r, N]`` are zeroed before differentiating. ``N < r``
    gives the zero series.
    """
    if not plan.resolved:
        raise ValidationError("plan must be resolved to a concrete N before applying")
    r, N = plan.r, plan.N
    if N < r:
        return LegendreSeries(np.zeros(1))
    kept = np.zeros(N + 1)
    top = min(N, len(perturbed) - 1)
    if top >= r:
        kept[r : top + 1] = perturbed.coeffs[r : top + 1]
    return differentiate_coeffs_r(LegendreSeries(kept), r)


def coefficient_count(plan: DerivativePlan) -> int:
    """Number of perturbed coefficients used, ``card([r, N])``."""
    if not plan.resolved:
        raise ValidationError("plan must be resolved")
    return max(0, plan.N - plan.r + 1)
