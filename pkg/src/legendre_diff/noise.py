"""l_p-bounded perturbations of Fourier-Legendre coefficients.

The noisy data are ``a_k - xi_k`` with ``||xi||_{l_p} = delta``. Two
generators are provided: a seeded random direction rescaled onto the sphere,
and a deterministic adversarial split of the budget over chosen indices.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .series import LegendreSeries


def parse_p(p) -> float:
    """Accept a real ``p >= 1`` or the strings ``"inf"``/``"infinity"``."""
    if isinstance(p, str):
        if p.strip().lower() in ("inf", "infinity", "+inf"):
            return math.inf
        try:
            p = float(p)
        except ValueError:
            raise ValidationError(f"invalid p: {p!r}") from None
    p = float(p)
    if math.isnan(p) or p < 1:
        raise ValidationError(f"p must be >= 1, got {p}")
    return p


def lp_norm(seq, p) -> float:
    """``(sum |x_k|^p)^(1/p)``, or ``max |x_k|`` for ``p = inf``."""
    p = parse_p(p)
    x = np.abs(np.asarray(seq, dtype=float).reshape(-1))
    if not np.all(np.isfinite(x)):
        raise ValidationError("sequence must be finite")
    if x.size == 0:
        return 0.0
    if math.isinf(p):
        return float(x.max())
    # scale first so large p does not overflow
    top = x.max()
    if top == 0.0:
        return 0.0
    return float(top * np.sum((x / top) ** p) ** (1.0 / p))


@dataclass(frozen=True)
class NoiseSpec:
    """Perturbation model: ``||xi||_{l_p} = delta`` on indices ``0..support_max``.

    ``mode`` is ``"random"`` (uses ``seed``) or ``"adversarial"`` (uses
    ``indices``, all positive entries).
    """

    p: float
    delta: float
    mode: str = "random"
    seed: int = 0
    indices: tuple[int, ...] = ()
    support_max: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "p", parse_p(self.p))
        if not (0.0 < self.delta < 1.0):
            raise ValidationError(f"delta must lie in (0, 1), got {self.delta}")
        if self.mode not in ("random", "adversarial"):
            raise ValidationError(f"unknown noise mode {self.mode!r}")
        idx = tuple(int(i) for i in self.indices)
        object.__setattr__(self, "indices", idx)
        if self.mode == "adversarial":
            if not idx:
                raise ValidationError("adversarial noise needs a non-empty index set")
            if min(idx) < 0:
                raise ValidationError("adversarial indices must be >= 0")
            if len(set(idx)) != len(idx):
                raise ValidationError("adversarial indices must be distinct")
            if self.support_max is not None and max(idx) > self.support_max:
                raise ValidationError("adversarial indices exceed support_max")

    @classmethod
    def from_dict(cls, data: dict) -> "NoiseSpec":
        known = {"p", "delta", "mode", "seed", "indices", "support_max"}
        extra = set(data) - known
        if extra:
            raise ValidationError(f"unknown noise fields: {sorted(extra)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ValidationError(str(exc)) from None

    @classmethod
    def from_json(cls, text: str) -> "NoiseSpec":
        return cls.from_dict(json.loads(text))


def random_direction(n: int, seed: int, stream: Sequence[int] = ()) -> np.ndarray:
    """Uniform[-1, 1] draws from a counter-based generator keyed by ``seed``.

    ``stream`` extends the key (e.g. with a row index) so independent
    streams never share state.
    """
    ss = np.random.SeedSequence([int(seed), *[int(s) for s in stream]])
    rng = np.random.Generator(np.random.Philox(ss))
    return rng.uniform(-1.0, 1.0, size=n)


def perturb(
    series: LegendreSeries, spec: NoiseSpec, stream: Sequence[int] = ()
) -> tuple[LegendreSeries, np.ndarray]:
    """Return ``(noisy series, xi)`` with noisy coefficients ``a_k - xi_k``.

    ``xi`` saturates the budget: ``lp_norm(xi, p) == delta``. Its length is
    ``max(len(series), support_max + 1)`` so noise may reach indices the
    exact series does not store.
    """
    if len(series) < 1:
        raise ValidationError("series must have at least one coefficient")
    support = len(series) - 1 if spec.support_max is None else spec.support_max
    if spec.mode == "adversarial":
        support = max(support, max(spec.indices))
    xi = np.zeros(max(len(series), support + 1))

    if spec.mode == "random":
        draw = random_direction(support + 1, spec.seed, stream)
        norm = lp_norm(draw, spec.p)
        if norm == 0.0:
            draw[0], norm = 1.0, 1.0
        xi[: support + 1] = draw * (spec.delta / norm)
    else:
        m = len(spec.indices)
        magnitude = spec.delta if math.isinf(spec.p) else spec.delta * m ** (-1.0 / spec.p)
        xi[list(spec.indices)] = magnitude

    noisy = LegendreSeries(series.padded(xi.size) - xi)
    return noisy, xi
