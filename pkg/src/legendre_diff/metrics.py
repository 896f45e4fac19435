"""L_q norms on [-1, 1] and the truncation/propagation error split.

The C-metric and L_inf coincide for the continuous functions handled here;
both are requested with ``q = inf``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Callable, Union

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ValidationError
from .noise import parse_p
from .series import LegendreSeries, cached_rule, differentiate_coeffs_r, evaluate
from .truncation import DerivativePlan, apply

Function = Union[Callable, LegendreSeries]


@dataclass(frozen=True)
class MetricSpec:
    """Output metric ``L_q`` (``2 <= q <= inf``) and its discretization."""

    q: float = 2.0
    grid_size: int = 4097
    panels: int = 64
    nodes_per_panel: int = 16

    def __post_init__(self):
        q = parse_p(self.q)
        if q < 2:
            raise ValidationError(f"q must be >= 2, got {q}")
        object.__setattr__(self, "q", q)
        if self.grid_size < 2:
            raise ValidationError("grid_size must be >= 2")
        if self.panels < 1 or self.nodes_per_panel < 1:
            raise ValidationError("panels and nodes_per_panel must be >= 1")

    @property
    def label(self) -> str:
        return q_label(self.q)


def q_label(q: float) -> str:
    if math.isinf(q):
        return "inf"
    return f"{q:g}"


def _values(g: Function, t: np.ndarray) -> np.ndarray:
    if isinstance(g, LegendreSeries):
        vals = evaluate(g, t)
    else:
        vals = np.asarray(g(t), dtype=float)
        if vals.shape != t.shape:
            vals = np.array([float(g(x)) for x in t])
    if not np.all(np.isfinite(vals)):
        raise ValidationError("function values must be finite on [-1, 1]")
    return vals


def _composite_rule(panels: int, nodes_per_panel: int) -> tuple[np.ndarray, np.ndarray]:
    base = cached_rule(nodes_per_panel)
    edges = np.linspace(-1.0, 1.0, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * base.nodes[None, :]).ravel()
    weights = (half[:, None] * base.weights[None, :]).ravel()
    return nodes, weights


def _sup_norm(g: Function, grid_size: int) -> float:
    t = np.linspace(-1.0, 1.0, grid_size)
    absval = np.abs(_values(g, t))
    best = float(absval.max())
    # polish the largest interior local maxima between neighbouring grid points
    interior = np.flatnonzero(
        (absval[1:-1] >= absval[:-2]) & (absval[1:-1] >= absval[2:])
    ) + 1
    if interior.size:
        top = interior[np.argsort(absval[interior])[::-1][:8]]
        for i in top:
            res = minimize_scalar(
                lambda x: -abs(float(_values(g, np.array([x]))[0])),
                bounds=(t[i - 1], t[i + 1]),
                method="bounded",
                options={"xatol": 1e-12},
            )
            best = max(best, -float(res.fun))
    return best


def lq_norm(g: Function, spec: MetricSpec) -> float:
    """``(int_{-1}^{1} |g|^q dt)^(1/q)``, or ``max |g|`` for ``q = inf``.

    ``g`` is a vectorized callable or a :class:`LegendreSeries`. For a series
    and even integer ``q``, ``|g|^q`` is a polynomial and a single Gauss rule
    of sufficient size integrates it exactly; otherwise composite Gauss
    quadrature over ``spec.panels`` equal panels is used (for series, at
    least one panel per degree). The sup norm is taken on a uniform grid that
    includes both endpoints, with local refinement of the largest interior
    peaks.
    """
    q = spec.q
    if math.isinf(q):
        return _sup_norm(g, spec.grid_size)
    if isinstance(g, LegendreSeries):
        d = max(len(g) - 1, 0)
        if float(q).is_integer() and int(q) % 2 == 0:
            rule = cached_rule(max(int(q) * d // 2 + 1, spec.nodes_per_panel))
            nodes, weights = rule.nodes, rule.weights
        else:
            nodes, weights = _composite_rule(max(spec.panels, d), spec.nodes_per_panel)
    else:
        nodes, weights = _composite_rule(spec.panels, spec.nodes_per_panel)
    absval = np.abs(_values(g, nodes))
    scale = absval.max()
    if scale == 0.0:
        return 0.0
    return float(scale * np.dot(weights, (absval / scale) ** q) ** (1.0 / q))


@dataclass(frozen=True)
class ErrorReport:
    """Norms of the two parts of the error and of their sum."""

    truncation_error: float
    propagation_error: float
    total_error: float
    q: float
    r: int
    N: int
    delta: float | None = None
    parseval_discrepancy: float | None = None

    def to_dict(self) -> dict:
        out = asdict(self)
        out["q"] = q_label(self.q) if math.isinf(self.q) else self.q
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def decompose(
    exact: LegendreSeries,
    perturbed: LegendreSeries,
    plan: DerivativePlan,
    exact_deriv: Function | None = None,
    spec: MetricSpec = MetricSpec(),
    delta: float | None = None,
) -> ErrorReport:
    """Split ``f^(r) - D_N f^delta`` into truncation and propagation parts.

    ``exact_deriv`` defaults to the derivative of the full stored ``exact``
    series. When it is a series and ``q = 2``, both parts are also computed
    from coefficients (Parseval) and the largest disagreement between the two
    routes is stored in ``parseval_discrepancy``.
    """
    if len(exact) != len(perturbed):
        raise ValidationError(
            f"exact and perturbed series differ in length ({len(exact)} vs {len(perturbed)})"
        )
    if not plan.resolved:
        raise ValidationError("plan must be resolved")
    if exact_deriv is None:
        exact_deriv = differentiate_coeffs_r(exact, plan.r)

    method_exact = apply(exact, plan)
    method_noisy = apply(perturbed, plan)
    propagation = method_exact - method_noisy

    if isinstance(exact_deriv, LegendreSeries):
        truncation = exact_deriv - method_exact
        total = exact_deriv - method_noisy
    else:
        truncation = lambda t: _values(exact_deriv, t) - evaluate(method_exact, t)  # noqa: E731
        total = lambda t: _values(exact_deriv, t) - evaluate(method_noisy, t)  # noqa: E731

    trunc_err = lq_norm(truncation, spec)
    prop_err = lq_norm(propagation, spec)
    total_err = lq_norm(total, spec)

    discrepancy = None
    if spec.q == 2 and isinstance(exact_deriv, LegendreSeries):
        discrepancy = max(
            abs(trunc_err - truncation.l2_norm()),
            abs(prop_err - propagation.l2_norm()),
            abs(total_err - total.l2_norm()),
        )
    return ErrorReport(
        truncation_error=trunc_err,
        propagation_error=prop_err,
        total_error=total_err,
        q=spec.q,
        r=plan.r,
        N=plan.N,
        delta=delta,
        parseval_discrepancy=discrepancy,
    )
