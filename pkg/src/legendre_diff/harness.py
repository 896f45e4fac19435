"""Convergence-rate experiments for the truncated Legendre differentiator.

A run sweeps the noise level ``delta``, picks ``N`` a priori, perturbs the
coefficients of a test function, differentiates, and records the error split
in every requested ``L_q`` metric. :func:`fit_rate` then regresses
``log10(error)`` on ``log10(delta)`` and compares with the predicted power.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import NumericalError, ValidationError
from .metrics import ErrorReport, MetricSpec, decompose, q_label
from .noise import NoiseSpec, parse_p, perturb
from .series import LegendreSeries, WienerParams, differentiate_coeffs_r, edge_function
from .truncation import DerivativePlan, choose_N, coefficient_count

DEFAULT_DELTAS = tuple(10.0**-e for e in range(2, 9))
TAIL_FACTOR = 4


def _inv(x: float) -> float:
    return 0.0 if math.isinf(x) else 1.0 / x


def theoretical_exponent(mu: float, s: float, p, q, r: int) -> float:
    """Predicted power of ``delta`` in the ``L_q`` error bound.

    ``(mu - 2r + 1/s + 2/q - 3/2) / (mu - 1/p + 1/s)``; ``q = inf`` gives the
    uniform-metric rate and ``q = 2`` the mean-square one.

    Raises
    ------
    ValidationError
        If ``mu <= 2r - 1/s - 2/q + 3/2`` (outside the theorem hypothesis) or
        a denominator is not positive.
    """
    p, q = parse_p(p), parse_p(q)
    if q < 2:
        raise ValidationError("q must be >= 2")
    threshold = 2 * r - 1.0 / s - 2 * _inv(q) + 1.5
    if not mu > threshold:
        raise ValidationError(
            f"outside theorem hypothesis: mu = {mu} must exceed {threshold:g} for q = {q_label(q)}"
        )
    denom = mu - _inv(p) + 1.0 / s
    if denom <= 0:
        raise ValidationError("mu - 1/p + 1/s must be positive")
    return (mu - 2 * r + 1.0 / s + 2 * _inv(q) - 1.5) / denom


def lemma_exponents(mu: float, s: float, p, r: int) -> dict[tuple[str, str], float]:
    """Predicted powers of ``N`` for each error component and metric.

    Keys are ``(component, metric)`` with component in
    ``{"truncation", "propagation"}`` and metric in ``{"C", "L2"}``.
    """
    p = parse_p(p)
    return {
        ("propagation", "C"): 2 * r - _inv(p) + 1.5,
        ("propagation", "L2"): 2 * r - _inv(p) + 0.5,
        ("truncation", "C"): -mu + 2 * r - 1.0 / s + 1.5,
        ("truncation", "L2"): -mu + 2 * r - 1.0 / s + 0.5,
    }


@dataclass(frozen=True)
class NoiseConfig:
    """How the harness perturbs coefficients.

    ``indices`` (adversarial mode) is ``"top"`` for ``{N}``, ``"all"`` for
    ``0..N``, or an explicit list. ``support_max`` (random mode) defaults
    to ``N``. Mode ``"none"`` switches noise off.
    """

    mode: str = "adversarial"
    seed: int = 0
    indices: str | tuple[int, ...] = "top"
    support_max: int | None = None

    def __post_init__(self):
        if self.mode not in ("adversarial", "random", "none"):
            raise ValidationError(f"unknown noise mode {self.mode!r}")
        if isinstance(self.indices, str):
            if self.indices not in ("top", "all"):
                raise ValidationError('indices must be "top", "all" or a list of integers')
        else:
            object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
            if not self.indices:
                raise ValidationError("adversarial index list must be non-empty")

    def spec(self, p: float, delta: float, N: int) -> NoiseSpec | None:
        if self.mode == "none":
            return None
        if self.mode == "random":
            support = N if self.support_max is None else self.support_max
            return NoiseSpec(p, delta, "random", seed=self.seed, support_max=support)
        if self.indices == "top":
            idx: tuple[int, ...] = (N,)
        elif self.indices == "all":
            idx = tuple(range(N + 1))
        else:
            idx = self.indices
        return NoiseSpec(p, delta, "adversarial", indices=idx)


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of a rate experiment.

    The test function is the unit-norm edge function of ``W_s^mu`` with
    degree ``K`` unless ``truth`` supplies explicit coefficients. ``K``
    defaults to ``4 * N_max`` and may not be smaller.
    """

    wiener: WienerParams
    eps: float = 0.01
    K: int | None = None
    r: int = 1
    p: float = 2.0
    q_list: tuple[float, ...] = (2.0, 4.0, math.inf)
    delta_list: tuple[float, ...] = DEFAULT_DELTAS
    C_N: float = 1.0
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    truth: tuple[float, ...] | None = None
    grid_size: int = 4097
    output: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "p", parse_p(self.p))
        qs = tuple(parse_p(q) for q in self.q_list)
        if not qs:
            raise ValidationError("q_list must not be empty")
        if any(q < 2 for q in qs):
            raise ValidationError("every q must be >= 2")
        object.__setattr__(self, "q_list", qs)
        deltas = tuple(float(d) for d in self.delta_list)
        if not deltas:
            raise ValidationError("delta_list must not be empty")
        if any(not (0.0 < d < 1.0) for d in deltas):
            raise ValidationError("every delta must lie in (0, 1)")
        if any(b >= a for a, b in zip(deltas, deltas[1:])):
            raise ValidationError("delta_list must be strictly decreasing")
        object.__setattr__(self, "delta_list", deltas)
        if isinstance(self.r, bool) or int(self.r) != self.r or self.r < 1:
            raise ValidationError("r must be an integer >= 1")
        if not self.C_N > 0:
            raise ValidationError("C_N must be > 0")
        for q in qs:
            theoretical_exponent(self.wiener.mu, self.wiener.s, self.p, q, self.r)
        if self.truth is not None:
            object.__setattr__(self, "truth", tuple(float(c) for c in self.truth))
            return
        if not self.eps > 0:
            raise ValidationError("eps must be > 0")
        needed = TAIL_FACTOR * self.max_N()
        if self.K is None:
            object.__setattr__(self, "K", needed)
        elif self.K < needed:
            raise ValidationError(
                f"K = {self.K} is below {TAIL_FACTOR} x largest N ({needed}); "
                "the truncated tail would pollute the truncation error"
            )

    def resolve_N(self, delta: float) -> int:
        N = choose_N(delta, self.wiener.mu, self.p, self.wiener.s, self.C_N)
        return max(N, self.r + 1)

    def max_N(self) -> int:
        return max(self.resolve_N(d) for d in self.delta_list)

    def truth_series(self) -> LegendreSeries:
        if self.truth is not None:
            return LegendreSeries(self.truth)
        return edge_function(self.wiener, self.eps, self.K)

    def theoretical(self, q) -> float:
        return theoretical_exponent(self.wiener.mu, self.wiener.s, self.p, q, self.r)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        try:
            wiener = data.pop("wiener", None)
            if wiener is None:
                wiener = {"s": data.pop("s"), "mu": data.pop("mu")}
            noise = data.pop("noise", {})
            if isinstance(noise, str):
                noise = {"mode": noise}
            noise = dict(noise)
            if "indices" in noise and not isinstance(noise["indices"], str):
                noise["indices"] = tuple(noise["indices"])
            for key in ("q_list", "delta_list", "truth"):
                if data.get(key) is not None:
                    data[key] = tuple(data[key])
            return cls(wiener=WienerParams(**wiener), noise=NoiseConfig(**noise), **data)
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"bad experiment config: {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class ExperimentRow:
    delta: float
    N: int
    count: int
    reports: dict[str, ErrorReport]


@dataclass
class ResultsTable:
    """Rows of a run, ordered by decreasing ``delta``."""

    q_list: tuple[float, ...]
    rows: list[ExperimentRow]
    config: ExperimentConfig | None = None

    def column(self, q, component: str = "total") -> np.ndarray:
        label = q_label(parse_p(q))
        return np.array([getattr(row.reports[label], f"{component}_error") for row in self.rows])

    @property
    def deltas(self) -> np.ndarray:
        return np.array([row.delta for row in self.rows])

    @property
    def Ns(self) -> np.ndarray:
        return np.array([row.N for row in self.rows])

    def header(self) -> list[str]:
        cols = ["delta", "N", "count"]
        for q in self.q_list:
            label = q_label(q)
            cols += [f"truncation_q{label}", f"propagation_q{label}", f"total_q{label}"]
        return cols

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.header())
        for row in self.rows:
            line = [_fmt(row.delta), str(row.N), str(row.count)]
            for q in self.q_list:
                rep = row.reports[q_label(q)]
                line += [_fmt(rep.truncation_error), _fmt(rep.propagation_error), _fmt(rep.total_error)]
            writer.writerow(line)
        return buf.getvalue()

    def write_csv(self, path) -> None:
        write_atomic(path, self.to_csv())


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_atomic(path, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file so readers never see a partial file."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_csv(path) -> ResultsTable:
    """Load a table written by :meth:`ResultsTable.write_csv`."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path}: empty results file") from None
        if header[:3] != ["delta", "N", "count"] or (len(header) - 3) % 3:
            raise ValidationError(f"{path}: unexpected CSV header {header}")
        labels = [h[len("total_q"):] for h in header[3:] if h.startswith("total_q")]
        q_list = tuple(parse_p(lbl) for lbl in labels)
        rows = []
        for line in reader:
            if not line:
                continue
            delta, N, count = float(line[0]), int(line[1]), int(line[2])
            reports = {}
            for j, q in enumerate(q_list):
                t, pr, tot = (float(v) for v in line[3 + 3 * j : 6 + 3 * j])
                reports[q_label(q)] = ErrorReport(t, pr, tot, q=q, r=0, N=N, delta=delta)
            rows.append(ExperimentRow(delta, N, count, reports))
    return ResultsTable(q_list, rows)


def run_experiment(config: ExperimentConfig) -> ResultsTable:
    """Run the sweep described by ``config``.

    Every row uses its own random stream keyed by ``(seed, row index)``, so
    the table is a deterministic function of the config. If ``config.output``
    is set the CSV is written there, and only after every row succeeded.
    """
    truth = config.truth_series()
    exact_deriv = differentiate_coeffs_r(truth, config.r) if len(truth) > config.r else LegendreSeries([0.0])
    specs = [MetricSpec(q=q, grid_size=config.grid_size) for q in config.q_list]
    rows = []
    for i, delta in enumerate(config.delta_list):
        try:
            N = config.resolve_N(delta)
            plan = DerivativePlan(config.r, N=N)
            noise = config.noise.spec(config.p, delta, N)
            if noise is None:
                noisy = truth
            else:
                noisy, _ = perturb(truth, noise, stream=(i,))
            exact = LegendreSeries(truth.padded(len(noisy)))
            reports = {
                spec.label: decompose(exact, noisy, plan, exact_deriv, spec, delta=delta)
                for spec in specs
            }
        except (ValidationError, NumericalError) as exc:
            raise type(exc)(f"delta = {delta:g}: {exc}") from exc
        rows.append(ExperimentRow(delta, N, coefficient_count(plan), reports))
    table = ResultsTable(config.q_list, rows, config)
    if config.output:
        table.write_csv(config.output)
    return table


@dataclass(frozen=True)
class RateFit:
    """Least-squares line through ``(log10 x, log10 error)``.

    ``variable`` is ``"delta"`` for rate fits and ``"N"`` for component
    scaling; ``theoretical`` is the predicted slope, if known.
    """

    slope: float
    intercept: float
    r_squared: float
    theoretical: float | None
    q: float
    metric: str
    component: str = "total"
    variable: str = "delta"
    n_points: int = 0

    def meets(self, tolerance: float) -> bool:
        """One-sided check ``slope >= theoretical - tolerance``."""
        if self.theoretical is None:
            raise ValidationError("no theoretical exponent attached to this fit")
        return self.slope >= self.theoretical - tolerance

    def faster_than_predicted(self, tolerance: float) -> bool:
        return self.theoretical is not None and self.slope > self.theoretical + tolerance

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "theoretical": self.theoretical,
            "q": q_label(self.q),
            "metric": self.metric,
            "component": self.component,
            "variable": self.variable,
            "n_points": self.n_points,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def metric_name(q: float) -> str:
    return "C" if math.isinf(q) else f"L{q_label(q)}"


def loglog_fit(x: Sequence[float], y: Sequence[float]) -> tuple[float, float, float]:
    """Slope, intercept and R^2 of ``log10 y`` regressed on ``log10 x``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 3:
        raise ValidationError("need at least 3 points to fit a rate")
    if np.any(y <= 0) or np.any(x <= 0):
        raise ValidationError("noiseless table, nothing to fit (non-positive errors)")
    lx, ly = np.log10(x), np.log10(y)
    design = np.column_stack([lx, np.ones_like(lx)])
    (slope, intercept), *_ = np.linalg.lstsq(design, ly, rcond=None)
    resid = ly - (slope * lx + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    if ss_tot == 0.0:
        r2 = 1.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return float(slope), float(intercept), r2


def fit_rate(table: ResultsTable, q, config: ExperimentConfig | None = None) -> RateFit:
    """Fit ``total_error ~ delta^slope`` for metric ``q``."""
    q = parse_p(q)
    config = config or table.config
    if q_label(q) not in {q_label(x) for x in table.q_list}:
        raise ValidationError(f"table has no column for q = {q_label(q)}")
    slope, intercept, r2 = loglog_fit(table.deltas, table.column(q))
    theory = config.theoretical(q) if config is not None else None
    return RateFit(slope, intercept, r2, theory, q, metric_name(q), n_points=len(table.rows))


def count_scaling(table: ResultsTable) -> tuple[float, float]:
    """Slope and R^2 of ``log N`` against ``log(1/delta)``."""
    slope, _, r2 = loglog_fit(1.0 / table.deltas, table.Ns)
    return slope, r2


@dataclass(frozen=True)
class ScalingFits:
    """Fitted powers of ``N`` for both error components in the C and L2 metrics."""

    fits: dict[tuple[str, str], RateFit]
    N_list: tuple[int, ...]
    delta: float

    def __getitem__(self, key: tuple[str, str]) -> RateFit:
        return self.fits[key]

    def to_dict(self) -> dict:
        return {
            "delta": self.delta,
            "N_list": list(self.N_list),
            "fits": [fit.to_dict() for fit in self.fits.values()],
        }


def component_scaling(
    config: ExperimentConfig, fixed_delta: float, N_list: Sequence[int]
) -> ScalingFits:
    """Sweep ``N`` at fixed ``delta`` and fit each error component against ``N``.

    The test function must carry at least ``4 * max(N_list)`` coefficients;
    with the edge-function truth and no explicit ``K`` that many are used.
    """
    N_list = tuple(int(n) for n in N_list)
    if len(N_list) < 3 or any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise ValidationError("N_list must be increasing with at least 3 entries")
    if N_list[0] < config.r + 1:
        raise ValidationError("every N must be >= r + 1")
    if config.truth is not None:
        truth = LegendreSeries(config.truth)
    else:
        K = max(config.K or 0, TAIL_FACTOR * N_list[-1])
        truth = edge_function(config.wiener, config.eps, K)
    exact_deriv = differentiate_coeffs_r(truth, config.r)
    metrics = {"C": MetricSpec(q=math.inf, grid_size=config.grid_size), "L2": MetricSpec(q=2)}
    errs = {(c, m): [] for c in ("truncation", "propagation") for m in metrics}
    for i, N in enumerate(N_list):
        plan = DerivativePlan(config.r, N=N)
        noise = config.noise.spec(config.p, fixed_delta, N)
        if noise is None:
            raise ValidationError("component scaling needs a noise model")
        noisy, _ = perturb(truth, noise, stream=(i,))
        exact = LegendreSeries(truth.padded(len(noisy)))
        for m, spec in metrics.items():
            rep = decompose(exact, noisy, plan, exact_deriv, spec, delta=fixed_delta)
            errs[("truncation", m)].append(rep.truncation_error)
            errs[("propagation", m)].append(rep.propagation_error)
    predicted = lemma_exponents(config.wiener.mu, config.wiener.s, config.p, config.r)
    fits = {}
    for (component, m), values in errs.items():
        slope, intercept, r2 = loglog_fit(N_list, values)
        fits[(component, m)] = RateFit(
            slope,
            intercept,
            r2,
            predicted[(component, m)],
            metrics[m].q,
            m,
            component=component,
            variable="N",
            n_points=len(N_list),
        )
    return ScalingFits(fits, N_list, fixed_delta)
