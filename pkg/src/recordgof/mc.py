"""Monte-Carlo null distributions and critical-value tables.

Under the fitted-Weibull null the three statistics are pivotal, so one
simulation from W(1, 1) per sample size serves every (alpha, sigma).
Each replicate owns its random stream, derived from ``(seed, n, j)``;
results therefore do not depend on how replicates are split across workers,
and a table can be extended to larger M without recomputing earlier draws.
"""

from concurrent.futures import ProcessPoolExecutor
import csv
from dataclasses import dataclass, field
import io
from importlib import resources
import json
import logging
import math
from pathlib import Path

import numpy as np

from .dist import WeibullParams, sample_n
from .estimate import SolverOptions, SolverRangeError, _sigma_given_alpha, _solve_alpha
from .gof import STATISTICS, GofError, _closed_forms

logger = logging.getLogger(__name__)

ENGINE_VERSION = "recordgof-mc/1"
PUBLISHED_GAMMAS = (0.01, 0.025, 0.05, 0.1, 0.5, 0.9, 0.95, 0.975, 0.99)
PUBLISHED_NS = (5, 10, 20, 50)
MIN_RECORDS = 2


class TableLookupError(KeyError):
    """Requested (statistic, n, level) cell is not in the table."""

    def __str__(self):
        return self.args[0]


@dataclass
class NullSampleSet:
    """Per-replicate (D, W^2, DS) triples for one sample size.

    ``discarded`` counts raw samples redrawn because they held fewer than two
    records; ``solver_failures`` counts samples redrawn on a fresh stream
    after a fitting or evaluation failure.
    """

    n: int
    draws: np.ndarray
    discarded: int = 0
    solver_failures: int = 0

    @property
    def M(self):
        return len(self.draws)

    def column(self, statistic):
        return self.draws[:, STATISTICS.index(statistic)]


def replicate_stream(seed, n, j, attempt=0):
    """Generator for replicate ``j`` at sample size ``n``."""
    key = (n, j) if attempt == 0 else (n, j, attempt)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def _one_replicate(n, seed, j, model, opts):
    discarded = 0
    failures = 0
    attempt = 0
    rng = replicate_stream(seed, n, j)
    while True:
        x = sample_n(model, n, rng)
        running = np.minimum.accumulate(x)
        pos = np.flatnonzero(np.concatenate(([True], x[1:] < running[:-1])))
        if len(pos) < MIN_RECORDS:
            discarded += 1
            continue
        k = np.diff(np.append(pos, n)).tolist()
        r = x[pos].tolist()
        try:
            logs = [math.log(v) for v in r]
            alpha, _, _, _ = _solve_alpha(logs, k, opts)
            sigma = _sigma_given_alpha(logs, k, alpha, len(r))
            triple = _closed_forms(r[::-1], k[::-1], alpha, sigma, n)
        except (SolverRangeError, GofError, OverflowError, ValueError, ZeroDivisionError) as exc:
            failures += 1
            attempt += 1
            logger.debug("replicate n=%d j=%d failed (%s); redrawing on stream %d", n, j, exc, attempt)
            rng = replicate_stream(seed, n, j, attempt)
            continue
        return triple, discarded, failures


def _simulate_range(n, seed, start, stop, model, opts):
    draws = np.empty((stop - start, 3))
    discarded = failures = 0
    for row, j in enumerate(range(start, stop)):
        draws[row], d, f = _one_replicate(n, seed, j, model, opts)
        discarded += d
        failures += f
    return draws, discarded, failures


def _chunks(M, pieces):
    bounds = np.linspace(0, M, pieces + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def simulate_null_statistics(n, M, seed, *, model=None, workers=1, start=0, opts=None, executor=None):
    """Simulate M null replicates of (D, W^2, DS) at sample size n.

    Each replicate draws n values from ``model`` (default W(1, 1)), redraws
    until at least two records appear, fits the Weibull MLE and evaluates the
    three statistics against the fitted cdf with multiplier n.
    Replicates ``start .. start + M - 1`` are produced.
    """
    if int(n) != n or n < 2:
        raise ValueError(f"n must be an integer >= 2, got {n!r}")
    if int(M) != M or M < 1:
        raise ValueError(f"M must be an integer >= 1, got {M!r}")
    n, M = int(n), int(M)
    model = model or WeibullParams(1.0, 1.0)
    opts = opts or SolverOptions()
    if executor is None and workers <= 1:
        draws, discarded, failures = _simulate_range(n, seed, start, start + M, model, opts)
        return NullSampleSet(n, draws, discarded, failures)
    own = executor is None
    pool = executor or ProcessPoolExecutor(max_workers=workers)
    try:
        # several chunks per worker so uneven replicate costs still balance
        parts = _chunks(M, max(1, workers) * 4)
        futures = [
            pool.submit(_simulate_range, n, seed, start + a, start + b, model, opts) for a, b in parts
        ]
        results = [f.result() for f in futures]
    finally:
        if own:
            pool.shutdown()
    draws = np.concatenate([res[0] for res in results])
    return NullSampleSet(n, draws, sum(r[1] for r in results), sum(r[2] for r in results))


def empirical_quantile(values, gamma):
    """Nearest-rank quantile: the ceil(gamma * M)-th smallest value (1-based).

    >>> empirical_quantile([4, 1, 3, 2], 0.5)
    2.0
    """
    v = np.sort(np.asarray(values, dtype=float).ravel())
    if v.size == 0:
        raise ValueError("empirical_quantile of an empty set")
    if not 0 < gamma < 1:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma!r}")
    # guard against gamma * M landing a hair above an integer
    rank = math.ceil(round(gamma * v.size, 9))
    return float(v[min(max(rank, 1), v.size) - 1])


def _level_key(level):
    return round(float(level), 10)


@dataclass
class CriticalTable:
    """Quantiles of the null statistics keyed by (n, statistic, level)."""

    rows: dict
    meta: dict = field(default_factory=dict)

    def ns(self, statistic=None):
        return sorted({n for n, s, _ in self.rows if statistic is None or s == statistic})

    def levels(self, statistic=None, n=None):
        return sorted(
            {g for m, s, g in self.rows if (statistic is None or s == statistic) and (n is None or m == n)}
        )

    def lookup(self, statistic, n, level, interpolate=False):
        """Tabulated quantile; with ``interpolate`` a missing n is linearly interpolated."""
        g = _level_key(level)
        key = (int(n), statistic, g)
        if key in self.rows:
            return self.rows[key]
        if not interpolate:
            raise TableLookupError(f"no table cell for statistic={statistic} n={n} level={g}")
        ns = [m for m in self.ns(statistic) if (m, statistic, g) in self.rows]
        lower = [m for m in ns if m < n]
        upper = [m for m in ns if m > n]
        if not lower or not upper:
            raise TableLookupError(
                f"cannot interpolate statistic={statistic} n={n} level={g}: tabulated n = {ns}"
            )
        a, b = max(lower), min(upper)
        va, vb = self.rows[(a, statistic, g)], self.rows[(b, statistic, g)]
        return va + (vb - va) * (n - a) / (b - a)

    def to_dict(self):
        order = {s: i for i, s in enumerate(STATISTICS)}
        keys = sorted(self.rows, key=lambda t: (t[0], order.get(t[1], 99), t[2]))
        return {
            "meta": self.meta,
            "rows": [{"n": n, "statistic": s, "gamma": g, "value": self.rows[(n, s, g)]} for n, s, g in keys],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data):
        rows = {}
        for row in data["rows"]:
            rows[(int(row["n"]), row["statistic"], _level_key(row["gamma"]))] = float(row["value"])
        return cls(rows, dict(data.get("meta", {})))

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))

    def save(self, path):
        Path(path).write_text(self.to_json())

    def to_csv(self):
        """One row per (n, statistic), one column per quantile level."""
        levels = self.levels()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "statistic", *levels])
        for n in self.ns():
            for s in STATISTICS:
                if not any((n, s, g) in self.rows for g in levels):
                    continue
                w.writerow([n, s, *(repr(self.rows[(n, s, g)]) if (n, s, g) in self.rows else "" for g in levels)])
        return buf.getvalue()


def build_table(n_list, gamma_list, M, seed, workers=1, *, model=None, progress=None, timestamp=None):
    """Simulate and tabulate null quantiles for every (n, statistic, level).

    The output is a pure function of (n_list, gamma_list, M, seed, model);
    ``workers`` only changes wall-clock time. ``timestamp`` is recorded in
    the metadata when given and is otherwise omitted so repeated runs are
    byte-identical.
    """
    n_list = [int(n) for n in n_list]
    gamma_list = [float(g) for g in gamma_list]
    if not n_list or not gamma_list:
        raise ValueError("n_list and gamma_list must be non-empty")
    for g in gamma_list:
        if not 0 < g < 1:
            raise ValueError(f"quantile levels must lie in (0, 1), got {g!r}")
    model = model or WeibullParams(1.0, 1.0)
    rows = {}
    diagnostics = {}
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for n in n_list:
            try:
                sims = simulate_null_statistics(n, M, seed, model=model, workers=workers, executor=pool)
            except Exception as exc:
                raise RuntimeError(f"simulation failed for n={n}: {exc}") from exc
            diagnostics[str(n)] = {"discarded": sims.discarded, "solver_failures": sims.solver_failures}
            for s in STATISTICS:
                col = sims.column(s)
                for g in gamma_list:
                    rows[(n, s, _level_key(g))] = empirical_quantile(col, g)
            if progress:
                progress(n, sims)
    finally:
        if pool is not None:
            pool.shutdown()
    meta = {
        "M": int(M),
        "seed": seed,
        "min_records": MIN_RECORDS,
        "engine_version": ENGINE_VERSION,
        "quantile": "nearest-rank",
        "model": {"alpha": model.alpha, "sigma": model.sigma},
        "diagnostics": diagnostics,
    }
    if timestamp is not None:
        meta["generated_at"] = timestamp
    return CriticalTable(rows, meta)


def published_table():
    """The percentile table printed with the method (M = 100,000), as a CriticalTable."""
    text = resources.files(__package__).joinpath("data/published_table.json").read_text()
    return CriticalTable.from_dict(json.loads(text))
