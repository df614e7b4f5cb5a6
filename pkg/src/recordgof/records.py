"""Lower-record data: representation, extraction, generation and file I/O.

A record sample is the sequence ``(r_1, k_1), ..., (r_m, k_m)`` where
``r_i`` is the i-th new minimum and ``k_i`` counts the trials that follow it
up to and including the trial that sets the next record. Under the random
scheme the last count absorbs the remainder of the sample so that
``sum(k) == n``; under the inverse scheme sampling stops at the m-th record
and ``k_m == 1``.
"""

import csv
from dataclasses import dataclass
import io
import json
import math
from pathlib import Path

import numpy as np

from .dist import sample_n

SCHEMES = ("random", "inverse")


class RecordDataError(ValueError):
    """Invalid record data or raw sample input."""


@dataclass(frozen=True)
class RecordSample:
    """Validated lower-record data in observation order.

    Parameters
    ----------
    r : sequence of float
        Record values, strictly decreasing and positive.
    k : sequence of int
        Inter-record trial counts, each >= 1.
    scheme : {'random', 'inverse'}
        Sampling scheme the records came from.
    n : int, optional
        Underlying sample size (random) or trials consumed (inverse).
        Defaults to ``sum(k)``.
    """

    r: tuple
    k: tuple
    scheme: str = "random"
    n: int = None

    def __post_init__(self):
        r = tuple(float(v) for v in self.r)
        k = tuple(self.k)
        if not r:
            raise RecordDataError("a record sample needs at least one record")
        if len(r) != len(k):
            raise RecordDataError(f"{len(r)} record values but {len(k)} counts")
        for i, v in enumerate(r):
            if not (math.isfinite(v) and v > 0):
                raise RecordDataError(f"record value #{i + 1} must be finite and > 0, got {v!r}")
        for i in range(1, len(r)):
            if not r[i] < r[i - 1]:
                raise RecordDataError(
                    f"record values must be strictly decreasing: r[{i}]={r[i - 1]!r}, r[{i + 1}]={r[i]!r}"
                )
        ints = []
        for i, c in enumerate(k):
            if isinstance(c, bool) or int(c) != c or c < 1:
                raise RecordDataError(f"count k[{i + 1}] must be an integer >= 1, got {c!r}")
            ints.append(int(c))
        k = tuple(ints)
        if self.scheme not in SCHEMES:
            raise RecordDataError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        total = sum(k)
        n = total if self.n is None else self.n
        if int(n) != n:
            raise RecordDataError(f"n must be an integer, got {n!r}")
        n = int(n)
        if n != total:
            raise RecordDataError(f"counts sum to {total} but n = {n}")
        if self.scheme == "inverse" and k[-1] != 1:
            raise RecordDataError("inverse-scheme samples must have k_m = 1")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "n", n)

    @property
    def m(self):
        return len(self.r)

    @property
    def records(self):
        return list(zip(self.r, self.k))

    def to_dict(self):
        return {
            "scheme": self.scheme,
            "n": self.n,
            "records": [{"r": r, "k": k} for r, k in zip(self.r, self.k)],
        }

    @classmethod
    def from_dict(cls, data):
        try:
            recs = data["records"]
            return cls(
                r=[rec["r"] for rec in recs],
                k=[rec["k"] for rec in recs],
                scheme=data.get("scheme", "random"),
                n=data.get("n"),
            )
        except (KeyError, TypeError) as exc:
            raise RecordDataError(f"malformed record document: {exc}") from exc


@dataclass(frozen=True)
class OrderedRecordView:
    """Records sorted increasingly with their induced counts.

    ``k_ord[i] == k[m - 1 - i]``; the sentinels r_(0) = 0 and
    r_(m+1) = +inf are exposed through :meth:`with_sentinels`.
    """

    r_ord: tuple
    k_ord: tuple

    @property
    def m(self):
        return len(self.r_ord)

    def with_sentinels(self):
        return (0.0, *self.r_ord, math.inf)

    def to_records(self, scheme="random"):
        return RecordSample(self.r_ord[::-1], self.k_ord[::-1], scheme=scheme)


def ordered_view(rs):
    # lower records arrive in decreasing order, so sorting is a reversal
    return OrderedRecordView(rs.r[::-1], rs.k[::-1])


def extract_records(sample):
    """Extract lower records from a complete sample taken in the given order.

    A value equal to the current minimum is not a new record.

    >>> extract_records([1.0, 2.0, 3.0, 4.0]).records
    [(1.0, 4)]
    """
    values = [float(v) for v in sample]
    if not values:
        raise RecordDataError("cannot extract records from an empty sample")
    for i, v in enumerate(values):
        if not (math.isfinite(v) and v > 0):
            raise RecordDataError(f"observation #{i + 1} must be finite and > 0, got {v!r}")
    r = [values[0]]
    k = []
    last = 0
    for i in range(1, len(values)):
        if values[i] < r[-1]:
            r.append(values[i])
            k.append(i - last)
            last = i
    n = len(values)
    k.append(n - sum(k))
    return RecordSample(r, k, scheme="random", n=n)


def _record_counts(x):
    """Positions of new strict minima in ``x`` (numpy fast path for extraction)."""
    running = np.minimum.accumulate(x)
    is_rec = np.empty(len(x), dtype=bool)
    is_rec[0] = True
    is_rec[1:] = x[1:] < running[:-1]
    return np.flatnonzero(is_rec)


def generate_records(model, scheme, rng, *, size=None, m=None, max_trials=10**7, chunk=4096):
    """Simulate record data from a Weibull or exponential parent.

    Parameters
    ----------
    model : WeibullParams or ExponentialParams
    scheme : {'random', 'inverse'}
        ``random`` draws ``size`` observations and extracts their records;
        ``inverse`` draws until the ``m``-th record appears.
    rng : numpy.random.Generator
    """
    if scheme == "random":
        if size is None or int(size) != size or size < 1:
            raise ValueError("random scheme needs an integer size >= 1")
        x = sample_n(model, int(size), rng)
        pos = _record_counts(x)
        k = np.diff(np.append(pos, len(x)))
        return RecordSample(x[pos], k, scheme="random", n=int(size))
    if scheme == "inverse":
        if m is None or int(m) != m or m < 1:
            raise ValueError("inverse scheme needs an integer m >= 1")
        m = int(m)
        r = []
        positions = []
        consumed = 0
        current = math.inf
        while len(r) < m:
            if consumed >= max_trials:
                raise RuntimeError(f"inverse sampling exceeded {max_trials} trials with {len(r)} of {m} records")
            x = sample_n(model, chunk, rng)
            for j in np.flatnonzero(x < np.minimum.accumulate(np.append(current, x))[:-1]):
                r.append(float(x[j]))
                positions.append(consumed + int(j))
                current = r[-1]
                if len(r) == m:
                    break
            consumed += chunk
        k = [b - a for a, b in zip(positions, positions[1:])] + [1]
        return RecordSample(r, k, scheme="inverse", n=positions[-1] + 1)
    raise ValueError(f"unknown scheme {scheme!r}")


def read_complete_sample(path):
    """One positive number per line, or the first column of a CSV file.

    Blank lines and a non-numeric header on the first line are skipped.
    Errors cite 1-based line numbers.
    """
    text = Path(path).read_text()
    values = []
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or not row[0].strip():
            continue
        cell = row[0].strip()
        try:
            v = float(cell)
        except ValueError:
            if lineno == 1 and not values:
                continue
            raise RecordDataError(f"line {lineno}: cannot parse {cell!r} as a number") from None
        if not (math.isfinite(v) and v > 0):
            raise RecordDataError(f"line {lineno}: value must be finite and > 0, got {cell!r}")
        values.append(v)
    if not values:
        raise RecordDataError(f"{path}: no observations found")
    return values


def load_records(path):
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise RecordDataError(f"{path}: invalid JSON ({exc})") from exc
    return RecordSample.from_dict(data)


def dump_records(rs, path):
    Path(path).write_text(json.dumps(rs.to_dict(), indent=2) + "\n")
