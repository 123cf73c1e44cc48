"""Finite-statistics emulation of the Bell test.

Counts for each setting pair are one multinomial draw from the exact joint
table mixed with uniform noise, ``v P + (1 - v) / d^2``. Randomness comes
from numpy's ``default_rng`` (PCG64) seeded with the plan seed, and the
four blocks are drawn in the fixed order (1,1), (1,2), (2,1), (2,2).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import _io
from .errors import EmptyBlock, InvalidTable, check_dimension
from .functional import bell_weights, evaluate, slk_value_from_probabilities, slope
from .measurement import (
    CANONICAL_OFFSETS,
    PAIRS,
    JointProbabilityTable,
    PhaseOffsets,
    probability_table,
)
from .state import SchmidtState

DEFAULT_BOOTSTRAP = 200


@dataclass(frozen=True)
class ExperimentPlan:
    state: SchmidtState
    offsets: PhaseOffsets = CANONICAL_OFFSETS
    shots_per_setting: int = 10**6
    visibility: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if int(self.shots_per_setting) != self.shots_per_setting or self.shots_per_setting < 1:
            raise ValueError(f"shots_per_setting must be a positive integer, got {self.shots_per_setting}")
        if not 0.0 <= self.visibility <= 1.0:
            raise ValueError(f"visibility must be in [0, 1], got {self.visibility}")

    def table(self) -> JointProbabilityTable:
        return probability_table(self.state, self.offsets).mixed(self.visibility)

    def analytic_value(self) -> float:
        """Exact Bell value of the noisy source (linear in the visibility)."""
        return self.visibility * evaluate(self.state, self.offsets).value


@dataclass(frozen=True, eq=False)
class CountTable:
    """Outcome counts, ``counts[a-1, b-1, k, l]``.

    Counts are normally integers. Real-valued "expected counts" are accepted
    too (see :meth:`expected`), which is handy for exercising the estimator
    without sampling noise.
    """

    d: int
    counts: np.ndarray
    offsets: PhaseOffsets | None = None

    def __post_init__(self):
        d = check_dimension(self.d)
        c = np.array(self.counts)
        if c.shape != (2, 2, d, d):
            raise InvalidTable(f"expected shape (2, 2, {d}, {d}), got {c.shape}")
        if np.any(c < 0):
            raise InvalidTable("counts must be non-negative")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @property
    def block_shots(self) -> np.ndarray:
        return self.counts.sum(axis=(2, 3))

    @property
    def shots(self) -> int:
        """Shots in the smallest setting block."""
        return int(round(float(self.block_shots.min())))

    def frequencies(self) -> JointProbabilityTable:
        totals = self.block_shots
        if np.any(totals <= 0):
            empty = [f"{a},{b}" for a, b in PAIRS if totals[a - 1, b - 1] <= 0]
            raise EmptyBlock(f"no counts in setting block(s) {', '.join(empty)}")
        freq = self.counts / totals[:, :, None, None]
        return JointProbabilityTable(self.d, freq, self.offsets)

    @classmethod
    def expected(cls, table: JointProbabilityTable, shots: int) -> "CountTable":
        return cls(table.d, shots * table.probs, table.offsets)

    def to_dict(self) -> dict:
        out = {
            "schema_version": _io.SCHEMA_VERSION,
            "d": self.d,
            "shots": self.shots,
            "blocks": {f"{a},{b}": self.counts[a - 1, b - 1].tolist() for a, b in PAIRS},
        }
        if self.offsets is not None:
            out["offsets"] = self.offsets.to_dict()
        return out

    def to_json(self) -> str:
        return _io.dumps_json(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "CountTable":
        d = int(data["d"])
        c = np.zeros((2, 2, d, d))
        for key, rows in data["blocks"].items():
            a, b = (int(x) for x in key.split(","))
            c[a - 1, b - 1] = np.asarray(rows)
        offsets = PhaseOffsets.from_dict(data["offsets"]) if data.get("offsets") else None
        return cls(d, _maybe_int(c), offsets)

    @classmethod
    def from_json(cls, text: str) -> "CountTable":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        rows = (
            (a, b, k, l, self.counts[a - 1, b - 1, k, l])
            for a, b in PAIRS
            for k in range(self.d)
            for l in range(self.d)
        )
        return _io.dumps_csv(("a", "b", "k", "l", "count"), rows)

    @classmethod
    def from_csv(cls, text: str, d: int | None = None, offsets: PhaseOffsets | None = None) -> "CountTable":
        """Read ``a,b,k,l,count`` rows; missing cells count as zero."""
        rows = _io.read_csv(text)
        if d is None:
            d = max(max(int(r["k"]), int(r["l"])) for r in rows) + 1
        c = np.zeros((2, 2, d, d))
        for r in rows:
            c[int(r["a"]) - 1, int(r["b"]) - 1, int(r["k"]), int(r["l"])] += float(r["count"])
        return cls(d, _maybe_int(c), offsets)


def _maybe_int(c: np.ndarray) -> np.ndarray:
    return c.astype(np.int64) if np.all(c == np.round(c)) else c


def simulate_counts(plan: ExperimentPlan) -> CountTable:
    table = plan.table()
    rng = np.random.default_rng(plan.seed)
    d = table.d
    counts = np.empty((2, 2, d, d), dtype=np.int64)
    for a, b in PAIRS:
        p = table.block(a, b).ravel()
        counts[a - 1, b - 1] = rng.multinomial(plan.shots_per_setting, p / p.sum()).reshape(d, d)
    return CountTable(d, counts, plan.offsets)


def weight_tensor(d: int) -> np.ndarray:
    """``W`` with ``I = sum W[a,b,k,l] P[a,b,k,l]`` (the functional is linear)."""
    f = bell_weights(d).f
    k = np.arange(d)[:, None]
    l = np.arange(d)[None, :]
    w = np.empty((2, 2, d, d))
    w[0, 0] = f[(k - l) % d]
    w[1, 0] = f[(l - k - 1) % d]
    w[1, 1] = f[(k - l) % d]
    w[0, 1] = f[(l - k) % d]
    return w


@dataclass(frozen=True)
class BellEstimate:
    value: float
    std_error: float
    shots: int
    method: str
    quantity: str = "slk"
    in_range: bool | None = None

    def to_dict(self) -> dict:
        out = {
            "quantity": self.quantity,
            "value": self.value,
            "std_error": self.std_error,
            "shots": self.shots,
            "method": self.method,
        }
        if self.in_range is not None:
            out["in_range"] = self.in_range
        return out


def _bootstrap_values(freq: np.ndarray, totals: np.ndarray, n_boot: int, rng) -> np.ndarray:
    d = freq.shape[-1]
    w = weight_tensor(d)
    values = np.zeros(n_boot)
    for a, b in PAIRS:
        n = int(round(float(totals[a - 1, b - 1])))
        p = freq[a - 1, b - 1].ravel()
        draws = rng.multinomial(n, p / p.sum(), size=n_boot) / n
        values += draws @ w[a - 1, b - 1].ravel()
    return values


def estimate_slk(counts: CountTable, n_boot: int = DEFAULT_BOOTSTRAP, seed: int = 0) -> BellEstimate:
    """Plug-in Bell value with a nonparametric bootstrap error bar.

    Each setting block is resampled independently from its own empirical
    frequencies. When that resampling has no spread at all (e.g. a single
    shot per block) the bootstrap is rerun from add-one-half smoothed
    frequencies so the error bar is not reported as exactly zero. With
    ``n_boot=0`` only the plug-in value is returned, with ``std_error=0``.
    """
    table = counts.frequencies()
    value = slk_value_from_probabilities(table)
    if n_boot <= 0:
        return BellEstimate(value, 0.0, counts.shots, "plug-in")
    rng = np.random.default_rng(seed)
    totals = counts.block_shots
    values = _bootstrap_values(table.probs, totals, n_boot, rng)
    std = float(np.std(values, ddof=1)) if n_boot > 1 else 0.0
    if std == 0.0 and n_boot > 1:
        smoothed = (counts.counts + 0.5) / (totals + 0.5 * counts.d**2)[:, :, None, None]
        std = float(np.std(_bootstrap_values(smoothed, totals, n_boot, rng), ddof=1))
    return BellEstimate(value, std, counts.shots, "bootstrap")


def estimate_concurrence(counts: CountTable, n_boot: int = DEFAULT_BOOTSTRAP, seed: int = 0) -> BellEstimate:
    """Concurrence read off the Bell estimate by dividing by ``2 sqrt2 (d-1)``.

    Only meaningful for a pure source measured with the canonical offsets;
    checking that is up to the caller. The value is not clamped to [0, 1];
    ``in_range`` says whether it landed there.
    """
    est = estimate_slk(counts, n_boot=n_boot, seed=seed)
    k = slope(counts.d)
    value = est.value / k
    return BellEstimate(value, est.std_error / k, est.shots, est.method, "concurrence", bool(0.0 <= value <= 1.0))
