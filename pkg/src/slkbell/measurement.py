"""Fourier-type measurement bases and exact joint outcome statistics.

Setting ``a`` of Alice has eigenvectors

    |k>_{A,a} = d^{-1/2} sum_j w^{(k + delta_a) j} |j>,

and setting ``b`` of Bob has

    |l>_{B,b} = d^{-1/2} sum_j w^{(-l + epsilon_b) j} |j>,

with ``w = exp(2 pi i / d)``. Offsets are real numbers in units of one
``w`` step; the canonical choice is ``(0, 1/2, 1/4, -1/4)``.

Outcome values used for correlations: Alice's label ``k`` carries ``w^{-k}``
and Bob's label ``l`` carries ``w^{l}``, so that

    C^n_{a,b} = sum_{k,l} w^{n (l - k)} P_{a,b}(k, l).

This is the assignment under which the correlation form and the
difference-probability form of the Bell functional coincide for ``d > 2``
(checked in the test suite); at ``d = 2`` both signs agree.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import _io
from .errors import InvalidTable, LabelOutOfRange, check_dimension
from .state import SchmidtState

SETTINGS = (1, 2)
PAIRS = ((1, 1), (1, 2), (2, 1), (2, 2))

NEGATIVE_CLAMP = 1e-14
SUM_TOL = 1e-12

Direction = Literal["A-B", "B-A"]


def omega(d: int) -> complex:
    return complex(np.exp(2j * np.pi / d))


def omega_power(d: int, x) -> np.ndarray | complex:
    """``w^x`` for real (possibly non-integer) exponents ``x``."""
    return np.exp(2j * np.pi * np.asarray(x, dtype=float) / d)


@dataclass(frozen=True)
class PhaseOffsets:
    delta1: float
    delta2: float
    epsilon1: float
    epsilon2: float

    def __post_init__(self):
        for name in ("delta1", "delta2", "epsilon1", "epsilon2"):
            v = float(getattr(self, name))
            if not np.isfinite(v):
                raise ValueError(f"offset {name} must be finite, got {v}")
            object.__setattr__(self, name, v)

    def delta(self, a: int) -> float:
        return self.delta1 if a == 1 else self.delta2

    def epsilon(self, b: int) -> float:
        return self.epsilon1 if b == 1 else self.epsilon2

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.delta1, self.delta2, self.epsilon1, self.epsilon2)

    def reduced(self) -> "PhaseOffsets":
        """Offsets taken modulo 1 (same measurement bases, labels may shift)."""
        return PhaseOffsets(*(float(np.mod(v, 1.0)) for v in self.as_tuple()))

    def same_bases(self, other: "PhaseOffsets", tol: float = 1e-12) -> bool:
        diff = np.subtract(self.as_tuple(), other.as_tuple())
        return bool(np.all(np.abs(diff - np.round(diff)) <= tol))

    def shifted(self, n: float) -> "PhaseOffsets":
        return PhaseOffsets(*(v + n for v in self.as_tuple()))

    def to_dict(self) -> dict:
        return {
            "delta1": self.delta1,
            "delta2": self.delta2,
            "epsilon1": self.epsilon1,
            "epsilon2": self.epsilon2,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PhaseOffsets":
        return cls(data["delta1"], data["delta2"], data["epsilon1"], data["epsilon2"])


CANONICAL_OFFSETS = PhaseOffsets(0.0, 0.5, 0.25, -0.25)


def _check_label(label: int, d: int) -> int:
    if int(label) != label or not 0 <= label < d:
        raise LabelOutOfRange(f"label {label!r} outside 0..{d - 1}")
    return int(label)


def _check_setting(x: int) -> int:
    if x not in SETTINGS:
        raise ValueError(f"setting must be 1 or 2, got {x!r}")
    return x


def eigenvector(
    side: Literal["A", "B"],
    setting: int,
    label: int,
    d: int,
    offsets: PhaseOffsets = CANONICAL_OFFSETS,
) -> np.ndarray:
    """Amplitudes of eigenvector ``label`` of the given observable."""
    d = check_dimension(d)
    label = _check_label(label, d)
    _check_setting(setting)
    j = np.arange(d)
    if side == "A":
        exponent = (label + offsets.delta(setting)) * j
    elif side == "B":
        exponent = (-label + offsets.epsilon(setting)) * j
    else:
        raise ValueError(f"side must be 'A' or 'B', got {side!r}")
    return omega_power(d, exponent) / np.sqrt(d)


def basis(side: Literal["A", "B"], setting: int, d: int, offsets: PhaseOffsets) -> np.ndarray:
    """Rows are the d eigenvectors of one observable."""
    return np.array([eigenvector(side, setting, x, d, offsets) for x in range(d)])


def _clamp(p):
    if np.any(p < -NEGATIVE_CLAMP):
        raise InvalidTable(f"negative probability {np.min(p)!r}")
    return np.where(p < 0, 0.0, p)


def joint_probability(
    state: SchmidtState,
    a: int,
    b: int,
    k: int,
    l: int,
    offsets: PhaseOffsets = CANONICAL_OFFSETS,
) -> float:
    """``|<k|_{A,a} <l|_{B,b} |psi>|^2`` from one amplitude sum."""
    d = state.d
    u = eigenvector("A", a, k, d, offsets)
    v = eigenvector("B", b, l, d, offsets)
    amp = np.sum(state.coeffs * np.conj(u) * np.conj(v))
    return float(_clamp(np.array(abs(amp) ** 2)))


@dataclass(frozen=True, eq=False)
class JointProbabilityTable:
    """``P_{a,b}(k, l)`` for all four setting pairs.

    ``probs`` has shape ``(2, 2, d, d)`` indexed ``[a-1, b-1, k, l]``.
    ``offsets`` records the settings that produced the table, when known.
    """

    d: int
    probs: np.ndarray
    offsets: PhaseOffsets | None = None

    def __post_init__(self):
        d = check_dimension(self.d)
        p = np.array(self.probs, dtype=float)
        if p.shape != (2, 2, d, d):
            raise InvalidTable(f"expected shape (2, 2, {d}, {d}), got {p.shape}")
        p = _clamp(p)
        sums = p.sum(axis=(2, 3))
        if np.any(np.abs(sums - 1.0) > SUM_TOL):
            raise InvalidTable(f"blocks do not sum to 1: {sums.tolist()}")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    def block(self, a: int, b: int) -> np.ndarray:
        return self.probs[_check_setting(a) - 1, _check_setting(b) - 1]

    def mixed(self, visibility: float) -> "JointProbabilityTable":
        """``v P + (1 - v) / d^2``: isotropic admixture of uniform noise."""
        if not 0.0 <= visibility <= 1.0:
            raise ValueError(f"visibility must be in [0, 1], got {visibility}")
        noisy = visibility * self.probs + (1.0 - visibility) / self.d**2
        return JointProbabilityTable(self.d, noisy, self.offsets)

    def to_dict(self) -> dict:
        out = {
            "schema_version": _io.SCHEMA_VERSION,
            "d": self.d,
            "blocks": {f"{a},{b}": self.block(a, b).tolist() for a, b in PAIRS},
        }
        if self.offsets is not None:
            out["offsets"] = self.offsets.to_dict()
        return out

    def to_json(self) -> str:
        return _io.dumps_json(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "JointProbabilityTable":
        d = int(data["d"])
        p = np.zeros((2, 2, d, d))
        for key, rows in data["blocks"].items():
            a, b = (int(x) for x in key.split(","))
            p[a - 1, b - 1] = np.asarray(rows, dtype=float)
        offsets = PhaseOffsets.from_dict(data["offsets"]) if "offsets" in data else None
        return cls(d, p, offsets)

    @classmethod
    def from_json(cls, text: str) -> "JointProbabilityTable":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        rows = (
            (a, b, k, l, self.probs[a - 1, b - 1, k, l])
            for a, b in PAIRS
            for k in range(self.d)
            for l in range(self.d)
        )
        return _io.dumps_csv(("a", "b", "k", "l", "p"), rows)

    @classmethod
    def from_csv(cls, text: str) -> "JointProbabilityTable":
        rows = _io.read_csv(text)
        d = max(max(int(r["k"]), int(r["l"])) for r in rows) + 1
        p = np.zeros((2, 2, d, d))
        for r in rows:
            p[int(r["a"]) - 1, int(r["b"]) - 1, int(r["k"]), int(r["l"])] = float(r["p"])
        return cls(d, p)


def probability_table(
    state: SchmidtState, offsets: PhaseOffsets = CANONICAL_OFFSETS
) -> JointProbabilityTable:
    """All ``4 d^2`` joint probabilities from basis-vector amplitudes.

    Same quantity as :func:`joint_probability`, evaluated block-wise as a
    matrix product.
    """
    d = state.d
    c = state.coeffs
    p = np.empty((2, 2, d, d))
    for a in SETTINGS:
        ua = np.conj(basis("A", a, d, offsets)) * c
        for b in SETTINGS:
            vb = np.conj(basis("B", b, d, offsets))
            amp = ua @ vb.T
            p[a - 1, b - 1] = amp.real**2 + amp.imag**2
    return JointProbabilityTable(d, p, offsets)


def difference_distribution(
    table: JointProbabilityTable, a: int, b: int, direction: Direction = "A-B"
) -> np.ndarray:
    """Distribution of the outcome-label difference modulo d.

    ``"A-B"``: entry alpha is ``P(k = l + alpha)``; ``"B-A"``: entry alpha is
    ``P(l = k + alpha)``.
    """
    d = table.d
    p = table.block(a, b)
    idx = np.arange(d)
    shifted = (idx[None, :] + idx[:, None]) % d  # [alpha, x] -> x + alpha
    if direction == "A-B":
        return p[shifted, idx[None, :]].sum(axis=1)
    if direction == "B-A":
        return p[idx[None, :], shifted].sum(axis=1)
    raise ValueError(f"direction must be 'A-B' or 'B-A', got {direction!r}")


@dataclass(frozen=True, eq=False)
class CorrelationSpectrum:
    """Complex correlators ``C^n_{a,b}``; ``values[a-1, b-1, n]``."""

    d: int
    values: np.ndarray
    offsets: PhaseOffsets | None = None

    def get(self, a: int, b: int, n: int) -> complex:
        return complex(self.values[a - 1, b - 1, n % self.d])


def correlation_spectrum(table: JointProbabilityTable) -> CorrelationSpectrum:
    d = table.d
    k = np.arange(d)
    n = np.arange(d)
    # phase[n, k, l] = w^{n (l - k)}
    phase = omega_power(d, n[:, None, None] * (k[None, None, :] - k[None, :, None]))
    values = np.einsum("nkl,abkl->abn", phase, table.probs)
    return CorrelationSpectrum(d, values, table.offsets)
