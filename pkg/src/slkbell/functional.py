"""The SLK Bell functional, evaluated two independent ways.

The probability route weights outcome-difference events by ``f(alpha)``;
the correlation route combines the complex correlators ``C^n_{a,b}`` with
fractional powers of ``w``. The probability route is the reference; the
correlation route serves as an oracle for it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import _io
from .errors import NonHermitianSpectrum, check_dimension
from .measurement import (
    CANONICAL_OFFSETS,
    CorrelationSpectrum,
    JointProbabilityTable,
    PhaseOffsets,
    correlation_spectrum,
    difference_distribution,
    omega_power,
    probability_table,
)
from .state import SchmidtState, concurrence

SQRT2 = np.sqrt(2.0)
HERMITIAN_TOL = 1e-8

Path = Literal["probability", "correlation"]


@dataclass(frozen=True, eq=False)
class BellWeights:
    d: int
    f: np.ndarray


def bell_weights(d: int) -> BellWeights:
    """``f(alpha) = (cot[pi (alpha + 1/4) / d] - 1) / sqrt 2``."""
    d = check_dimension(d)
    alpha = np.arange(d)
    f = (1.0 / np.tan(np.pi * (alpha + 0.25) / d) - 1.0) / SQRT2
    f.setflags(write=False)
    return BellWeights(d, f)


def lr_bound(d: int) -> float:
    """Largest value a local-realistic model can reach."""
    d = check_dimension(d)
    cot = lambda x: 1.0 / np.tan(x)  # noqa: E731
    return float((3 * cot(np.pi / (4 * d)) - cot(3 * np.pi / (4 * d))) / SQRT2 - 2 * SQRT2)


def slope(d: int) -> float:
    """Proportionality constant ``2 sqrt2 (d - 1)`` between value and concurrence."""
    return float(2 * SQRT2 * (check_dimension(d) - 1))


def violation_threshold(d: int) -> float:
    """Concurrence above which the canonical setting violates the LR bound."""
    return lr_bound(d) / slope(d)


@dataclass(frozen=True)
class BellResult:
    value: float
    path: str
    lr_bound: float
    violated: bool
    offsets: PhaseOffsets | None
    d: int
    state_digest: str | None = None

    def to_dict(self) -> dict:
        out = {
            "schema_version": _io.SCHEMA_VERSION,
            "d": self.d,
            "value": self.value,
            "path": self.path,
            "lr_bound": self.lr_bound,
            "violated": self.violated,
            "offsets": None if self.offsets is None else self.offsets.to_dict(),
        }
        if self.state_digest is not None:
            out["state_digest"] = self.state_digest
        return out

    def to_json(self) -> str:
        return _io.dumps_json(self.to_dict())


def _result(value: float, path: str, d: int, offsets, digest=None) -> BellResult:
    bound = lr_bound(d)
    return BellResult(float(value), path, bound, bool(value > bound), offsets, d, digest)


def slk_value_from_probabilities(table: JointProbabilityTable) -> float:
    d = table.d
    f = bell_weights(d).f
    terms = (
        difference_distribution(table, 1, 1, "A-B")
        # P(B1 = A2 + alpha + 1): B-minus-A event shifted by one, mod d
        + np.roll(difference_distribution(table, 2, 1, "B-A"), -1)
        + difference_distribution(table, 2, 2, "A-B")
        + difference_distribution(table, 1, 2, "B-A")
    )
    return float(np.dot(f, terms))


def slk_from_probabilities(table: JointProbabilityTable) -> BellResult:
    return _result(slk_value_from_probabilities(table), "probability", table.d, table.offsets)


# (a, b, exponent multiplier of n/4 in the w power)
_CORRELATION_PHASES = ((1, 1, -1), (2, 1, -3), (1, 2, 1), (2, 2, -1))


def slk_from_correlations(spectrum: CorrelationSpectrum) -> BellResult:
    """Correlator form with an explicit complex-conjugate half.

    The conjugate half is assembled from ``C^{d-n}`` rather than by
    conjugating ``C^n``, so a spectrum that is not Hermitian shows up as an
    imaginary residue and raises :class:`NonHermitianSpectrum`.
    """
    d = spectrum.d
    n = np.arange(1, d)
    direct = 0j
    conjugate = 0j
    for a, b, m in _CORRELATION_PHASES:
        phase = omega_power(d, m * n / 4.0)
        c = spectrum.values[a - 1, b - 1]
        direct += np.sum(phase * c[n])
        conjugate += np.sum(np.conj(phase) * c[(d - n) % d])
    total = (direct + conjugate) / SQRT2
    if abs(total.imag) > HERMITIAN_TOL:
        raise NonHermitianSpectrum(f"imaginary residue {total.imag!r}")
    return _result(total.real, "correlation", d, spectrum.offsets)


def evaluate(
    state: SchmidtState,
    offsets: PhaseOffsets = CANONICAL_OFFSETS,
    path: Path = "probability",
) -> BellResult:
    """Bell value of ``state`` measured with ``offsets``, via the chosen route."""
    table = probability_table(state, offsets)
    if path == "probability":
        res = slk_from_probabilities(table)
    elif path == "correlation":
        res = slk_from_correlations(correlation_spectrum(table))
    else:
        raise ValueError(f"unknown path {path!r}")
    return BellResult(res.value, res.path, res.lr_bound, res.violated, offsets, state.d, state.digest())


def predicted_value(state: SchmidtState) -> float:
    """Canonical-setting value implied by the concurrence."""
    return slope(state.d) * concurrence(state)
