"""Pure two-qudit states in Schmidt form, ``|psi> = sum_i c_i |ii>``.

Coefficients are real and non-negative. Order matters for state identity
(it fixes which computational basis pair carries which weight) but not for
the concurrence.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _io
from .errors import (
    ComplexCoefficient,
    DimensionMismatch,
    NegativeCoefficient,
    NotNormalized,
    ZeroVector,
    check_dimension,
)

NORM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SchmidtState:
    """Dimension plus unit-norm real Schmidt coefficients.

    Build instances with :func:`new_schmidt`, :func:`maximally_entangled` or
    :func:`random_schmidt`; the constructor only stores what it is given.
    """

    d: int
    coeffs: np.ndarray
    rescaled: bool = field(default=False, compare=False)

    def __post_init__(self):
        arr = np.array(self.coeffs, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    def __eq__(self, other):
        if not isinstance(other, SchmidtState):
            return NotImplemented
        return self.d == other.d and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash((self.d, self.coeffs.tobytes()))

    def vector(self) -> np.ndarray:
        """Full d*d amplitude vector in the |j>|j'> product basis."""
        psi = np.zeros(self.d * self.d)
        psi[np.arange(self.d) * (self.d + 1)] = self.coeffs
        return psi

    def digest(self) -> str:
        return hashlib.sha256(self.coeffs.tobytes()).hexdigest()[:16]

    def to_dict(self) -> dict:
        return {"d": self.d, "coeffs": [float(c) for c in self.coeffs]}

    def to_json(self) -> str:
        return _io.dumps_json(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict, strict: bool = False) -> "SchmidtState":
        return new_schmidt(int(data["d"]), data["coeffs"], strict=strict)

    @classmethod
    def from_json(cls, text: str, strict: bool = False) -> "SchmidtState":
        return cls.from_dict(json.loads(text), strict=strict)


def new_schmidt(d: int, coeffs: Sequence[float], strict: bool = False) -> SchmidtState:
    """Validate coefficients and rescale them to unit Euclidean norm.

    With ``strict=True`` the input must already be normalized to within
    1e-12 and is stored unchanged; otherwise the result records whether a
    rescale happened in ``rescaled``.
    """
    d = check_dimension(d)
    raw = np.asarray(coeffs)
    if raw.ndim != 1 or raw.shape[0] != d:
        raise DimensionMismatch(f"expected {d} coefficients, got shape {raw.shape}")
    if np.iscomplexobj(raw):
        if np.any(raw.imag != 0):
            raise ComplexCoefficient("Schmidt coefficients must be real")
        raw = raw.real
    arr = raw.astype(float)
    if np.any(arr < 0):
        raise NegativeCoefficient(f"negative Schmidt coefficient in {arr.tolist()}")
    norm = float(np.sqrt(np.sum(arr * arr)))
    if norm == 0.0:
        raise ZeroVector("all Schmidt coefficients are zero")
    if abs(norm * norm - 1.0) <= NORM_TOL:
        return SchmidtState(d, arr, rescaled=False)
    if strict:
        raise NotNormalized(f"sum of squares is {norm * norm!r}, expected 1")
    return SchmidtState(d, arr / norm, rescaled=True)


def maximally_entangled(d: int) -> SchmidtState:
    d = check_dimension(d)
    return SchmidtState(d, np.full(d, 1.0 / np.sqrt(d)))


def product_state(d: int, index: int = 0) -> SchmidtState:
    d = check_dimension(d)
    c = np.zeros(d)
    c[index] = 1.0
    return SchmidtState(d, c)


def random_schmidt(d: int, seed: int) -> SchmidtState:
    """Random state whose squared coefficients are uniform on the simplex.

    Uses numpy's PCG64 generator seeded with ``seed``; the squared weights
    come from a flat Dirichlet draw.
    """
    d = check_dimension(d)
    rng = np.random.default_rng(seed)
    weights = rng.dirichlet(np.ones(d))
    c = np.sqrt(weights)
    return SchmidtState(d, c / np.linalg.norm(c))


def pair_sum(state: SchmidtState) -> float:
    """``sum_{p>q} c_p c_q`` over the strict upper triangle of the outer product."""
    c = state.coeffs
    return float(np.sum(np.triu(np.outer(c, c), k=1)))


def concurrence(state: SchmidtState) -> float:
    """Concurrence ``2/(d-1) * sum_{p>q} c_p c_q`` (linear in pair products).

    Equals 1 for the maximally entangled state and 0 for product states.
    """
    c = state.coeffs
    if np.count_nonzero(c) <= 1:
        return 0.0
    value = 2.0 / (state.d - 1) * pair_sum(state)
    return float(min(max(value, 0.0), 1.0))
