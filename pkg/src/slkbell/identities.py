"""Numerical checks of the trigonometric sums behind the concurrence relation.

Every check evaluates both sides independently and reports the gap. By
default evaluation is in double precision with ``math.fsum``; passing
``precision=<decimal digits>`` switches to mpmath, which is useful close to
the cotangent poles where cancellation eats digits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import mpmath

from . import _io
from .errors import ParameterOutOfRange, PoleProximity, check_dimension

POLE_TOL = 1e-9
SQRT2 = math.sqrt(2.0)

DEFAULT_B_GRID = (0.1, 0.25, 0.3, 0.45, 0.6, 0.75, 0.9)


class _Float:
    pi = math.pi
    cos = staticmethod(math.cos)
    sin = staticmethod(math.sin)
    fsum = staticmethod(math.fsum)

    @staticmethod
    def cot(x):
        return 1.0 / math.tan(x)

    @staticmethod
    def num(x):
        return float(x)


class _Mp:
    cos = staticmethod(mpmath.cos)
    sin = staticmethod(mpmath.sin)
    cot = staticmethod(mpmath.cot)
    fsum = staticmethod(mpmath.fsum)

    @property
    def pi(self):
        return +mpmath.pi

    @staticmethod
    def num(x):
        return mpmath.mpf(x)


@dataclass(frozen=True)
class IdentityReport:
    name: str
    params: dict = field(hash=False)
    lhs: float
    rhs: float
    abs_error: float
    tolerance: float
    skipped: bool = False

    @property
    def passed(self) -> bool:
        return (not self.skipped) and self.abs_error <= self.tolerance

    @property
    def status(self) -> str:
        if self.skipped:
            return "skipped"
        return "true" if self.passed else "false"


def _report(name, params, lhs, rhs, tolerance, err=None) -> IdentityReport:
    if err is None:
        err = abs(lhs - rhs)
    return IdentityReport(name, params, float(lhs), float(rhs), float(err), float(tolerance))


def _check_m(d: int, m: int):
    d = check_dimension(d)
    if int(m) != m or not 1 <= m <= d - 1:
        raise ParameterOutOfRange(f"m must satisfy 1 <= m <= d-1, got m={m}, d={d}")
    return d, int(m)


def cosine_sum(d: int, m: int, precision: int | None = None) -> float:
    """``sum_alpha cos(2 pi m (alpha + 1/4) / d)``; vanishes for 1 <= m < d."""
    d, m = _check_m(d, m)

    def run(B):
        return B.fsum([B.cos(2 * B.pi * m * (B.num(alpha) + B.num(0.25)) / d) for alpha in range(d)])

    if precision is None:
        return run(_Float())
    with mpmath.workdps(int(precision)):
        return float(run(_Mp()))


def cot_cosine_sum(d: int, m: int, precision: int | None = None) -> float:
    """``sum_alpha cos(2 pi m (alpha + 1/4) / d) cot(pi (alpha + 1/4) / d)``; equals d."""
    d, m = _check_m(d, m)

    def run(B):
        terms = []
        for alpha in range(d):
            x = B.num(alpha) + B.num(0.25)
            terms.append(B.cos(2 * B.pi * m * x / d) * B.cot(B.pi * x / d))
        return B.fsum(terms)

    if precision is None:
        return run(_Float())
    with mpmath.workdps(int(precision)):
        return float(run(_Mp()))


def _pole_distance(x_over_pi: float) -> float:
    """Distance in radians from ``pi * x_over_pi`` to the nearest multiple of pi."""
    return abs(x_over_pi - round(x_over_pi)) * math.pi


def check_theorem_params(k: int, a: int, b: float) -> None:
    if int(k) != k or int(a) != a or not 0 < a < k:
        raise ParameterOutOfRange(f"need integers 0 < a < k, got a={a}, k={k}")
    if not 0 < b < 1:
        raise ParameterOutOfRange(f"need 0 < b < 1, got b={b}")
    if _pole_distance(b * k) < POLE_TOL:
        raise PoleProximity(f"cosec(pi b k) pole: b*k = {b * k!r}")
    for j in range(k):
        if _pole_distance(j / k + b) < POLE_TOL:
            raise PoleProximity(f"cot pole at j={j}: j/k + b = {j / k + b!r}")


def _theorem(name, k, a, b, tolerance, precision, sine):
    check_theorem_params(k, a, b)
    k, a = int(k), int(a)
    if tolerance is None:
        tolerance = 1e-8 * k

    def run(B):
        bb = B.num(b)
        trig = B.sin if sine else B.cos
        terms = [trig(2 * B.pi * a * j / k) * B.cot(B.pi * j / k + B.pi * bb) for j in range(k)]
        lhs = B.fsum(terms)
        cosec = 1 / B.sin(bb * k * B.pi)
        sign = -1 if sine else 1
        rhs = sign * k * trig(bb * (2 * a - k) * B.pi) * cosec
        return lhs, rhs

    params = {"k": k, "a": a, "b": float(b)}
    if precision is None:
        lhs, rhs = run(_Float())
        return _report(name, params, lhs, rhs, tolerance)
    with mpmath.workdps(int(precision)):
        lhs, rhs = run(_Mp())
        return _report(name, params, float(lhs), float(rhs), tolerance, float(abs(lhs - rhs)))


def theorem1(k: int, a: int, b: float, tolerance: float | None = None, precision: int | None = None) -> IdentityReport:
    """``sum_j cos(2 pi a j / k) cot(pi j / k + pi b) = k cos(b (2a - k) pi) / sin(b k pi)``.

    Default tolerance is ``1e-8 * k``. Raises :class:`PoleProximity` when any
    cot or cosec argument lies within 1e-9 of a multiple of pi.
    """
    return _theorem("theorem1", k, a, b, tolerance, precision, sine=False)


def theorem2(k: int, a: int, b: float, tolerance: float | None = None, precision: int | None = None) -> IdentityReport:
    """Sine companion: ``sum_j sin(2 pi a j / k) cot(pi j / k + pi b) = -k sin(b (2a - k) pi) / sin(b k pi)``."""
    return _theorem("theorem2", k, a, b, tolerance, precision, sine=True)


def hassan_identities(
    d: int, tolerance: float = 1e-9, precision: int | None = None
) -> tuple[IdentityReport, IdentityReport]:
    """Alternating and shifted cotangent sums, both equal to ``d``.

    ``sum_k (-1)^k cot((2k+1) pi / 4d)`` and ``sum_k cot((4k+1) pi / 4d)``.
    """
    d = check_dimension(d)

    def run(B):
        alt = B.fsum([(-1) ** k * B.cot((2 * k + 1) * B.pi / (4 * d)) for k in range(d)])
        shifted = B.fsum([B.cot((4 * k + 1) * B.pi / (4 * d)) for k in range(d)])
        return alt, shifted

    if precision is None:
        alt, shifted = run(_Float())
    else:
        with mpmath.workdps(int(precision)):
            alt, shifted = (float(v) for v in run(_Mp()))
    params = {"d": d}
    return (
        _report("hassan_alternating", params, alt, d, tolerance),
        _report("hassan_shifted", params, shifted, d, tolerance),
    )


def weights_zero_sum(d: int, tolerance: float = 1e-10) -> IdentityReport:
    """``sum_alpha f(alpha) = 0`` for the Bell weights."""
    from .functional import bell_weights

    f = bell_weights(d).f
    return _report("weights_zero_sum", {"d": int(d)}, math.fsum(f), 0.0, tolerance)


def pair_coefficients(d: int) -> list[float]:
    """Coefficient of ``sum_{p>q} c_p c_q`` in the Bell value, one per separation m.

    Each entry is ``(4/d)(1/sqrt2) * 2 * (cot_cosine_sum - cosine_sum)`` for
    ``m = p - q`` in 1..d-1, i.e. the weighted cosine sum expanded with the
    numerically evaluated identities rather than their closed forms.
    """
    d = check_dimension(d)
    return [
        4.0 / d / SQRT2 * 2.0 * (cot_cosine_sum(d, m) - cosine_sum(d, m)) for m in range(1, d)
    ]


def pair_coefficient(d: int) -> float:
    """The per-m coefficient farthest from ``4 sqrt 2`` (all should coincide with it)."""
    coeffs = pair_coefficients(d)
    target = 4 * SQRT2
    return max(coeffs, key=lambda c: abs(c - target))


# sweeps ---------------------------------------------------------------------


def sweep_cosine_sums(ds: Iterable[int], tolerance: float = 1e-10, precision: int | None = None) -> Iterator[IdentityReport]:
    for d in ds:
        for m in range(1, d):
            params = {"k": d, "a": m}
            yield _report("cosine_sum", params, cosine_sum(d, m, precision), 0.0, tolerance)
            yield _report("cot_cosine_sum", params, cot_cosine_sum(d, m, precision), d, tolerance)


def sweep_theorems(
    ks: Iterable[int],
    bs: Sequence[float] = DEFAULT_B_GRID,
    precision: int | None = None,
) -> Iterator[IdentityReport]:
    """Both theorems over every ``0 < a < k`` and ``b`` in ``bs``.

    Pole-adjacent parameter sets come back as skipped reports.
    """
    nan = float("nan")
    for k in ks:
        for a in range(1, k):
            for b in bs:
                for name, fn in (("theorem1", theorem1), ("theorem2", theorem2)):
                    try:
                        yield fn(k, a, b, precision=precision)
                    except PoleProximity:
                        params = {"k": k, "a": a, "b": float(b)}
                        yield IdentityReport(name, params, nan, nan, nan, 1e-8 * k, skipped=True)


def sweep_hassan(ds: Iterable[int], precision: int | None = None) -> Iterator[IdentityReport]:
    for d in ds:
        yield from hassan_identities(d, precision=precision)


def sweep_weights(ds: Iterable[int]) -> Iterator[IdentityReport]:
    for d in ds:
        yield weights_zero_sum(d)


def default_sweep(
    sum_ds: Iterable[int] = range(2, 65),
    ks: Iterable[int] = range(2, 41),
    bs: Sequence[float] = DEFAULT_B_GRID,
    hassan_ds: Iterable[int] = range(2, 101),
    precision: int | None = None,
) -> list[IdentityReport]:
    reports: list[IdentityReport] = []
    reports.extend(sweep_cosine_sums(sum_ds, precision=precision))
    reports.extend(sweep_theorems(ks, bs, precision=precision))
    hassan_ds = list(hassan_ds)
    reports.extend(sweep_hassan(hassan_ds, precision=precision))
    reports.extend(sweep_weights(hassan_ds))
    return reports


CSV_HEADER = ("schema_version", "identity", "k", "a", "b", "lhs", "rhs", "abs_error", "tolerance", "pass")


def reports_to_csv(reports: Iterable[IdentityReport]) -> str:
    """CSV rows; sums use ``k = d, a = m``, Hassan and weight checks use ``k = d``."""

    def row(r: IdentityReport):
        p = r.params
        return (
            _io.SCHEMA_VERSION,
            r.name,
            p.get("k", p.get("d")),
            p.get("a"),
            p.get("b"),
            r.lhs,
            r.rhs,
            r.abs_error,
            r.tolerance,
            r.status,
        )

    return _io.dumps_csv(CSV_HEADER, (row(r) for r in reports))
