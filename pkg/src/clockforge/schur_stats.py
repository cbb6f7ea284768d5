"""Outcome law of Schur sampling on N i.i.d. noisy qubits and its moments.

Measuring the total angular momentum of ``rho^{(x)N}`` yields ``j = N_C/2``
with ``N - N_C`` even. This module gives the exact outcome distribution, exact
moments of ``N_C`` by direct summation, closed-form moment polynomials that are
exact up to an exponentially small remainder, and truncated series for the
negative moments.
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from numpy.typing import NDArray
from scipy.special import gammaln

from .errors import DomainError, ZeroOutcomeMassError

__all__ = [
    "ClockParams",
    "SchurDistribution",
    "PolyMoment",
    "SeriesValue",
    "schur_distribution",
    "nc_moment_exact",
    "zero_outcome_mass",
    "nc_moment_poly",
    "nc_negative_moment_series",
]


@dataclass(frozen=True)
class ClockParams:
    """One problem instance: N copies of a qubit with Bloch vector of length ``lam``.

    Attributes:
        N: Number of input copies.
        lam: Purity parameter (Bloch-vector length), in (0, 1].
        theta_in: Polar angle of the input Bloch vector, in (0, pi).
        theta_out: Polar angle of the target pure state, in (0, pi).
    """

    N: int
    lam: float
    theta_in: float = math.pi / 2
    theta_out: float = math.pi / 2
    c0: float = field(init=False, repr=False)
    c1: float = field(init=False, repr=False)
    C_in: float = field(init=False, repr=False)
    S_in: float = field(init=False, repr=False)
    C_out: float = field(init=False, repr=False)
    S_out: float = field(init=False, repr=False)

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise DomainError(f"N must be a positive integer, got {self.N!r}")
        if not (0.0 < self.lam <= 1.0):
            raise DomainError(f"lambda must lie in (0, 1], got {self.lam!r}")
        for name in ("theta_in", "theta_out"):
            angle = getattr(self, name)
            if not (0.0 < angle < math.pi):
                raise DomainError(f"{name} must lie strictly inside (0, pi), got {angle!r}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "c0", (1.0 - self.lam) / 2.0)
        object.__setattr__(self, "c1", (1.0 + self.lam) / 2.0)
        object.__setattr__(self, "C_in", _cos(self.theta_in))
        object.__setattr__(self, "S_in", math.sin(self.theta_in))
        object.__setattr__(self, "C_out", _cos(self.theta_out))
        object.__setattr__(self, "S_out", math.sin(self.theta_out))

    @property
    def lambda_x(self) -> float:
        return self.lam * self.S_in

    @property
    def lambda_z(self) -> float:
        return self.lam * self.C_in

    @property
    def is_equatorial(self) -> bool:
        """True when both polar angles equal pi/2 (to double precision)."""
        return self.C_in == 0.0 and self.C_out == 0.0

    def with_n(self, N: int) -> "ClockParams":
        """Same state and target with a different number of copies."""
        return ClockParams(N, self.lam, self.theta_in, self.theta_out)


def _cos(angle: float) -> float:
    # cos(pi/2) is 6e-17 in floating point; snap it so equatorial shortcuts engage.
    value = math.cos(angle)
    return 0.0 if abs(value) < 1e-15 else value


@dataclass(frozen=True)
class SchurDistribution:
    """Exact outcome law of the total-angular-momentum measurement.

    Attributes:
        N: Number of measured qubits.
        n_c: Outcomes ``N_C = 2j`` in increasing order.
        multiplicity: ``d_j``, the multiplicity of the spin-j irrep.
        prob: Outcome probabilities.
    """

    N: int
    n_c: NDArray[np.int64]
    multiplicity: tuple[int, ...]
    prob: NDArray[np.float64]

    def entries(self) -> list[tuple[int, int, float]]:
        """``(N_C, d_j, probability)`` triples in increasing ``N_C``."""
        return [(int(n), d, float(p)) for n, d, p in zip(self.n_c, self.multiplicity, self.prob)]

    def significant(self, cutoff: float = 1e-16) -> tuple[NDArray[np.int64], NDArray[np.float64], float]:
        """Outcomes with probability at least ``cutoff``, plus the skipped mass."""
        keep = self.prob >= cutoff
        return self.n_c[keep], self.prob[keep], float(self.prob[~keep].sum())


class PolyMoment(NamedTuple):
    """Moment polynomial value and its guaranteed exponentially small envelope."""

    value: float | Fraction
    envelope: float


class SeriesValue(NamedTuple):
    """Truncated series value and the power of 1/N of the first dropped term."""

    value: float
    next_order: int


def _log_geometric(n: NDArray[np.int64], c0: float, c1: float) -> NDArray[np.float64]:
    """log((c1^(n+1) - c0^(n+1)) / (c1 - c0)) without cancellation."""
    lam = c1 - c0
    ratio = c0 / c1
    return (n + 1) * math.log(c1) + np.log1p(-(ratio ** (n + 1))) - math.log(lam)


def schur_distribution(params: ClockParams) -> SchurDistribution:
    """Outcome distribution of Schur sampling on ``params.N`` qubits.

    Probabilities are assembled in the log domain as
    ``d_j (c1 c0)^(J-j) (c1^(2j+1) - c0^(2j+1)) / (c1 - c0)``.
    """
    N = params.N
    n_c = np.arange(N % 2, N + 1, 2, dtype=np.int64)
    k = (N - n_c) // 2
    # d_j = C(N,k) - C(N,k-1) = C(N,k) (N_C+1)/(N-k+1)
    log_d = (
        gammaln(N + 1.0) - gammaln(k + 1.0) - gammaln(N - k + 1.0)
        + np.log(n_c + 1.0) - np.log(N - k + 1.0)
    )
    mult = tuple(math.comb(N, int(kk)) - (math.comb(N, int(kk) - 1) if kk > 0 else 0) for kk in k)
    if params.c0 == 0.0:
        prob = np.where(k == 0, 1.0, 0.0)
    else:
        log_p = log_d + k * math.log(params.c1 * params.c0) + _log_geometric(n_c, params.c0, params.c1)
        prob = np.exp(log_p)
    return SchurDistribution(N=N, n_c=n_c, multiplicity=mult, prob=prob)


def zero_outcome_mass(params: ClockParams) -> float:
    """Probability of the outcome ``N_C = 0`` (zero for odd N)."""
    dist = schur_distribution(params)
    return float(dist.prob[0]) if dist.n_c[0] == 0 else 0.0


def _exact_probabilities(params: ClockParams) -> tuple[list[int], list[Fraction]]:
    """Outcome probabilities as exact rationals in the binary value of lambda."""
    lam = Fraction(params.lam)
    c0, c1 = (1 - lam) / 2, (1 + lam) / 2
    N = params.N
    outcomes, probs = [], []
    for n_c in range(N % 2, N + 1, 2):
        k = (N - n_c) // 2
        d = math.comb(N, k) - (math.comb(N, k - 1) if k > 0 else 0)
        geometric = sum(c1**i * c0 ** (n_c - i) for i in range(n_c + 1))
        outcomes.append(n_c)
        probs.append(d * (c1 * c0) ** k * geometric)
    return outcomes, probs


def nc_moment_exact(
    params: ClockParams,
    p: int,
    sign: str = "+",
    max_excluded_mass: float = 1e-12,
    exact: bool = False,
) -> float | Fraction:
    """Exact ``E[N_C^p]`` or ``E[N_C^-p]`` by summation over all outcomes.

    For negative moments the outcome ``N_C = 0`` is excluded. Its mass is
    available from :func:`zero_outcome_mass`. With ``exact=True`` the sum is
    carried out in rational arithmetic on the binary value of lambda and a
    :class:`~fractions.Fraction` is returned (intended for N up to a few hundred).

    Raises:
        DomainError: If ``p < 1`` or ``sign`` is not '+' or '-'.
        ZeroOutcomeMassError: If ``sign='-'`` and the excluded mass exceeds
            ``max_excluded_mass``.
    """
    if p < 1:
        raise DomainError("moment order p must be >= 1")
    if sign not in ("+", "-"):
        raise DomainError(f"sign must be '+' or '-', got {sign!r}")
    if exact:
        outcomes, probs = _exact_probabilities(params)
        if sign == "+":
            return sum((q * n**p for n, q in zip(outcomes, probs)), Fraction(0))
        excluded = sum((q for n, q in zip(outcomes, probs) if n == 0), Fraction(0))
        if excluded > max_excluded_mass:
            raise ZeroOutcomeMassError(float(excluded))
        return sum((q / Fraction(n) ** p for n, q in zip(outcomes, probs) if n > 0), Fraction(0))
    dist = schur_distribution(params)
    n_c = dist.n_c.astype(np.float64)
    if sign == "+":
        return float(np.sum(dist.prob * n_c**p))
    nonzero = dist.n_c > 0
    excluded = float(dist.prob[~nonzero].sum())
    if excluded > max_excluded_mass:
        raise ZeroOutcomeMassError(excluded)
    return float(np.sum(dist.prob[nonzero] * n_c[nonzero] ** (-p)))


def nc_moment_poly(params: ClockParams, p: int, exact: bool = False) -> PolyMoment:
    """Polynomial in N equal to ``E[N_C^p]`` up to an exponentially small error.

    The envelope ``2^(p-1) ((1-lam)/lam) (1-lam^2)^(N/2)`` bounds the error.
    The error is non-positive for odd p and non-negative for even p. With
    ``exact=True`` the polynomial is evaluated as a Fraction in the binary value
    of lambda, so it can be compared with the exact rational moment.
    """
    if exact:
        lam, N = Fraction(params.lam), Fraction(params.N)
    else:
        lam, N = params.lam, float(params.N)
    g = (1 - lam) / lam
    u = 1 - lam
    if p == 1:
        value = lam * N + g
    elif p == 2:
        value = lam**2 * N**2 + u * (3 + lam) * N - 2 * g
    elif p == 3:
        value = (
            lam**3 * N**3
            + 3 * lam * u * (2 + lam) * N**2
            + u * (3 - 6 * lam - 5 * lam**2 - 2 * lam**3) / lam * N
            + 4 * g
        )
    elif p == 4:
        value = (
            lam**4 * N**4
            + 2 * lam**2 * u * (5 + 3 * lam) * N**3
            + u * (15 - 9 * lam - 23 * lam**2 - 11 * lam**3) * N**2
            + 2 * u * (2 + lam) * (-3 + 3 * lam + lam**2 + 3 * lam**3) / lam * N
            - 8 * g
        )
    else:
        raise DomainError("moment polynomials are available for p in 1..4")
    envelope = 2 ** (p - 1) * float(g) * (1.0 - params.lam**2) ** (params.N / 2)
    return PolyMoment(value if exact else float(value), float(envelope))


def nc_negative_moment_series(params: ClockParams, p: int) -> SeriesValue:
    """Series for ``E[N_C^-p]`` truncated after the ``1/N^3`` term.

    The first dropped term is of order ``1/N^4`` for every supported p.
    """
    lam, N = params.lam, float(params.N)
    u = 1.0 - lam
    if p == 1:
        value = 1 / (lam * N) + u / (lam**2 * N**2) + u * (1 + 2 * lam - lam**2) / (lam**4 * N**3)
    elif p == 2:
        value = 1 / (lam**2 * N**2) + u * (1 + 3 * lam) / (lam**4 * N**3)
    elif p == 3:
        value = 1 / (lam**3 * N**3)
    else:
        raise DomainError("negative-moment series are available for p in 1..3")
    return SeriesValue(float(value), 4)
