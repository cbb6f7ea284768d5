"""Closed-form asymptotic protocols, infidelity series and coherence-resource bounds.

The protocols are low-degree polynomials in ``z = w/N_C - mu`` that match the
exact optimum order by order in ``1/N_C``. The infidelity series give the
coefficients of ``1/N`` (after averaging over Schur outcomes) or of ``1/N_C``
(for one fixed outcome). The bounds come from monotonicity of the purity of
coherence ``P_H(rho) = Tr[rho^2 H rho^-1 H] - Tr[rho H^2]`` under
time-translation-invariant channels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import DomainError
from .matrix_elements import mean_series
from .protocol import ProtocolAngles
from .schur_stats import ClockParams

__all__ = [
    "InfidelitySeries",
    "PerQubitResources",
    "protocol_order1",
    "protocol_order2",
    "protocol_order3_equatorial",
    "order2_coefficients",
    "infidelity_series",
    "infidelity_series_nc",
    "purity_of_coherence_general",
    "qubit_resources",
    "infidelity_factor_lower_bound",
    "ph_near_pure_bound",
    "equatorial_symmetry_lower_bound",
]


@dataclass(frozen=True)
class InfidelitySeries:
    """Infidelity ``delta1/n + delta2/n^2 + delta3/n^3`` (n is N or N_C).

    Attributes:
        delta1, delta2, delta3: Series coefficients. Those above ``order`` are 0.
        order: Highest coefficient that is filled in.
    """

    delta1: float
    delta2: float = 0.0
    delta3: float = 0.0
    order: int = 1

    def __call__(self, n: float) -> float:
        return self.delta1 / n + self.delta2 / n**2 + self.delta3 / n**3


@dataclass(frozen=True)
class PerQubitResources:
    """Purity of coherence of one input qubit and energy variance of the target.

    ``ph`` is ``math.inf`` for pure inputs.
    """

    ph: float
    vh: float


def _weights(n_c: int) -> NDArray[np.float64]:
    return np.arange(n_c + 1, dtype=np.float64) / n_c


def protocol_order1(n_c: int, params: ClockParams) -> ProtocolAngles:
    """Linear protocol that attains the optimal ``1/N`` infidelity coefficient.

    ``s_w = (1 - C_out)/2 + lam (S_out^2/S_in^2) (w/N_C - (1 - C_in)/2)``,
    clamped to [0, 1] with pinned endpoints.
    """
    slope = params.lam * params.S_out**2 / params.S_in**2
    s = (1 - params.C_out) / 2 + slope * (_weights(n_c) - (1 - params.C_in) / 2)
    return ProtocolAngles.from_values(s)


def order2_coefficients(params: ClockParams) -> tuple[float, float]:
    """``(b01, b20)``: the offset and curvature added by the second-order protocol."""
    lam = params.lam
    C_in, C_out = params.C_in, params.C_out
    ratio = params.S_out**2 / params.S_in**2
    b01 = ratio / (4 * lam) * (lam * (3 - lam**2) * C_in - (1 + lam**2) * C_out)
    b20 = lam * params.S_out**2 / params.S_in**4 * (2 * lam * C_out - (3 - lam**2) * C_in)
    return b01, b20


def protocol_order2(n_c: int, params: ClockParams) -> ProtocolAngles:
    """Quadratic protocol that attains the optimal ``1/N^2`` coefficient.

    ``s_w = S_out^2 + b01/N_C + b10 z + b20 z^2`` with ``z = w/N_C - mu`` and
    ``mu`` including its ``1/N_C`` correction.
    """
    if n_c < 2:
        raise DomainError("the second-order protocol needs n_c >= 2")
    lam = params.lam
    b01, b20 = order2_coefficients(params)
    b10 = lam * params.S_out**2 / params.S_in**2
    z = _weights(n_c) - mean_series(n_c, params)
    s = (1 - params.C_out) / 2 + b01 / n_c + b10 * z + b20 * z**2
    return ProtocolAngles.from_values(s)


def protocol_order3_equatorial(n_c: int, lam: float) -> ProtocolAngles:
    """Odd cubic protocol that attains the optimal ``1/N^3`` coefficient at the equator.

    ``s_w = 1/2 + (lam + b11/N_C) z + b30 z^3`` with ``z = w/N_C - 1/2``,
    ``b11 = -(1-lam)(1+3 lam)/2`` and ``b30 = 2 lam (1 - lam^2)``.
    """
    if n_c < 2:
        raise DomainError("the third-order protocol needs n_c >= 2")
    b11 = -(1 - lam) * (1 + 3 * lam) / 2
    b30 = 2 * lam * (1 - lam**2)
    z = _weights(n_c) - 0.5
    s = 0.5 + (lam + b11 / n_c) * z + b30 * z**3
    return ProtocolAngles.from_values(s)


def _delta1(params: ClockParams) -> float:
    lam = params.lam
    return (1 - lam**2) * params.S_out**2 / (4 * lam**2 * params.S_in**2)


def infidelity_series(params: ClockParams, order: int) -> InfidelitySeries:
    """Coefficients of ``1/N`` in the Schur-averaged optimal infidelity.

    Order 1 and 2 hold for any angles. Order 3 is available at the equator only.

    Raises:
        DomainError: If ``order`` is not 1..3, or order 3 is requested off the equator.
    """
    lam = params.lam
    C_in, C_out = params.C_in, params.C_out
    d1 = _delta1(params)
    if order == 1:
        return InfidelitySeries(d1, order=1)
    if order == 2:
        braces = C_out**2 + 4 * lam * C_out * C_in + 2 * lam**2 * C_in**2 - 3
        d2 = -((1 - lam**2) ** 2) / (16 * lam**4) * params.S_out**2 / params.S_in**4 * braces
        return InfidelitySeries(d1, d2, order=2)
    if order == 3:
        if not params.is_equatorial:
            raise DomainError("the third-order series is only available at the equator")
        u = 1 - lam**2
        d2 = 3 * u**2 / (16 * lam**4)
        d3 = u**2 * (15 - 7 * lam**2) / (32 * lam**6)
        return InfidelitySeries(d1, d2, d3, order=3)
    raise DomainError("order must be 1, 2 or 3")


def infidelity_series_nc(params: ClockParams, order: int) -> InfidelitySeries:
    """Coefficients of ``1/N_C`` in the optimal infidelity for one Schur outcome.

    Order 2 holds for any angles. Order 3 is available at the equator only.
    """
    lam = params.lam
    C_in, C_out = params.C_in, params.C_out
    d1 = (1 - lam**2) * params.S_out**2 / (4 * lam * params.S_in**2)
    if order == 1:
        return InfidelitySeries(d1, order=1)
    if order == 2:
        braces = (
            (1 + lam) * C_out**2
            + 4 * lam * (1 + lam) * C_out * C_in
            - 2 * lam * (1 - lam) * (2 + lam) * C_in**2
            - (3 - lam)
        )
        d2 = -((1 - lam) ** 2) * (1 + lam) / (16 * lam**2) * params.S_out**2 / params.S_in**4 * braces
        return InfidelitySeries(d1, d2, order=2)
    if order == 3:
        if not params.is_equatorial:
            raise DomainError("the third-order series is only available at the equator")
        d2 = (1 - lam) ** 2 * (1 + lam) * (3 - lam) / (16 * lam**2)
        d3 = (1 - lam) ** 3 * (1 + lam) * (9 + 6 * lam + 5 * lam**2) / (32 * lam**3)
        return InfidelitySeries(d1, d2, d3, order=3)
    raise DomainError("order must be 1, 2 or 3")


def purity_of_coherence_general(rho: NDArray, H: NDArray, threshold: float = 1e-12) -> float:
    """``Tr[rho^2 H rho^-1 H] - Tr[rho H^2]`` for a density matrix ``rho``.

    The inverse is taken on the support of ``rho`` (eigenvalues above
    ``threshold``). Returns ``math.inf`` when ``H`` couples the support to the
    kernel.

    Raises:
        DomainError: If ``rho`` is not Hermitian, positive and unit-trace, or is too large.
    """
    rho = np.asarray(rho, dtype=np.complex128)
    H = np.asarray(H, dtype=np.complex128)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] > 32 or H.shape != rho.shape:
        raise DomainError("rho and H must be square matrices of the same size, at most 32")
    if not np.allclose(rho, rho.conj().T, atol=1e-12) or abs(np.trace(rho) - 1) > 1e-10:
        raise DomainError("rho must be Hermitian with unit trace")
    p, v = np.linalg.eigh(rho)
    if p.min() < -1e-10:
        raise DomainError("rho must be positive semidefinite")
    h = v.conj().T @ H @ v
    support = p > threshold
    if np.any(np.abs(h[np.ix_(support, ~support)]) > threshold):
        return math.inf
    ps = p[support]
    hs = np.abs(h[np.ix_(support, support)]) ** 2
    first = float(np.sum(ps[:, None] ** 2 / ps[None, :] * hs))
    second = float(np.real(np.trace(rho @ H @ H)))
    return first - second


def qubit_resources(params: ClockParams) -> PerQubitResources:
    """Closed-form ``P_H`` of one input qubit and ``V_H`` of the target, with ``H = Z``."""
    lam = params.lam
    ph = math.inf if lam == 1.0 else 4 * lam**2 * params.S_in**2 / (1 - lam**2)
    return PerQubitResources(ph=ph, vh=params.S_out**2)


def infidelity_factor_lower_bound(params: ClockParams) -> float:
    """Lower bound ``V_H / P_H`` on the ``1/N`` infidelity coefficient (0 when lambda = 1)."""
    res = qubit_resources(params)
    return 0.0 if math.isinf(res.ph) else res.vh / res.ph


def ph_near_pure_bound(vh: float, delta: float) -> float:
    """Smallest ``P_H`` of a qubit at infidelity ``delta`` from a pure state of variance ``vh``.

    ``V_H [(1 - delta)^2/delta - 1]``, clamped at 0. Returns ``math.inf`` for
    ``delta = 0``.
    """
    if not 0.0 <= delta <= 1.0:
        raise DomainError("delta must lie in [0, 1]")
    if delta == 0.0:
        return math.inf
    return max(0.0, vh * ((1 - delta) ** 2 / delta - 1))


def equatorial_symmetry_lower_bound(N: int, lam: float) -> float:
    """Closed-form lower bound on equatorial infidelity from ``P_H`` monotonicity.

    ``(1/2) [1 - (1 + (1-lam^2)/(lam^2 N))^(-1/2)]``.
    """
    x = (1 - lam**2) / (lam**2 * N)
    return 0.5 * (1 - 1 / math.sqrt(1 + x))
