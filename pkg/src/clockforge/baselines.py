"""Comparison protocols and auxiliary results.

Included here: the best entanglement-breaking (measure-and-prepare) protocol,
single-copy conversion with post-selection, the perturbative protocol for
nearly pure inputs, and the purity of coherence lost by the optimal protocol.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import expm

from .asymptotic import InfidelitySeries
from .errors import DomainError
from .matrix_elements import p_band
from .protocol import ProtocolAngles
from .schur_stats import ClockParams, schur_distribution
from .solver import SKIP_PROBABILITY, map_outcomes, optimal_lambda_tilde

__all__ = [
    "eb_optimal_protocol",
    "eb_infidelity",
    "eb_series",
    "perfect_conversion_probability",
    "perfect_conversion_failure",
    "perfect_conversion_oracle",
    "perturbative_protocol",
    "perturbative_coefficients",
    "dissipation",
    "purity_of_coherence_qubit",
    "discard_infidelity_factor",
]


def eb_optimal_protocol(n_c: int) -> ProtocolAngles:
    """Flat protocol ``s_w = 1/2`` for every ``w``, endpoints included.

    It measures the phase and prepares the matching equatorial state, so its
    Choi matrix is separable. The endpoints are deliberately not pinned, so the
    result carries ``pinned=False``.
    """
    if int(n_c) != n_c or n_c < 1:
        raise DomainError(f"n_c must be a positive integer, got {n_c!r}")
    return ProtocolAngles(n_c=int(n_c), s=np.full(int(n_c) + 1, 0.5), pinned=False)


def eb_series(lam: float) -> InfidelitySeries:
    """Large-N series of the entanglement-breaking infidelity at the equator."""
    return InfidelitySeries(
        1 / (4 * lam**2),
        (3 - 4 * lam**2) / (16 * lam**4),
        (15 - 16 * lam**2 + 8 * lam**4) / (32 * lam**6),
        order=3,
    )


def _eb_outcome(n_c: int, params: ClockParams) -> float:
    if n_c == 0:
        return 0.5
    return 0.5 * (1.0 - float(np.sum(p_band(n_c, params).off)))


def eb_infidelity(N: int, lam: float, jobs: int | None = None) -> tuple[float, InfidelitySeries]:
    """Exact Schur-averaged infidelity of the flat protocol at the equator, with its series.

    Per outcome the output is ``(1 - sum_w P_{w-1,w}) / 2`` away from the target.
    """
    params = ClockParams(N, lam)
    n_c, prob, _ = schur_distribution(params).significant(SKIP_PROBABILITY)
    values = map_outcomes(_eb_outcome, [(int(k), params) for k in n_c], jobs)
    return float(np.dot(prob, values)), eb_series(lam)


def _check_angle(name: str, value: float) -> None:
    if not 0.0 < value < math.pi:
        raise DomainError(f"{name} must lie strictly inside (0, pi)")


def perfect_conversion_probability(theta_in: float, theta_out: float) -> float:
    """Success probability of turning one pure qubit exactly into another at a new polar angle.

    ``(1 + C_in)/(1 + C_out)`` when ``theta_out <= theta_in``, otherwise
    ``(1 - C_in)/(1 - C_out)``.
    """
    _check_angle("theta_in", theta_in)
    _check_angle("theta_out", theta_out)
    if theta_out <= theta_in:
        return (1 + math.cos(theta_in)) / (1 + math.cos(theta_out))
    return (1 - math.cos(theta_in)) / (1 - math.cos(theta_out))


def perfect_conversion_failure(theta_in: float, theta_out: float, attempts: int) -> float:
    """Probability that ``attempts`` independent tries all fail."""
    return (1.0 - perfect_conversion_probability(theta_in, theta_out)) ** attempts


def perfect_conversion_oracle(theta_in: float, theta_out: float, phi: float) -> tuple[float, float]:
    """Simulate the two-qubit post-selected conversion for input azimuth ``phi``.

    The ancilla starts in ``|0>`` (``|1>``) when the target is closer to
    ``|0>`` (``|1>``) than the input. An excitation-preserving rotation by
    ``eta`` mixes ``|10>`` and ``|01>``, with ``cos^2 eta`` equal to
    ``tan^2(theta_out/2)/tan^2(theta_in/2)`` or its inverse. Success means
    the ancilla is found back in its initial state.

    Returns:
        ``(success_probability, fidelity_of_the_conditional_state_with_the_target)``.
    """
    _check_angle("theta_in", theta_in)
    _check_angle("theta_out", theta_out)
    ratio = math.tan(theta_out / 2) ** 2 / math.tan(theta_in / 2) ** 2
    ancilla = 0 if theta_out <= theta_in else 1
    c2 = ratio if ancilla == 0 else 1.0 / ratio
    eta = math.acos(math.sqrt(min(1.0, c2)))
    # basis index = 2*system + ancilla; generator couples |01> and |10>.
    gen = np.zeros((4, 4), dtype=np.complex128)
    gen[1, 2], gen[2, 1] = 1j, -1j
    unitary = expm(-1j * eta * gen)
    psi_in = np.array([math.cos(theta_in / 2), np.exp(1j * phi) * math.sin(theta_in / 2)])
    anc = np.zeros(2)
    anc[ancilla] = 1.0
    out = unitary @ np.kron(psi_in, anc)
    cond = out.reshape(2, 2)[:, ancilla]
    prob = float(np.vdot(cond, cond).real)
    target = np.array([math.cos(theta_out / 2), np.exp(1j * phi) * math.sin(theta_out / 2)])
    fid = float(abs(np.vdot(target, cond)) ** 2 / prob)
    return prob, fid


def perturbative_coefficients(n_c: int) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64] | None]:
    """``(f0, f1, f2)`` with ``s_w = f0 + f1 c0 + f2 c0^2``. ``f2`` is None at ``n_c = 4``."""
    if int(n_c) != n_c or n_c < 3:
        raise DomainError("the perturbative protocol needs n_c >= 3")
    N = float(n_c)
    w = np.arange(n_c + 1, dtype=np.float64)
    core = w * (N - w) * (N - 2 * w)
    f0 = w / N
    f1 = 4 * core / (N**2 * (N - 2))
    if n_c == 4:
        return f0, f1, None
    A = 16 * (3 * N - 4) / (N**3 * (N - 1) * (N - 2) * (N - 4))
    B = (3 * N**3 - 7 * N**2 + 16) / (4 * (3 * N - 4))
    f2 = A * core * (w**2 - N * w + B)
    return f0, f1, f2


def perturbative_protocol(n_c: int, c0: float) -> ProtocolAngles:
    """Equatorial optimum expanded to second order in ``c0 = (1 - lambda)/2``.

    At ``n_c = 4`` the second-order term is undetermined and is dropped with a warning.

    Raises:
        DomainError: If ``n_c < 3`` or ``c0`` is outside [0, 0.1].
    """
    if not 0.0 <= c0 <= 0.1:
        raise DomainError("c0 must lie in [0, 0.1]")
    f0, f1, f2 = perturbative_coefficients(n_c)
    s = f0 + f1 * c0
    if f2 is None:
        warnings.warn("second-order term is undetermined at n_c = 4; using first order only", stacklevel=2)
    else:
        s = s + f2 * c0**2
    return ProtocolAngles.from_values(s)


def purity_of_coherence_qubit(x: float) -> float:
    """``4 x^2/(1 - x^2)``: purity of coherence of an equatorial qubit with Bloch length ``x``."""
    if not 0.0 <= x < 1.0:
        raise DomainError("Bloch length must lie in [0, 1)")
    return 4 * x * x / (1 - x * x)


def dissipation(N: int, lam: float, mode: str = "postselected", jobs: int | None = None) -> float:
    """Purity of coherence lost by the optimal protocol at the equator.

    The input carries ``N eta`` with ``eta = 4 lam^2/(1 - lam^2)``. ``naive``
    subtracts the output value at the averaged Bloch length. ``postselected``
    subtracts the average of the per-outcome output values. Each outcome uses
    the exact optimum.

    Raises:
        DomainError: If ``lam`` is not in (0, 1) or ``mode`` is unknown.
    """
    if not 0.0 < lam < 1.0:
        raise DomainError("dissipation needs 0 < lambda < 1")
    if mode not in ("naive", "postselected"):
        raise DomainError(f"mode must be 'naive' or 'postselected', got {mode!r}")
    params = ClockParams(N, lam)
    n_c, prob, _ = schur_distribution(params).significant(SKIP_PROBABILITY)
    lt = np.array(map_outcomes(optimal_lambda_tilde, [(int(k), params) for k in n_c], jobs))
    total = N * purity_of_coherence_qubit(lam)
    if mode == "naive":
        return total - purity_of_coherence_qubit(float(np.dot(prob, lt)) / float(prob.sum()))
    per_outcome = np.array([purity_of_coherence_qubit(float(x)) for x in lt])
    return total - float(np.dot(prob, per_outcome))


def discard_infidelity_factor(lam: float) -> float:
    """``(1 - lam)/(2 lam^2)``: infidelity factor of discarding after Schur sampling."""
    return (1 - lam) / (2 * lam**2)
