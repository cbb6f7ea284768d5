"""Dicke-basis matrix elements of the Schur-sampled state.

After Schur sampling returns ``N_C``, the state on the symmetric subspace is
``rho_{N_C/2}``. A single-qubit output only sees its diagonal ``P_{w,w}`` and
first off-diagonal ``P_{w-1,w}`` in the Dicke (Hamming-weight) basis. This
module computes that band, ratios and centered moments derived from it, the
matching truncated asymptotic series, and a brute-force tensor-product oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np
from numpy.typing import NDArray
from scipy.special import logsumexp

from .errors import DomainError
from .schur_stats import ClockParams

__all__ = [
    "PBand",
    "p_band",
    "p_entry_oracle",
    "r_ratios",
    "centered_moment_exact",
    "centered_moment_series",
    "mean_series",
]

# Entries below this are stored as 0 (their logs are kept).
UNDERFLOW = 1e-300
# Upper bound on elements per temporary (w, j) array in the double-precision path.
_CHUNK_ELEMENTS = 4_000_000


@dataclass(frozen=True)
class PBand:
    """Diagonal and first off-diagonal of ``rho_{N_C/2}`` in the Dicke basis.

    Attributes:
        n_c: Number of qubits N_C kept after Schur sampling.
        diag: ``P_{w,w}`` for ``w = 0..N_C``.
        off: ``P_{w-1,w}`` for ``w = 1..N_C`` (``off[i]`` is ``P_{i,i+1}``).
        mu: Mean of ``w/N_C`` under ``diag``.
        log_diag: Natural logs of ``diag``. Kept finite where ``diag`` underflows.
        log_off: Natural logs of ``off``.
        analytic_trace: Trace of the diagonal under the closed-form normalization,
            before rescaling. It differs from 1 only by rounding.
    """

    n_c: int
    diag: NDArray[np.float64]
    off: NDArray[np.float64]
    mu: float
    log_diag: NDArray[np.float64]
    log_off: NDArray[np.float64]
    analytic_trace: float = 1.0

    @property
    def weights(self) -> NDArray[np.int64]:
        return np.arange(self.n_c + 1)


def _log_prefactor(n_c: int, params: ClockParams) -> float:
    """log of (c1-c0)/(c1^(N_C+1)-c0^(N_C+1)) * ((1+lambda_z)/2)^N_C."""
    c0, c1 = params.c0, params.c1
    log_norm = math.log(params.lam) - (n_c + 1) * math.log(c1) - math.log1p(-((c0 / c1) ** (n_c + 1)))
    return log_norm + n_c * math.log((1.0 + params.lambda_z) / 2.0)


def _log_band_double(n_c: int, params: ClockParams, alpha: int) -> NDArray[np.float64]:
    """log P_{w-alpha,w} for w = alpha..N_C via the nested coefficients in log form.

    The inner sum is ``C(w, alpha) * (1 + A_1 x (1 + A_2 x (...)))`` with
    ``A_i = (w-i-alpha+1)(N_C-w-i+1) / (i (i+alpha))``. Partial products are
    accumulated as cumulative sums of logs and combined with logsumexp.
    """
    lx, lz = params.lambda_x, params.lambda_z
    log_x = math.log(lx * lx / ((1.0 - lz) * (1.0 + lz)))
    log_r = math.log((1.0 - lz) / (1.0 + lz))
    w_all = np.arange(alpha, n_c + 1, dtype=np.float64)
    out = np.empty_like(w_all)
    rows_per_chunk = max(1, _CHUNK_ELEMENTS // (n_c // 2 + 2))
    with np.errstate(divide="ignore"):
        for start in range(0, w_all.size, rows_per_chunk):
            w = w_all[start : start + rows_per_chunk]
            jmax = int(np.max(np.minimum(w - alpha, n_c - w)))
            if jmax > 0:
                i = np.arange(1, jmax + 1, dtype=np.float64)
                num = np.maximum(w[:, None] - i[None, :] - alpha + 1, 0.0) * np.maximum(
                    n_c - w[:, None] - i[None, :] + 1, 0.0
                )
                steps = np.log(num) - np.log(i * (i + alpha))[None, :] + log_x
                partial = np.cumsum(steps, axis=1)
                inner = np.logaddexp(0.0, logsumexp(partial, axis=1))
            else:
                inner = np.zeros_like(w)
            log_head = np.log(w) if alpha == 1 else np.zeros_like(w)
            out[start : start + w.size] = inner + log_head
    out += w_all * log_r
    if alpha == 1:
        out += math.log(lx / (1.0 - lz)) + 0.5 * np.log((n_c - w_all + 1.0) / w_all)
    return out + _log_prefactor(n_c, params)


def _log_band_mp(n_c: int, params: ClockParams, alpha: int, dps: int) -> NDArray[np.float64]:
    """Same quantity as :func:`_log_band_double`, evaluated with mpmath at ``dps`` digits."""
    with mpmath.workdps(dps):
        lam = mpmath.mpf(params.lam)
        theta = mpmath.mpf(params.theta_in)
        lx = lam * mpmath.sin(theta)
        lz = lam * mpmath.cos(theta) if params.C_in != 0.0 else mpmath.mpf(0)
        x = lx**2 / (1 - lz**2)
        c0, c1 = (1 - lam) / 2, (1 + lam) / 2
        pref = (c1 - c0) / (c1 ** (n_c + 1) - c0 ** (n_c + 1)) * ((1 + lz) / 2) ** n_c
        r = (1 - lz) / (1 + lz)
        head = (lx / (1 - lz)) ** alpha
        values = []
        for w in range(alpha, n_c + 1):
            acc = mpmath.mpf(1)
            for i in range(min(w - alpha, n_c - w), 0, -1):
                acc = 1 + acc * x * mpmath.mpf((w - i - alpha + 1) * (n_c - w - i + 1)) / (i * (i + alpha))
            inner = acc * (w if alpha == 1 else 1)
            binom_ratio = mpmath.mpf(n_c - w + 1) / w if alpha == 1 else mpmath.mpf(1)
            value = pref * head * r**w * mpmath.sqrt(binom_ratio) * inner
            values.append(float(mpmath.log(value)))
    return np.array(values)


def p_band(n_c: int, params: ClockParams, dps: int | None = None) -> PBand:
    """Band ``P_{w,w}``, ``P_{w-1,w}`` of the Schur-sampled state on ``n_c`` qubits.

    Uses the single-summation formula with nested coefficients. Only
    ``params.lam`` and ``params.theta_in`` matter. The default path works in
    double precision with log-domain prefactors. It is accurate to about
    ``1e-15 * N_C`` relative, because large log-binomials lose digits. Pass
    ``dps`` to evaluate the sums with mpmath at that many digits instead
    (quadratic cost, a few seconds at N_C ~ 1000).

    The diagonal is rescaled by its numerical trace, which removes the
    rounding left in the analytic normalization. The same factor is applied to
    the off-diagonal.
    """
    if int(n_c) != n_c or n_c < 1:
        raise DomainError(f"n_c must be a positive integer, got {n_c!r}")
    n_c = int(n_c)
    if dps is None:
        log_diag = _log_band_double(n_c, params, 0)
        log_off = _log_band_double(n_c, params, 1)
    else:
        log_diag = _log_band_mp(n_c, params, 0, dps)
        log_off = _log_band_mp(n_c, params, 1, dps)
    log_trace = float(logsumexp(log_diag))
    log_diag = log_diag - log_trace
    log_off = log_off - log_trace
    diag = np.exp(log_diag)
    off = np.exp(log_off)
    diag[diag < UNDERFLOW] = 0.0
    off[off < UNDERFLOW] = 0.0
    mu = float(np.dot(np.arange(n_c + 1), diag) / n_c)
    return PBand(
        n_c=n_c, diag=diag, off=off, mu=mu, log_diag=log_diag, log_off=log_off,
        analytic_trace=math.exp(log_trace),
    )


def _dicke_vector(n_c: int, w: int) -> NDArray[np.float64]:
    weights = np.array([bin(b).count("1") for b in range(2**n_c)])
    vec = (weights == w).astype(np.float64)
    return vec / math.sqrt(math.comb(n_c, w))


def p_entry_oracle(n_c: int, params: ClockParams, w: int, w_prime: int) -> float:
    """``<w|rho_{N_C/2}|w'>`` from the full ``2^N_C``-dimensional product state.

    Applies ``rho = (I + lambda_x X + lambda_z Z)/2`` to every tensor factor of
    the Dicke vector ``|w'>``, projects onto ``|w>``, and divides by the
    probability ``(c1^(N_C+1) - c0^(N_C+1))/(c1 - c0)`` of the maximal-spin outcome.

    Raises:
        DomainError: If ``n_c > 12`` or a weight is out of range.
    """
    if not 1 <= n_c <= 12:
        raise DomainError("the tensor-product oracle is limited to 1 <= n_c <= 12")
    if not (0 <= w <= n_c and 0 <= w_prime <= n_c):
        raise DomainError("Dicke weights must lie in 0..n_c")
    lx, lz = params.lambda_x, params.lambda_z
    rho = 0.5 * np.array([[1.0 + lz, lx], [lx, 1.0 - lz]])
    state = _dicke_vector(n_c, w_prime).reshape((2,) * n_c)
    for axis in range(n_c):
        state = np.moveaxis(np.tensordot(rho, state, axes=([1], [axis])), 0, axis)
    amplitude = float(np.dot(_dicke_vector(n_c, w), state.reshape(-1)))
    c0, c1 = params.c0, params.c1
    max_spin_prob = sum(c1**k * c0 ** (n_c - k) for k in range(n_c + 1))
    return amplitude / max_spin_prob


def r_ratios(band: PBand) -> NDArray[np.float64]:
    """``R_w = P_{w-1,w} / P_{w,w+1}`` for ``w = 1..N_C-1``.

    Computed from the stored logs, so far-tail entries that underflow in
    linear scale still give finite ratios.

    Raises:
        DomainError: If an off-diagonal entry is exactly zero even in log form.
    """
    if not np.all(np.isfinite(band.log_off)):
        raise DomainError("an off-diagonal entry vanished; lambda or N_C is outside the computable range")
    return np.exp(band.log_off[:-1] - band.log_off[1:])


def centered_moment_exact(band: PBand, alpha: int, p: int) -> float:
    """``sum_w ((w - alpha/2)/N_C - mu)^p P_{w-alpha,w}`` with mu from the diagonal."""
    if p < 0:
        raise DomainError("moment order must be non-negative")
    n_c = band.n_c
    if alpha == 0:
        w = np.arange(n_c + 1, dtype=np.float64)
        weights = band.diag
    elif alpha == 1:
        w = np.arange(1, n_c + 1, dtype=np.float64) - 0.5
        weights = band.off
    else:
        raise DomainError("only offsets 0 and 1 are supported")
    return float(np.sum((w / n_c - band.mu) ** p * weights))


def mean_series(n_c: int, params: ClockParams) -> float:
    """Large-N_C form of the diagonal mean of ``w/N_C``: ``(1-C)/2 + (1-lam) C/(2 lam N_C)``."""
    lam, C = params.lam, params.C_in
    return (1.0 - C) / 2.0 + (1.0 - lam) * C / (2.0 * lam * n_c)


def centered_moment_series(n_c: int, params: ClockParams, alpha: int, p: int) -> float:
    """Truncated large-N_C series for the centered moments of the band.

    Supported combinations:
      * ``alpha=0``, ``p`` in 0..4, through ``1/N_C^2``.
      * ``alpha=1`` at an equatorial input, even ``p`` in 0..6, through ``1/N_C^3``.
        Odd ``p`` returns 0 by bit-flip symmetry.
      * ``alpha=1`` otherwise, ``p`` in 0..4, through ``1/N_C^2``.

    Raises:
        DomainError: For any other combination.
    """
    lam = params.lam
    C, S = params.C_in, params.S_in
    n = float(n_c)
    u = 1.0 - lam
    if alpha == 0:
        if p == 0:
            return 1.0
        if p == 1:
            return 0.0
        if p == 2:
            return S**2 / (4 * lam * n) + u * ((C**2 - S**2) + C**2 * lam) / (4 * lam**2 * n**2)
        if p == 3:
            return C * S**2 * (3 - lam**2) / (8 * lam**2 * n**2)
        if p == 4:
            return 3 * S**4 / (16 * lam**2 * n**2)
    elif alpha == 1 and C == 0.0:
        if p % 2 == 1 and p <= 5:
            return 0.0
        if p == 0:
            return (
                1 - 1 / (2 * lam * n) + (-3 + 4 * lam) / (8 * lam**2 * n**2)
                + (-9 + 12 * lam - 10 * lam**2) / (16 * lam**3 * n**3)
            )
        if p == 2:
            return (
                1 / (4 * lam * n) + (-3 + 2 * lam) / (8 * lam**2 * n**2)
                - (3 + 4 * lam**2) / (32 * lam**3 * n**3)
            )
        if p == 4:
            return 3 / (16 * lam**2 * n**2) + (-21 + 12 * lam + 2 * lam**2) / (32 * lam**3 * n**3)
        if p == 6:
            return 15 / (64 * lam**3 * n**3)
    elif alpha == 1:
        if p == 0:
            return (
                1 - 1 / (2 * S**2 * lam * n)
                + (-(C**2) / (2 * S**4) + 1 / (2 * S**2 * lam) - 3 / (8 * S**4 * lam**2)) / n**2
            )
        if p == 1:
            return C * (1 + lam**2) / (4 * S**2 * lam**2 * n**2)
        if p == 2:
            return S**2 / (4 * lam * n) + (-1 / 8 + u * (-1 + (C**2 - S**2) * (2 + lam)) / (8 * lam**2)) / n**2
        if p == 3:
            return C * S**2 * (3 - lam**2) / (8 * lam**2 * n**2)
        if p == 4:
            return 3 * S**4 / (16 * lam**2 * n**2)
    raise DomainError(f"no series available for alpha={alpha}, p={p}")
