"""Distillation protocols after Schur sampling and their exact figures of merit.

A protocol on the ``N_C``-qubit symmetric subspace is fixed by angles
``theta_w`` (``w = 0..N_C``). It acts through the Kraus operators
``K_w = cos(theta_{w-1}) |0><w-1| + sin(theta_w) |1><w|`` for ``w = 0..N_C+1``,
with out-of-range terms dropped. Protocols are stored as ``s_w = sin^2 theta_w``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import DomainError
from .matrix_elements import PBand

__all__ = [
    "ProtocolAngles",
    "ChoiBlocks",
    "OutputQubit",
    "fidelity",
    "infidelity",
    "output_state",
    "choi_blocks",
    "choi_matrix",
    "kraus_operators",
    "apply_channel",
    "is_ppt",
    "ti_covariance_residual",
    "stinespring_rotations",
    "format_real",
    "protocol_to_json",
    "protocol_from_json",
    "protocol_to_csv",
    "protocol_from_csv",
]

SCHEMA_VERSION = 1


@dataclass(frozen=True, eq=False)
class ProtocolAngles:
    """Protocol stored as ``s_w = sin^2(theta_w)`` for ``w = 0..N_C``.

    Attributes:
        n_c: Number of qubits the protocol acts on.
        s: Array of length ``n_c + 1`` with entries in [0, 1].
        pinned: When True (the default), ``s_0 = 0`` and ``s_{N_C} = 1`` are
            enforced. Relaxed protocols such as the flat measure-and-prepare
            family set it to False.
    """

    n_c: int
    s: NDArray[np.float64]
    pinned: bool = True

    def __post_init__(self):
        s = np.array(self.s, dtype=np.float64)
        if s.shape != (self.n_c + 1,):
            raise DomainError(f"s must have length n_c + 1 = {self.n_c + 1}, got shape {s.shape}")
        if np.any(~np.isfinite(s)) or np.any(s < 0.0) or np.any(s > 1.0):
            raise DomainError("every s_w must lie in [0, 1]")
        if self.pinned and (s[0] != 0.0 or s[-1] != 1.0):
            raise DomainError("pinned protocols need s_0 = 0 and s_N_C = 1")
        s.setflags(write=False)
        object.__setattr__(self, "s", s)

    @classmethod
    def from_values(cls, s, pinned: bool = True) -> "ProtocolAngles":
        """Clamp to [0, 1], overwrite the endpoints if pinned, and build."""
        s = np.clip(np.array(s, dtype=np.float64), 0.0, 1.0)
        if pinned:
            s[0], s[-1] = 0.0, 1.0
        return cls(n_c=s.size - 1, s=s, pinned=pinned)

    @property
    def theta(self) -> NDArray[np.float64]:
        return np.arcsin(np.sqrt(self.s))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ProtocolAngles):
            return NotImplemented
        return self.n_c == other.n_c and self.pinned == other.pinned and np.array_equal(self.s, other.s)


@dataclass(frozen=True)
class ChoiBlocks:
    """Block structure of the Choi matrix of a protocol.

    Attributes:
        n_c: Number of input qubits.
        diag_pairs: Shape ``(N_C+1, 2)`` with ``(cos^2 theta_w, sin^2 theta_w)``.
        off: ``A_w`` for ``w = 1..N_C``, the coherence between the input pair
            ``(w-1, w)`` mapped onto ``|0><1|``.
    """

    n_c: int
    diag_pairs: NDArray[np.float64]
    off: NDArray[np.float64]


@dataclass(frozen=True)
class OutputQubit:
    """Output qubit ``[[p00, x], [x, p11]]`` in the computational basis."""

    p00: float
    p11: float
    x: float

    def matrix(self) -> NDArray[np.float64]:
        return np.array([[self.p00, self.x], [self.x, self.p11]])

    def fidelity_with(self, theta_out: float) -> float:
        """Overlap with ``cos(theta/2)|0> + sin(theta/2)|1>``."""
        c, s = math.cos(theta_out / 2), math.sin(theta_out / 2)
        return c * c * self.p00 + s * s * self.p11 + 2 * c * s * self.x

    def lambda_tilde(self, theta_out: float) -> float:
        """Bloch-vector component along the target direction (equals 2F - 1)."""
        return math.cos(theta_out) * (self.p00 - self.p11) + 2 * math.sin(theta_out) * self.x


def _check_sizes(proto: ProtocolAngles, band: PBand) -> None:
    if proto.n_c != band.n_c:
        raise DomainError(f"protocol acts on {proto.n_c} qubits but the band has N_C = {band.n_c}")


def _coherence_factors(s: NDArray[np.float64]) -> NDArray[np.float64]:
    """``cos(theta_{w-1}) sin(theta_w)`` for ``w = 1..N_C``."""
    return np.sqrt((1.0 - s[:-1]) * s[1:])


def output_state(proto: ProtocolAngles, band: PBand) -> OutputQubit:
    """Output qubit of the protocol applied to the Schur-sampled state."""
    _check_sizes(proto, band)
    p11 = float(np.dot(band.diag, proto.s))
    x = float(np.dot(band.off, _coherence_factors(proto.s)))
    return OutputQubit(p00=1.0 - p11, p11=p11, x=x)


def infidelity(proto: ProtocolAngles, band: PBand, theta_out: float) -> float:
    """``1 - F``, accumulated directly to avoid cancellation against 1."""
    _check_sizes(proto, band)
    C, S = math.cos(theta_out), math.sin(theta_out)
    if abs(C) < 1e-15:
        C = 0.0
    p11 = float(np.dot(band.diag, proto.s))
    x = float(np.dot(band.off, _coherence_factors(proto.s)))
    return (1.0 - C) / 2.0 + C * p11 - S * x


def fidelity(proto: ProtocolAngles, band: PBand, theta_out: float) -> float:
    """Fidelity of the output with the target at polar angle ``theta_out``."""
    return 1.0 - infidelity(proto, band, theta_out)


def choi_blocks(proto: ProtocolAngles) -> ChoiBlocks:
    """Choi blocks with the completely-positive-saturating coherences ``A_w``."""
    s = proto.s
    pairs = np.column_stack([1.0 - s, s])
    return ChoiBlocks(n_c=proto.n_c, diag_pairs=pairs, off=_coherence_factors(s))


def kraus_operators(proto: ProtocolAngles) -> list[NDArray[np.float64]]:
    """The ``N_C + 2`` Kraus operators as ``2 x (N_C+1)`` matrices."""
    n = proto.n_c
    cos_t, sin_t = np.sqrt(1.0 - proto.s), np.sqrt(proto.s)
    ops = []
    for w in range(n + 2):
        k = np.zeros((2, n + 1))
        if w >= 1:
            k[0, w - 1] = cos_t[w - 1]
        if w <= n:
            k[1, w] = sin_t[w]
        ops.append(k)
    return ops


def apply_channel(proto: ProtocolAngles, rho: NDArray) -> NDArray:
    """Apply the protocol to a density matrix on the symmetric subspace."""
    return sum(k @ rho @ k.T for k in kraus_operators(proto))


def choi_matrix(proto: ProtocolAngles) -> NDArray[np.float64]:
    """Dense Choi matrix ``sum_ij |i><j| (x) E(|i><j|)`` of size ``2(N_C+1)``."""
    n = proto.n_c + 1
    ops = kraus_operators(proto)
    choi = np.zeros((n * 2, n * 2))
    for k in ops:
        vec = k.T.reshape(-1)  # index (i, out) -> i*2 + out
        choi += np.outer(vec, vec)
    return choi


def is_ppt(proto: ProtocolAngles, atol: float = 1e-15) -> bool:
    """Whether the Choi matrix has a positive partial transpose.

    With the coherences ``A_w = cos(theta_{w-1}) sin(theta_w)`` this holds iff
    ``cos(theta_{w-1}) sin(theta_w) <= sin(theta_{w-1}) cos(theta_w)`` for every
    ``w``, i.e. iff ``s`` is non-increasing.
    """
    s = proto.s
    lhs = np.sqrt((1.0 - s[:-1]) * s[1:])
    rhs = np.sqrt(s[:-1] * (1.0 - s[1:]))
    return bool(np.all(lhs <= rhs + atol))


def ti_covariance_residual(
    proto: ProtocolAngles,
    t: float,
    rho: NDArray | None = None,
    seed: int | None = None,
) -> float:
    """Max-norm of ``E(U_t rho U_t^dag) - V_t E(rho) V_t^dag``.

    ``U_t`` evolves the input with energy ``N_C - 2w`` on Dicke state ``|w>`` and
    ``V_t`` evolves the output qubit under ``Z``. ``rho`` defaults to a random
    density matrix on the symmetric subspace drawn from ``seed``.

    Raises:
        DomainError: If ``N_C > 12``.
    """
    n = proto.n_c
    if n > 12:
        raise DomainError("dense covariance check is limited to n_c <= 12")
    if rho is None:
        rng = np.random.default_rng(seed)
        g = rng.normal(size=(n + 1, n + 1)) + 1j * rng.normal(size=(n + 1, n + 1))
        rho = g @ g.conj().T
        rho /= np.trace(rho)
    energies = n - 2.0 * np.arange(n + 1)
    u = np.exp(-1j * t * energies)
    v = np.exp(-1j * t * np.array([1.0, -1.0]))
    evolved_in = u[:, None] * rho * u.conj()[None, :]
    out = apply_channel(proto, rho)
    lhs = apply_channel(proto, evolved_in)
    rhs = v[:, None] * out * v.conj()[None, :]
    return float(np.max(np.abs(lhs - rhs)))


def stinespring_rotations(proto: ProtocolAngles) -> NDArray[np.float64]:
    """Per-energy-sector rotation angles ``theta_w`` of the one-ancilla dilation.

    Sector ``w`` couples the system level ``|w>`` (ancilla and output in the
    matching energy state) through a real 2x2 rotation by ``theta_w``. The
    unused top sector is left unspecified.
    """
    return proto.theta


def format_real(value: float) -> str:
    """Fixed 17-significant-digit rendering, enough for a bit-exact round trip."""
    return f"{float(value):.17g}"


def protocol_to_json(proto: ProtocolAngles) -> str:
    """``{"schema": 1, "n_c": ..., "s": [...]}`` with 17-digit reals."""
    body = ", ".join(format_real(v) for v in proto.s)
    return f'{{"schema": {SCHEMA_VERSION}, "n_c": {proto.n_c}, "s": [{body}]}}'


def protocol_from_json(text: str) -> ProtocolAngles:
    data = json.loads(text)
    s = np.array(data["s"], dtype=np.float64)
    if len(s) != data["n_c"] + 1:
        raise DomainError("length of s does not match n_c")
    return ProtocolAngles(n_c=int(data["n_c"]), s=s, pinned=bool(s[0] == 0.0 and s[-1] == 1.0))


def protocol_to_csv(proto: ProtocolAngles) -> str:
    lines = ["w,s_w"] + [f"{w},{format_real(v)}" for w, v in enumerate(proto.s)]
    return "\n".join(lines) + "\n"


def protocol_from_csv(text: str) -> ProtocolAngles:
    rows = [line.split(",") for line in text.strip().splitlines()]
    if rows[0] != ["w", "s_w"]:
        raise DomainError("expected the CSV header 'w,s_w'")
    s = np.array([float(v) for _, v in rows[1:]])
    return ProtocolAngles(n_c=s.size - 1, s=s, pinned=bool(s[0] == 0.0 and s[-1] == 1.0))
