"""Optimal distillation protocols for one Schur outcome and their Schur averages.

The fidelity is a smooth function of the interior angles ``theta_1..theta_{N_C-1}``
(the endpoints are pinned to 0 and pi/2). Each angle enters through three
neighbouring terms, so the maximiser is found by exact coordinate ascent on
alternating (even/odd) coordinates, followed by Newton steps on the tridiagonal
stationarity system once the iterate is close. At the equator and odd ``N_C``
the optimum is also available in closed form.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import solve_banded

from .errors import ConvergenceError, DomainError
from .matrix_elements import UNDERFLOW, PBand, p_band
from .protocol import ProtocolAngles, infidelity, output_state
from .schur_stats import ClockParams, schur_distribution

__all__ = [
    "SolveReport",
    "FAMILIES",
    "solve_optimal",
    "solve_optimal_detailed",
    "solve_equatorial_odd_exact",
    "discarding_protocol",
    "three_angle_residual",
    "protocol_for_family",
    "outcome_infidelity",
    "average_infidelity",
    "optimal_lambda_tilde",
]

FAMILIES = ("exact", "exact-odd", "order1", "order2", "order3eq", "discard", "eb", "perturb")
_FAMILY_ALIASES = {"discarding": "discard"}

# Mass below this in the Schur distribution is skipped when averaging.
SKIP_PROBABILITY = 1e-16
_WARMUP_SWEEPS = 3
_SEQUENTIAL_EVERY = 8
_BOUND_EPS = 1e-9
_SNAP_ANGLE = 1e-2
_BACKTRACK_STEPS = 8


@dataclass(frozen=True)
class SolveReport:
    """Result of :func:`solve_optimal_detailed`.

    Attributes:
        protocol: The optimal protocol.
        band: Band the protocol was optimised against.
        residual: Max-norm of :func:`three_angle_residual` at the protocol.
        sweeps: Coordinate sweeps plus Newton steps performed.
        fidelity_history: Fidelity after the start and after every step.
        method: ``"trivial"``, ``"discard"`` or ``"ascent"``.
    """

    protocol: ProtocolAngles
    band: PBand
    residual: float
    sweeps: int
    fidelity_history: tuple[float, ...] = field(default=())
    method: str = "ascent"


def discarding_protocol(n_c: int) -> ProtocolAngles:
    """``s_w = w / N_C``: keep one qubit at random and trace out the rest."""
    if int(n_c) != n_c or n_c < 1:
        raise DomainError(f"n_c must be a positive integer, got {n_c!r}")
    return ProtocolAngles(n_c=int(n_c), s=np.arange(n_c + 1, dtype=np.float64) / n_c)


class _Objective:
    """Row-scaled stationarity system for interior angles of one band.

    Row ``w`` of the gradient is divided by ``P_{w-1,w} + P_{w,w+1} + P_{w,w}``
    so small rows stay representable. Rows where all three entries are below
    the band's underflow level contribute nothing to the fidelity in double
    precision. They are marked inactive, keep their angles, and report a zero
    residual.
    """

    def __init__(self, band: PBand, theta_out: float):
        C, S = math.cos(theta_out), math.sin(theta_out)
        self.C = 0.0 if abs(C) < 1e-15 else C
        self.S = S
        n = band.n_c
        log_a = band.log_off[: n - 1]
        log_b = band.log_off[1:n]
        log_d = band.log_diag[1:n]
        scale = np.logaddexp(np.logaddexp(log_a, log_b), log_d)
        self.active = scale > math.log(UNDERFLOW)
        self.a = np.where(self.active, np.exp(log_a - scale), 0.0)
        self.b = np.where(self.active, np.exp(log_b - scale), 0.0)
        self.d = np.where(self.active, np.exp(log_d - scale), 0.0)
        self.band = band

    def gradient(self, th: NDArray[np.float64]) -> NDArray[np.float64]:
        c, s = np.cos(th), np.sin(th)
        mid = slice(1, -1)
        return -self.C * self.d * np.sin(2 * th[mid]) + self.S * (
            self.a * c[:-2] * c[mid] - self.b * s[mid] * s[2:]
        )

    def jacobian_bands(self, th: NDArray[np.float64]) -> NDArray[np.float64]:
        """Tridiagonal Jacobian of :meth:`gradient` in ``solve_banded`` layout."""
        c, s = np.cos(th), np.sin(th)
        mid = slice(1, -1)
        diag = -2 * self.C * self.d * np.cos(2 * th[mid]) - self.S * (
            self.a * c[:-2] * s[mid] + self.b * s[2:] * c[mid]
        )
        sub = -self.S * self.a * s[:-2] * c[mid]  # d g_w / d theta_{w-1}
        sup = -self.S * self.b * s[mid] * c[2:]  # d g_w / d theta_{w+1}
        diag = np.where(self.active, diag, -1.0)
        m = diag.size
        ab = np.zeros((3, m))
        ab[0, 1:] = sup[:-1]
        ab[1] = diag
        ab[2, :-1] = sub[1:]
        return ab


def _coordinate_maxima(alpha, beta, gamma):
    """Maximise ``alpha sin^2 t + beta sin t + gamma cos t`` over ``t`` in [0, pi/2].

    Vectorised over the coefficient arrays. Stationary points are the roots in
    ``u = tan(t/2)`` of ``-beta u^4 - (4 alpha + 2 gamma) u^3 + (4 alpha - 2 gamma) u + beta``.
    """
    m = alpha.size
    candidates = [np.zeros(m), np.full(m, math.pi / 2)]
    coeffs = np.stack([-beta, -4 * alpha - 2 * gamma, np.zeros(m), 4 * alpha - 2 * gamma, beta], axis=1)
    lead = np.abs(coeffs).max(axis=1)
    regular = np.abs(beta) > 1e-12 * np.maximum(lead, 1e-300)
    roots = np.full((m, 4), np.nan)
    if np.any(regular):
        c = coeffs[regular] / coeffs[regular, :1]
        companion = np.zeros((c.shape[0], 4, 4))
        companion[:, 0, :] = -c[:, 1:]
        companion[:, 1, 0] = companion[:, 2, 1] = companion[:, 3, 2] = 1.0
        eig = np.linalg.eigvals(companion)
        real = np.where(np.abs(eig.imag) <= 1e-9 * (1 + np.abs(eig.real)), eig.real, np.nan)
        roots[regular] = real
    for i in np.flatnonzero(~regular):
        r = np.roots(np.trim_zeros(coeffs[i], "f")) if np.any(coeffs[i]) else np.array([])
        r = r[np.abs(r.imag) <= 1e-9 * (1 + np.abs(r.real))].real
        roots[i, : r.size] = r[:4]
    with np.errstate(invalid="ignore"):
        inside = (roots >= 0.0) & (roots <= 1.0)
    t_roots = np.where(inside, 2 * np.arctan(np.where(inside, roots, 0.0)), np.nan)
    cand = np.concatenate([np.stack(candidates, axis=1), t_roots], axis=1)
    values = alpha[:, None] * np.sin(cand) ** 2 + beta[:, None] * np.sin(cand) + gamma[:, None] * np.cos(cand)
    values = np.where(np.isnan(cand), -np.inf, values)
    best = np.argmax(values, axis=1)
    return cand[np.arange(m), best], values[np.arange(m), best]


def _sweep(obj: _Objective, th: NDArray[np.float64]) -> None:
    """One even-then-odd block coordinate sweep, in place."""
    n = th.size - 1
    for parity in (1, 2):
        w = np.arange(parity, n, 2)
        if w.size == 0:
            continue
        k = w - 1
        alpha = -obj.C * obj.d[k]
        beta = obj.S * obj.a[k] * np.cos(th[w - 1])
        gamma = obj.S * obj.b[k] * np.sin(th[w + 1])
        best, best_val = _coordinate_maxima(alpha, beta, gamma)
        cur = th[w]
        cur_val = alpha * np.sin(cur) ** 2 + beta * np.sin(cur) + gamma * np.cos(cur)
        th[w] = np.where((best_val >= cur_val) & obj.active[k], best, cur)


def _sequential_sweep(obj: _Objective, th: NDArray[np.float64]) -> None:
    """Forward then backward single-coordinate pass, in place.

    Far-tail angles are set mainly by one neighbour (the left one above the
    bulk, the right one below it), so an ordered pass settles both tails at
    once where alternating block sweeps would move two sites per sweep.
    """
    n = th.size - 1
    live = [w for w in range(1, n) if obj.active[w - 1]]
    order = live + live[::-1]
    C, S = obj.C, obj.S
    for w in order:
        k = w - 1
        alpha = -C * obj.d[k]
        beta = S * obj.a[k] * math.cos(th[w - 1])
        gamma = S * obj.b[k] * math.sin(th[w + 1])
        best, best_val = _coordinate_maxima(np.array([alpha]), np.array([beta]), np.array([gamma]))
        cur = th[w]
        if best_val[0] >= alpha * math.sin(cur) ** 2 + beta * math.sin(cur) + gamma * math.cos(cur):
            th[w] = best[0]


def _to_protocol(th: NDArray[np.float64]) -> ProtocolAngles:
    return ProtocolAngles.from_values(np.sin(th) ** 2)


def _initial_angles(n_c: int, params: ClockParams) -> NDArray[np.float64]:
    from .asymptotic import protocol_order1

    return protocol_order1(n_c, params).theta.copy()


def three_angle_residual(proto: ProtocolAngles, band: PBand, theta_out: float) -> NDArray[np.float64]:
    """Scaled stationarity defect at every interior ``w = 1..N_C-1``.

    Row ``w`` is ``dF/dtheta_w`` divided by ``P_{w-1,w} + P_{w,w+1} + P_{w,w}``,
    with the component pointing out of [0, pi/2] dropped at a bound. Away from
    the bounds it vanishes exactly where
    ``2 cos(theta_w) sin(theta_w) P_{w,w} cot(theta_out)`` equals
    ``cos(theta_{w-1}) cos(theta_w) P_{w-1,w} - sin(theta_w) sin(theta_{w+1}) P_{w,w+1}``.
    """
    if proto.n_c != band.n_c:
        raise DomainError("protocol and band sizes differ")
    if proto.n_c < 2:
        return np.zeros(0)
    return _kkt_defect(_Objective(band, theta_out), proto.theta)


def _fid(proto_th: NDArray[np.float64], band: PBand, theta_out: float) -> float:
    return 1.0 - infidelity(_to_protocol(proto_th), band, theta_out)


def solve_optimal_detailed(
    n_c: int,
    params: ClockParams,
    tol: float = 1e-12,
    max_sweeps: int = 100_000,
    band: PBand | None = None,
    initial: ProtocolAngles | None = None,
) -> SolveReport:
    """Maximise the fidelity over pinned protocols and report how it went.

    Starts from ``initial`` (default: the first-order asymptotic protocol),
    runs exact block coordinate ascent, and after a few sweeps tries Newton
    steps on the stationarity system. A Newton step is kept only if it raises
    the fidelity (to rounding) and lowers the residual. Stops when the largest
    change of any ``s_w`` is below ``tol`` and the residual is below ``10 tol``,
    or as soon as a Newton step brings the residual to ``tol``. The second
    rule is needed in the far tails, where the stationarity system is so
    ill-conditioned that rounding noise alone moves ``s_w`` by more than ``tol``.

    Raises:
        DomainError: On invalid sizes or tolerance.
        ConvergenceError: If ``max_sweeps`` is exhausted.
    """
    if int(n_c) != n_c or n_c < 1:
        raise DomainError(f"n_c must be a positive integer, got {n_c!r}")
    if not tol > 0:
        raise DomainError("tol must be positive")
    n_c = int(n_c)
    if band is None:
        band = p_band(n_c, params)
    elif band.n_c != n_c:
        raise DomainError("band size does not match n_c")
    theta_out = params.theta_out
    if n_c == 1:
        proto = discarding_protocol(1)
        f = 1.0 - infidelity(proto, band, theta_out)
        return SolveReport(proto, band, 0.0, 0, (f,), "trivial")
    if params.lam == 1.0 and params.theta_in == params.theta_out:
        proto = discarding_protocol(n_c)
        res = float(np.max(np.abs(three_angle_residual(proto, band, theta_out))))
        f = 1.0 - infidelity(proto, band, theta_out)
        return SolveReport(proto, band, res, 0, (f,), "discard")

    obj = _Objective(band, theta_out)
    if initial is not None:
        if initial.n_c != n_c:
            raise DomainError("initial protocol size does not match n_c")
        th = initial.theta.copy()
    else:
        th = _initial_angles(n_c, params)
    th[0], th[-1] = 0.0, math.pi / 2
    history = [_fid(th, band, theta_out)]
    residual = float(np.max(np.abs(_kkt_defect(obj, th))))
    steps = 0
    while steps < max_sweeps:
        steps += 1
        s_before = np.sin(th) ** 2
        f_before = history[-1]
        candidate = None
        if steps > _WARMUP_SWEEPS:
            best = None
            for trial in _newton_steps(obj, th):
                f_new = _fid(trial, band, theta_out)
                r_new = float(np.max(np.abs(_kkt_defect(obj, trial))))
                if f_new >= f_before - 4e-16 and (r_new < residual or r_new <= tol):
                    best = (trial, f_new, r_new)
                    break
            if best is not None:
                candidate, f_new, r_new = best
                th = candidate
                if r_new <= tol:
                    history.append(f_new)
                    return SolveReport(_to_protocol(th), band, r_new, steps, tuple(history), "newton")
        if candidate is None:
            if steps <= _WARMUP_SWEEPS or steps % _SEQUENTIAL_EVERY == 0:
                _sequential_sweep(obj, th)
            else:
                _sweep(obj, th)
        history.append(_fid(th, band, theta_out))
        residual = float(np.max(np.abs(_kkt_defect(obj, th))))
        change = float(np.max(np.abs(np.sin(th) ** 2 - s_before)))
        if change < tol and residual < 10 * tol:
            return SolveReport(_to_protocol(th), band, residual, steps, tuple(history), "ascent")
    raise ConvergenceError("coordinate ascent did not converge", residual, steps)


def _free_mask(obj: _Objective, th: NDArray[np.float64], g: NDArray[np.float64]) -> NDArray[np.bool_]:
    """Active interior angles not held at a bound by an outward-pointing gradient."""
    inner = th[1:-1]
    held = ((inner <= _BOUND_EPS) & (g <= 0)) | ((inner >= math.pi / 2 - _BOUND_EPS) & (g >= 0))
    return obj.active & ~held


def _restricted_bands(obj: _Objective, th: NDArray[np.float64], free: NDArray[np.bool_]) -> NDArray[np.float64]:
    """Jacobian bands with frozen rows and columns replaced by ``-1`` on the diagonal."""
    ab = obj.jacobian_bands(th)
    ab[1] = np.where(free, ab[1], -1.0)
    ab[0, 1:] = np.where(free[:-1] & free[1:], ab[0, 1:], 0.0)
    ab[2, :-1] = np.where(free[:-1] & free[1:], ab[2, :-1], 0.0)
    return ab


def _is_negative_definite(ab: NDArray[np.float64]) -> bool:
    """Inertia test for a row-scaled symmetric tridiagonal matrix in banded layout.

    The row-scaled Jacobian is ``D H`` with ``D`` positive diagonal and ``H``
    symmetric. The symmetric tridiagonal matrix with the same diagonal and
    off-diagonals ``sqrt(J_{i,i+1} J_{i+1,i})`` is congruent to ``H``, so its LDL^T
    pivots carry the inertia of ``H``.
    """
    diag = ab[1]
    off_sq = ab[0, 1:] * ab[2, :-1]
    if np.any(off_sq < -1e-300):
        return False
    pivot = diag[0]
    if not pivot < 0:
        return False
    for k in range(1, diag.size):
        pivot = diag[k] - off_sq[k - 1] / pivot
        if not pivot < 0:
            return False
    return True


def _is_local_maximum(obj: _Objective, th: NDArray[np.float64]) -> bool:
    """Second-order test on the free angles (bound-held angles are frozen)."""
    g = obj.gradient(th)
    return _is_negative_definite(_restricted_bands(obj, th, _free_mask(obj, th, g)))


def _newton_steps(obj: _Objective, th: NDArray[np.float64]):
    """Projected Newton trial points, longest step first.

    Directions come from ``th`` and from ``th`` with angles within
    ``_SNAP_ANGLE`` of a bound moved onto it. Snapping guesses the active set
    when neighbours creep into a corner, where plain ascent is sublinear and
    the free Hessian is indefinite. Each direction is backtracked by halving,
    and every trial point is clipped to [0, pi/2].
    """
    directions = []
    for snap in (0.0, _SNAP_ANGLE):
        start = th.copy()
        inner = start[1:-1]
        inner[inner < snap] = 0.0
        inner[inner > math.pi / 2 - snap] = math.pi / 2
        delta = _projected_newton(obj, start)
        if delta is not None:
            directions.append((start, delta))
    for k in range(_BACKTRACK_STEPS):
        for start, delta in directions:
            trial = start.copy()
            trial[1:-1] = np.clip(start[1:-1] + 0.5**k * delta, 0.0, math.pi / 2)
            yield trial


def _projected_newton(obj: _Objective, th: NDArray[np.float64]) -> NDArray[np.float64] | None:
    """Newton direction on the free angles (zero on the frozen ones).

    Returns None unless the Hessian restricted to the free angles is negative
    definite, so steps are only taken inside the basin of a local maximum.
    """
    g = obj.gradient(th)
    free = _free_mask(obj, th, g)
    ab = _restricted_bands(obj, th, free)
    if not _is_negative_definite(ab):
        return None
    try:
        delta = solve_banded((1, 1), ab, -np.where(free, g, 0.0))
    except (np.linalg.LinAlgError, ValueError):
        return None
    if not np.all(np.isfinite(delta)):
        return None
    return delta


def _kkt_defect(obj: _Objective, th: NDArray[np.float64]) -> NDArray[np.float64]:
    g = obj.gradient(th)
    inner = th[1:-1]
    g[(inner <= 0.0) & (g < 0)] = 0.0
    g[(inner >= math.pi / 2) & (g > 0)] = 0.0
    return g


def solve_optimal(
    n_c: int, params: ClockParams, tol: float = 1e-12, max_sweeps: int = 100_000
) -> ProtocolAngles:
    """Fidelity-maximising protocol for outcome ``n_c``. See :func:`solve_optimal_detailed`."""
    return solve_optimal_detailed(n_c, params, tol, max_sweeps).protocol


def solve_equatorial_odd_exact(
    n_c: int, lam: float, band: PBand | None = None, dps: int | None = None
) -> ProtocolAngles:
    """Closed-form optimum at the equator for odd ``N_C = 2n + 1``.

    ``sin(theta_1)`` is the alternating product of ``R_w = P_{w-1,w}/P_{w,w+1}``
    over ``w = 1..n``. Later angles follow from
    ``sin(theta_{w+1}) = cos(theta_{w-1}) R_w / tan(theta_w)``, run in log form
    up to the middle. The upper half is ``s_{N_C-w} = 1 - s_w``.

    Raises:
        DomainError: If ``n_c`` is not odd and at least 3, or the recurrence
            leaves [0, 1] (a sign of lost precision; retry with ``dps``).
    """
    if int(n_c) != n_c or n_c < 3 or n_c % 2 == 0:
        raise DomainError(f"n_c must be an odd integer >= 3, got {n_c!r}")
    n_c = int(n_c)
    if band is None:
        band = p_band(n_c, ClockParams(n_c, lam), dps=dps)
    n = (n_c - 1) // 2
    log_r = band.log_off[:-1] - band.log_off[1:]  # log R_w for w = 1..N_C-1
    signs = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    u = np.empty(n + 2)  # u[w] = log s_w for w = 0..n+1
    v = np.empty(n + 2)  # v[w] = log(1 - s_w)
    u[0], v[0] = -np.inf, 0.0
    u[1] = 2 * float(np.dot(signs, log_r[:n]))
    for w in range(1, n + 1):
        if not u[w] <= 1e-12:
            raise DomainError(f"recurrence left [0, 1] at w={w}; increase precision")
        u[w] = min(u[w], 0.0)
        v[w] = math.log1p(-math.exp(u[w])) if u[w] < 0 else -np.inf
        u[w + 1] = v[w - 1] + v[w] - u[w] + 2 * log_r[w - 1]
    s = np.empty(n_c + 1)
    s[: n + 1] = np.exp(u[: n + 1])
    s[n + 1 :] = 1.0 - s[n::-1]
    mismatch = abs(math.exp(u[n + 1]) - s[n + 1])
    if not mismatch < 1e-6:
        raise DomainError(f"closed form inconsistent with symmetry (mismatch {mismatch:.2e})")
    return ProtocolAngles.from_values(s)


def protocol_for_family(
    family: str, n_c: int, params: ClockParams, tol: float = 1e-12, band: PBand | None = None
) -> ProtocolAngles:
    """Protocol of a named family for outcome ``n_c``.

    Families needing more qubits than available fall back to the only pinned
    protocol (``n_c = 1``) or to discarding (the perturbative family at ``n_c = 2``).
    """
    family = _FAMILY_ALIASES.get(family, family)
    if family not in FAMILIES:
        raise DomainError(f"unknown protocol family {family!r}")
    if family == "eb":
        from .baselines import eb_optimal_protocol

        return eb_optimal_protocol(n_c)
    if n_c == 1 or family == "discard":
        return discarding_protocol(n_c)
    if family == "exact":
        return solve_optimal_detailed(n_c, params, tol, band=band).protocol
    if family == "exact-odd":
        if not params.is_equatorial:
            raise DomainError("the exact-odd family needs equatorial angles")
        if n_c % 2 == 1:
            return solve_equatorial_odd_exact(n_c, params.lam, band=band)
        return solve_optimal_detailed(n_c, params, tol, band=band).protocol
    from . import asymptotic

    if family == "order1":
        return asymptotic.protocol_order1(n_c, params)
    if family == "order2":
        return asymptotic.protocol_order2(n_c, params)
    if family == "order3eq":
        if not params.is_equatorial:
            raise DomainError("the order3eq family needs equatorial angles")
        return asymptotic.protocol_order3_equatorial(n_c, params.lam)
    from .baselines import perturbative_protocol

    if n_c == 2:
        return discarding_protocol(2)
    return perturbative_protocol(n_c, params.c0)


def outcome_infidelity(
    family: str, n_c: int, params: ClockParams, tol: float = 1e-12, dps: int | None = None
) -> float:
    """Infidelity of one family's protocol for Schur outcome ``n_c``.

    For ``n_c = 0`` no coherence survives. The best time-invariant output is
    then the diagonal state closest to the target, with infidelity ``(1 - |C_out|)/2``.
    """
    if n_c == 0:
        return (1.0 - abs(params.C_out)) / 2.0
    band = p_band(n_c, params, dps=dps)
    proto = protocol_for_family(family, n_c, params, tol, band=band)
    return infidelity(proto, band, params.theta_out)


def optimal_lambda_tilde(n_c: int, params: ClockParams, tol: float = 1e-12) -> float:
    """Output Bloch component ``2F - 1`` of the exact optimum for outcome ``n_c``."""
    if n_c == 0:
        return abs(params.C_out)
    band = p_band(n_c, params)
    family = "exact-odd" if params.is_equatorial else "exact"
    proto = protocol_for_family(family, n_c, params, tol, band=band)
    return output_state(proto, band).lambda_tilde(params.theta_out)


def resolve_jobs(jobs: int | None) -> int:
    """Worker count from the argument, then ``CLOCKFORGE_JOBS``, then the CPU count."""
    if jobs is None:
        env = os.environ.get("CLOCKFORGE_JOBS")
        jobs = int(env) if env else (os.cpu_count() or 1)
    if jobs < 1:
        raise DomainError("jobs must be at least 1")
    return jobs


def map_outcomes(func, args: list[tuple], jobs: int | None = None) -> list:
    """Apply ``func(*a)`` to each tuple, in order, optionally in a process pool."""
    jobs = resolve_jobs(jobs)
    if jobs == 1 or len(args) < 2:
        return [func(*a) for a in args]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(func, *a) for a in args]
        return [f.result() for f in futures]


def average_infidelity(
    params: ClockParams,
    protocol_family: str = "exact",
    tol: float = 1e-12,
    jobs: int | None = None,
) -> float:
    """Schur-averaged infidelity of a protocol family on ``params.N`` copies.

    Outcomes with probability below ``1e-16`` are skipped. Per-outcome work
    may run in parallel, and the sum is always taken in increasing ``N_C``.
    """
    family = _FAMILY_ALIASES.get(protocol_family, protocol_family)
    if family not in FAMILIES:
        raise DomainError(f"unknown protocol family {protocol_family!r}")
    n_c, prob, _ = schur_distribution(params).significant(SKIP_PROBABILITY)
    values = map_outcomes(outcome_infidelity, [(family, int(k), params, tol) for k in n_c], jobs)
    return float(np.dot(prob, values))
