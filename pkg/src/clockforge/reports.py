"""Row builders behind the command-line tables.

Every number a subcommand prints comes from one of these functions, so the
command-line layer only parses flags and formats output.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import asymptotic, baselines
from .errors import DomainError
from .matrix_elements import centered_moment_exact, centered_moment_series, p_band
from .protocol import infidelity, is_ppt, output_state
from .schur_stats import (
    ClockParams,
    nc_moment_exact,
    nc_moment_poly,
    nc_negative_moment_series,
    schur_distribution,
    zero_outcome_mass,
)
from .solver import (
    average_infidelity,
    map_outcomes,
    protocol_for_family,
    solve_equatorial_odd_exact,
    solve_optimal_detailed,
    three_angle_residual,
)

__all__ = [
    "SolveSummary",
    "solve_summary",
    "sweep_row",
    "sweep_rows",
    "schur_rows",
    "schur_moment_rows",
    "centered_moment_row",
    "bounds_rows",
    "perturb_rows",
]


_RENAMED = {"theta_in": "theta_in_rad", "theta_out": "theta_out_rad"}


@dataclass(frozen=True)
class SolveSummary:
    family: str
    n_c: int
    lam: float
    theta_in: float
    theta_out: float
    fidelity: float
    infidelity: float
    residual: float
    is_ppt: bool
    lambda_tilde: float
    s: tuple[float, ...]

    def as_dict(self) -> dict:
        d = asdict(self)
        return {("lambda" if k == "lam" else _RENAMED.get(k, k)): v for k, v in d.items()}


def solve_summary(family: str, n_c: int, params: ClockParams, tol: float = 1e-12) -> SolveSummary:
    """Protocol for one outcome plus fidelity, stationarity residual, PPT flag and output Bloch component."""
    band = p_band(n_c, params)
    if family == "exact":
        proto = solve_optimal_detailed(n_c, params, tol, band=band).protocol
    elif family == "exact-odd":
        if not params.is_equatorial:
            raise DomainError("the exact-odd family needs equatorial angles")
        proto = solve_equatorial_odd_exact(n_c, params.lam, band=band)
    else:
        proto = protocol_for_family(family, n_c, params, tol, band=band)
    inf = infidelity(proto, band, params.theta_out)
    res = three_angle_residual(proto, band, params.theta_out)
    return SolveSummary(
        family=family,
        n_c=n_c,
        lam=params.lam,
        theta_in=params.theta_in,
        theta_out=params.theta_out,
        fidelity=1.0 - inf,
        infidelity=inf,
        residual=float(np.max(np.abs(res))) if res.size else 0.0,
        is_ppt=is_ppt(proto),
        lambda_tilde=output_state(proto, band).lambda_tilde(params.theta_out),
        s=tuple(float(v) for v in proto.s),
    )


def _predicted(family: str, params: ClockParams) -> float:
    N = params.N
    if family == "eb":
        return baselines.eb_series(params.lam)(N)
    if family == "discard":
        return baselines.discard_infidelity_factor(params.lam) / N
    if family == "perturb":
        return math.nan
    if family == "order1":
        return asymptotic.infidelity_series(params, 1)(N)
    order = 3 if params.is_equatorial else 2
    return asymptotic.infidelity_series(params, order)(N)


def _lower_bound(params: ClockParams) -> float:
    if params.is_equatorial:
        return asymptotic.equatorial_symmetry_lower_bound(params.N, params.lam)
    return asymptotic.infidelity_factor_lower_bound(params) / params.N


def sweep_row(family: str, params: ClockParams, tol: float = 1e-12) -> dict:
    """Averaged infidelity of one family at one grid point, with its series and the lower bound."""
    if family == "eb":
        if not params.is_equatorial:
            raise DomainError("the eb family is defined at the equator")
        value = baselines.eb_infidelity(params.N, params.lam, jobs=1)[0]
    else:
        value = average_infidelity(params, family, tol, jobs=1)
    return {
        "family": family,
        "N": params.N,
        "lambda": params.lam,
        "theta_in_rad": params.theta_in,
        "theta_out_rad": params.theta_out,
        "infidelity": value,
        "N_times_infidelity": params.N * value,
        "series": _predicted(family, params),
        "lower_bound": _lower_bound(params),
    }


def sweep_rows(
    families: list[str],
    Ns: list[int],
    lams: list[float],
    theta_in: float,
    theta_out: float,
    tol: float = 1e-12,
    jobs: int | None = None,
) -> list[dict]:
    """Rows in the fixed order family, then N, then lambda."""
    args = [
        (family, ClockParams(N, lam, theta_in, theta_out), tol)
        for family in families
        for N in Ns
        for lam in lams
    ]
    return map_outcomes(sweep_row, args, jobs)


def schur_rows(params: ClockParams) -> list[dict]:
    dist = schur_distribution(params)
    return [{"n_c": n, "multiplicity": d, "probability": p} for n, d, p in dist.entries()]


def schur_moment_rows(params: ClockParams) -> list[dict]:
    """Exact moments of ``N_C`` against the polynomials (p = 1..4) and the negative series (p = 1..3).

    Negative moments exclude ``N_C = 0``. Its mass is reported in ``excluded_mass``.
    """
    rows = []
    excluded = zero_outcome_mass(params)
    for p in range(1, 5):
        exact = nc_moment_exact(params, p)
        poly = nc_moment_poly(params, p)
        rows.append({"sign": "+", "p": p, "exact": exact, "approx": poly.value,
                     "residual": exact - poly.value, "bound": poly.envelope, "excluded_mass": 0.0})
    for p in range(1, 4):
        exact = nc_moment_exact(params, p, "-", max_excluded_mass=1.0)
        series = nc_negative_moment_series(params, p)
        rows.append({"sign": "-", "p": p, "exact": exact, "approx": series.value,
                     "residual": exact - series.value, "bound": math.nan, "excluded_mass": excluded})
    return rows


def centered_moment_row(n_c: int, params: ClockParams, alpha: int, p: int) -> dict:
    """Exact centered moment of the band against its truncated series."""
    exact = centered_moment_exact(p_band(n_c, params), alpha, p)
    series = centered_moment_series(n_c, params, alpha, p)
    return {"n_c": n_c, "lambda": params.lam, "alpha": alpha, "p": p,
            "exact": exact, "series": series, "residual": exact - series}


def bounds_rows(params: ClockParams) -> list[dict]:
    """Per-qubit resources, the infidelity-factor bound and the first-order coefficients."""
    res = asymptotic.qubit_resources(params)
    rows = [
        {"quantity": "P_H_input", "value": res.ph},
        {"quantity": "V_H_target", "value": res.vh},
        {"quantity": "infidelity_factor_lower_bound", "value": asymptotic.infidelity_factor_lower_bound(params)},
        {"quantity": "delta1_optimal", "value": asymptotic.infidelity_series(params, 1).delta1},
    ]
    if params.is_equatorial:
        rows.append({"quantity": "delta1_entanglement_breaking", "value": baselines.eb_series(params.lam).delta1})
        rows.append({"quantity": "delta1_discard", "value": baselines.discard_infidelity_factor(params.lam)})
        rows.append({"quantity": "equatorial_lower_bound_at_N",
                     "value": asymptotic.equatorial_symmetry_lower_bound(params.N, params.lam)})
    return rows


def perturb_rows(n_c: int, lam: float, tol: float = 1e-12) -> list[dict]:
    """Perturbative protocol next to the exact equatorial optimum, per ``w``."""
    params = ClockParams(n_c, lam)
    pert = baselines.perturbative_protocol(n_c, params.c0)
    exact = solve_optimal_detailed(n_c, params, tol).protocol
    return [
        {"w": w, "s_perturb": float(a), "s_exact": float(b), "difference": float(a - b)}
        for w, (a, b) in enumerate(zip(pert.s, exact.s))
    ]
