import math

import numpy as np
import pytest
from scipy.optimize import minimize

from clockforge import (
    ClockParams,
    ConvergenceError,
    DomainError,
    ProtocolAngles,
    average_infidelity,
    discarding_protocol,
    fidelity,
    infidelity,
    p_band,
    protocol_order1,
    solve_equatorial_odd_exact,
    solve_optimal,
    three_angle_residual,
)
from clockforge.solver import (
    FAMILIES,
    outcome_infidelity,
    protocol_for_family,
    resolve_jobs,
    solve_optimal_detailed,
)


def _brute_force_fidelity(n_c, params, starts=20):
    """Best fidelity over pinned protocols from a multi-start bounded quasi-Newton search."""
    band = p_band(n_c, params)
    rng = np.random.default_rng(0)

    def loss(x):
        return infidelity(ProtocolAngles.from_values(np.r_[0.0, x, 1.0]), band, params.theta_out)

    best = math.inf
    for _ in range(starts):
        res = minimize(loss, rng.uniform(0, 1, n_c - 1), method="L-BFGS-B", bounds=[(0, 1)] * (n_c - 1),
                       options={"ftol": 1e-15, "gtol": 1e-12})
        best = min(best, res.fun)
    return 1.0 - best


@pytest.mark.parametrize("n_c,params", [
    (3, ClockParams(3, 0.5)),
    (4, ClockParams(4, 0.7, 1.0, 1.3)),
    (5, ClockParams(5, 0.9, 2.0, 0.8)),
])
def test_optimum_beats_brute_force_search(n_c, params):
    proto = solve_optimal(n_c, params)
    f = fidelity(proto, p_band(n_c, params), params.theta_out)
    assert f >= _brute_force_fidelity(n_c, params) - 1e-12


@pytest.mark.parametrize("lam", [0.3, 0.8])
@pytest.mark.parametrize("n_c", [5, 21, 51])
def test_odd_closed_form_equals_coordinate_ascent(n_c, lam):
    params = ClockParams(n_c, lam)
    a = solve_optimal(n_c, params).s
    b = solve_equatorial_odd_exact(n_c, lam).s
    assert np.max(np.abs(a - b)) <= 1e-10


def test_odd_closed_form_high_precision_path():
    a = solve_equatorial_odd_exact(201, 0.6)
    b = solve_equatorial_odd_exact(201, 0.6, dps=40)
    assert np.max(np.abs(a.s - b.s)) <= 1e-10


def test_fidelity_history_is_monotone_and_residual_small():
    params = ClockParams(80, 0.6, 1.1, 1.9)
    rep = solve_optimal_detailed(80, params, tol=1e-12)
    assert np.min(np.diff(rep.fidelity_history)) >= -1e-15
    assert rep.residual <= 1e-11
    assert np.max(np.abs(three_angle_residual(rep.protocol, rep.band, params.theta_out))) <= 1e-11


def test_three_angle_relation_holds_in_the_bulk():
    params = ClockParams(40, 0.7, 1.2, 1.5)
    band = p_band(40, params)
    th = solve_optimal(40, params).theta
    P, Q = band.diag, band.off
    for w in range(15, 26):
        rhs = (math.cos(th[w - 1]) * math.cos(th[w]) * Q[w - 1] - math.sin(th[w]) * math.sin(th[w + 1]) * Q[w]) / (
            2 * math.cos(th[w]) * math.sin(th[w]) * P[w])
        assert rhs == pytest.approx(1 / math.tan(params.theta_out), abs=1e-9)


def test_random_protocol_has_nonzero_residual():
    params = ClockParams(10, 0.5)
    proto = ProtocolAngles.from_values(np.random.default_rng(1).uniform(0, 1, 11))
    assert np.max(np.abs(three_angle_residual(proto, p_band(10, params), params.theta_out))) > 1e-3


@pytest.mark.parametrize("n_c", [1, 2])
def test_small_outcomes(n_c):
    params = ClockParams(n_c, 0.6, 1.0, 1.4)
    proto = solve_optimal(n_c, params)
    assert proto.s[0] == 0.0 and proto.s[-1] == 1.0
    assert fidelity(proto, p_band(n_c, params), params.theta_out) >= _brute_force_fidelity(n_c, params, 3) - 1e-12 \
        if n_c == 2 else proto == discarding_protocol(1)


@pytest.mark.parametrize("n_c", [10, 31])
def test_equatorial_optimum_has_bit_flip_symmetry(n_c):
    s = solve_optimal(n_c, ClockParams(n_c, 0.55)).s
    np.testing.assert_allclose(s + s[::-1], 1.0, atol=1e-10)


def test_unit_purity_matching_angles_gives_discarding():
    params = ClockParams(20, 1.0, 0.9, 0.9)
    proto = solve_optimal(20, params)
    np.testing.assert_array_equal(proto.s, np.arange(21) / 20)


def test_equatorial_random_starts_reach_the_same_optimum():
    params = ClockParams(41, 0.5)
    ref = solve_optimal(41, params).s
    rng = np.random.default_rng(8)
    for _ in range(4):
        start = ProtocolAngles.from_values(rng.uniform(0, 1, 42))
        s = solve_optimal_detailed(41, params, initial=start).protocol.s
        assert np.max(np.abs(s - ref)) <= 1e-9


def test_perturbed_first_order_starts_reach_the_same_optimum():
    params = ClockParams(57, 0.7, 1.0, 1.3)
    ref = solve_optimal_detailed(57, params)
    weighty = ref.band.diag >= 1e-8
    rng = np.random.default_rng(9)
    base = protocol_order1(57, params).s
    for _ in range(4):
        start = ProtocolAngles.from_values(base + rng.normal(0, 0.05, base.size))
        rep = solve_optimal_detailed(57, params, initial=start)
        assert rep.fidelity_history[-1] >= ref.fidelity_history[-1] - 1e-15
        # rows with negligible weight are not determined by the fidelity
        assert np.max(np.abs(rep.protocol.s - ref.protocol.s)[weighty]) <= 1e-6


def test_random_starts_off_equator_never_beat_the_default_start():
    params = ClockParams(57, 0.7, 1.0, 1.3)
    ref = solve_optimal_detailed(57, params).fidelity_history[-1]
    rng = np.random.default_rng(9)
    for _ in range(3):
        start = ProtocolAngles.from_values(rng.uniform(0, 1, 58))
        assert solve_optimal_detailed(57, params, initial=start).fidelity_history[-1] <= ref + 1e-15


def test_steep_case_with_saturated_tail_converges():
    params = ClockParams(300, 0.7, 0.5324695565782548, 1.2234055837884834)
    rep = solve_optimal_detailed(300, params)
    assert rep.residual <= 1e-11
    assert np.any(rep.protocol.s == 1.0) and np.any(rep.protocol.s[1:-1] < 1e-20)


def test_max_sweeps_exhaustion_raises_with_residual():
    with pytest.raises(ConvergenceError) as info:
        solve_optimal(200, ClockParams(200, 0.6, 1.0, 2.0), max_sweeps=1)
    assert info.value.residual > 0


def test_exact_beats_every_other_family():
    params = ClockParams(21, 0.85)
    band = p_band(21, params)
    best = infidelity(solve_optimal(21, params), band, params.theta_out)
    for family in FAMILIES:
        proto = protocol_for_family(family, 21, params, band=band)
        assert best <= infidelity(proto, band, params.theta_out) + 1e-15


def test_zero_outcome_infidelity():
    assert outcome_infidelity("exact", 0, ClockParams(4, 0.5, 1.0, 1.0)) == pytest.approx((1 - math.cos(1.0)) / 2)


def test_average_is_independent_of_worker_count():
    params = ClockParams(40, 0.6)
    assert average_infidelity(params, "exact", jobs=1) == average_infidelity(params, "exact", jobs=2)


def test_worker_count_resolution(monkeypatch):
    monkeypatch.setenv("CLOCKFORGE_JOBS", "3")
    assert resolve_jobs(None) == 3
    assert resolve_jobs(2) == 2
    with pytest.raises(DomainError):
        resolve_jobs(0)


def test_invalid_requests_raise():
    with pytest.raises(DomainError):
        solve_equatorial_odd_exact(10, 0.5)
    with pytest.raises(DomainError):
        solve_optimal(0, ClockParams(1, 0.5))
    with pytest.raises(DomainError):
        solve_optimal(5, ClockParams(5, 0.5), tol=0.0)
    with pytest.raises(DomainError):
        average_infidelity(ClockParams(5, 0.5), "best")
    with pytest.raises(DomainError):
        protocol_for_family("exact-odd", 5, ClockParams(5, 0.5, 1.0, 1.0))
