import math

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from clockforge import (
    ClockParams,
    DomainError,
    ProtocolAngles,
    average_infidelity,
    equatorial_symmetry_lower_bound,
    infidelity,
    infidelity_factor_lower_bound,
    infidelity_series,
    p_band,
    ph_near_pure_bound,
    protocol_order1,
    protocol_order2,
    protocol_order3_equatorial,
    purity_of_coherence_general,
    solve_equatorial_odd_exact,
    solve_optimal,
)
from clockforge.matrix_elements import mean_series
from clockforge.asymptotic import infidelity_series_nc, order2_coefficients, qubit_resources

Z = np.diag([1.0, -1.0])
X = np.array([[0.0, 1.0], [1.0, 0.0]])
Y = np.array([[0.0, -1j], [1j, 0.0]])


def _qubit(lam, theta, phi=0.0):
    n = (math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta))
    return 0.5 * (np.eye(2) + lam * (n[0] * X + n[1] * Y + n[2] * Z))


def _gaps(family, params, sizes, power):
    out = []
    for n in sizes:
        p = params.with_n(n)
        band = p_band(n, p)
        exact = infidelity(solve_optimal(n, p), band, p.theta_out)
        out.append(n**power * (infidelity(family(n, p), band, p.theta_out) - exact))
    return out


def test_headline_coefficient_value():
    assert infidelity_series(ClockParams(3, 0.8), 1).delta1 == pytest.approx(0.140625, abs=1e-15)


@pytest.mark.parametrize("lam,t_in,t_out", [(0.8, math.pi / 2, math.pi / 2), (0.4, 1.0, 2.1), (0.95, 2.5, 0.4)])
def test_first_order_coefficient_saturates_the_coherence_bound(lam, t_in, t_out):
    params = ClockParams(3, lam, t_in, t_out)
    assert infidelity_series(params, 1).delta1 == pytest.approx(infidelity_factor_lower_bound(params), rel=1e-14)


def test_first_order_protocol_gap_is_second_order():
    gaps = _gaps(protocol_order1, ClockParams(1, 0.7, 1.0, 1.3), (100, 200, 400), 1)
    assert 1.6 <= gaps[0] / gaps[1] <= 2.4 and 1.6 <= gaps[1] / gaps[2] <= 2.4


def test_second_order_protocol_gap_is_third_order():
    gaps = _gaps(protocol_order2, ClockParams(1, 0.7, 1.0, 1.3), (100, 200, 400), 2)
    assert 1.6 <= gaps[0] / gaps[1] <= 2.4 and 1.6 <= gaps[1] / gaps[2] <= 2.4


def test_third_order_equatorial_protocol_gap_vanishes_faster_than_cubic():
    gaps = []
    for n in (101, 201, 401):
        band = p_band(n, ClockParams(n, 0.6))
        exact = infidelity(solve_equatorial_odd_exact(n, 0.6), band, math.pi / 2)
        gaps.append(n**3 * (infidelity(protocol_order3_equatorial(n, 0.6), band, math.pi / 2) - exact))
    assert gaps[0] > gaps[1] > gaps[2] > 0 and gaps[1] / gaps[2] >= 3


def _quadratic(n, params, b20):
    b01, _ = order2_coefficients(params)
    z = np.arange(n + 1) / n - mean_series(n, params)
    slope = params.lam * params.S_out**2 / params.S_in**2
    return ProtocolAngles.from_values((1 - params.C_out) / 2 + b01 / n + slope * z + b20 * z**2)


def test_curvature_coefficient_is_needed_for_third_order_gap():
    params = ClockParams(1, 0.7, 1.0, 1.3)
    b20 = order2_coefficients(params)[1]
    good = _gaps(lambda n, p: _quadratic(n, p, b20), params, (200, 400), 2)
    bad = _gaps(lambda n, p: _quadratic(n, p, 1.5 * b20), params, (200, 400), 2)
    assert good[0] / good[1] > 1.6
    assert bad[0] / bad[1] < 1.3 and bad[1] > 5 * good[1]


def test_outcome_series_second_coefficient_matches_exact_general_angle():
    params = ClockParams(1, 0.7, math.pi / 3, 2 * math.pi / 5)
    series = infidelity_series_nc(params, 2)
    assert series.delta2 == pytest.approx(0.0528989, abs=1e-7)
    values = []
    for n in (400, 800):
        p = params.with_n(n)
        exact = infidelity(solve_optimal(n, p), p_band(n, p), p.theta_out)
        values.append(n * n * (exact - series.delta1 / n))
    intercept = 2 * values[1] - values[0]
    assert intercept == pytest.approx(series.delta2, abs=2e-6)


def test_outcome_series_residual_after_second_order_is_cubic():
    params = ClockParams(1, 0.7, 1.0, 1.3)
    series = infidelity_series_nc(params, 2)
    r = []
    for n in (200, 400):
        p = params.with_n(n)
        r.append(infidelity(solve_optimal(n, p), p_band(n, p), p.theta_out) - series(n))
    assert 8 / 1.5 <= r[0] / r[1] <= 8 * 1.5


def test_averaged_equatorial_series_residual_is_fourth_order():
    lam = 0.6
    series = infidelity_series(ClockParams(3, lam), 3)
    r = [average_infidelity(ClockParams(N, lam), "exact-odd", jobs=1) - series(N) for N in (101, 201, 401)]
    assert 16 / 1.5 <= r[0] / r[1] <= 16 * 1.5 and 16 / 1.5 <= r[1] / r[2] <= 16 * 1.5


def test_averaged_general_angle_second_coefficient_reduces_at_equator():
    lam = 0.7
    assert infidelity_series(ClockParams(3, lam), 2).delta2 == pytest.approx(3 * (1 - lam**2) ** 2 / (16 * lam**4))


@pytest.mark.parametrize("N", [21, 101, 201])
def test_symmetry_bound_lies_below_exact_and_saturates(N):
    lam = 0.6
    bound = equatorial_symmetry_lower_bound(N, lam)
    assert bound <= average_infidelity(ClockParams(N, lam), "exact-odd", jobs=1)
    assert N * bound == pytest.approx(infidelity_series(ClockParams(3, lam), 1).delta1, rel=2 / N)


@pytest.mark.parametrize("lam,theta", [(0.3, 0.4), (0.6, 1.1), (0.9, math.pi / 2)])
def test_qubit_purity_of_coherence_closed_form(lam, theta):
    ph = purity_of_coherence_general(_qubit(lam, theta, 0.7), Z)
    assert ph == pytest.approx(qubit_resources(ClockParams(1, lam, theta, theta)).ph, rel=1e-12)


def test_purity_of_coherence_is_additive_on_products():
    a, b = _qubit(0.6, 1.1), _qubit(0.4, 2.0, 0.3)
    joint = purity_of_coherence_general(np.kron(a, b), np.kron(Z, np.eye(2)) + np.kron(np.eye(2), Z))
    assert joint == pytest.approx(purity_of_coherence_general(a, Z) + purity_of_coherence_general(b, Z), rel=1e-12)


@pytest.mark.parametrize("gamma", [0.1, 0.5, 0.9])
def test_purity_of_coherence_decreases_under_dephasing(gamma):
    rho = _qubit(0.7, 1.2, 0.4)
    dephased = rho.copy()
    dephased[0, 1] *= 1 - gamma
    dephased[1, 0] *= 1 - gamma
    assert purity_of_coherence_general(dephased, Z) < purity_of_coherence_general(rho, Z)


def test_purity_of_coherence_is_infinite_for_pure_coherent_states():
    assert purity_of_coherence_general(_qubit(1.0, 1.0), Z) == math.inf
    assert purity_of_coherence_general(_qubit(1.0, 0.0), Z) == 0.0


@pytest.mark.parametrize("delta", [0.01, 0.05, 0.1, 0.3])
def test_near_pure_bound_lies_below_every_qubit_at_that_infidelity(delta):
    a = 1 - 2 * delta
    edge = math.sqrt(1 - a * a) - 1e-9
    best = minimize_scalar(lambda b: purity_of_coherence_general(0.5 * (np.eye(2) + a * X + b * Z), Z),
                           bounds=(-edge, edge), method="bounded")
    bound = ph_near_pure_bound(1.0, delta)
    assert bound <= best.fun
    if delta <= 0.01:
        assert bound == pytest.approx(best.fun, rel=2e-3)


def test_unit_purity_has_no_infidelity_floor():
    assert infidelity_factor_lower_bound(ClockParams(3, 1.0, 1.0, 1.2)) == 0.0
    assert ph_near_pure_bound(1.0, 0.0) == math.inf


def test_invalid_requests_raise():
    with pytest.raises(DomainError):
        infidelity_series(ClockParams(3, 0.5, 1.0, 1.0), 3)
    with pytest.raises(DomainError):
        infidelity_series(ClockParams(3, 0.5), 4)
    with pytest.raises(DomainError):
        protocol_order2(1, ClockParams(1, 0.5))
    with pytest.raises(DomainError):
        ph_near_pure_bound(1.0, 1.5)
    with pytest.raises(DomainError):
        purity_of_coherence_general(np.eye(2), Z)
