import math

import numpy as np
import pytest

from clockforge import (
    ClockParams,
    DomainError,
    ProtocolAngles,
    average_infidelity,
    dissipation,
    eb_infidelity,
    eb_optimal_protocol,
    infidelity,
    is_ppt,
    p_band,
    perfect_conversion_oracle,
    perfect_conversion_probability,
    perturbative_protocol,
    solve_optimal,
)
from clockforge.baselines import (
    discard_infidelity_factor,
    eb_series,
    perfect_conversion_failure,
    perturbative_coefficients,
    purity_of_coherence_qubit,
)
from clockforge.protocol import choi_matrix


@pytest.mark.parametrize("n_c", [1, 4, 17])
def test_flat_protocol_outcome_formula_matches_band_fidelity(n_c):
    params = ClockParams(n_c, 0.7)
    band = p_band(n_c, params)
    direct = infidelity(eb_optimal_protocol(n_c), band, math.pi / 2)
    assert direct == pytest.approx(0.5 * (1 - band.off.sum()), abs=1e-15)


def test_flat_protocol_is_entanglement_breaking():
    proto = eb_optimal_protocol(5)
    assert is_ppt(proto)
    assert np.linalg.eigvalsh(choi_matrix(proto)).min() >= -1e-14


def test_flat_protocol_is_best_constant_protocol():
    params = ClockParams(9, 0.6)
    band = p_band(9, params)
    flat = infidelity(eb_optimal_protocol(9), band, math.pi / 2)
    for c in (0.3, 0.45, 0.55, 0.7):
        assert flat <= infidelity(ProtocolAngles(9, np.full(10, c), pinned=False), band, math.pi / 2)


def test_flat_protocol_series_residual_is_fourth_order():
    lam = 0.7
    r = [eb_infidelity(N, lam, jobs=1)[0] - eb_series(lam)(N) for N in (101, 201, 401)]
    assert 16 / 1.5 <= r[0] / r[1] <= 16 * 1.5 and 16 / 1.5 <= r[1] / r[2] <= 16 * 1.5


def test_flat_protocol_coefficient_value():
    assert eb_series(0.8).delta1 == pytest.approx(0.390625, abs=1e-15)


@pytest.mark.parametrize("t_in,t_out", [(1.0, 0.5), (0.5, 1.0), (2.0, 2.9), (math.pi / 2, math.pi / 3)])
@pytest.mark.parametrize("phi", [0.0, 1.3])
def test_conversion_oracle_matches_closed_form(t_in, t_out, phi):
    prob, fid = perfect_conversion_oracle(t_in, t_out, phi)
    assert prob == pytest.approx(perfect_conversion_probability(t_in, t_out), abs=1e-12)
    assert fid == pytest.approx(1.0, abs=1e-12)


def test_conversion_failure_after_repeats():
    p = perfect_conversion_probability(1.0, 1.4)
    assert perfect_conversion_failure(1.0, 1.4, 5) == pytest.approx((1 - p) ** 5)
    assert perfect_conversion_probability(1.2, 1.2) == 1.0


@pytest.mark.parametrize("n_c", [3, 5, 11])
def test_perturbative_residual_is_third_order(n_c):
    diffs = []
    for c0 in (2e-3, 1e-3):
        exact = solve_optimal(n_c, ClockParams(n_c, 1 - 2 * c0)).s
        diffs.append(np.max(np.abs(perturbative_protocol(n_c, c0).s - exact)))
    assert 8 / 1.5 <= diffs[0] / diffs[1] <= 8 * 1.5


def test_perturbative_zeroth_order_is_discarding():
    f0, _, _ = perturbative_coefficients(7)
    np.testing.assert_allclose(f0, np.arange(8) / 7)


def test_perturbative_protocol_warns_where_second_order_is_undetermined():
    with pytest.warns(UserWarning):
        proto = perturbative_protocol(4, 0.01)
    f0, f1, f2 = perturbative_coefficients(4)
    assert f2 is None
    np.testing.assert_allclose(proto.s, f0 + 0.01 * f1)


def test_qubit_purity_of_coherence_and_discard_factor():
    assert purity_of_coherence_qubit(0.6) == pytest.approx(4 * 0.36 / 0.64)
    assert discard_infidelity_factor(0.5) == pytest.approx(1.0)


def test_discarding_factor_exceeds_optimum():
    lam = 0.8
    N = 201
    discard = average_infidelity(ClockParams(N, lam), "discard", jobs=1)
    assert N * discard == pytest.approx(discard_infidelity_factor(lam), rel=0.1)
    assert discard > average_infidelity(ClockParams(N, lam), "exact-odd", jobs=1)


def test_dissipation_is_positive_and_naive_exceeds_postselected():
    post = dissipation(101, 0.7, "postselected", jobs=1)
    naive = dissipation(101, 0.7, "naive", jobs=1)
    assert 0 < post < naive


def test_invalid_requests_raise():
    with pytest.raises(DomainError):
        eb_optimal_protocol(0)
    with pytest.raises(DomainError):
        perfect_conversion_probability(0.0, 1.0)
    with pytest.raises(DomainError):
        perturbative_protocol(2, 0.01)
    with pytest.raises(DomainError):
        perturbative_protocol(5, 0.2)
    with pytest.raises(DomainError):
        dissipation(11, 1.0)
    with pytest.raises(DomainError):
        dissipation(11, 0.5, "other")
    with pytest.raises(DomainError):
        purity_of_coherence_qubit(1.0)
