import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from owc.allocation import (
    AllocationProblem,
    Assignment,
    SinrMode,
    UserAssignment,
    brute_force_oracle,
    data_rate,
    evaluate_assignment,
    optimize,
    received_current,
    sinr,
    validate_assignment,
    write_allocation_report,
)
from owc.errors import AllocationError
from owc.scene import Wavelength

RED, YELLOW, GREEN, BLUE = Wavelength.RED, Wavelength.YELLOW, Wavelength.GREEN, Wavelength.BLUE

AP_POWERS = [9.6, 6.0, 3.6, 3.6]
RESPONSIVITIES = [0.4, 0.35, 0.3, 0.2]


def problem_from(gains, n_wavelengths=4, sigma=1e-7, mode=SinrMode.LINEAR, scale=1.0):
    gains = np.asarray(gains, dtype=float)
    n_aps = gains.shape[1]
    powers = np.tile(np.asarray(AP_POWERS[:n_wavelengths]) * scale, (n_aps, 1))
    return AllocationProblem.from_gains(
        gains, powers, np.asarray(RESPONSIVITIES[:n_wavelengths]), sigma, mode=mode
    )


def choice(ap, wavelength, element=1):
    return UserAssignment(ap_id=ap, wavelength=wavelength, element_id=element)


# ──────────────────────── Correntes e SINR ────────────────────────


def test_received_current_example():
    problem = problem_from([[[1.5915e-6]]])
    assert received_current(problem, 1, 1, RED, 1) == pytest.approx(6.111e-6, rel=1e-3)


def test_received_current_ratio_between_colours():
    problem = problem_from([[[2e-6]]])
    red = received_current(problem, 1, 1, RED, 1)
    blue = received_current(problem, 1, 1, BLUE, 1)
    assert blue / red == pytest.approx(0.1875)


def test_received_current_zero_gain_and_missing_key():
    problem = problem_from([[[0.0]]])
    assert received_current(problem, 1, 1, RED, 1) == 0.0
    with pytest.raises(AllocationError):
        received_current(problem, 1, 2, RED, 1)
    with pytest.raises(AllocationError):
        received_current(problem, 1, 1, RED, 2)


def test_lone_user_without_other_light():
    # Só o AP servidor ilumina o elemento: SINR = I_sig / σ
    sigma = 3.161e-7
    gain = 3.161e-6 / (9.6 * 0.4)
    problem = problem_from([[[gain], [0.0]]], sigma=sigma)
    breakdown = sinr(problem, Assignment({1: choice(1, RED)}), 1)
    assert breakdown.interference == 0.0
    assert breakdown.background == 0.0
    assert breakdown.sinr == pytest.approx(10.0)
    assert breakdown.sinr_db == pytest.approx(10.0)


def test_unassigned_colour_is_background_only():
    problem = problem_from([[[1e-6], [4e-7]], [[3e-7], [1e-6]]])
    assignment = Assignment({1: choice(1, BLUE), 2: choice(2, RED)})
    breakdown = sinr(problem, assignment, 1)
    assert breakdown.interference == 0.0
    assert breakdown.background > 0.0


def test_shared_colour_hand_computed():
    gains = [[[1e-6], [4e-7]], [[3e-7], [1e-6]]]
    sigma = 2e-7
    problem = problem_from(gains, sigma=sigma)
    assignment = Assignment({1: choice(1, RED), 2: choice(2, RED)})

    red = 9.6 * 0.4
    user1 = sinr(problem, assignment, 1)
    assert user1.signal == pytest.approx(red * 1e-6)
    assert user1.interference == pytest.approx(red * 4e-7)
    assert user1.background == 0.0
    assert user1.sinr == pytest.approx(1e-6 * red / (4e-7 * red + sigma))

    user2 = sinr(problem, assignment, 2)
    assert user2.sinr == pytest.approx(1e-6 * red / (3e-7 * red + sigma))


def test_removing_interferer_moves_light_to_background():
    problem = problem_from([[[1e-6], [4e-7]], [[3e-7], [1e-6]]])
    full = Assignment({1: choice(1, RED), 2: choice(2, RED)})
    with_both = sinr(problem, full, 1)
    alone = sinr(problem, full.without(2), 1)
    assert alone.interference == 0.0
    assert alone.background == pytest.approx(with_both.interference)
    assert alone.sinr >= with_both.sinr


def test_squared_mode():
    gains = [[[1e-6], [4e-7]], [[3e-7], [1e-6]]]
    sigma = 2e-7
    problem = problem_from(gains, sigma=sigma, mode=SinrMode.SQUARED)
    red = 9.6 * 0.4
    breakdown = sinr(problem, Assignment({1: choice(1, RED), 2: choice(2, RED)}), 1)
    expected = (red * 1e-6) ** 2 / ((red * 4e-7) ** 2 + sigma**2)
    assert breakdown.sinr == pytest.approx(expected)


# ──────────────────────── Validação ────────────────────────


def test_validate_reports_shared_pair_and_bad_element():
    problem = AllocationProblem.from_gains(
        np.full((2, 4, 9), 1e-6), np.full((4, 4), 9.6), np.array(RESPONSIVITIES), 1e-6
    )
    assert validate_assignment(problem, Assignment({1: choice(4, RED, 5), 2: choice(3, RED, 5)})) == []

    shared = validate_assignment(problem, Assignment({1: choice(4, RED), 2: choice(4, RED)}))
    assert any("compartilham" in v for v in shared)

    bad_pixel = validate_assignment(problem, Assignment({1: choice(4, RED, 10), 2: choice(3, RED)}))
    assert any("elemento 10" in v for v in bad_pixel)

    missing = validate_assignment(problem, Assignment({1: choice(4, RED)}))
    assert any("sem atribuição" in v for v in missing)

    with pytest.raises(AllocationError):
        evaluate_assignment(problem, Assignment({1: choice(4, RED), 2: choice(4, RED)}))


# ──────────────────────── Otimização ────────────────────────


def test_single_user_gets_best_triple():
    gains = [[[1e-7, 3e-6], [2e-6, 1e-7]]]
    report = optimize(problem_from(gains, n_wavelengths=2))
    assert report.assignment.choices[1] == choice(1, RED, 2)


def test_oracle_picks_larger_gain_ap():
    report = brute_force_oracle(problem_from([[[1e-6], [2e-6]]], n_wavelengths=1))
    assert report.assignment.choices[1].ap_id == 2


def test_two_users_on_one_ap_use_distinct_colours():
    report = brute_force_oracle(problem_from([[[1e-6]], [[1e-6]]], n_wavelengths=2))
    colours = {c.wavelength for c in report.assignment.choices.values()}
    assert colours == {RED, YELLOW}


def test_ties_resolve_to_smallest_tuple():
    problem = problem_from(np.full((2, 2, 1), 1e-6), n_wavelengths=2)
    for report in (optimize(problem), brute_force_oracle(problem)):
        assert report.assignment.choices[1] == choice(1, RED)
        assert report.assignment.choices[2] == choice(2, RED)


def test_infeasible_user_count():
    problem = problem_from(np.full((3, 1, 1), 1e-6), n_wavelengths=2)
    with pytest.raises(AllocationError):
        optimize(problem)
    with pytest.raises(AllocationError):
        brute_force_oracle(problem)


def test_oracle_refuses_huge_space():
    problem = problem_from(np.full((4, 8, 9), 1e-6))
    with pytest.raises(AllocationError, match="grande demais"):
        brute_force_oracle(problem)


@st.composite
def instances(draw):
    n_users = draw(st.integers(1, 3))
    n_aps = draw(st.integers(1, 4))
    n_wl = draw(st.integers(1, 2))
    if n_users > n_aps * n_wl:
        n_users = n_aps * n_wl
    n_el = draw(st.integers(1, 4))
    gains = draw(
        arrays(
            np.float64,
            (n_users, n_aps, n_el),
            elements=st.one_of(st.just(0.0), st.floats(1e-8, 1e-5)),
        )
    )
    sigma = draw(st.floats(1e-8, 1e-6))
    mode = draw(st.sampled_from(list(SinrMode)))
    return problem_from(gains, n_wavelengths=n_wl, sigma=sigma, mode=mode)


@settings(max_examples=200, deadline=None)
@given(problem=instances())
def test_optimize_matches_brute_force(problem):
    fast = optimize(problem)
    exact = brute_force_oracle(problem)
    assert fast.objective == pytest.approx(exact.objective, rel=1e-9)
    assert validate_assignment(problem, fast.assignment) == []


def test_scale_invariance_without_receiver_noise():
    rng = np.random.default_rng(7)
    gains = rng.uniform(1e-7, 1e-5, size=(3, 4, 2))
    base = optimize(problem_from(gains, n_wavelengths=2, sigma=0.0))
    scaled = optimize(problem_from(gains, n_wavelengths=2, sigma=0.0, scale=10.0))
    assert scaled.assignment == base.assignment


def test_more_power_never_lowers_optimal_sinr():
    rng = np.random.default_rng(11)
    gains = rng.uniform(1e-7, 1e-5, size=(1, 3, 2))
    base = optimize(problem_from(gains, n_wavelengths=2))
    scaled = optimize(problem_from(gains, n_wavelengths=2, scale=3.0))
    assert scaled.objective >= base.objective


def test_permuting_users_permutes_solution():
    rng = np.random.default_rng(3)
    gains = rng.uniform(1e-7, 1e-5, size=(3, 3, 2))
    order = [2, 0, 1]
    base = optimize(problem_from(gains, n_wavelengths=2))
    permuted = optimize(problem_from(gains[order], n_wavelengths=2))
    for new_user, old_index in enumerate(order, start=1):
        assert permuted.assignment.choices[new_user] == base.assignment.choices[old_index + 1]


def test_optimum_beats_any_valid_assignment():
    rng = np.random.default_rng(5)
    gains = rng.uniform(1e-7, 1e-5, size=(3, 3, 2))
    problem = problem_from(gains, n_wavelengths=2)
    best = optimize(problem)
    other = evaluate_assignment(
        problem, Assignment({1: choice(1, RED, 1), 2: choice(2, RED, 2), 3: choice(3, YELLOW, 1)})
    )
    assert best.objective >= other.objective


def test_report_objective_is_sum_of_user_sinr():
    rng = np.random.default_rng(9)
    problem = problem_from(rng.uniform(1e-7, 1e-5, size=(3, 4, 2)), n_wavelengths=2)
    report = optimize(problem)
    total = sum(user.breakdown.sinr for user in report.users)
    assert report.objective == pytest.approx(total, rel=1e-12)
    assert all(math.isnan(user.data_rate) for user in report.users)


# ──────────────────────── Taxa e relatório ────────────────────────


@pytest.mark.parametrize(
    ("bandwidth", "rate"),
    [(5e9, 7.1e9), (1e10, 14.2e9), (0.7e9, 1.0e9), (0.0, 0.0)],
)
def test_data_rate(bandwidth, rate):
    assert data_rate(bandwidth) == pytest.approx(rate)


def test_report_csv_columns(tmp_path):
    problem = problem_from([[[1e-6], [2e-6]]], n_wavelengths=1)
    report = optimize(problem)
    path = write_allocation_report(report, tmp_path / "report.csv", "manifest=m.json id=1")
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "# manifest=m.json id=1"
    assert lines[1].startswith("user,ap,wavelength,element,sinr_db,bandwidth_hz,rate_bps")
    assert lines[2].startswith("1,2,red,1,")
