import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from conftest import CASE_III, CLASSICAL_II, CLASSICAL_III
from fisher_harnack import classical as C
from fisher_harnack import params as P
from fisher_harnack import phi as phimod
from fisher_harnack import solver as S
from fisher_harnack.errors import (
    DegenerateInterval,
    InfeasibleParams,
    OutOfRegime,
    PairTooClose,
    RangeViolation,
)
from fisher_harnack.field import ScalarField, TorusGrid

CANONICAL_RATIO = 0.686661366200521


def quad_integral(p, t1, t2):
    val, _ = quad(lambda t: float(phimod.tilde(p, t)), t1, t2, epsabs=1e-14, epsrel=1e-13, limit=200)
    return val


def test_canonical_case_i_value():
    assert phimod.tilde_case(CASE_III) is phimod.TildeCase.CASE_I
    r = C.ratio_bound(CASE_III, 0.0, 1.0, 2.0)
    assert r == pytest.approx(CANONICAL_RATIO, rel=1e-12)
    assert math.log(r) == pytest.approx(-0.37591, abs=5e-6)
    assert r == pytest.approx(math.exp(quad_integral(CASE_III, 1.0, 2.0)), rel=1e-8)
    # exponent of the power form
    expo = 8 * 1 * 0.75 / (1 + 8 * -1 * 0.75)
    assert expo == pytest.approx(-1.2)
    assert r == pytest.approx(((1 - math.exp(-2)) / (1 - math.exp(-1))) ** expo, rel=1e-12)


def test_empty_interval_gives_one():
    assert C.ratio_bound(CASE_III, 0.0, 1.0, 1.0) == 1.0
    assert C.ratio_bound(CASE_III, 0.0, 1.0, 1.0 + 1e-9) == pytest.approx(1.0, abs=1e-8)


def test_distance_factor_for_quarter_alpha():
    base = C.ratio_bound(CASE_III, 0.0, 1.0, 3.0)
    assert C.ratio_bound(CASE_III, 1.5, 1.0, 3.0) == pytest.approx(base * math.exp(-2.25 / 6.0), rel=1e-14)


def test_degenerate_interval():
    with pytest.raises(DegenerateInterval):
        C.ratio_bound(CASE_III, 0.5, 1.0, 1.0)


def test_infeasible_and_beta_below_minus_c():
    with pytest.raises(InfeasibleParams):
        C.ratio_bound(P.ParamSet(1, 1.0, 0.25, -1.5), 0.0, 1.0, 2.0)
    with pytest.raises(InfeasibleParams):
        C.ratio_bound(P.ParamSet(1, 1.0, 0.25, 0.5), 0.0, 1.0, 2.0)


@pytest.mark.parametrize("p, case", [(CLASSICAL_II, "ii"), (CLASSICAL_III, "iii")])
def test_later_cases_match_quadrature_and_printed(p, case):
    assert phimod.tilde_case(p).value == case
    T2 = P.switch_time(p)
    t1, t2 = T2 + 0.5, T2 + 3.0
    r = C.ratio_bound(p, 0.0, t1, t2)
    assert r == pytest.approx(math.exp(quad_integral(p, t1, t2)), rel=1e-8)
    assert C.printed_bound(p, 0.7, t1, t2) == pytest.approx(C.ratio_bound(p, 0.7, t1, t2), rel=1e-10)
    with pytest.raises(OutOfRegime):
        C.printed_bound(p, 0.0, 0.5 * T2, t2)


@st.composite
def classical_params(draw):
    n = draw(st.integers(1, 3))
    c = draw(st.floats(0.2, 5.0))
    alpha = draw(st.floats(0.05, 0.95))
    rng = P.classical_beta_range(n, c, alpha)
    assume(rng is not None and rng[1] - rng[0] > 1e-6)
    beta = rng[0] + (rng[1] - rng[0]) * draw(st.floats(0.0, 1.0))
    p = P.ParamSet(n, c, alpha, beta)
    assume(P.validate_compact(p).feasible)
    return p


@settings(max_examples=200, deadline=None)
@given(classical_params(), st.floats(0.05, 3.0), st.floats(0.05, 5.0), st.floats(0.0, 3.0))
def test_case_consistency(p, start, gap, d):
    case = phimod.tilde_case(p)
    assume(case is not phimod.TildeCase.CASE_III)
    t1 = start if case is phimod.TildeCase.CASE_I else P.switch_time(p) + start
    t2 = t1 + gap
    assert C.printed_bound(p, d, t1, t2) == pytest.approx(C.ratio_bound(p, d, t1, t2), rel=1e-10)


@settings(max_examples=100, deadline=None)
@given(classical_params(), st.floats(0.0, 2.0), st.floats(0.01, 2.0))
def test_strictly_decreasing_in_distance(p, d, extra):
    t1 = P.switch_time(p) + 1.0 if phimod.tilde_case(p) is not phimod.TildeCase.CASE_I else 1.0
    assert C.ratio_bound(p, d + extra, t1, t1 + 1.0) < C.ratio_bound(p, d, t1, t1 + 1.0)


@pytest.mark.parametrize("p", [CASE_III, CLASSICAL_II, CLASSICAL_III])
def test_long_time_limit_is_pure_distance_term(p):
    d, gap = 1.3, 2.0
    t1 = 60.0 / p.c + P.switch_time(p)
    pure = C.distance_factor(p.alpha, d, t1, t1 + gap)
    assert C.ratio_bound(p, d, t1, t1 + gap) == pytest.approx(pure, rel=1e-8)


# ----------------------------------------------------------- simulations


@pytest.fixture(scope="module")
def constant_traj():
    g = TorusGrid.uniform(1, 16, 4.0)
    times = np.round(np.linspace(0.5, 5.0, 91), 12)
    return S.simulate(S.make_initial(g, S.Constant(0.5)), CASE_III, 5.0, times)


def test_identical_points(constant_traj):
    (chk,) = C.verify_pairs(constant_traj, CASE_III, [((1.0,), 2.0, (1.0,), 2.0)])
    assert chk.lhs == 1.0 and chk.rhs == 1.0 and chk.passed


def test_constant_data_closed_form(constant_traj):
    pairs = C.random_pairs(
        constant_traj.grid, constant_traj.times, 100, seed=3, min_gap=C.MIN_GAP_STEPS * constant_traj.dt_used
    )
    checks = C.verify_pairs(constant_traj, CASE_III, pairs)
    assert len(checks) == 100
    for chk in checks:
        exact = S.logistic_exact(0.5, 1.0, chk.t2) / S.logistic_exact(0.5, 1.0, chk.t1)
        assert chk.lhs == pytest.approx(exact, rel=1e-8)
        assert chk.passed and chk.case_tag == "i"
        assert chk.lhs >= chk.rhs


def test_simulated_pairs_pass_and_keep_order():
    g = TorusGrid.uniform(1, 256, 16.0)
    times = np.round(np.linspace(0.5, 5.0, 91), 12)
    traj = S.simulate(S.make_initial(g, S.SmoothRandom(seed=7)), CASE_III, 5.0, times)
    pairs = C.random_pairs(g, traj.times, 50, seed=11, min_gap=10 * traj.dt_used)
    checks = C.verify_pairs(traj, CASE_III, pairs, workers=4)
    assert [(c.t1, c.t2) for c in checks] == [(p[1], p[3]) for p in pairs]
    assert all(c.passed for c in checks)
    assert checks == C.verify_pairs(traj, CASE_III, pairs, workers=1)


def test_pair_too_close(constant_traj):
    t = constant_traj.times
    pairs = [((0.0,), t[0], (0.0,), t[0] + 1e-4)]
    with pytest.raises(PairTooClose):
        C.verify_pairs(constant_traj, CASE_III, pairs)


def test_range_violation_for_saturated_data(constant_traj):
    sat = S.Trajectory(
        CASE_III,
        constant_traj.grid,
        [1.0, 2.0],
        [constant_traj.at(1.0), ScalarField(constant_traj.grid, np.ones(constant_traj.grid.shape))],
        constant_traj.dt_used,
    )
    with pytest.raises(RangeViolation):
        C.verify_pairs(sat, CASE_III, [((0.0,), 1.0, (0.0,), 2.0)])


def test_record_line():
    chk = C.RatioCheck((0.5,), 1.0, (0.25,), 2.0, "i", 0.25, 0.9, 0.8, 0.0008)
    line = chk.to_line()
    assert line.startswith("x1=0.5 t1=1 x2=0.25 t2=2 case=i")
    assert line.endswith("pass=yes")


def test_parse_pairs():
    text = "# header\n0.1 0.2 1.0 0.3 0.4 2.0\n\n0 0 0.5 1 1 1.5  # trailing\n"
    assert C.parse_pairs(text, 2) == [((0.1, 0.2), 1.0, (0.3, 0.4), 2.0), ((0.0, 0.0), 0.5, (1.0, 1.0), 1.5)]
    with pytest.raises(ValueError):
        C.parse_pairs("0.1 1 0.2", 1)


def test_random_pairs_are_reproducible():
    g = TorusGrid.uniform(2, 8, 1.0)
    a = C.random_pairs(g, [0.5, 1.0, 2.0], 10, seed=1)
    assert a == C.random_pairs(g, [0.5, 1.0, 2.0], 10, seed=1)
    assert all(p[1] < p[3] for p in a)
