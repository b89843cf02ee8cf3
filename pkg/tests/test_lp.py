import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aemod.errors import InfeasibleModel
from aemod.lp import (
    EPS_STRICT,
    LEMMA1_MESSAGE,
    build_lp,
    optimize,
    solve,
    solve_dual,
    solve_primal,
    theorem2_value,
)
from aemod.model import Policy, ZoneConfig, derive_rates, margins
from aemod.scenarios import make_zone
from aemod.stability import check_charging_stability, partial_capacity

from instances import random_zone, solved_instances

TOY = ZoneConfig(lambda_v=2.0, mu_c=1.0, c_points=1, n_classes=2, p=(0.5, 0.5), lambda_c=(0.4, 0.4))


def test_toy_optimum():
    # supplies sum to 2, demands to 0.8: equalized margins give R* = 0.6
    sol = optimize(TOY)
    assert sol.optimal and sol.attained
    assert sol.r_star == pytest.approx(0.6, abs=1e-9)
    assert min(margins(TOY, derive_rates(TOY, sol.policy))) == pytest.approx(0.6, abs=1e-9)


def test_matrix_shape_and_row_kinds():
    prob = build_lp(TOY)
    n = 2
    assert prob.a.shape == (3 * n + 3, n + 1)
    assert prob.nominal_rows == 3 * n + 4
    assert len(prob.rows("customer_queue")) == n
    assert len(prob.rows("upper_bound")) == n and len(prob.rows("lower_bound")) == n
    assert prob.c.tolist() == [0.0, 0.0, -1.0]
    d = prob.to_dict()
    assert d["omitted_rows"] and len(d["a"]) == 3 * n + 3


def test_customer_rows_match_margin_algebra():
    rng = np.random.default_rng(5)
    cfg = random_zone(rng)
    prob = build_lp(cfg, check_admissible=False)
    q = rng.random(cfg.n_classes)
    rows = prob.rows("customer_queue")
    # row i: A x <= b  <=>  R <= supply_i - demand_i
    lhs_without_r = prob.a[rows, :-1] @ q
    m = margins(cfg, derive_rates(cfg, Policy(tuple(q))))
    assert prob.b[rows] - lhs_without_r == pytest.approx(m)


def test_strict_rows_carry_relative_slack():
    prob = build_lp(TOY)
    (r_partial,) = prob.rows("partial_pool")
    (r_full,) = prob.rows("full_station")
    cap = partial_capacity(TOY)
    assert prob.b[r_partial] == pytest.approx(cap * (1 - EPS_STRICT) - TOY.lambda_v)
    assert prob.b[r_full] == pytest.approx(TOY.mu_c * (1 - EPS_STRICT))


def test_lemma1_violation_is_infeasible_model():
    cfg = ZoneConfig(2.0, 1.0, 1, 2, (0.5, 0.5), (1.0, 1.0))
    with pytest.raises(InfeasibleModel, match="total arrival rate of the vehicles"):
        build_lp(cfg)
    assert "total arrival rate of the vehicles" in LEMMA1_MESSAGE


def test_charging_capacity_shortfall_is_lp_infeasible():
    # pool capacity 0.2 and station capacity 0.1 cannot absorb 2 vehicles/min with p0 = 0.5
    cfg = ZoneConfig(2.0, 0.1, 1, 2, (0.5, 0.5), (0.4, 0.4))
    sol = solve(build_lp(cfg))
    assert sol.status == "infeasible"
    assert solve_dual(build_lp(cfg)).status == "unbounded"


def test_dual_objective_and_g_value():
    prob = build_lp(TOY)
    dual = solve_dual(prob)
    assert dual.objective == pytest.approx(0.6)
    assert dual.g_value == pytest.approx(-0.6)
    primal = solve_primal(prob)
    assert primal.dual_objective == pytest.approx(0.6)


def test_solution_dict_fields():
    d = optimize(TOY).to_dict()
    for key in ("policy", "r_star", "alpha", "beta", "gamma", "omega", "attained"):
        assert key in d
    assert d["max_response_time"] == pytest.approx(1 / 0.6)


def test_unattained_instance_is_flagged():
    # class 2 is fed only through the full station, whose stability row binds:
    # the strict program has a supremum but no maximizer
    cfg = ZoneConfig(4.0, 0.5, 9, 2, (0.75, 0.25), (1.2, 0.4))
    sol = optimize(cfg)
    assert sol.optimal
    assert not sol.attained
    assert sol.beta.max() > 0


def test_theorem2_on_a_batch():
    for cfg, sol in solved_instances(50, seed=11)[0]:
        assert theorem2_value(sol) == pytest.approx(sol.r_star, abs=1e-6 * max(1, sol.r_star))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_optimum_dominates_random_admissible_policies(seed):
    rng = np.random.default_rng(seed)
    cfg = random_zone(rng, (2, 6))
    try:
        sol = optimize(cfg)
    except InfeasibleModel:
        return
    if not sol.optimal:
        return
    q = rng.random((300, cfg.n_classes))
    for row in q:
        rates = derive_rates(cfg, Policy(tuple(row)))
        # admissibility with the same relative slack as the LP
        if rates.partial_load >= partial_capacity(cfg) * (1 - EPS_STRICT):
            continue
        if rates.full_load >= cfg.mu_c * (1 - EPS_STRICT):
            continue
        assert min(margins(cfg, rates)) <= sol.r_star + 1e-9 * cfg.lambda_v
    assert all(check_charging_stability(cfg, derive_rates(cfg, sol.policy)))


def test_dimensions_n7():
    prob = build_lp(make_zone(8.0, 0.033, 40, 7, 5.0))
    assert prob.nominal_rows == 25 and prob.a.shape == (24, 8)


def test_class1_row_hand_expansion():
    prob = build_lp(TOY)
    r = prob.rows("customer_queue")[0]
    assert prob.a[r].tolist() == [1.0, -1.0, 1.0]
    assert prob.b[r] == pytest.approx(0.6)


def test_demand_at_vehicle_rate_rejected():
    cfg = ZoneConfig(2.0, 1.0, 1, 2, (0.5, 0.5), (1.5, 0.6))
    with pytest.raises(InfeasibleModel):
        optimize(cfg)


def test_no_demand_uniform_supply_splits_evenly():
    cfg = make_zone(3.0, 1.0, 2, 3, 0.0)
    assert optimize(cfg).r_star == pytest.approx(3.0 / 3)


def test_scaling_all_rates_scales_optimum():
    cfg = ZoneConfig(3.0, 1.0, 2, 3, (0.2, 0.5, 0.3), (0.5, 0.6, 0.4))
    big = ZoneConfig(30.0, 10.0, 2, 3, cfg.p, tuple(10 * x for x in cfg.lambda_c))
    a, b = optimize(cfg), optimize(big)
    assert theorem2_value(b) == pytest.approx(10 * theorem2_value(a), rel=1e-9)


def test_closed_form_without_upper_bound_terms():
    for cfg, sol in solved_instances(30, seed=12)[0]:
        if np.all(np.abs(sol.gamma) < 1e-12):
            alpha_part = sum((cfg.lambda_v * cfg.p[i] - cfg.lambda_c[i]) * sol.alpha[i] for i in range(cfg.n_classes))
            assert alpha_part == pytest.approx(sol.r_star, abs=1e-6 * max(1, sol.r_star))


def test_duals_nonnegative_and_strict_rows_have_margin():
    for cfg, sol in solved_instances(100, seed=13)[0]:
        assert sol.nu.min() >= -1e-10
        rates = derive_rates(cfg, sol.policy)
        cap = partial_capacity(cfg)
        assert cap - rates.partial_load >= EPS_STRICT * cap / 2 - 1e-12 * cap
        assert cfg.mu_c - rates.full_load >= EPS_STRICT * cfg.mu_c / 2 - 1e-12 * cfg.mu_c
        assert sol.r_star > 0
