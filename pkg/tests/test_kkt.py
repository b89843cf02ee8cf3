import copy

import numpy as np
import pytest

from aemod.lp import kkt_verify, optimize, solve_primal, build_lp
from aemod.lp.kkt import tight_q
from aemod.model import ZoneConfig

from instances import solved_instances

TOY = ZoneConfig(lambda_v=2.0, mu_c=1.0, c_points=1, n_classes=2, p=(0.5, 0.5), lambda_c=(0.4, 0.4))


def test_toy_passes_with_ties():
    rep = kkt_verify(TOY, optimize(TOY))
    assert rep.passed, rep.summary()
    assert not rep.degenerate
    assert rep.ties == [0, 1]  # both margins bind with equal weight


def test_alpha_sums_to_one_over_all_classes():
    for cfg, sol in solved_instances(40, seed=3)[0]:
        assert sol.alpha.sum() == pytest.approx(1.0, abs=1e-9)
        assert len(sol.alpha) == cfg.n_classes


def test_tight_q_reproduces_binding_margin():
    cfg = ZoneConfig(3.0, 1.0, 2, 3, (0.2, 0.5, 0.3), (0.5, 0.6, 0.4))
    sol = optimize(cfg)
    q = np.asarray(sol.policy.q)
    for cls in (1, 2, 3):
        j, value = tight_q(cfg, q, sol.r_star, cls)
        q2 = q.copy()
        q2[j] = value
        lv, p, lc = cfg.lambda_v, cfg.p, cfg.lambda_c
        n = cfg.n_classes
        if cls < n:
            supply = lv * (p[cls - 1] * (1 - q2[cls - 1]) + p[cls] * q2[cls])
        else:
            supply = lv * (p[n - 1] * (1 - q2[n - 1]) + p[0] * q2[0])
        assert supply - lc[cls - 1] == pytest.approx(sol.r_star)


def test_basis_duals_also_verify_on_toy():
    sol = solve_primal(build_lp(TOY))
    rep = kkt_verify(TOY, sol)
    assert rep.passed, rep.summary()


def test_corrupted_multipliers_fail():
    sol = copy.deepcopy(optimize(TOY))
    sol.alpha = sol.alpha * 1.5
    rep = kkt_verify(TOY, sol)
    assert not rep.passed
    names = {c.name for c in rep.failures}
    assert "alpha_sum" in names and "stationarity" in names


def test_corrupted_policy_fails_branch_or_slackness():
    cfg = ZoneConfig(3.0, 1.0, 2, 3, (0.2, 0.5, 0.3), (0.5, 0.6, 0.4))
    sol = copy.deepcopy(optimize(cfg))
    q = np.asarray(sol.policy.q)
    q[1] = 1.0 - q[1]
    sol.policy = type(sol.policy)(tuple(q))
    assert not kkt_verify(cfg, sol).passed


def test_summary_lists_failures():
    sol = copy.deepcopy(optimize(TOY))
    sol.beta = sol.beta + 0.1
    text = kkt_verify(TOY, sol).summary()
    assert text.startswith("KKT FAIL") and "charging_multipliers_zero" in text


def test_kkt_needs_optimal_solution():
    cfg = ZoneConfig(2.0, 0.1, 1, 2, (0.5, 0.5), (0.4, 0.4))
    with pytest.raises(ValueError):
        kkt_verify(cfg, optimize(cfg))


def test_starved_class_is_charged_up():
    # class 1 has no demand: its vehicles are all sent on to charge
    cfg = ZoneConfig(3.0, 1.0, 2, 3, (1 / 3, 1 / 3, 1 / 3), (0.0, 1.5, 0.3))
    sol = optimize(cfg)
    assert sol.policy.q[1] == pytest.approx(0.0, abs=1e-6)
    # the cyclic routing still equalizes every margin, so the multipliers tie
    assert sol.alpha[1] >= sol.alpha[0] - 1e-9
    assert kkt_verify(cfg, sol).passed
    assert sol.r_star == pytest.approx(0.4)


def test_zero_probability_class_is_vacuous():
    cfg = ZoneConfig(3.0, 1.0, 2, 3, (0.5, 0.0, 0.5), (0.5, 0.3, 0.5))
    sol = optimize(cfg)
    rep = kkt_verify(cfg, sol)
    assert 1 in rep.vacuous and rep.degenerate
