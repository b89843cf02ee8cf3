import math

import numpy as np
import pytest

from aemod.desim import SimConfig, lindley_departures, run, validate_against_formula
from aemod.desim.engine import ARRIVAL, COMPLETION, SAMPLE, EventQueue
from aemod.desim.report import CSV_FIELDS, batch_means, ci_halfwidth
from aemod.desim.streams import BLOCK, Streams
from aemod.errors import ConfigError, SimulationError
from aemod.lp import optimize
from aemod.model import Policy, ZoneConfig, derive_rates, response_times
from aemod.scenarios import make_zone

TOY = ZoneConfig(lambda_v=2.0, mu_c=1.0, c_points=1, n_classes=2, p=(0.5, 0.5), lambda_c=(0.4, 0.4))
TOY_Q = Policy((0.5, 0.5))  # on the optimal face, R = 0.6, pool load half of capacity


def test_streams_are_named_and_reproducible():
    a = Streams(7).generator("customers[1]").random(5)
    b = Streams(7).generator("customers[1]").random(5)
    c = Streams(7).generator("customers[2]").random(5)
    d = Streams(8).generator("customers[1]").random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c) and not np.array_equal(a, d)


def test_buffered_stream_matches_bulk_draws():
    s = Streams(3).exponential("x", 2.0)
    draws = np.array([s.next() for _ in range(BLOCK + 10)])
    bulk = Streams(3).generator("x").standard_exponential(2 * BLOCK)[: BLOCK + 10] / 2.0
    assert np.allclose(draws, bulk)


def test_lindley_matches_loop():
    rng = np.random.default_rng(0)
    a = np.cumsum(rng.exponential(1.0, 500))
    s = rng.exponential(0.9, 500)
    d = lindley_departures(a, s)
    prev = 0.0
    for k in range(500):
        prev = max(a[k], prev) + s[k]
        assert d[k] == pytest.approx(prev)


def test_event_queue_ordering():
    eq = EventQueue()
    eq.push(1.0, SAMPLE, "s")
    eq.push(1.0, COMPLETION, "c")
    eq.push(1.0, ARRIVAL, "a1")
    eq.push(1.0, ARRIVAL, "a2")
    eq.push(0.5, SAMPLE, "early")
    assert [eq.pop()[1] for _ in range(5)] == ["early", "a1", "a2", "c", "s"]
    assert eq.peek_time() == math.inf and len(eq) == 0


def test_sim_config_validation():
    with pytest.raises(ConfigError):
        SimConfig(TOY, TOY_Q, mode="hybrid")
    with pytest.raises(ConfigError):
        SimConfig(TOY, TOY_Q, horizon=10.0, warmup=20.0)
    with pytest.raises(ConfigError):
        SimConfig(TOY, Policy((0.5, 0.5, 0.5)))
    assert SimConfig(TOY, TOY_Q, horizon=1000.0).warmup == 100.0


def test_events_engine_equals_lindley():
    lin = run(SimConfig(TOY, TOY_Q, horizon=5000.0, seed=4))
    ev = run(SimConfig(TOY, TOY_Q, horizon=5000.0, seed=4, engine="events"))
    for a, b in zip(lin.classes, ev.classes):
        assert a.served == b.served
        assert a.mean_rt == pytest.approx(b.mean_rt, rel=1e-9)


def test_same_seed_same_report():
    cfg = SimConfig(TOY, TOY_Q, horizon=3000.0, seed=9)
    assert run(cfg).to_dict() == run(cfg).to_dict()
    other = run(SimConfig(TOY, TOY_Q, horizon=3000.0, seed=10))
    assert other.to_dict() != run(cfg).to_dict()


def test_abstract_run_close_to_formula():
    rep = run(SimConfig(TOY, TOY_Q, horizon=2e5, seed=1))
    checks = validate_against_formula(rep, TOY, TOY_Q, rel_tol=0.05)
    assert all(c.ok for c in checks), checks
    for c, stat in zip(checks, rep.classes):
        assert c.formula == pytest.approx(1 / 0.6)
        assert stat.ci_halfwidth > 0


def test_validation_rejects_physical_and_unstable():
    phys = run(SimConfig(TOY, TOY_Q, mode="physical", horizon=500.0, seed=1))
    with pytest.raises(SimulationError, match="mode mismatch"):
        validate_against_formula(phys, TOY, TOY_Q)
    bad = ZoneConfig(2.0, 1.0, 1, 2, (0.5, 0.5), (1.5, 0.1))
    rep = run(SimConfig(bad, TOY_Q, horizon=500.0))
    with pytest.raises(SimulationError, match="unstable"):
        validate_against_formula(rep, bad, TOY_Q)


def test_physical_parking_beats_abstract_queueing():
    # parked vehicles absorb demand at once, so physical delays are no worse
    phys = run(SimConfig(TOY, TOY_Q, mode="physical", horizon=20000.0, seed=2))
    abst = run(SimConfig(TOY, TOY_Q, horizon=20000.0, seed=2))
    for p, a in zip(phys.classes, abst.classes):
        assert p.served > 0
        assert p.mean_rt <= a.mean_rt
    assert 0 < phys.util_partial < 1 and 0 < phys.util_full < 1
    assert not any(phys.growth.values())


def test_physical_utilization_matches_offered_load():
    rep = run(SimConfig(TOY, TOY_Q, mode="physical", horizon=50000.0, seed=5))
    rates = derive_rates(TOY, TOY_Q)
    assert rep.util_partial == pytest.approx(rates.partial_load / 2.0, rel=0.03)
    assert rep.util_full == pytest.approx(rates.full_load / 1.0, rel=0.03)


def test_physical_flags_overloaded_pool():
    zone = make_zone(15.0, 0.033, 40, 11, 10.0)
    rep = run(SimConfig(zone, Policy.constant(11, 0.0), mode="physical", horizon=3000.0, seed=0))
    assert rep.growth["partial_pool"]
    assert rep.util_partial > 1.0
    assert rep.max_queue["partial_pool"] > 400


def test_unstable_abstract_class_grows():
    bad = ZoneConfig(2.0, 1.0, 1, 2, (0.5, 0.5), (1.2, 0.1))
    rep = run(SimConfig(bad, TOY_Q, horizon=5000.0, seed=0))
    assert rep.growth["station[1]"] and not rep.growth["station[2]"]


def test_csv_and_dict_outputs():
    rep = run(SimConfig(TOY, TOY_Q, horizon=2000.0, seed=0))
    lines = rep.to_csv().splitlines()
    assert lines[0].split(",") == CSV_FIELDS
    assert len(lines) == 1 + TOY.n_classes
    d = rep.to_dict()
    assert "traces" not in d and "methodology" in d
    assert "traces" in rep.to_dict(include_traces=True)


def test_batch_statistics():
    t = np.linspace(0, 10, 1000, endpoint=False)
    means = batch_means(t, np.ones_like(t), 0.0, 10.0, 5)
    assert np.allclose(means, 1.0)
    assert ci_halfwidth(np.array([1.0, 1.0, 1.0])) == 0.0
    assert math.isnan(ci_halfwidth(np.array([1.0])))


def test_zero_demand_class_has_no_samples():
    cfg = ZoneConfig(2.0, 1.0, 1, 2, (0.5, 0.5), (0.0, 0.4))
    rep = run(SimConfig(cfg, TOY_Q, horizon=2000.0))
    assert rep.classes[0].served == 0 and math.isnan(rep.classes[0].mean_rt)


def test_optimal_policy_reference_zone_short_run():
    zone = make_zone(8.0, 0.033, 40, 7, 6.0)
    sol = optimize(zone)
    rep = run(SimConfig(zone, sol.policy, horizon=1e5, seed=3))
    rts = response_times(zone, derive_rates(zone, sol.policy))
    for stat, f in zip(rep.classes, rts):
        assert stat.mean_rt == pytest.approx(f, rel=0.15)


def test_mm1_reference_point():
    # q = (0.5, 0.5) gives each class supply 2 against demand 1: sojourn 1 min
    cfg = ZoneConfig(4.0, 1.0, 2, 2, (0.5, 0.5), (1.0, 1.0))
    rep = run(SimConfig(cfg, TOY_Q, horizon=1e6, seed=0))
    for stat in rep.classes:
        assert stat.mean_rt == pytest.approx(1.0, abs=0.02)
        # Little's law on the time-average station population
        assert stat.mean_in_system == pytest.approx(1.0 * stat.mean_rt, rel=0.03)


def test_toy_optimal_policy_within_three_percent():
    sol = optimize(TOY)
    rep = run(SimConfig(TOY, sol.policy, horizon=1e6, seed=2))
    for stat in rep.classes:
        assert stat.mean_rt == pytest.approx(1 / 0.6, rel=0.03)


def test_pool_with_five_percent_headroom_is_tight():
    zone = make_zone(15.0, 0.033, 40, 12, 10.0)  # load 15 against capacity 15.84
    rep = run(SimConfig(zone, Policy.constant(12, 0.0), mode="physical", horizon=5000.0, seed=0))
    assert rep.util_partial < 1 and not rep.growth["partial_pool"]


def test_flow_audit_catches_corruption(monkeypatch):
    from aemod.desim import physical

    original = physical._Zone.park

    def leaky(self, t, i):
        original(self, t, i)
        self.dispatched += 1  # vehicles counted twice

    monkeypatch.setattr(physical._Zone, "park", leaky)
    with pytest.raises(SimulationError, match="not conserved"):
        run(SimConfig(TOY, TOY_Q, mode="physical", horizon=200.0))
