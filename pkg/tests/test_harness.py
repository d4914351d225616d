import math

import pytest

from qcointoss import harness
from qcointoss.harness import McEstimate, SweepRow
from qcointoss.protocol import HONEST, derive_params
from qcointoss.strategies import conclusive_attack

THETA = math.pi / 9


class TestMcEstimate:
    def test_partition(self):
        est = McEstimate(10, 3, 5, 2, 0)
        assert est.p0 + est.p1 + est.abort == 1.0
        assert est.stderr0 == pytest.approx(math.sqrt(0.3 * 0.7 / 10))

    def test_bad_counts(self):
        with pytest.raises(ValueError):
            McEstimate(10, 3, 5, 1, 0)

    def test_dict_round_trip(self):
        est = McEstimate(10, 3, 5, 2, 7, {"bob.x": 4})
        assert McEstimate.from_dict(est.to_dict()) == est

    def test_rate(self):
        est = McEstimate(10, 3, 5, 2, 7, {"a": 4, "b": 2})
        assert est.rate("b", given="a")[0] == 0.5
        assert math.isnan(est.rate("b", given="missing")[0])


class TestMonteCarlo:
    def test_single_trial(self):
        est = harness.monte_carlo(derive_params(2, THETA), trials=1, base_seed=4)
        assert est.p0 in (0.0, 1.0) and est.p0 + est.p1 + est.abort == 1.0

    def test_deterministic(self):
        p = derive_params(3, THETA)
        assert harness.monte_carlo(p, trials=300, base_seed=1) == harness.monte_carlo(p, trials=300, base_seed=1)
        assert harness.monte_carlo(p, trials=300, base_seed=1) != harness.monte_carlo(p, trials=300, base_seed=2)

    @pytest.mark.parametrize("workers", [2, 3, 8])
    def test_worker_invariance(self, workers):
        p = derive_params(3, THETA)
        bob = conclusive_attack()
        one = harness.monte_carlo(p, HONEST, bob, 401, base_seed=11, workers=1)
        many = harness.monte_carlo(p, HONEST, bob, 401, base_seed=11, workers=workers)
        assert one == many
        assert one.counters == many.counters

    def test_honest(self):
        est = harness.monte_carlo(derive_params(4, THETA), trials=5000, base_seed=0)
        assert est.aborts == 0 and est.within(0.5) and "mismatch" not in est.counters

    def test_bad_trials(self):
        with pytest.raises(ValueError):
            harness.monte_carlo(derive_params(2, THETA), trials=0)
        with pytest.raises(ValueError):
            harness.monte_carlo(derive_params(2, THETA), trials=5, workers=0)

    def test_observer(self):
        from qcointoss.strategies import selective_abort
        assert harness.observer_for(HONEST, HONEST) == "alice"
        assert harness.observer_for(selective_abort(0), HONEST) == "bob"
        assert harness.observer_for(HONEST, selective_abort(0)) == "alice"


class TestAppendix:
    def test_small(self):
        report = harness.verify_appendix(4, 12)
        assert report.passed
        assert [r.m for r in report.rows] == [1, 2, 3, 4]
        assert all(r.points == 12 for r in report.rows)

    def test_m1_exact(self):
        row = harness.verify_appendix(1, 20).rows[0]
        assert row.max_dev_exact <= 1e-12

    def test_limit(self):
        with pytest.raises(MemoryError):
            harness.verify_appendix(11, 2)

    def test_single_pair(self):
        rows = harness.verify_single_pair(10)
        assert all(r.povm_violations == 0 and r.misidentification <= 1e-12 for r in rows)


class TestSweep:
    def test_analytic_rows(self):
        rows = harness.sweep_attack([2, 4, 8, 16], THETA)
        assert [r.m for r in rows] == [2, 4, 8, 16]
        assert all(r.bounds_hold and r.mc_trials is None for r in rows)

    def test_m10(self):
        (row,) = harness.sweep_attack([10], THETA)
        assert row.xi == pytest.approx(1.75e-3, abs=1e-5)
        assert row.lower == pytest.approx(3.645e-4, rel=1e-12)
        assert row.upper == 0.1
        assert (row.i_star, row.n) == (39, 43)

    def test_csv_round_trip(self, tmp_path):
        rows = harness.sweep_attack([2, 3], THETA, trials=50, base_seed=3)
        path = tmp_path / "sweep.csv"
        harness.write_sweep_csv(rows, path)
        assert harness.read_sweep_csv(path) == rows
        text = path.read_text()
        assert text.splitlines()[0].startswith("m,theta,n,i_star")
        assert rows[0].mc_trials == 50

    def test_invalid(self):
        with pytest.raises(ValueError):
            harness.sweep_attack([], THETA)
        with pytest.raises(ValueError):
            harness.sweep_attack([1], THETA)


class TestBounds:
    def test_values(self):
        rows, ok = harness.check_bias_bound(2)
        assert ok
        assert rows[0].numeric == pytest.approx(0.19245, abs=5e-6)
        assert rows[1].numeric == pytest.approx(0.125, abs=1e-12)

    def test_invalid(self):
        with pytest.raises(ValueError):
            harness.check_bias_bound(0)

    def test_chain(self):
        assert all(all(c.values()) for _, c in harness.check_bound_chain(range(2, 30)))


class TestAttackReport:
    def test_small(self):
        r = harness.attack_report(derive_params(2, THETA), 3000, base_seed=2)
        assert set(r.checks()) == {"p0", "pc", "ps"}
        assert r.xi == pytest.approx(r.empirical.p0 - 0.5)


class TestVerify:
    def test_reduced_suite(self):
        a = harness.verify(max_m=3, omega_points=6, honest_trials=300, bound_m_max=20)
        b = harness.verify(max_m=3, omega_points=6, honest_trials=300, bound_m_max=20)
        assert a == b
        assert [c.name for c in a] == ["appendix", "single-pair", "bound-chain", "bias-bound", "honest"]
        assert all(c.passed for c in a)
        assert harness.checks_to_json(a).count("\n") == 5


class TestStrategyNames:
    @pytest.mark.parametrize("name", harness.STRATEGY_NAMES)
    def test_known(self, name):
        assert harness.make_strategy(name).name == name

    def test_unknown(self):
        with pytest.raises(ValueError):
            harness.make_strategy("nope")
