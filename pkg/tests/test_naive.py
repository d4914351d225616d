import itertools
import math

import numpy as np
import pytest
from scipy import stats

from qcointoss.harness import naive_monte_carlo
from qcointoss.naive import (
    NAIVE_HONEST,
    BasisChoice,
    BasisReroll,
    EprRegister,
    NaiveStrategy,
    basis_reroll_attack,
    run_naive,
)
from qcointoss.protocol import ALICE, BOB

PLUS, CROSS = BasisChoice.RECTILINEAR, BasisChoice.DIAGONAL


class TestEprRegister:
    def test_initial_state(self):
        reg = EprRegister()
        assert np.allclose(reg.vector, [1 / math.sqrt(2), 0, 0, 1 / math.sqrt(2)])
        assert reg.owners == (ALICE, BOB)

    @pytest.mark.parametrize("basis", [PLUS, CROSS])
    @pytest.mark.parametrize("qubit", [0, 1])
    def test_marginals_uniform(self, basis, qubit):
        reg = EprRegister()
        assert reg.probability(qubit, basis, 0) == pytest.approx(0.5, abs=1e-15)

    @pytest.mark.parametrize("basis", [PLUS, CROSS])
    @pytest.mark.parametrize("u", [0.1, 0.9])
    def test_same_basis_correlated(self, basis, u):
        reg = EprRegister()
        a = reg.measure(0, basis, u)
        assert np.linalg.norm(reg.vector) == pytest.approx(1.0, abs=1e-12)
        assert reg.probability(1, basis, a) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("first,second", [(PLUS, CROSS), (CROSS, PLUS)])
    def test_cross_basis_uniform(self, first, second):
        reg = EprRegister()
        reg.measure(1, first, 0.3)
        assert reg.probability(0, second, 0) == pytest.approx(0.5, abs=1e-12)

    def test_bad_state(self):
        with pytest.raises(ValueError):
            EprRegister(np.array([1.0, 1.0, 0.0, 0.0]))
        with pytest.raises(ValueError):
            EprRegister(np.array([1.0, 0.0]))

    def test_measurement_statistics(self):
        # same basis: always equal; cross basis: independent uniform (chi-square)
        rng = np.random.default_rng(2024)
        n = 100_000
        table = np.zeros((2, 2))
        for k in range(n):
            u1, u2 = rng.random(2)
            reg = EprRegister()
            if k % 2:
                a = reg.measure(0, PLUS, u1)
                b = reg.measure(1, PLUS, u2)
                assert a == b
            else:
                a = reg.measure(0, PLUS, u1)
                b = reg.measure(1, CROSS, u2)
                table[a, b] += 1
        chi2 = stats.chisquare(table.ravel())
        assert chi2.pvalue > 1e-3


class TestHonest:
    def test_m1_equal(self):
        for seed in range(500):
            out = run_naive(1, NAIVE_HONEST, seed)
            assert out.completed and out.alice_bit == out.bob_bit

    def test_statistics(self):
        est = naive_monte_carlo(4, NAIVE_HONEST, 20_000, base_seed=3)
        assert est.aborts == 0
        assert est.within(0.5)
        assert "mismatch" not in est.counters

    def test_all_diagonal(self):
        class Diagonal(NaiveStrategy):
            name = "diagonal"

            def announce(self, bob, registers, state):
                state["outcomes"] = [r.measure_owned(BOB, CROSS, bob.uniform("measure", j))
                                     for j, r in enumerate(registers, 1)]
                return [CROSS] * len(registers)

        for seed in range(300):
            out = run_naive(3, Diagonal(), seed)
            assert out.completed and out.alice_bit == out.bob_bit

    def test_no_transcript(self):
        assert run_naive(2, seed=1).transcript is None

    def test_bad_m(self):
        with pytest.raises(ValueError):
            run_naive(0)


def enumerate_reroll(fresh_test):
    """Exact outcome distribution of the reroll attack with m = 2, by enumeration of branch outcomes.

    Branches: Bob's two rectilinear outcomes (1/4 each), Alice's diagonal outcome at
    position 2 when rerolled (1/2 each) and, in the fresh-test reading, Bob's fresh
    diagonal outcome (1/2 each).
    """
    dist = {0: 0.0, 1: 0.0, "abort": 0.0}
    for b1, b2 in itertools.product((0, 1), repeat=2):
        if b1 ^ b2 == 0:
            dist[0] += 0.25
            continue
        for a2 in (0, 1):
            if fresh_test:
                for f in (0, 1):
                    key = "abort" if f != a2 else b1 ^ f
                    dist[key] += 0.25 * 0.5 * 0.5
            else:
                key = 0 if b1 ^ a2 == 0 else "abort"
                dist[key] += 0.25 * 0.5
    return dist


class TestReroll:
    def test_enumeration(self):
        assert enumerate_reroll(False) == {0: 0.75, 1: 0.0, "abort": 0.25}
        assert enumerate_reroll(True) == {0: 0.625, 1: 0.125, "abort": 0.25}

    @pytest.mark.parametrize("fresh", [False, True])
    def test_monte_carlo_matches_enumeration(self, fresh):
        exact = enumerate_reroll(fresh)
        est = naive_monte_carlo(2, BasisReroll(0, fresh), 40_000, base_seed=8)
        assert est.within(exact[0], 0)
        assert est.within(exact[1], 1) if exact[1] else est.count1 == 0
        assert abs(est.abort - 0.25) <= 4 * math.sqrt(0.25 * 0.75 / est.trials)

    def test_target_one(self):
        est = naive_monte_carlo(3, basis_reroll_attack(3, target=1), 20_000, base_seed=2)
        assert est.count0 == 0
        assert est.within(0.75, 1)

    def test_dominates_honest(self):
        honest = naive_monte_carlo(4, NAIVE_HONEST, 20_000, base_seed=1)
        attack = naive_monte_carlo(4, basis_reroll_attack(4), 20_000, base_seed=1)
        assert attack.p0 > honest.p0 + 0.2

    def test_needs_two_positions(self):
        with pytest.raises(ValueError):
            basis_reroll_attack(1)

    def test_outputs_agree_when_completed(self):
        for seed in range(500):
            out = run_naive(4, basis_reroll_attack(), seed)
            if out.completed:
                assert out.alice_bit == out.bob_bit == 0
            else:
                assert out.notes["bob"]["rerolled"]
