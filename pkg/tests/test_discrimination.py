import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qcointoss import discrimination as disc
from qcointoss.qmath import ProductState, eigvalsh, projector, psi, validate_povm

GRID = np.linspace(0.0, math.pi / 2, 50)
OPEN_GRID = GRID[1:]
omegas = st.floats(0.0, math.pi / 2, allow_nan=False)
ms = st.integers(1, 40)


class TestSinglePair:
    def test_helstrom_ends(self):
        assert disc.helstrom_error(math.pi / 2) == 0.0
        assert disc.helstrom_error(0.0) == 0.5

    def test_helstrom_pi_9(self):
        assert disc.helstrom_error(math.pi / 9) == pytest.approx(0.328990, abs=5e-7)
        assert disc.parity_error_oracle(1, math.pi / 9) == pytest.approx(disc.helstrom_error(math.pi / 9), abs=1e-12)

    @given(omegas)
    def test_helstrom_two_forms(self, omega):
        assert disc.helstrom_error(omega) == pytest.approx(math.sin(math.pi / 4 - omega / 2) ** 2, abs=1e-12)

    def test_conclusive_values(self):
        assert disc.conclusive_rate(math.pi / 2) == pytest.approx(1.0, abs=1e-15)
        assert disc.conclusive_rate(0.0) == 0.0
        assert disc.conclusive_rate(math.pi / 9) == pytest.approx(0.060307, abs=5e-7)

    @given(omegas)
    def test_conclusive_below_bound(self, omega):
        assert disc.conclusive_rate(omega) <= 1.0 - 2.0 * disc.helstrom_error(omega) + 1e-15

    def test_false_claim_pass(self):
        assert disc.false_claim_pass(0.0) == 1.0
        assert disc.false_claim_pass(math.pi / 2) == pytest.approx(0.0, abs=1e-30)
        assert disc.false_claim_pass(math.pi / 3) == pytest.approx(0.25, abs=1e-12)

    @given(omegas)
    def test_false_claim_is_born_probability(self, omega):
        p0 = ProductState((psi(0, omega),)).vector()
        p1 = ProductState((psi(1, omega),)).vector()
        assert disc.false_claim_pass(omega) == pytest.approx(float(p0 @ p1) ** 2, abs=1e-12)

    @pytest.mark.parametrize("fn", [disc.helstrom_error, disc.conclusive_rate, disc.false_claim_pass])
    @pytest.mark.parametrize("bad", [-0.1, 2.0])
    def test_range(self, fn, bad):
        with pytest.raises(ValueError):
            fn(bad)


class TestUnambiguousPovm:
    @pytest.mark.parametrize("omega", OPEN_GRID)
    def test_valid_and_unambiguous(self, omega):
        povm = disc.build_unambiguous_povm(omega)
        assert validate_povm(povm) == []
        assert povm.labels == [disc.CONCLUSIVE_0, disc.CONCLUSIVE_1, disc.INCONCLUSIVE]
        s0, s1 = psi(0, omega).vector(), psi(1, omega).vector()
        assert abs(s1 @ povm[disc.CONCLUSIVE_0] @ s1) <= 1e-12
        assert abs(s0 @ povm[disc.CONCLUSIVE_1] @ s0) <= 1e-12
        assert s0 @ povm[disc.CONCLUSIVE_0] @ s0 == pytest.approx(disc.conclusive_rate(omega), abs=1e-10)
        assert s1 @ povm[disc.CONCLUSIVE_1] @ s1 == pytest.approx(disc.conclusive_rate(omega), abs=1e-10)

    def test_pi_9(self):
        povm = disc.build_unambiguous_povm(math.pi / 9)
        probs = povm.probabilities(psi(0, math.pi / 9).vector())
        assert probs[disc.CONCLUSIVE_0] == pytest.approx(0.060307, abs=5e-7)

    def test_projective_at_right_angle(self):
        povm = disc.build_unambiguous_povm(math.pi / 2)
        assert np.all(povm[disc.INCONCLUSIVE] == 0.0)
        assert validate_povm(povm) == []

    def test_small_angle_limit(self):
        # the inconclusive element tends to the projector onto the common limit |0>,
        # so both inputs become inconclusive with certainty
        povm = disc.build_unambiguous_povm(1e-6)
        assert np.allclose(povm[disc.INCONCLUSIVE], np.diag([1.0, 0.0]), atol=1e-6)
        for bit in (0, 1):
            probs = povm.probabilities(psi(bit, 1e-6).vector())
            assert probs[disc.INCONCLUSIVE] == pytest.approx(1.0, abs=1e-6)

    def test_rejects_zero(self):
        with pytest.raises(ValueError, match="degenerate"):
            disc.build_unambiguous_povm(0.0)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            disc.build_unambiguous_povm(2.0)

    @pytest.mark.parametrize("i", [1, 5, 27])
    def test_products_span_frame(self, i):
        # on psi(a)^i the conclusive mass equals 1 - cos(theta)^i
        theta = math.pi / 9
        ref0 = ProductState.repeated(psi(0, theta), i)
        ref1 = ProductState.repeated(psi(1, theta), i)
        probs = disc.unambiguous_probabilities(ref1, ref0, ref1)
        assert probs[disc.CONCLUSIVE_1] == pytest.approx(1 - math.cos(theta) ** i, abs=1e-12)
        assert probs[disc.CONCLUSIVE_0] == pytest.approx(0.0, abs=1e-12)

    def test_outside_span_is_inconclusive(self):
        ref0 = ProductState.repeated(psi(0, 0.3), 2)
        ref1 = ProductState.repeated(psi(1, 0.3), 2)
        orth = ProductState((psi(0, 0.3), psi(0, 0.3 + math.pi)))  # contains a flipped factor
        probs = disc.unambiguous_probabilities(orth, ref0, ref1)
        assert sum(probs.values()) == pytest.approx(1.0)


class TestParityBlocks:
    def test_m1(self):
        (block,) = disc.parity_blocks(1, 0.7)
        assert block.k == 0 and block.multiplicity == 1
        assert block.trace == pytest.approx(1.0, abs=1e-12)
        assert block.angle == pytest.approx(0.7, abs=1e-12)

    def test_m3_k1(self):
        c, s = math.cos(math.pi / 6), math.sin(math.pi / 6)
        block = disc.parity_blocks(3, math.pi / 3)[1]
        assert block.multiplicity == 3
        assert block.block_plus[0, 0] == pytest.approx(c**4 * s**2, abs=1e-15)
        assert block.block_plus[0, 1] == pytest.approx(c**3 * s**3, abs=1e-15)
        assert block.block_plus[1, 1] == pytest.approx(c**2 * s**4, abs=1e-15)
        assert block.block_minus[0, 1] == pytest.approx(-(c**3) * s**3, abs=1e-15)

    def test_even_middle_block(self):
        blocks = disc.parity_blocks(4, 0.5)
        assert [b.multiplicity for b in blocks] == [1, 4, 3]
        assert blocks[-1].k == 2

    @given(ms, omegas)
    def test_trace_identity(self, m, omega):
        total = math.fsum(b.multiplicity * b.trace for b in disc.parity_blocks(m, omega))
        assert total == pytest.approx(1.0, abs=1e-12)

    @given(st.integers(1, 12), omegas)
    def test_block_dimension_count(self, m, omega):
        assert sum(2 * b.multiplicity for b in disc.parity_blocks(m, omega)) == 2**m

    @given(ms, st.floats(1e-3, math.pi / 2, allow_nan=False))
    def test_normalised_blocks_are_pure_pairs(self, m, omega):
        for b in disc.parity_blocks(m, omega):
            if b.trace < 1e-200:
                continue
            plus = b.block_plus / b.trace
            assert np.linalg.det(plus) == pytest.approx(0.0, abs=1e-12)
            assert np.trace(plus) == pytest.approx(1.0)
            # the two normalised states meet at angle Theta_k
            vp = np.sqrt(np.diag(plus)) * [1, 1]
            vm = np.sqrt(np.diag(plus)) * [1, -1]
            assert float(vp @ vm) == pytest.approx(math.cos(b.angle), abs=1e-9)

    def test_rejects_bad_m(self):
        with pytest.raises(ValueError):
            disc.parity_blocks(0, 0.3)

    @pytest.mark.parametrize("m", range(1, 9))
    def test_blocks_reproduce_oracle_spectrum(self, m):
        omega = 0.61
        diff = disc.parity_density_matrix(0, m, omega) - disc.parity_density_matrix(1, m, omega)
        expected = []
        for b in disc.parity_blocks(m, omega):
            expected += list(eigvalsh(b.block_plus - b.block_minus)) * b.multiplicity
        assert np.allclose(np.sort(expected), eigvalsh(diff), atol=1e-9)


class TestParityError:
    def test_m1_is_helstrom(self):
        for omega in GRID:
            assert disc.parity_error_exact(1, omega) == pytest.approx(disc.helstrom_error(omega), abs=1e-15)

    def test_orthogonal(self):
        assert disc.parity_error_exact(7, math.pi / 2) == pytest.approx(0.0, abs=1e-15)

    def test_m3_pi_3(self):
        assert disc.parity_error_exact(3, math.pi / 3) == pytest.approx(0.175240, abs=5e-7)
        assert disc.parity_error_oracle(3, math.pi / 3) == pytest.approx(0.17524047358083555, abs=1e-12)

    @given(st.integers(1, 30), st.floats(0, math.pi / 2 - 1e-6, allow_nan=False))
    def test_monotone_in_m(self, m, omega):
        assert disc.parity_error_exact(m, omega) <= disc.parity_error_exact(m + 1, omega) + 1e-15

    @given(ms, omegas)
    def test_block_average(self, m, omega):
        assert disc.parity_error_from_blocks(m, omega) == pytest.approx(disc.parity_error_exact(m, omega), abs=1e-12)

    @given(ms, omegas)
    def test_bound_identity(self, m, omega):
        bound = disc.parity_conclusive_bound(m, omega)
        assert bound == pytest.approx(1 - 2 * disc.parity_error_exact(m, omega), abs=1e-12)
        assert disc.product_conclusive_rate(m, omega) <= bound + 1e-15

    def test_conclusive_bound_values(self):
        assert disc.parity_conclusive_bound(1, math.pi / 2) == 1.0
        assert disc.parity_conclusive_bound(5, math.pi / 4) == pytest.approx(0.176777, abs=5e-7)


class TestOracle:
    def test_m1_pi_4(self):
        assert disc.parity_error_oracle(1, math.pi / 4) == pytest.approx(0.146447, abs=5e-7)

    @pytest.mark.parametrize("m", [1, 2, 5, 8])
    def test_identical_states(self, m):
        assert disc.parity_error_oracle(m, 0.0) == pytest.approx(0.5, abs=1e-12)

    def test_even_m(self):
        assert disc.parity_error_oracle(4, math.pi / 5) == pytest.approx(disc.parity_error_exact(4, math.pi / 5), abs=1e-9)

    def test_density_matrix_m1(self):
        rho = disc.parity_density_matrix(0, 1, 0.8)
        assert np.allclose(rho, projector(psi(0, 0.8).vector()), atol=1e-15)

    @pytest.mark.parametrize("m", range(1, 8))
    @pytest.mark.parametrize("parity", [0, 1])
    def test_density_matrix_is_state(self, m, parity):
        rho = disc.parity_density_matrix(parity, m, 0.9)
        assert np.trace(rho) == pytest.approx(1.0, abs=1e-10)
        assert eigvalsh(rho)[0] >= -1e-10

    def test_m2_difference_spectrum(self):
        # eigen_sym ground truth: +/- sin^2(omega)/2, each twice (two 2x2 blocks)
        omega = math.pi / 3
        diff = disc.parity_density_matrix(0, 2, omega) - disc.parity_density_matrix(1, 2, omega)
        w = eigvalsh(diff)
        assert np.allclose(w, [-0.375, -0.375, 0.375, 0.375], atol=1e-12)
        assert 0.375 == pytest.approx(math.sin(omega) ** 2 / 2)

    def test_resource_limit(self):
        with pytest.raises(MemoryError):
            disc.parity_density_matrix(0, 11, 0.3)

    def test_bad_parity(self):
        with pytest.raises(ValueError):
            disc.parity_density_matrix(2, 3, 0.3)


class TestParityGuess:
    @pytest.mark.parametrize("m", [1, 2, 3, 6])
    def test_matches_helstrom_on_references(self, m):
        omega = 0.5
        c, s = math.cos(omega / 2), math.sin(omega / 2)
        coords = [(c, s)] * m  # every a_j = 0, parity 0
        p0, p1 = disc.parity_guess_probabilities(coords)
        assert p0 + p1 == pytest.approx(1.0)
        # averaged over all strings the success rate equals 1 - PE(m)
        total = 0.0
        for bits in range(2**m):
            pattern = [(c, -s if (bits >> k) & 1 else s) for k in range(m)]
            parity = bin(bits).count("1") % 2
            total += disc.parity_guess_probabilities(pattern)[parity]
        assert total / 2**m == pytest.approx(1 - disc.parity_error_exact(m, omega), abs=1e-12)
