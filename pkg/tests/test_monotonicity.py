import math
from fractions import Fraction

import numpy as np
import pytest

from poissonapprox.discrete_dist import binom_sf, poisson_sf
from poissonapprox.exceptions import CertificationError, HypothesisError
from poissonapprox.monotonicity import (
    Claim,
    Verdict,
    certify_mlr_failure,
    certify_sequence,
    certify_stochastic_order,
    certify_theorem1,
    check_theorem1,
    corollary1_sequence,
    corollary2_sequence,
    delta_n,
    delta_nk,
    find_mlr_violation,
    h_boundary,
    mlr_matrix,
    q_difference,
    sample_theorem1_tuples,
    theorem1_part,
    theorem2_sequence,
    tilde_delta,
)


class TestDeltaN:
    def test_single_trial_rational_oracle(self):
        # n=1, m=1: J_1 = int_{1-p1}^1 dt = p1 and J_2 = int_{1-p2}^1 t dt
        p1, p2 = Fraction(0.5), Fraction(0.3)
        j1 = p1
        j2 = (1 - (1 - p2) ** 2) / 2
        exact = 2 * j2 - j1
        assert abs(delta_n(1, 1, 0.5, 0.3) - float(exact)) <= 1e-15
        assert float(exact) == pytest.approx(0.01)

    def test_identity_with_tail_difference(self):
        rng = np.random.default_rng(5)
        for n in (1, 4, 17, 60):
            for m in range(1, n + 1):
                lo, hi = sorted(rng.uniform(0.01, 0.99, 2))
                diff, _ = q_difference(n, m, hi, lo)
                scaled = math.comb(n, m - 1) * delta_n(n, m, hi, lo)
                assert np.sign(diff) == np.sign(scaled)
                assert abs(diff - scaled) <= 1e-11 * abs(diff)

    def test_constant_family_gives_zero(self):
        for lam in (0.3, 1.0, 4.0):
            for n in (1, 5, 30):
                p_n = -math.expm1(-lam / n)
                p_next = -math.expm1(-lam / (n + 1))
                assert abs(delta_n(n, 1, p_n, p_next)) <= 1e-13

    def test_domain(self):
        with pytest.raises(ValueError):
            delta_n(3, 4, 0.5, 0.4)


class TestTheorem1:
    def test_examples(self):
        assert theorem1_part(10, 6, 0.5, 0.48) == "i"
        assert check_theorem1(10, 6, 0.5, 0.48) is Verdict.GREATER
        assert binom_sf(11, 0.48, 6) > binom_sf(10, 0.5, 6)
        assert check_theorem1(10, 3, 0.5, 0.40) is Verdict.LESS
        assert binom_sf(11, 0.40, 3) < binom_sf(10, 0.5, 3)
        assert check_theorem1(10, 8, 0.5, 0.40) is Verdict.NOT_APPLICABLE

    def test_precondition(self):
        with pytest.raises(HypothesisError):
            check_theorem1(10, 3, 0.4, 0.5)
        with pytest.raises(HypothesisError):
            check_theorem1(10, 11, 0.5, 0.4)

    def test_margin_failure_is_raised(self):
        # with an absurd margin the honest gap cannot be certified
        with pytest.raises(CertificationError):
            check_theorem1(10, 6, 0.5, 0.48, margin=10.0)

    def test_boundary_tuples_are_classified_exactly(self):
        tuples = sample_theorem1_tuples("i", 400, seed=3, n_max=40, boundary_share=1.0)
        on_boundary = [t for t in tuples if Fraction(t[1]) == 1 + t[0] * Fraction(t[2])]
        assert on_boundary, "expected some tuples with m = 1 + n p_n exactly"
        assert all(theorem1_part(*t) == "i" for t in tuples)

    def test_small_sweeps(self):
        for part in ("i", "ii"):
            report = certify_theorem1(part, samples=500, seed=11, n_max=60)
            assert report.certified
            assert report.grid_size == 500 and report.seed == 11

    def test_workers_do_not_change_result(self):
        one = certify_theorem1("ii", samples=200, seed=4, workers=1)
        two = certify_theorem1("ii", samples=200, seed=4, workers=2)
        assert one.as_dict() == two.as_dict()


class TestSequences:
    def test_corollary1_examples(self):
        seq = corollary1_sequence(1.0, 2, 100)
        assert seq.ns[0] == 2 and seq.direction == "increasing"
        assert all(v < 0.26424111765711535681 for v in seq.probabilities())
        assert certify_sequence(seq).certified
        seq = corollary1_sequence(3.0, 2, 100)
        assert seq.ns[0] == 3 and seq.direction == "decreasing"
        assert all(v > poisson_sf(3.0, 2) for v in seq.probabilities())
        assert certify_sequence(seq).certified
        seq = corollary1_sequence(2.0, 2, 100)
        assert seq.claim is Claim.C1ii and certify_sequence(seq).certified

    def test_corollary1_gap_and_start(self):
        with pytest.raises(HypothesisError):
            corollary1_sequence(1.5, 2, 50)
        assert corollary1_sequence(2.5, 1, 10).ns[0] == 3

    def test_corollary2_examples(self):
        seq = corollary2_sequence(2.0, 1, 3, 100)
        assert seq.ns[0] == 4
        assert seq.limit[0] == pytest.approx(0.72178817726193435677, abs=1e-14)
        assert certify_sequence(seq).certified
        seq = corollary2_sequence(1.0, 1, 1, 100)
        assert seq.limit[0] == pytest.approx(math.exp(-1.0), rel=1e-14)
        assert certify_sequence(seq).certified
        with pytest.raises(HypothesisError):
            corollary2_sequence(0.5, 1, 3, 50)

    def test_theorem2_examples(self):
        seq = theorem2_sequence(1.0, 2, 100)
        assert seq.ns[0] == 1
        assert seq.limit[0] == pytest.approx(0.26424111765711535681, abs=1e-15)
        assert certify_sequence(seq).certified
        seq = theorem2_sequence(4.0, 3, 200)
        assert seq.ns[0] == 2 and certify_sequence(seq).certified
        assert all(v < poisson_sf(4.0, 3) for v in seq.probabilities())

    def test_theorem2_constant_case(self):
        seq = theorem2_sequence(1.7, 1, 150)
        report = certify_sequence(seq)
        assert report.certified
        assert report.details["max_deviation"] <= 1e-14

    def test_wrong_direction_is_caught(self):
        seq = corollary1_sequence(1.0, 2, 50)
        flipped = type(seq)(seq.claim, seq.ns, seq.values, seq.limit, "decreasing", "above", seq.params)
        assert not certify_sequence(flipped).certified

    def test_stochastic_order(self):
        report = certify_stochastic_order(2.0, 80)
        assert report.certified and report.grid_size > 0


class TestMlr:
    def test_h(self):
        assert h_boundary(1.0) == pytest.approx(0.3678794411714423216, abs=1e-16)

    def test_sign_agreement(self):
        for n in range(1, 41):
            for lam in (0.5, 1.0, 2.0, n / 2, float(n)):
                for cell in mlr_matrix(n, lam):
                    if abs(cell.tilde_delta_nk) > 1e-9:
                        assert np.sign(cell.delta_nk) == np.sign(cell.tilde_delta_nk)

    def test_direct_path_independent_of_proxy(self):
        # the direct value agrees with a plain float evaluation of the four masses
        n, k, lam = 7, 2, 3.0
        p0, p1 = -math.expm1(-lam / n), -math.expm1(-lam / (n + 1))

        def b(nn, kk, pp):
            return math.comb(nn, kk) * pp**kk * (1 - pp) ** (nn - kk)

        plain = b(n + 1, k + 1, p1) * b(n, k, p0) - b(n, k + 1, p0) * b(n + 1, k, p1)
        assert delta_nk(n, k, lam) == pytest.approx(plain, rel=1e-9)

    def test_last_cell_small_lambda(self):
        n, lam = 10, 0.01
        expected = -(math.exp(lam / n) - math.exp(lam / (n + 1))) + math.exp(lam / (n + 1)) - 1
        assert tilde_delta(n, n - 1, lam) == pytest.approx(expected, rel=1e-9)
        assert np.sign(delta_nk(n, n - 1, lam)) == np.sign(expected)

    def test_tilde_vanishes_as_lambda_shrinks(self):
        assert max(abs(c.tilde_delta_nk) for c in mlr_matrix(12, 1e-9)) < 1e-9

    def test_violation_search(self):
        n, k, d = find_mlr_violation(1.0, 0.2, n_start=5)
        assert n >= 5 and k == math.floor(0.2 * n) and d < -1e-12
        with pytest.raises(HypothesisError):
            find_mlr_violation(1.0, 0.5)

    def test_certify(self):
        report = certify_mlr_failure()
        assert report.certified
        assert len(report.details["violations_of_mlr"]) == 3
