import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from permlab.core import Subset, SubsetFamily, enumerate_family, philox_stream, sample_family
from permlab.structure import (
    CrossoverReport,
    TargetClass,
    bound_crossover,
    check_distributed,
    eval_poly,
    fixing_procedure,
    witness_pigeonhole,
)


def family_of(universe, *member_tuples):
    return SubsetFamily(universe, tuple(Subset(universe, m) for m in member_tuples))


class TestTargetClass:
    def test_fixed_size_feasibility(self):
        target = TargetClass.fixed_size(16, 3)
        assert target.feasible_extension(Subset(16, ()))
        assert target.feasible_extension(Subset(16, (1, 2, 3)))
        assert not target.feasible_extension(Subset(16, (1, 2, 3, 4)))

    def test_parity_target_defaults(self):
        target = TargetClass.parity(4, "odd")
        assert target.majority_count == 3
        assert target.universe == 16

    def test_parity_feasibility_limits_minority(self):
        # a member of the odd class at N=4 has only one even element
        target = TargetClass.parity(4, "odd")
        assert target.feasible_extension(Subset(16, (2,)))
        assert not target.feasible_extension(Subset(16, (2, 4)))
        # more than ceil(N/3) evens can never extend into the odd class
        assert not target.feasible_extension(Subset(16, (2, 4, 6)))

    def test_parity_feasibility_majority_slots(self):
        target = TargetClass.parity(4, "odd")
        assert target.feasible_extension(Subset(16, (1, 3, 5)))
        assert not target.feasible_extension(Subset(16, (1, 3, 5, 7)))

    def test_validation(self):
        with pytest.raises(ValueError):
            TargetClass("fixed_size", 4, size=9)
        with pytest.raises(ValueError):
            TargetClass("parity", 15, block=4, majority="odd", majority_count=3)
        with pytest.raises(ValueError):
            TargetClass.parity(4, "sideways")


class TestFixingProcedure:
    def test_full_binomial_family_exits_immediately(self):
        # every element of [4] lies in 3 of the 6 two-subsets; 3 < 6*4^(-1/4)
        fam = enumerate_family(4, 2)
        cert = fixing_procedure(fam, 0.25, 4, target=TargetClass.fixed_size(4, 1))
        assert cert.iterations == 0
        assert cert.s_fixed.members == ()
        assert len(cert.family_prime) == 6
        assert abs(cert.max_offfixed_fraction - 0.5) < 1e-12
        ok, diag = check_distributed(
            cert.family_prime, cert.s_fixed, 0.25, TargetClass.fixed_size(4, 1), 4
        )
        assert ok, diag

    def test_common_element_absorbed_without_shrink(self):
        fam = family_of(4, (1, 2), (1, 3), (1, 4))
        cert = fixing_procedure(fam, 0.25, 4)
        assert cert.s_fixed.members == (1,)
        assert len(cert.family_prime) == 3
        assert cert.shrink_log == ()

    def test_single_set_fixes_itself(self):
        fam = family_of(6, (2, 3, 5))
        cert = fixing_procedure(fam, 0.25, 4)
        assert cert.s_fixed.members == (2, 3, 5)
        assert len(cert.family_prime) == 1
        assert cert.max_offfixed_fraction == 0.0

    def test_shrink_path(self):
        # threshold 16^(-1/4) = 1/2: nu(1)=2 of 3 qualifies, then nu(2)=1 of 2
        fam = family_of(3, (1, 2), (1, 3), (2, 3))
        cert = fixing_procedure(fam, 0.25, 16)
        assert cert.s_fixed.members == (1, 2)
        assert [s.members for s in cert.family_prime] == [(1, 2)]
        assert cert.iterations == 2
        assert cert.shrink_log[0] == (1, 2, 3)
        for element, nu, before in cert.shrink_log:
            assert nu >= before * 16 ** (-0.25) - 1e-12

    def test_empty_family_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            fixing_procedure(SubsetFamily(4, ()), 0.25, 4)

    def test_alpha_range(self):
        fam = enumerate_family(4, 2)
        with pytest.raises(ValueError):
            fixing_procedure(fam, 0.7, 4)
        with pytest.raises(ValueError):
            fixing_procedure(fam, 0.0, 4)

    @given(st.integers(0, 200))
    @settings(max_examples=40, deadline=None)
    def test_terminates_within_universe_iterations(self, seed):
        rng = philox_stream(seed)
        count = int(rng.integers(1, 30))
        fam = sample_family(10, 3, min(count, math.comb(10, 3)), rng)
        cert = fixing_procedure(fam, 0.3, 8)
        assert cert.iterations <= 10
        # exit condition: every off-core frequency is below the threshold
        counts = cert.family_prime.element_counts()
        size = len(cert.family_prime)
        for element, nu in counts.items():
            if element not in cert.s_fixed:
                assert nu < size * 8 ** (-0.3)

    def test_certificate_core_contained_everywhere(self):
        fam = sample_family(12, 4, 40, philox_stream(77))
        cert = fixing_procedure(fam, 0.25, 4)
        for s in cert.family_prime:
            assert cert.s_fixed.issubset(s)


class TestCheckDistributed:
    def test_detects_full_frequency_off_core_element(self):
        fam = family_of(4, (1, 2), (1, 3))
        ok, diag = check_distributed(
            fam, Subset(4, ()), 0.25, TargetClass.fixed_size(4, 1), 4
        )
        assert not ok
        assert not diag["fraction_ok"]

    def test_detects_infeasible_core(self):
        fam = family_of(16, (2, 4, 6))
        ok, diag = check_distributed(
            fam, Subset(16, (2, 4, 6)), 0.25, TargetClass.parity(4, "odd"), 4
        )
        assert not ok
        assert not diag["target_feasible"]

    def test_detects_core_not_contained(self):
        fam = family_of(4, (1, 2), (3, 4))
        ok, diag = check_distributed(
            fam, Subset(4, (1,)), 0.25, TargetClass.fixed_size(4, 1), 4
        )
        assert not ok
        assert not diag["core_in_all_members"]


class TestWitnessPigeonhole:
    def test_examples(self):
        assert witness_pigeonhole(1820, 4) == 114
        assert witness_pigeonhole(37, 0) == 37
        assert witness_pigeonhole(1, 10) == 1

    @given(st.integers(0, 10**9), st.integers(0, 40))
    def test_buckets_cover_family(self, size, bits):
        assert witness_pigeonhole(size, bits) * 2**bits >= size

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            witness_pigeonhole(-1, 2)


class TestBoundCrossover:
    def test_uniform_crossover_shape(self):
        rep = bound_crossover(0.25, (0.0, 1.0), "uniform")
        assert isinstance(rep, CrossoverReport)
        assert rep.n_star is not None
        n, up, lo, crossed = rep.rows[rep.n_star - 1]
        assert n == rep.n_star and crossed and lo > up
        if rep.n_star > 1:
            _, up_prev, lo_prev, crossed_prev = rep.rows[rep.n_star - 2]
            assert not crossed_prev and lo_prev <= up_prev
        assert rep.sign_flips == 1

    def test_parity_crossover_shape(self):
        rep = bound_crossover(0.25, (0.0, 1.0), "parity")
        assert rep.n_star is not None
        assert rep.sign_flips == 1

    def test_monotone_in_alpha(self):
        for variant in ("uniform", "parity"):
            stars = [
                bound_crossover(a, (0.0, 1.0), variant).n_star
                for a in (0.1, 0.2, 0.3, 0.4)
            ]
            assert all(s is not None for s in stars)
            assert all(a <= b for a, b in zip(stars, stars[1:]))

    def test_smaller_witness_budget_crosses_earlier(self):
        flat = bound_crossover(0.25, (0.0,), "uniform").n_star
        quadratic = bound_crossover(0.25, (0.0, 0.0, 1.0), "uniform").n_star
        assert flat <= quadratic

    def test_no_crossover_message(self):
        rep = bound_crossover(0.25, (0.0, 1.0), "uniform", n_max=1)
        assert rep.n_star is None
        assert "no crossover found <= 1" in rep.message

    def test_variant_and_alpha_validation(self):
        with pytest.raises(ValueError):
            bound_crossover(0.25, (0.0,), "diagonal")
        with pytest.raises(ValueError):
            bound_crossover(0.6, (0.0,), "parity")
        with pytest.raises(ValueError):
            bound_crossover(1.2, (0.0,), "uniform")
        # uniform tolerates alpha up to 1
        assert bound_crossover(0.8, (0.0,), "uniform").rows

    def test_eval_poly(self):
        assert eval_poly((1.0, 2.0, 3.0), 2.0) == 1 + 4 + 12
