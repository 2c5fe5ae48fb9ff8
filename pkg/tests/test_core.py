import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from permlab.core import (
    DensityMatrix,
    Permutation,
    PureState,
    Subset,
    SubsetFamily,
    enumerate_family,
    partial_trace,
    philox_stream,
    sample_family,
    subset_state,
    trace_distance,
)


perms = st.integers(2, 8).flatmap(
    lambda n: st.permutations(list(range(1, n + 1))).map(
        lambda img: Permutation(n, tuple(img))
    )
)


class TestPermutation:
    def test_rejects_non_bijection(self):
        with pytest.raises(ValueError):
            Permutation(3, (1, 1, 2))
        with pytest.raises(ValueError):
            Permutation(3, (1, 2))
        with pytest.raises(ValueError):
            Permutation(3, (0, 1, 2))

    def test_compose_identity(self):
        sigma = Permutation(3, (2, 3, 1))
        assert Permutation.identity(3).compose(sigma) == sigma
        assert sigma.compose(Permutation.identity(3)) == sigma

    def test_compose_swap_involution(self):
        swap = Permutation.transposition(2, 1, 2)
        assert swap.compose(swap) == Permutation.identity(2)

    def test_compose_hand_example(self):
        # j -> a(b(j)) for a=(2,3,1), b=(3,1,2) gives the identity
        a = Permutation(3, (2, 3, 1))
        b = Permutation(3, (3, 1, 2))
        assert a.compose(b) == Permutation(3, (1, 2, 3))

    def test_compose_size_mismatch(self):
        with pytest.raises(ValueError):
            Permutation.identity(2).compose(Permutation.identity(3))

    def test_invert_examples(self):
        assert Permutation.identity(4).invert() == Permutation.identity(4)
        assert Permutation(3, (2, 3, 1)).invert() == Permutation(3, (3, 1, 2))

    def test_invert_random_seeded(self):
        p = Permutation.random(16, philox_stream(7))
        assert p.compose(p.invert()) == Permutation.identity(16)

    @given(perms)
    def test_inverse_properties(self, p):
        assert p.compose(p.invert()) == Permutation.identity(p.size)
        assert p.invert().invert() == p

    def test_preimage_examples(self):
        assert Permutation.identity(4).preimage_set(2).members == (1, 2)
        assert Permutation(4, (3, 4, 1, 2)).preimage_set(2).members == (3, 4)
        with pytest.raises(ValueError):
            Permutation.identity(4).preimage_set(5)

    @given(perms, st.data())
    def test_preimage_always_has_block_size(self, p, data):
        block = data.draw(st.integers(1, p.size))
        assert len(p.preimage_set(block)) == block

    def test_preimage_size_at_v16(self):
        p = Permutation.random(16, philox_stream(3))
        assert len(p.preimage_set(4)) == 4

    def test_matrix_acts_like_permutation(self):
        p = Permutation(4, (3, 4, 1, 2))
        e1 = np.eye(4)[0]
        assert np.argmax(p.matrix() @ e1) == 2

    def test_text_round_trip(self):
        p = Permutation.from_text("3 4 1 2")
        assert p == Permutation(4, (3, 4, 1, 2))
        assert p.to_text() == "3 4 1 2"


class TestSubset:
    def test_validation(self):
        with pytest.raises(ValueError):
            Subset(4, (1, 1))
        with pytest.raises(ValueError):
            Subset(4, (2, 1))
        with pytest.raises(ValueError):
            Subset(4, (0,))
        with pytest.raises(ValueError):
            Subset(4, (5,))

    def test_parity_counts(self):
        assert Subset(4, (2, 4)).parity_counts() == (2, 0)
        assert Subset(4, (1, 2, 3, 4)).parity_counts() == (2, 2)
        # three even and one odd label, the majority split at N=4
        assert Subset(16, (1, 2, 4, 6)).parity_counts() == (3, 1)

    def test_set_algebra(self):
        a = Subset(6, (1, 2, 3))
        b = Subset(6, (1, 4, 5))
        assert a.intersection(b).members == (1,)
        assert a.union(b).members == (1, 2, 3, 4, 5)
        assert a.difference(b).members == (2, 3)
        assert a.symmetric_difference(b).members == (2, 3, 4, 5)
        assert a.union(b).complement().members == (6,)
        assert Subset(6, (1, 2)).issubset(a)

    def test_empty_subset_allowed(self):
        empty = Subset(4, ())
        assert len(empty) == 0
        assert empty.parity_counts() == (0, 0)

    def test_text_round_trip(self):
        s = Subset.from_text(6, "4 1 5")
        assert s.members == (1, 4, 5)
        assert s.to_text() == "1 4 5"


class TestSubsetFamily:
    def test_duplicate_rejected(self):
        s = Subset(4, (1, 2))
        with pytest.raises(ValueError):
            SubsetFamily(4, (s, Subset(4, (1, 2))))

    def test_universe_mismatch_rejected(self):
        with pytest.raises(ValueError):
            SubsetFamily(4, (Subset(5, (1,)),))

    def test_element_counts(self):
        fam = SubsetFamily(4, (Subset(4, (1, 2)), Subset(4, (1, 3))))
        assert fam.element_counts() == {1: 2, 2: 1, 3: 1}
        assert len(fam.restrict_to(2)) == 1


class TestStates:
    def test_subset_state_two_element(self):
        psi = subset_state(Subset(4, (1, 2)), 4)
        np.testing.assert_allclose(
            psi.amplitudes, [math.sqrt(0.5), math.sqrt(0.5), 0, 0], atol=1e-15
        )

    def test_subset_state_singleton(self):
        psi = subset_state(Subset(4, (3,)), 4)
        np.testing.assert_allclose(psi.amplitudes, np.eye(4)[2], atol=1e-15)

    def test_subset_state_first_block_of_sixteen(self):
        psi = subset_state(Subset(16, (1, 2, 3, 4)), 16)
        np.testing.assert_allclose(psi.amplitudes[:4], [0.5] * 4, atol=1e-15)
        np.testing.assert_allclose(psi.amplitudes[4:], 0, atol=1e-15)

    def test_subset_state_errors(self):
        with pytest.raises(ValueError, match="empty subset has no state"):
            subset_state(Subset(4, ()), 4)
        with pytest.raises(ValueError, match="dimension"):
            subset_state(Subset(8, (5,)), 4)

    @given(st.integers(2, 10).flatmap(
        lambda v: st.sets(st.integers(1, v), min_size=1).map(
            lambda m: Subset(v, tuple(sorted(m)))
        )
    ))
    def test_subset_state_norm_and_support(self, s):
        psi = subset_state(s, s.universe)
        assert abs(np.sum(np.abs(psi.amplitudes) ** 2) - 1) < 1e-12
        support = {i + 1 for i in np.nonzero(psi.amplitudes)[0]}
        assert support == set(s.members)

    def test_pure_state_norm_checked(self):
        with pytest.raises(ValueError, match="normalized"):
            PureState(2, np.array([1.0, 1.0]))

    def test_density_validation(self):
        with pytest.raises(ValueError, match="Hermitian"):
            DensityMatrix(2, np.array([[1.0, 1.0], [0.0, 0.0]]))
        with pytest.raises(ValueError, match="trace"):
            DensityMatrix(2, np.eye(2))
        with pytest.raises(ValueError, match="eigenvalue"):
            DensityMatrix(2, np.array([[1.5, 0.0], [0.0, -0.5]]))


class TestEnumerateAndSample:
    def test_enumerate_counts(self):
        assert len(enumerate_family(4, 2)) == 6
        fam = enumerate_family(4, 2, lambda m: all(x % 2 == 0 for x in m))
        assert [s.members for s in fam] == [(2, 4)]

    def test_enumerate_parity_split_count(self):
        fam = enumerate_family(
            16, 4, lambda m: sum(1 for x in m if x % 2 == 0) == 3
        )
        assert len(fam) == 448  # C(8,3) * C(8,1)

    def test_enumeration_cap(self):
        with pytest.raises(ValueError, match="sample_family"):
            enumerate_family(64, 8, cap=1000)

    def test_sample_family_distinct_and_deterministic(self):
        fam1 = sample_family(16, 4, 50, philox_stream(11))
        fam2 = sample_family(16, 4, 50, philox_stream(11))
        assert [s.members for s in fam1] == [s.members for s in fam2]
        assert len({s.members for s in fam1}) == 50
        assert all(len(s) == 4 for s in fam1)


class TestPartialTrace:
    def test_product_state_recovery(self):
        rng = philox_stream(5)
        a = DensityMatrix.random(3, rng)
        b = DensityMatrix.random(4, rng)
        joint = DensityMatrix(12, np.kron(a.entries, b.entries))
        np.testing.assert_allclose(
            partial_trace(joint, (3, 4), (0,)).entries, a.entries, atol=1e-12
        )
        np.testing.assert_allclose(
            partial_trace(joint, (3, 4), (1,)).entries, b.entries, atol=1e-12
        )

    def test_maximally_entangled_marginal(self):
        bell = PureState(4, np.array([1, 0, 0, 1]) / math.sqrt(2))
        reduced = partial_trace(DensityMatrix.from_pure(bell), (2, 2), (0,))
        np.testing.assert_allclose(reduced.entries, np.eye(2) / 2, atol=1e-14)

    def test_trace_and_hermiticity_preserved(self):
        rho = DensityMatrix.random(8, philox_stream(9))
        reduced = partial_trace(rho, (2, 2, 2), (0, 2))
        assert abs(np.trace(reduced.entries) - 1) < 1e-12
        assert np.max(np.abs(reduced.entries - reduced.entries.conj().T)) < 1e-12

    def test_layout_mismatch(self):
        rho = DensityMatrix.maximally_mixed(4)
        with pytest.raises(ValueError, match="layout"):
            partial_trace(rho, (3, 2), (0,))


class TestTraceDistanceAndRng:
    def test_trace_distance_orthogonal_states(self):
        a = DensityMatrix.from_pure(PureState.basis(2, 1))
        b = DensityMatrix.from_pure(PureState.basis(2, 2))
        assert abs(trace_distance(a, b) - 1.0) < 1e-12
        assert trace_distance(a, a) < 1e-15

    def test_philox_streams_are_independent_and_reproducible(self):
        a = philox_stream(1, 0).integers(0, 2**32, 8)
        b = philox_stream(1, 1).integers(0, 2**32, 8)
        assert list(a) != list(b)
        assert list(a) == list(philox_stream(1, 0).integers(0, 2**32, 8))
