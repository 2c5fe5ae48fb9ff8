"""Preimage-checking verifier with exact acceptance probabilities.

An instance is a size-N subset S of [N^2] whose parity split meets the
promise: YES means ceil(2N/3) even labels, NO means ceil(2N/3) odd labels
(N a power of two is never divisible by 3, so the exact two-thirds split
only exists in the fractional variant where N is divisible by 3 and the
classic 5/6 and 2/3 figures appear verbatim).

The verifier flips a fair coin between two tests:
  (i)  apply the randomized preimage oracle to the witness and project onto
       the uniform state over [N];
  (ii) measure the witness, reject odd outcomes, then accept exactly when
       the oracle maps the outcome into [N].
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .core import DensityMatrix, PureState, Subset, enumerate_family, subset_state
from .oracles import apply_randomized_preimage, block_average, representative_sigma

PROBABILITY_TOL = 1e-10


def majority_count(n_labels: int) -> int:
    """Size of the dominant parity class in a promise instance: ceil(2N/3)."""
    return -((-2 * n_labels) // 3)


def _label_for(subset: Subset, n_labels: int) -> str:
    k_even, k_odd = subset.parity_counts()
    want = majority_count(n_labels)
    if k_even == want:
        return "YES"
    if k_odd == want:
        return "NO"
    raise ValueError(
        f"parity split ({k_even} even, {k_odd} odd) matches neither promise "
        f"class at N={n_labels} (majority count {want})"
    )


@dataclass(frozen=True)
class PreimageInstance:
    """A promise instance: the preimage set S, its size N, and its label."""

    n: int | None
    block: int
    subset: Subset
    label: str

    def __post_init__(self) -> None:
        if self.subset.universe != self.block**2:
            raise ValueError(
                f"universe {self.subset.universe} must be N^2 = {self.block ** 2}"
            )
        if len(self.subset) != self.block:
            raise ValueError(f"subset size {len(self.subset)} must equal N = {self.block}")
        if self.n is not None and 2**self.n != self.block:
            raise ValueError(f"N = {self.block} is not 2^n for n = {self.n}")
        if self.label != _label_for(self.subset, self.block):
            raise ValueError(f"label {self.label} does not match the parity counts")

    @property
    def dim(self) -> int:
        return self.block**2

    @property
    def k_even(self) -> int:
        return self.subset.parity_counts()[0]

    @classmethod
    def power_of_two(cls, n: int, subset: Subset) -> "PreimageInstance":
        return cls(n, 2**n, subset, _label_for(subset, 2**n))

    @classmethod
    def fractional(cls, n_labels: int, subset: Subset) -> "PreimageInstance":
        return cls(None, n_labels, subset, _label_for(subset, n_labels))


def enumerate_instances(n: int, label: str) -> tuple[PreimageInstance, ...]:
    """Every instance at size N = 2^n with the requested label, lexicographic."""
    big_n = 2**n
    want = majority_count(big_n)
    k_even = want if label == "YES" else big_n - want

    def pred(members: tuple[int, ...]) -> bool:
        return sum(1 for m in members if m % 2 == 0) == k_even

    family = enumerate_family(big_n**2, big_n, pred)
    return tuple(PreimageInstance.power_of_two(n, s) for s in family)


def random_instance(
    n_labels: int, label: str, rng: np.random.Generator, n: int | None = None
) -> PreimageInstance:
    """Sample a uniform promise instance with the requested label."""
    want = majority_count(n_labels)
    k_even = want if label == "YES" else n_labels - want
    universe = n_labels**2
    evens = np.arange(2, universe + 1, 2)
    odds = np.arange(1, universe + 1, 2)
    members = sorted(
        int(x) for x in itertools.chain(
            rng.choice(evens, size=k_even, replace=False),
            rng.choice(odds, size=n_labels - k_even, replace=False),
        )
    )
    subset = Subset(universe, tuple(members))
    return PreimageInstance(n, n_labels, subset, label)


def honest_witness(inst: PreimageInstance) -> PureState:
    return subset_state(inst.subset, inst.dim)


def target_state(inst: PreimageInstance) -> PureState:
    """The uniform state over [N] that test (i) projects onto."""
    return subset_state(Subset(inst.dim, tuple(range(1, inst.block + 1))), inst.dim)


def test_i(inst: PreimageInstance, witness: PureState) -> float:
    """Oracle the witness, then measure the projector onto the [N]-uniform state."""
    if witness.dim != inst.dim:
        raise ValueError(f"witness dim {witness.dim} != instance dim {inst.dim}")
    out = apply_randomized_preimage(inst.subset, DensityMatrix.from_pure(witness))
    psi = target_state(inst).amplitudes
    return _as_probability(psi.conj() @ out.entries @ psi)


def test_i_circuit(inst: PreimageInstance, witness: PureState) -> float:
    """Gate realization of test (i): Hadamard the low n qubits, accept all zeros.

    Only defined when N is a power of two. Labels 1..N occupy the 0-based
    indices with all high bits zero, so the Hadamards act on the low block.
    """
    if inst.n is None:
        raise ValueError("the gate realization needs N = 2^n")
    out = apply_randomized_preimage(inst.subset, DensityMatrix.from_pure(witness))
    h1 = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
    h_low = reduce(np.kron, [h1] * inst.n)
    u = np.kron(np.eye(inst.block), h_low)
    rotated = u @ out.entries @ u.conj().T
    return _as_probability(rotated[0, 0])


def test_ii(inst: PreimageInstance, witness: PureState) -> float:
    """Measure the witness; reject odd outcomes; accept when the oracle lands in [N]."""
    if witness.dim != inst.dim:
        raise ValueError(f"witness dim {witness.dim} != instance dim {inst.dim}")
    weights = np.abs(witness.amplitudes) ** 2
    total = 0.0
    for label in range(2, inst.dim + 1, 2):
        w = float(weights[label - 1])
        if w == 0.0:
            continue
        landed = apply_randomized_preimage(
            inst.subset, DensityMatrix.from_pure(PureState.basis(inst.dim, label))
        )
        total += w * float(np.sum(landed.diagonal()[: inst.block]))
    return _as_probability(total)


@dataclass(frozen=True)
class VerifierReport:
    p_test_i: float
    p_test_ii: float
    p_accept: float
    witness_used: PureState

    def __post_init__(self) -> None:
        for p in (self.p_test_i, self.p_test_ii, self.p_accept):
            if not -PROBABILITY_TOL <= p <= 1.0 + PROBABILITY_TOL:
                raise ValueError(f"probability {p} outside [0, 1]")
        mean = 0.5 * (self.p_test_i + self.p_test_ii)
        if abs(self.p_accept - mean) > PROBABILITY_TOL:
            raise ValueError("p_accept must be the arithmetic mean of the two tests")


def run_verifier(inst: PreimageInstance, witness: PureState) -> VerifierReport:
    """Both tests plus their fair-coin average."""
    p1 = test_i(inst, witness)
    p2 = test_ii(inst, witness)
    return VerifierReport(p1, p2, 0.5 * (p1 + p2), witness)


def acceptance_operator(inst: PreimageInstance) -> np.ndarray:
    """Hermitian M with <w|M|w> equal to the verifier's acceptance probability.

    M = (Phi_adj(|Psi><Psi|) + D)/2 where Phi_adj is the adjoint of the
    randomized preimage channel and D marks the even members of S.
    """
    psi = target_state(inst).amplitudes
    proj = np.outer(psi, psi.conj())
    p = representative_sigma(inst.subset, inst.block).matrix()
    # adjoint channel: the twirl is self-adjoint, conjugation order reverses
    m_i = p.T @ block_average(proj, inst.block) @ p
    d = np.zeros((inst.dim, inst.dim), dtype=np.complex128)
    for label in inst.subset.members:
        if label % 2 == 0:
            d[label - 1, label - 1] = 1.0
    return 0.5 * (m_i + d)


def optimal_witness_prob(inst: PreimageInstance) -> tuple[float, PureState]:
    """Largest eigenvalue of the acceptance operator and a maximizing witness."""
    vals, vecs = np.linalg.eigh(acceptance_operator(inst))
    return float(vals[-1]), PureState(inst.dim, vecs[:, -1])


def analytic_optimum(inst: PreimageInstance) -> float:
    """Closed form for the optimal-witness acceptance: (1 + sqrt(k_even/N))/2.

    The acceptance operator acts as a rank-2 matrix on the span of the
    uniform vectors over the even and odd members of S, where it reads
    [[k/N + 1, sqrt(k m)/N], [sqrt(k m)/N, m/N]]/2 with k + m = N; the top
    eigenvalue of that block is (1 + sqrt(k/N))/2 and every other eigenvalue
    is at most 1/2.
    """
    return 0.5 * (1.0 + math.sqrt(inst.k_even / inst.block))


@dataclass(frozen=True)
class ClassifyReport:
    label: str
    p_honest: float
    lambda_max: float
    threshold_hi: float
    threshold_lo: float
    completeness_ok: bool
    soundness_ok: bool
    message: str


def classify(
    inst: PreimageInstance,
    threshold_hi: float = 5.0 / 6.0,
    threshold_lo: float = 2.0 / 3.0,
) -> ClassifyReport:
    """Evaluate the instance against the completeness and soundness thresholds."""
    p_honest = run_verifier(inst, honest_witness(inst)).p_accept
    lam, _ = optimal_witness_prob(inst)
    completeness_ok = lam >= threshold_lo - PROBABILITY_TOL
    soundness_ok = lam <= threshold_lo + 1e-9
    if inst.label == "YES":
        message = (
            f"completeness holds at {p_honest:.6g} >= {threshold_lo:.6g}"
            if p_honest >= threshold_lo - PROBABILITY_TOL
            else f"completeness FAILS at {p_honest:.6g} < {threshold_lo:.6g}"
        )
    else:
        message = (
            f"soundness holds: lambda_max = {lam:.6g} <= {threshold_lo:.6g}"
            if soundness_ok
            else f"soundness FAILS: lambda_max = {lam:.6g} > {threshold_lo:.6g}"
        )
    return ClassifyReport(
        inst.label, p_honest, lam, threshold_hi, threshold_lo,
        completeness_ok, soundness_ok, message,
    )


def _as_probability(value: complex | float) -> float:
    p = float(np.real(value))
    if not -PROBABILITY_TOL <= p <= 1.0 + PROBABILITY_TOL:
        raise ValueError(f"computed probability {p} outside [0, 1]")
    return min(max(p, 0.0), 1.0)
