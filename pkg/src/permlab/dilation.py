"""Unitary simulation of the randomized preimage oracle on an enlarged system.

The randomized channel on register A is reproduced by a fixed in-place
permutation on A followed by a control-permutation entangling A with a fresh
control register prepared in the uniform superposition over the block group.
One control register is consumed per query, so the dilated system is
C^t (x) A (x) B and memory grows with the query count; a dimension cap guards
the dense simulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    MAX_DIM,
    DensityMatrix,
    Permutation,
    PureState,
    Subset,
    partial_trace,
    trace_distance,
)
from .oracles import block_average_on_first_factor, representative_sigma

UNITARY_TOL = 1e-10


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


@dataclass(frozen=True)
class QueryAlgorithm:
    """t query-interleaved unitaries plus a final one, all on A (x) B."""

    dim_a: int
    dim_b: int
    unitaries: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if len(self.unitaries) < 1:
            raise ValueError("need at least the final unitary")
        d = self.dim_a * self.dim_b
        frozen = []
        for i, u in enumerate(self.unitaries):
            u = np.array(u, dtype=np.complex128)
            if u.shape != (d, d):
                raise ValueError(f"unitary {i} has shape {u.shape}, expected ({d}, {d})")
            err = float(np.max(np.abs(u.conj().T @ u - np.eye(d))))
            if err > UNITARY_TOL:
                raise ValueError(f"matrix {i} is not unitary (deviation {err})")
            u.setflags(write=False)
            frozen.append(u)
        object.__setattr__(self, "unitaries", tuple(frozen))

    @property
    def queries(self) -> int:
        return len(self.unitaries) - 1

    @property
    def query_unitaries(self) -> tuple[np.ndarray, ...]:
        return self.unitaries[:-1]

    @property
    def final_unitary(self) -> np.ndarray:
        return self.unitaries[-1]


def random_query_algorithm(
    dim_a: int, dim_b: int, queries: int, rng: np.random.Generator
) -> QueryAlgorithm:
    d = dim_a * dim_b
    return QueryAlgorithm(
        dim_a, dim_b, tuple(haar_unitary(d, rng) for _ in range(queries + 1))
    )


def identity_algorithm(dim_a: int, dim_b: int, queries: int) -> QueryAlgorithm:
    eye = np.eye(dim_a * dim_b, dtype=np.complex128)
    return QueryAlgorithm(dim_a, dim_b, tuple(eye for _ in range(queries + 1)))


def chi_state(count: int) -> PureState:
    """Uniform superposition over the control basis."""
    if count < 1:
        raise ValueError("control register needs at least one basis state")
    return PureState(count, np.full(count, 1.0 / math.sqrt(count), dtype=np.complex128))


def build_control_permutation(taus: Sequence[Permutation]) -> np.ndarray:
    """|i>|j> -> |i>|tau_i(j)> as a dense unitary on control (x) A."""
    if not taus:
        raise ValueError("need at least one permutation")
    v = taus[0].size
    if any(t.size != v for t in taus):
        raise ValueError("all permutations must share one size")
    c = len(taus)
    out = np.zeros((c * v, c * v))
    for i, tau in enumerate(taus):
        out[i * v : (i + 1) * v, i * v : (i + 1) * v] = tau.matrix()
    return out


def run_channel_picture(
    alg: QueryAlgorithm, subset: Subset, initial: PureState
) -> list[DensityMatrix]:
    """States rho_0..rho_t with the randomized preimage channel applied on A."""
    if subset.universe != alg.dim_a:
        raise ValueError(
            f"oracle universe {subset.universe} does not match register A ({alg.dim_a})"
        )
    if initial.dim != alg.dim_a * alg.dim_b:
        raise ValueError(f"initial state dim {initial.dim} != dim A*B")
    block = len(subset)
    p_joint = np.kron(representative_sigma(subset, block).matrix(), np.eye(alg.dim_b))
    states = [DensityMatrix.from_pure(initial)]
    rho = states[0].entries
    for u in alg.query_unitaries:
        rho = u @ rho @ u.conj().T
        rho = p_joint @ rho @ p_joint.T
        rho = block_average_on_first_factor(rho, block, alg.dim_a, alg.dim_b)
        states.append(DensityMatrix(initial.dim, rho))
    return states


def run_dilated_picture(
    alg: QueryAlgorithm,
    sigma: Permutation,
    taus: Sequence[Permutation],
    initial: PureState,
    max_dim: int = MAX_DIM,
) -> list[DensityMatrix]:
    """States rho~_0..rho~_t on C^t (x) A (x) B, query k touching control k.

    Each query applies the algorithm unitary on AB, the fixed in-place
    permutation on A, then the control permutation between C_k and A.
    """
    t = alg.queries
    c = len(taus)
    d_ab = alg.dim_a * alg.dim_b
    if sigma.size != alg.dim_a:
        raise ValueError(f"permutation size {sigma.size} does not match register A")
    if initial.dim != d_ab:
        raise ValueError(f"initial state dim {initial.dim} != dim A*B")
    full = (c**t) * d_ab
    if full > max_dim:
        raise ValueError(
            f"dilated dimension {c}^{t} * {d_ab} = {full} exceeds the cap {max_dim}; "
            "each query consumes a fresh control register"
        )
    chi = chi_state(c).amplitudes
    psi = initial.amplitudes
    for _ in range(t):
        psi = np.kron(chi, psi)
    inv_sigma = np.argsort(sigma.zero_based())
    inv_taus = [np.argsort(tau.zero_based()) for tau in taus]

    snapshots = [DensityMatrix.from_pure(PureState(full, psi))]
    for k in range(1, t + 1):
        mat = psi.reshape(c**t, d_ab) @ alg.query_unitaries[k - 1].T
        shaped = mat.reshape((c,) * t + (alg.dim_a, alg.dim_b))
        shaped = shaped[..., inv_sigma, :]
        out = np.empty_like(shaped)
        control_axis = k - 1
        for i in range(c):
            sel = [slice(None)] * (t + 2)
            sel[control_axis] = i
            sub = shaped[tuple(sel)]
            out[tuple(sel)] = sub[..., inv_taus[i], :]
        psi = out.reshape(full)
        snapshots.append(DensityMatrix.from_pure(PureState(full, psi)))
    return snapshots


@dataclass(frozen=True)
class DilationRun:
    """Both pictures of one run plus the per-query trace distances."""

    subset: Subset
    sigma: Permutation
    rho_list: tuple[DensityMatrix, ...]
    rho_tilde_list: tuple[DensityMatrix, ...]
    trace_distances: tuple[float, ...]
    consistent: bool

    def __post_init__(self) -> None:
        if any(d < 0 for d in self.trace_distances):
            raise ValueError("trace distances must be nonnegative")

    @property
    def max_trace_distance(self) -> float:
        return max(self.trace_distances)


def check_dilation(
    alg: QueryAlgorithm,
    subset: Subset,
    sigma: Permutation,
    taus: Sequence[Permutation],
    initial: PureState,
    max_dim: int = MAX_DIM,
) -> DilationRun:
    """Run both pictures and compare tr_C(rho~_k) against rho_k for every k.

    A sigma whose preimage set differs from the subset is reported through
    the `consistent` flag (and through large distances) rather than raised,
    so deliberate mismatches can serve as negative controls.
    """
    block = len(subset)
    consistent = sigma.preimage_set(block) == subset
    rhos = run_channel_picture(alg, subset, initial)
    tildes = run_dilated_picture(alg, sigma, taus, initial, max_dim=max_dim)
    t = alg.queries
    c = len(taus)
    layout = (c,) * t + (alg.dim_a, alg.dim_b)
    keep = (t, t + 1)
    distances = []
    for rho, tilde in zip(rhos, tildes):
        reduced = partial_trace(tilde, layout, keep)
        distances.append(trace_distance(reduced, rho))
    return DilationRun(subset, sigma, tuple(rhos), tuple(tildes), tuple(distances), consistent)
