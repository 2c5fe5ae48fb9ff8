"""Exact linear-algebra and combinatorics substrate.

Labels are 1-based everywhere: a permutation on [V] maps labels 1..V, a
subset holds labels from 1..V, and the amplitude slot of label i is index
i-1. All values are immutable after construction and all operations are
pure functions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

# Dense complex matrices only; desk-scale instances must fit under this cap.
MAX_DIM = 4096
# enumerate_family refuses above this many subsets; use sample_family instead.
ENUMERATION_CAP = 10**7

NORM_TOL = 1e-10
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
EIGENVALUE_TOL = 1e-9
# Positivity is checked eagerly only below this dimension (the check is cubic).
_EAGER_PSD_DIM = 128


def _check_dim(dim: int) -> None:
    if not isinstance(dim, (int, np.integer)) or dim < 1:
        raise ValueError(f"dimension must be a positive integer, got {dim!r}")
    if dim > MAX_DIM:
        raise ValueError(f"dimension {dim} exceeds the dense-matrix cap {MAX_DIM}")


@dataclass(frozen=True)
class Permutation:
    """A bijection on the 1-based labels [V], stored as its image array."""

    size: int
    image: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.size < 1:
            raise ValueError("permutation size must be positive")
        if len(self.image) != self.size:
            raise ValueError(f"image has length {len(self.image)}, expected {self.size}")
        if sorted(self.image) != list(range(1, self.size + 1)):
            raise ValueError("image is not a bijection on 1..V")

    def __call__(self, label: int) -> int:
        return self.image[label - 1]

    def compose(self, other: "Permutation") -> "Permutation":
        """Return the permutation mapping j to self(other(j))."""
        if self.size != other.size:
            raise ValueError(f"size mismatch: {self.size} vs {other.size}")
        return Permutation(self.size, tuple(self.image[i - 1] for i in other.image))

    def invert(self) -> "Permutation":
        inv = [0] * self.size
        for j, i in enumerate(self.image, start=1):
            inv[i - 1] = j
        return Permutation(self.size, tuple(inv))

    def preimage_set(self, block: int) -> "Subset":
        """Labels mapped into the first `block` positions; always has `block` members."""
        if block > self.size:
            raise ValueError(f"block size {block} exceeds permutation size {self.size}")
        members = tuple(j for j in range(1, self.size + 1) if self.image[j - 1] <= block)
        return Subset(self.size, members)

    def matrix(self) -> np.ndarray:
        """V x V zero-one matrix sending basis vector j-1 to image[j]-1."""
        mat = np.zeros((self.size, self.size))
        for j, i in enumerate(self.image, start=1):
            mat[i - 1, j - 1] = 1.0
        return mat

    def zero_based(self) -> np.ndarray:
        return np.asarray(self.image, dtype=np.intp) - 1

    def to_text(self) -> str:
        return " ".join(str(i) for i in self.image)

    @classmethod
    def from_text(cls, text: str) -> "Permutation":
        image = tuple(int(tok) for tok in text.split())
        return cls(len(image), image)

    @classmethod
    def identity(cls, size: int) -> "Permutation":
        return cls(size, tuple(range(1, size + 1)))

    @classmethod
    def transposition(cls, size: int, a: int, b: int) -> "Permutation":
        image = list(range(1, size + 1))
        image[a - 1], image[b - 1] = image[b - 1], image[a - 1]
        return cls(size, tuple(image))

    @classmethod
    def random(cls, size: int, rng: np.random.Generator) -> "Permutation":
        return cls(size, tuple(int(i) + 1 for i in rng.permutation(size)))


@dataclass(frozen=True)
class Subset:
    """A set of 1-based labels inside the universe [V]."""

    universe: int
    members: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.universe < 1:
            raise ValueError("universe must be positive")
        members = tuple(self.members)
        if any(m < 1 or m > self.universe for m in members):
            raise ValueError(f"members must lie in 1..{self.universe}")
        if list(members) != sorted(set(members)):
            raise ValueError("members must be strictly increasing without duplicates")
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "_member_set", frozenset(members))

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, label: int) -> bool:
        return label in self._member_set  # type: ignore[attr-defined]

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def parity_counts(self) -> tuple[int, int]:
        """(number of even labels, number of odd labels)."""
        k_even = sum(1 for m in self.members if m % 2 == 0)
        return k_even, len(self.members) - k_even

    def intersection(self, other: "Subset") -> "Subset":
        self._check_same_universe(other)
        return Subset(self.universe, tuple(m for m in self.members if m in other))

    def union(self, other: "Subset") -> "Subset":
        self._check_same_universe(other)
        return Subset(self.universe, tuple(sorted(set(self.members) | set(other.members))))

    def difference(self, other: "Subset") -> "Subset":
        self._check_same_universe(other)
        return Subset(self.universe, tuple(m for m in self.members if m not in other))

    def symmetric_difference(self, other: "Subset") -> "Subset":
        self._check_same_universe(other)
        sym = set(self.members) ^ set(other.members)
        return Subset(self.universe, tuple(sorted(sym)))

    def issubset(self, other: "Subset") -> bool:
        self._check_same_universe(other)
        return all(m in other for m in self.members)

    def complement(self) -> "Subset":
        inside = self._member_set  # type: ignore[attr-defined]
        return Subset(self.universe, tuple(m for m in range(1, self.universe + 1) if m not in inside))

    def _check_same_universe(self, other: "Subset") -> None:
        if self.universe != other.universe:
            raise ValueError(f"universe mismatch: {self.universe} vs {other.universe}")

    def to_text(self) -> str:
        return " ".join(str(m) for m in self.members)

    @classmethod
    def from_text(cls, universe: int, text: str) -> "Subset":
        return cls(universe, tuple(sorted(int(tok) for tok in text.split())))


@dataclass(frozen=True)
class SubsetFamily:
    """A collection of distinct subsets sharing one universe."""

    universe: int
    sets: tuple[Subset, ...]

    def __post_init__(self) -> None:
        seen = set()
        for s in self.sets:
            if s.universe != self.universe:
                raise ValueError("all member subsets must share the family universe")
            if s.members in seen:
                raise ValueError(f"duplicate subset {s.members}")
            seen.add(s.members)

    def __len__(self) -> int:
        return len(self.sets)

    def __iter__(self) -> Iterator[Subset]:
        return iter(self.sets)

    def element_counts(self) -> dict[int, int]:
        """nu(i): for each label, the number of member sets containing it."""
        counts: dict[int, int] = {}
        for s in self.sets:
            for m in s.members:
                counts[m] = counts.get(m, 0) + 1
        return counts

    def restrict_to(self, label: int) -> "SubsetFamily":
        return SubsetFamily(self.universe, tuple(s for s in self.sets if label in s))


@dataclass(frozen=True)
class PureState:
    """A normalized complex state vector; label i lives at amplitude index i-1."""

    dim: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        _check_dim(self.dim)
        amps = np.array(self.amplitudes, dtype=np.complex128)
        if amps.shape != (self.dim,):
            raise ValueError(f"amplitudes have shape {amps.shape}, expected ({self.dim},)")
        norm_sq = float(np.sum(np.abs(amps) ** 2))
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized: |psi|^2 = {norm_sq}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def density(self) -> "DensityMatrix":
        return DensityMatrix.from_pure(self)

    @classmethod
    def basis(cls, dim: int, label: int) -> "PureState":
        amps = np.zeros(dim, dtype=np.complex128)
        amps[label - 1] = 1.0
        return cls(dim, amps)

    @classmethod
    def from_amplitudes(cls, amps: Sequence[complex]) -> "PureState":
        arr = np.asarray(amps, dtype=np.complex128)
        return cls(arr.shape[0], arr)


@dataclass(frozen=True)
class DensityMatrix:
    """A Hermitian, unit-trace, positive-semidefinite complex matrix."""

    dim: int
    entries: np.ndarray

    def __post_init__(self) -> None:
        _check_dim(self.dim)
        mat = np.array(self.entries, dtype=np.complex128)
        if mat.shape != (self.dim, self.dim):
            raise ValueError(f"entries have shape {mat.shape}, expected square of dim {self.dim}")
        herm_err = float(np.max(np.abs(mat - mat.conj().T))) if self.dim else 0.0
        if herm_err > HERMITIAN_TOL:
            raise ValueError(f"matrix is not Hermitian: max asymmetry {herm_err}")
        trace = complex(np.trace(mat))
        if abs(trace - 1.0) > TRACE_TOL:
            raise ValueError(f"trace is {trace}, expected 1")
        mat.setflags(write=False)
        object.__setattr__(self, "entries", mat)
        if self.dim <= _EAGER_PSD_DIM:
            self.validate_psd()

    def validate_psd(self) -> None:
        lo = float(np.linalg.eigvalsh(self.entries)[0])
        if lo < -EIGENVALUE_TOL:
            raise ValueError(f"matrix has negative eigenvalue {lo}")

    def diagonal(self) -> np.ndarray:
        return np.real(np.diag(self.entries)).copy()

    @classmethod
    def from_pure(cls, psi: PureState) -> "DensityMatrix":
        return cls(psi.dim, np.outer(psi.amplitudes, psi.amplitudes.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(dim, np.eye(dim, dtype=np.complex128) / dim)

    @classmethod
    def random(cls, dim: int, rng: np.random.Generator) -> "DensityMatrix":
        """Random full-rank density matrix (normalized Wishart)."""
        g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        mat = g @ g.conj().T
        return cls(dim, mat / np.trace(mat))


def subset_state(subset: Subset, dim: int) -> PureState:
    """The uniform superposition over the labels of a nonempty subset."""
    if len(subset) == 0:
        raise ValueError("empty subset has no state")
    if subset.members[-1] > dim:
        raise ValueError(
            f"subset member {subset.members[-1]} does not fit in dimension {dim}"
        )
    amps = np.zeros(dim, dtype=np.complex128)
    amps[[m - 1 for m in subset.members]] = 1.0 / math.sqrt(len(subset))
    return PureState(dim, amps)


def enumerate_family(
    universe: int,
    k: int,
    predicate: Callable[[tuple[int, ...]], bool] | None = None,
    cap: int = ENUMERATION_CAP,
) -> SubsetFamily:
    """All k-subsets of [universe] passing the predicate, in lexicographic order."""
    if k > universe:
        raise ValueError(f"k={k} exceeds universe {universe}")
    total = math.comb(universe, k)
    if total > cap:
        raise ValueError(
            f"C({universe},{k}) = {total} exceeds the enumeration cap {cap}; "
            "use sample_family for seeded uniform sampling instead"
        )
    sets = []
    for combo in itertools.combinations(range(1, universe + 1), k):
        if predicate is None or predicate(combo):
            sets.append(Subset(universe, combo))
    return SubsetFamily(universe, tuple(sets))


def sample_family(
    universe: int, k: int, count: int, rng: np.random.Generator
) -> SubsetFamily:
    """Uniformly sample `count` distinct k-subsets of [universe]."""
    total = math.comb(universe, k)
    if count > total:
        raise ValueError(f"cannot draw {count} distinct subsets, only {total} exist")
    seen: set[tuple[int, ...]] = set()
    sets: list[Subset] = []
    while len(sets) < count:
        members = tuple(sorted(int(x) + 1 for x in rng.choice(universe, size=k, replace=False)))
        if members not in seen:
            seen.add(members)
            sets.append(Subset(universe, members))
    return SubsetFamily(universe, tuple(sets))


def partial_trace(
    rho: DensityMatrix, layout: Sequence[int], keep: Sequence[int]
) -> DensityMatrix:
    """Trace out the factors of `layout` that are not listed in `keep`.

    `layout` gives the tensor-factor dimensions (their product must equal
    rho.dim); `keep` lists the factor positions to retain, in order.
    """
    dims = tuple(int(d) for d in layout)
    if math.prod(dims) != rho.dim:
        raise ValueError(f"layout {dims} does not multiply to dim {rho.dim}")
    keep = tuple(int(i) for i in keep)
    if any(i < 0 or i >= len(dims) for i in keep) or len(set(keep)) != len(keep):
        raise ValueError(f"keep indices {keep} invalid for layout of {len(dims)} factors")
    n = len(dims)
    tensor = rho.entries.reshape(dims + dims)
    # Contract each traced factor's row index with its column index.
    src = list(range(2 * n))
    for i in range(n):
        if i not in keep:
            src[n + i] = src[i]
    out_axes = [src[i] for i in keep] + [src[n + i] for i in keep]
    reduced = np.einsum(tensor, src, out_axes)
    d_keep = math.prod(dims[i] for i in keep) if keep else 1
    return DensityMatrix(d_keep, reduced.reshape(d_keep, d_keep))


def trace_distance(a: DensityMatrix | np.ndarray, b: DensityMatrix | np.ndarray) -> float:
    """Half the trace norm of the difference of two Hermitian matrices."""
    ma = a.entries if isinstance(a, DensityMatrix) else np.asarray(a)
    mb = b.entries if isinstance(b, DensityMatrix) else np.asarray(b)
    if ma.shape != mb.shape:
        raise ValueError(f"shape mismatch: {ma.shape} vs {mb.shape}")
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(ma - mb))))


def philox_stream(seed: int, index: int = 0) -> np.random.Generator:
    """Counter-based RNG stream fully determined by (seed, index).

    The 128-bit Philox key is seed in the high 64 bits and the stream index
    in the low 64, so per-trial streams drawn serially or in parallel agree.
    """
    mask = (1 << 64) - 1
    key = ((int(seed) & mask) << 64) | (int(index) & mask)
    return np.random.Generator(np.random.Philox(key=key))
