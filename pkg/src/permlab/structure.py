"""Fixing Procedure, distributed-family certification, and counting bounds.

The Fixing Procedure repeatedly extracts an element occurring in at least an
N^(-alpha) fraction (but not all) of the working family, shrinking the family
to the sets containing it, until no such element remains. Elements occurring
in every member are absorbed into the fixed core without shrinking, since a
distributed certificate cannot leave a full-frequency element outside the
core. Counting comparisons are carried out in log2 space with high-precision
log-gamma binomials; float64 loses the sign of the difference near n = 60.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import mpmath

from .core import Subset, SubsetFamily

CROSSOVER_PRECISION_DPS = 50
FRACTION_TOL = 1e-12


@dataclass(frozen=True)
class TargetClass:
    """The class a fixed core must extend into: all k-subsets, or a parity class."""

    kind: str
    universe: int
    size: int | None = None
    block: int | None = None
    majority: str | None = None
    majority_count: int | None = None

    def __post_init__(self) -> None:
        if self.kind == "fixed_size":
            if self.size is None or not 0 <= self.size <= self.universe:
                raise ValueError("fixed_size target needs 0 <= size <= universe")
        elif self.kind == "parity":
            if self.block is None or self.universe != self.block**2:
                raise ValueError("parity target needs universe = N^2")
            if self.majority not in ("even", "odd"):
                raise ValueError("parity target majority must be 'even' or 'odd'")
            if self.majority_count is None or not 0 <= self.majority_count <= self.block:
                raise ValueError("parity target needs 0 <= majority_count <= N")
        else:
            raise ValueError(f"unknown target kind {self.kind!r}")

    @classmethod
    def fixed_size(cls, universe: int, size: int) -> "TargetClass":
        return cls("fixed_size", universe, size=size)

    @classmethod
    def parity(
        cls, block: int, majority: str, majority_count: int | None = None
    ) -> "TargetClass":
        if majority_count is None:
            majority_count = -((-2 * block) // 3)
        return cls(
            "parity", block**2, block=block, majority=majority,
            majority_count=majority_count,
        )

    def feasible_extension(self, s_fixed: Subset) -> bool:
        """Can the fixed core be completed to some member of this class?"""
        if s_fixed.universe != self.universe:
            return False
        if self.kind == "fixed_size":
            return len(s_fixed) <= self.size
        k_even, k_odd = s_fixed.parity_counts()
        maj, minr = (k_odd, k_even) if self.majority == "odd" else (k_even, k_odd)
        need_maj = self.majority_count - maj
        need_min = (self.block - self.majority_count) - minr
        if need_maj < 0 or need_min < 0:
            return False
        evens_total = self.universe // 2
        odds_total = self.universe - evens_total
        free_odd = odds_total - k_odd
        free_even = evens_total - k_even
        if self.majority == "odd":
            return need_maj <= free_odd and need_min <= free_even
        return need_maj <= free_even and need_min <= free_odd


@dataclass(frozen=True)
class DistributedCertificate:
    """Output of the Fixing Procedure: shrunk family, fixed core, and diagnostics."""

    family_prime: SubsetFamily
    s_fixed: Subset
    beta: float
    max_offfixed_fraction: float
    target_feasible: bool | None
    iterations: int
    shrink_log: tuple[tuple[int, int, int], ...]  # (element, nu, size before)


def fixing_procedure(
    family: SubsetFamily,
    alpha: float,
    n_ref: float,
    target: TargetClass | None = None,
) -> DistributedCertificate:
    """Extract frequent elements until every residual frequency drops below N^(-alpha)."""
    if len(family) == 0:
        raise ValueError("empty family")
    if not 0.0 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (0, 1/2), got {alpha}")
    if n_ref <= 1:
        raise ValueError(f"reference size must exceed 1, got {n_ref}")
    threshold_factor = n_ref ** (-alpha)
    current = family
    fixed: set[int] = set()
    log: list[tuple[int, int, int]] = []
    iterations = 0
    while True:
        size = len(current)
        counts = current.element_counts()
        full = sorted(i for i, nu in counts.items() if nu == size and i not in fixed)
        if full:
            fixed.add(full[0])
            iterations += 1
            continue
        cut = size * threshold_factor
        eligible = sorted(
            i for i, nu in counts.items() if i not in fixed and size > nu >= cut
        )
        if not eligible:
            break
        element = eligible[0]
        nu = counts[element]
        log.append((element, nu, size))
        current = current.restrict_to(element)
        fixed.add(element)
        iterations += 1
        # each shrink keeps at least an N^(-alpha) fraction
        assert len(current) == nu and nu >= cut - FRACTION_TOL
    counts = current.element_counts()
    off = [nu for i, nu in counts.items() if i not in fixed]
    max_fraction = max(off) / len(current) if off else 0.0
    s_fixed = Subset(family.universe, tuple(sorted(fixed)))
    feasible = target.feasible_extension(s_fixed) if target is not None else None
    return DistributedCertificate(
        current, s_fixed, alpha, max_fraction, feasible, iterations, tuple(log)
    )


def check_distributed(
    family: SubsetFamily,
    s_fixed: Subset,
    beta: float,
    target: TargetClass,
    n_ref: float,
) -> tuple[bool, dict]:
    """Verify the three distributedness points; returns (ok, diagnostics)."""
    core_in_all = all(s_fixed.issubset(s) for s in family)
    feasible = target.feasible_extension(s_fixed)
    counts = family.element_counts()
    off = {i: nu for i, nu in counts.items() if i not in s_fixed}
    max_fraction = max(off.values()) / len(family) if off else 0.0
    bound = n_ref ** (-beta)
    fraction_ok = max_fraction <= bound + FRACTION_TOL
    ok = core_in_all and feasible and fraction_ok
    return ok, {
        "core_in_all_members": core_in_all,
        "target_feasible": feasible,
        "max_offfixed_fraction": max_fraction,
        "fraction_bound": bound,
        "fraction_ok": fraction_ok,
    }


def witness_pigeonhole(family_size: int, witness_bits: float) -> int:
    """Least bucket size when family_size items share 2^witness_bits witnesses."""
    if family_size < 0 or witness_bits < 0:
        raise ValueError("family size and witness bits must be nonnegative")
    if float(witness_bits).is_integer():
        denom = 2 ** int(witness_bits)
        return -((-family_size) // denom)
    return math.ceil(family_size / 2.0**witness_bits)


def eval_poly(coeffs: Sequence[float], x: float) -> float:
    """Polynomial with coefficient i multiplying x^i."""
    return float(sum(c * x**i for i, c in enumerate(coeffs)))


@dataclass(frozen=True)
class CrossoverReport:
    variant: str
    alpha: float
    p_coeffs: tuple[float, ...]
    fix_fraction: float
    n_star: int | None
    rows: tuple[tuple[int, float, float, bool], ...]  # (n, log_upper, log_lower, crossed)
    message: str

    @property
    def sign_flips(self) -> int:
        marks = [crossed for (_, _, _, crossed) in self.rows]
        return sum(1 for a, b in zip(marks, marks[1:]) if a != b)


def bound_crossover(
    alpha: float,
    p_coeffs: Sequence[float],
    variant: str,
    fix_fraction: float | None = None,
    n_max: int = 64,
) -> CrossoverReport:
    """Find the least n where the counting lower bound beats the upper bound.

    The uniform variant compares C(N^2, fN) * N^alpha against
    C(N^2, N) * 2^(-p(n)) * N^(-alpha fN); the parity variant compares
    C(N^2/2, fN/2)^2 * N^alpha against the exact even-class count
    C(N^2/2, 2N/3) * C(N^2/2, N/3) * 2^(-p(n)) * N^(-alpha fN). Defaults
    fix half the elements (uniform) or two thirds (parity).
    """
    if variant == "uniform":
        if not 0.0 < alpha < 1.0:
            raise ValueError(f"uniform variant needs alpha in (0, 1), got {alpha}")
        f = 0.5 if fix_fraction is None else fix_fraction
    elif variant == "parity":
        if not 0.0 < alpha < 0.5:
            raise ValueError(f"parity variant needs alpha in (0, 1/2), got {alpha}")
        f = 2.0 / 3.0 if fix_fraction is None else fix_fraction
    else:
        raise ValueError(f"unknown variant {variant!r}")
    if not 0.0 < f <= 1.0:
        raise ValueError(f"fix fraction must lie in (0, 1], got {f}")

    rows: list[tuple[int, float, float, bool]] = []
    n_star: int | None = None
    with mpmath.workdps(CROSSOVER_PRECISION_DPS):
        alpha_mp = mpmath.mpf(alpha)
        f_mp = mpmath.mpf(f)
        for n in range(1, n_max + 1):
            big_n = mpmath.mpf(2) ** n
            lg_n = mpmath.mpf(n)
            p_of_n = mpmath.mpf(eval_poly(p_coeffs, n))
            if variant == "uniform":
                upper = _log2_binomial(big_n**2, f_mp * big_n) + alpha_mp * lg_n
                lower = (
                    _log2_binomial(big_n**2, big_n)
                    - p_of_n
                    - alpha_mp * f_mp * big_n * lg_n
                )
            else:
                half = big_n**2 / 2
                upper = 2 * _log2_binomial(half, f_mp * big_n / 2) + alpha_mp * lg_n
                lower = (
                    _log2_binomial(half, 2 * big_n / 3)
                    + _log2_binomial(half, big_n / 3)
                    - p_of_n
                    - alpha_mp * f_mp * big_n * lg_n
                )
            crossed = lower > upper
            if crossed and n_star is None:
                n_star = n
            rows.append((n, float(upper), float(lower), bool(crossed)))
    message = (
        f"crossover at n = {n_star}" if n_star is not None
        else f"no crossover found <= {n_max}"
    )
    return CrossoverReport(
        variant, alpha, tuple(float(c) for c in p_coeffs), f, n_star, tuple(rows), message
    )


def _log2_binomial(x: "mpmath.mpf", y: "mpmath.mpf") -> "mpmath.mpf":
    """Continuous log2 binomial via log-gamma; requires 0 <= y <= x."""
    if y < 0 or y > x:
        raise ValueError(f"binomial arguments out of range: ({x}, {y})")
    return (
        mpmath.loggamma(x + 1) - mpmath.loggamma(y + 1) - mpmath.loggamma(x - y + 1)
    ) / mpmath.log(2)
