"""The acceptance suite: eleven numbered criteria, each an exact check.

Shared by the `suite` CLI subcommand and by tests/test_acceptance.py so both
run identical code. Every criterion returns a CriterionResult with a PASS or
FAIL verdict and a one-line summary; nothing here loosens a tolerance to
force a verdict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .adversary import (
    build_preimage_relation,
    build_subset_relation,
    end_to_end_bound_check,
    progress_trace,
    relation_stats,
)
from .core import (
    DensityMatrix,
    PureState,
    Subset,
    enumerate_family,
    philox_stream,
    sample_family,
)
from .dilation import check_dilation, haar_unitary, random_query_algorithm
from .oracles import block_permutations, block_twirl, random_representative
from .structure import (
    TargetClass,
    bound_crossover,
    check_distributed,
    fixing_procedure,
    witness_pigeonhole,
)
from .verifier import (
    PreimageInstance,
    enumerate_instances,
    honest_witness,
    majority_count,
    optimal_witness_prob,
    random_instance,
    run_verifier,
    test_i,
)

SOUNDNESS_TARGET = 2.0 / 3.0 + 1e-9


@dataclass(frozen=True)
class CriterionResult:
    index: int
    name: str
    passed: bool
    summary: str

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"criterion {self.index:2d} ({self.name}): {verdict} - {self.summary}"


def _yes_instance(n: int | None, n_labels: int, members: tuple[int, ...]) -> PreimageInstance:
    return PreimageInstance(n, n_labels, Subset(n_labels**2, members), "YES")


def criterion_01_completeness(seed: int) -> CriterionResult:
    """Honest-witness acceptance: 5/6 at N=6 and (1 + ceil(2N/3)/N)/2 at n <= 3."""
    checks: list[tuple[str, float, float, float]] = []
    frac = PreimageInstance.fractional(6, Subset(36, (1, 2, 3, 4, 6, 8)))
    p = run_verifier(frac, honest_witness(frac)).p_accept
    checks.append(("N=6", p, 5.0 / 6.0, 1e-10))
    fixed_sets = {1: (2, 4), 2: (1, 2, 4, 6), 3: (1, 2, 3, 4, 6, 8, 10, 12)}
    for n, members in fixed_sets.items():
        inst = _yes_instance(n, 2**n, members)
        expected = 0.5 * (1.0 + majority_count(2**n) / 2**n)
        p = run_verifier(inst, honest_witness(inst)).p_accept
        checks.append((f"n={n}", p, expected, 1e-12))
    bad = [(tag, got, want) for tag, got, want, tol in checks if abs(got - want) > tol]
    summary = "; ".join(f"{tag}: {got:.12g} (want {want:.12g})" for tag, got, want, _ in checks)
    return CriterionResult(1, "completeness", not bad, summary)


def criterion_02_soundness(seed: int) -> CriterionResult:
    """Optimal-witness acceptance of every NO instance against the 2/3 target."""
    lam_n1 = max(optimal_witness_prob(i)[0] for i in enumerate_instances(1, "NO"))
    lams_n2 = [optimal_witness_prob(i)[0] for i in enumerate_instances(2, "NO")]
    frac = PreimageInstance.fractional(6, Subset(36, (1, 2, 3, 4, 5, 7)))
    lam_frac = optimal_witness_prob(frac)[0]
    violations = sum(1 for lam in lams_n2 if lam > SOUNDNESS_TARGET)
    if lam_n1 > SOUNDNESS_TARGET:
        violations += 1
    if lam_frac > SOUNDNESS_TARGET:
        violations += 1
    passed = violations == 0
    summary = (
        f"n=1 max {lam_n1:.6g}; n=2 max {max(lams_n2):.6g} over {len(lams_n2)} "
        f"instances ({sum(1 for l in lams_n2 if l > SOUNDNESS_TARGET)} above 2/3); "
        f"N=6 {lam_frac:.6g}; target {2/3:.6g}"
    )
    return CriterionResult(2, "soundness 2/3", passed, summary)


def criterion_03_test_i_perfection(seed: int) -> CriterionResult:
    """Honest witness passes test (i) with probability exactly 1 on random YES inputs."""
    worst = 0.0
    for i in range(50):
        n = 1 + i % 3
        rng = philox_stream(seed, 300 + i)
        inst = random_instance(2**n, "YES", rng, n=n)
        worst = max(worst, abs(test_i(inst, honest_witness(inst)) - 1.0))
    return CriterionResult(
        3, "test (i) perfection", worst <= 1e-12, f"max |p-1| = {worst:.3g} over 50 runs"
    )


def criterion_04_dilation(seed: int) -> CriterionResult:
    """Channel picture equals the traced dilated picture for random algorithms."""
    taus = block_permutations(4, 2)
    worst = 0.0
    for trial in range(100):
        rng = philox_stream(seed, 400 + trial)
        t = 1 + trial % 3
        inst = random_instance(2, "YES" if trial % 2 == 0 else "NO", rng, n=1)
        sigma = random_representative(inst.subset, 2, rng)
        alg = random_query_algorithm(4, 2, t, rng)
        initial = PureState(8, haar_unitary(8, rng)[:, 0])
        run = check_dilation(alg, inst.subset, sigma, taus, initial)
        worst = max(worst, run.max_trace_distance)
    return CriterionResult(
        4, "dilation equality", worst <= 1e-9, f"max trace distance {worst:.3g} over 100 runs"
    )


def criterion_05_twirl(seed: int) -> CriterionResult:
    """Closed-form twirl equals the exhaustive block-group average for V <= 8."""
    worst = 0.0
    stream_idx = 500
    for v in range(2, 9):
        for block in range(1, v + 1):
            rng = philox_stream(seed, stream_idx)
            stream_idx += 1
            stack = np.stack(
                [DensityMatrix.random(v, rng).entries for _ in range(20)]
            )
            acc = np.zeros_like(stack)
            group = block_permutations(v, block)
            for tau in group:
                inv = np.argsort(tau.zero_based())
                acc += stack[:, inv, :][:, :, inv]
            acc /= len(group)
            for rho_mat, avg in zip(stack, acc):
                closed = block_twirl(DensityMatrix(v, rho_mat), block)
                worst = max(worst, float(np.max(np.abs(closed.entries - avg))))
    return CriterionResult(
        5, "twirl correctness", worst <= 1e-12,
        f"max |closed - exhaustive| = {worst:.3g} across all (V, N), V <= 8",
    )


def criterion_06_fixing(seed: int) -> CriterionResult:
    """Fixing Procedure terminates quickly and certifies on random families."""
    total = math.comb(16, 4)
    target = TargetClass.fixed_size(16, 3)
    failures = []
    max_iter = 0
    for p_bits in (2, 4):
        size = witness_pigeonhole(total, p_bits)
        for s in range(100):
            rng = philox_stream(seed, 600 + 1000 * p_bits + s)
            family = sample_family(16, 4, size, rng)
            cert = fixing_procedure(family, 0.25, 4, target=target)
            max_iter = max(max_iter, cert.iterations)
            ok, _ = check_distributed(cert.family_prime, cert.s_fixed, 0.25, target, 4)
            if cert.iterations > 16 or not ok:
                failures.append((p_bits, s))
    return CriterionResult(
        6, "fixing procedure", not failures,
        f"200 families over C(16,4), p in (2,4); max iterations {max_iter}; "
        f"{len(failures)} failures",
    )


def criterion_07_crossover(seed: int) -> CriterionResult:
    """Finite crossover with a single sign flip; monotone in alpha."""
    problems = []
    stars = {}
    for variant in ("uniform", "parity"):
        rep = bound_crossover(0.25, (0.0, 1.0), variant)
        if rep.n_star is None:
            problems.append(f"{variant}: no crossover")
        if rep.sign_flips != 1:
            problems.append(f"{variant}: {rep.sign_flips} sign flips")
        ns = [bound_crossover(a, (0.0, 1.0), variant).n_star for a in (0.1, 0.2, 0.3, 0.4)]
        stars[variant] = ns
        if any(x is None for x in ns) or any(a > b for a, b in zip(ns, ns[1:])):
            problems.append(f"{variant}: n* not monotone over alpha: {ns}")
    summary = (
        f"uniform n*(alpha=0.1..0.4) = {stars['uniform']}, "
        f"parity n* = {stars['parity']}"
    )
    if problems:
        summary += "; " + "; ".join(problems)
    return CriterionResult(7, "bound crossover", not problems, summary)


def _brute_force_stats(rel) -> tuple[int, int, int]:
    """Naive recount of m, m', l_max straight from the pair list."""
    pair_set = set(rel.pairs)
    m = min(
        sum(1 for yi in range(len(rel.y_items)) if (xi, yi) in pair_set)
        for xi in range(len(rel.x_items))
    )
    m_prime = min(
        sum(1 for xi in range(len(rel.x_items)) if (xi, yi) in pair_set)
        for yi in range(len(rel.y_items))
    )
    l_max = 0
    for xi, yi in rel.pairs:
        for lab in range(1, rel.universe + 1):
            if not rel.disagrees(xi, yi, lab):
                continue
            l_x = sum(
                1 for yj in range(len(rel.y_items))
                if (xi, yj) in pair_set and rel.disagrees(xi, yj, lab)
            )
            l_y = sum(
                1 for xj in range(len(rel.x_items))
                if (xj, yi) in pair_set and rel.disagrees(xj, yi, lab)
            )
            l_max = max(l_max, l_x * l_y)
    return m, m_prime, l_max


def criterion_08_adversary_stats(seed: int) -> CriterionResult:
    """Stats match a brute-force recount and obey the distributed-fraction bound."""
    def contains_one(members: tuple[int, ...]) -> bool:
        return 1 in members

    problems = []
    for v in (6, 8):
        sx = enumerate_family(v, 2, contains_one)
        sy = enumerate_family(v, 3, contains_one)
        rel = build_subset_relation(sx, sy)
        stats = relation_stats(rel, keep_tables=True)
        brute = _brute_force_stats(rel)
        if (stats.m, stats.m_prime, stats.l_max) != brute:
            problems.append(f"V={v}: stats {stats.m, stats.m_prime, stats.l_max} != brute {brute}")
        counts = sx.element_counts()
        fraction = max(
            nu / len(sx) for lab, nu in counts.items() if lab != 1
        )
        cap = len(sx) * len(sy) * fraction
        for xi, yi in rel.pairs:
            s_x, s_y = rel.x_items[xi], rel.y_items[yi]
            for lab in s_x.difference(s_y).members:
                prod = stats.per_input_l["l_x"][(xi, lab)] * stats.per_input_l["l_y"][(yi, lab)]
                if prod > cap + 1e-9:
                    problems.append(f"V={v}: l_x*l_y = {prod} > {cap} at label {lab}")
    return CriterionResult(
        8, "adversary statistics", not problems,
        "V=6 and V=8 subset relations: exact recount agreement and "
        "fraction bound on one-sided difference points"
        + ("; " + "; ".join(problems[:3]) if problems else ""),
    )


def criterion_09_preimage_matching(seed: int) -> CriterionResult:
    """Every matched pair at n=1 satisfies the three agreement conditions."""
    sx = enumerate_family(4, 2, lambda m: all(x % 2 == 0 for x in m))
    sy = enumerate_family(4, 2, lambda m: all(x % 2 == 1 for x in m))
    rel = build_preimage_relation(sx, sy, 2)
    problems = []
    if len(rel.pairs) != 4:
        problems.append(f"expected 4 matched pairs, got {len(rel.pairs)}")
    if any(p.preimage_set(2).members != (2, 4) for p in rel.x_items):
        problems.append("an x item has the wrong preimage set")
    if any(p.preimage_set(2).members != (1, 3) for p in rel.y_items):
        problems.append("a y item has the wrong preimage set")
    if len({p.image for p in rel.x_items}) != 4 or len({p.image for p in rel.y_items}) != 4:
        problems.append("cosets are not fully enumerated")
    s_x, s_y = sx.sets[0], sy.sets[0]
    inter = s_x.intersection(s_y)
    outside = s_x.union(s_y).complement()
    only_x = s_x.difference(s_y)
    only_y = s_y.difference(s_x)
    for xi, yi in rel.pairs:
        px, py = rel.x_items[xi], rel.y_items[yi]
        for j in inter.members + outside.members:
            if px(j) != py(j):
                problems.append(f"pair ({xi},{yi}) differs at agreed label {j}")
        for j in only_x.members:
            if not any(px(j) == py(i) and px(i) == py(j) for i in only_y.members):
                problems.append(f"pair ({xi},{yi}) lacks a transpose partner for {j}")
        want = s_x.symmetric_difference(s_y).members
        if rel.disagreement_labels(xi, yi) != want:
            problems.append(f"pair ({xi},{yi}) disagreement set is not the symmetric difference")
    return CriterionResult(
        9, "preimage matching", not problems,
        f"4 matched pairs at n=1, all agreement conditions verified exhaustively"
        + ("; " + "; ".join(problems[:3]) if problems else ""),
    )


def criterion_10_progress_measure(seed: int) -> CriterionResult:
    """Per-step W drop bound, the exact initial W, and no bound violations."""
    sx = enumerate_family(4, 2, lambda m: all(x % 2 == 0 for x in m))
    sy = enumerate_family(4, 2, lambda m: all(x % 2 == 1 for x in m))
    rel = build_preimage_relation(sx, sy, 2)
    stats = relation_stats(rel)
    w0_expected = len(rel.pairs) / (2.0 * math.sqrt(len(rel.x_items) * len(rel.y_items)))
    problems = []
    worst_drop_excess = -1.0
    worst_w0 = 0.0
    for trial in range(100):
        rng = philox_stream(seed, 1000 + trial)
        alg = random_query_algorithm(4, 2, 5, rng)
        trace = progress_trace(rel, alg)
        worst_w0 = max(worst_w0, abs(trace.w_values[0] - w0_expected))
        worst_drop_excess = max(worst_drop_excess, trace.max_drop - trace.sqrt_lmax)
    if worst_w0 > 1e-12:
        problems.append(f"W_0 error {worst_w0:.3g}")
    if worst_drop_excess > 1e-9:
        problems.append(f"drop exceeds sqrt(l_max) by {worst_drop_excess:.3g}")
    bound_failures = 0
    for trial in range(200):
        rng = philox_stream(seed, 1200 + trial)
        alg = random_query_algorithm(4, 2, 2, rng)
        vec = haar_unitary(8, rng)[:, 0]
        report = end_to_end_bound_check(rel, alg, np.outer(vec, vec.conj()))
        if not report.satisfied:
            bound_failures += 1
    if bound_failures:
        problems.append(f"{bound_failures} distinguishers beat the bound")
    return CriterionResult(
        10, "progress measure", not problems,
        f"W_0 err {worst_w0:.2g}, max drop excess {worst_drop_excess:.2g}, "
        f"sqrt(l_max) = {stats.l_max ** 0.5:.3g}, 200 end-to-end checks"
        + ("; " + "; ".join(problems) if problems else ""),
    )


def criterion_11_determinism(seed: int) -> CriterionResult:
    """Identical configurations render byte-identical CSV outputs."""
    from . import harness  # deferred: harness imports this module

    def render(cfg) -> str:
        _, header, rows = harness.execute(cfg)
        return harness.render_csv(header, rows)

    checks = []
    verify_cfg = harness.ExperimentConfig(
        subcommand="verify", n=2, exhaustive_no=True, seed=seed
    )
    checks.append(render(verify_cfg) == render(verify_cfg))
    fix_cfg = harness.ExperimentConfig(
        subcommand="fix", V=16, k=4, alpha=0.25, p=2.0, seed=seed, trials=5
    )
    checks.append(render(fix_cfg) == render(fix_cfg))
    wtrace_cfg = harness.ExperimentConfig(subcommand="wtrace", queries=4, seed=seed)
    checks.append(render(wtrace_cfg) == render(wtrace_cfg))
    return CriterionResult(
        11, "determinism", all(checks),
        f"verify/fix/wtrace rendered twice each: byte-equal = {checks}",
    )


ALL_CRITERIA: tuple[Callable[[int], CriterionResult], ...] = (
    criterion_01_completeness,
    criterion_02_soundness,
    criterion_03_test_i_perfection,
    criterion_04_dilation,
    criterion_05_twirl,
    criterion_06_fixing,
    criterion_07_crossover,
    criterion_08_adversary_stats,
    criterion_09_preimage_matching,
    criterion_10_progress_measure,
    criterion_11_determinism,
)


def run_all(seed: int) -> list[CriterionResult]:
    results = []
    for idx, fn in enumerate(ALL_CRITERIA, start=1):
        try:
            results.append(fn(seed))
        except Exception as exc:  # keep the suite reporting even on crashes
            results.append(CriterionResult(idx, fn.__name__, False, f"error: {exc}"))
    return results
