"""Command-line harness: seeded, deterministic experiment runs emitting CSV.

Subcommands: verify, dilate, fix, crossover, relation, wtrace, suite.
A flat JSON config file can supply any field; command-line flags override
file values. The same configuration always renders byte-identical CSV
(fixed column order, floats printed with 17 significant digits). Diagnostics
go to stderr; the CSV goes to --out or stdout.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, fields
from typing import Sequence

import numpy as np

from . import suite as suite_mod
from .adversary import (
    adversary_bound,
    build_preimage_relation,
    build_subset_relation,
    progress_trace,
    relation_stats,
)
from .core import (
    PureState,
    SubsetFamily,
    enumerate_family,
    philox_stream,
    sample_family,
)
from .dilation import check_dilation, haar_unitary, random_query_algorithm
from .oracles import (
    block_permutations,
    random_representative,
    sample_block_permutations,
)
from .structure import TargetClass, bound_crossover, check_distributed, fixing_procedure
from .verifier import (
    PreimageInstance,
    enumerate_instances,
    honest_witness,
    optimal_witness_prob,
    random_instance,
    run_verifier,
)

SOUNDNESS_FLAG_TARGET = 2.0 / 3.0 + 1e-9
COMPLETENESS_FLAG_TARGET = 2.0 / 3.0

SUBCOMMANDS = ("verify", "dilate", "fix", "crossover", "relation", "wtrace", "suite")


@dataclass(frozen=True)
class ExperimentConfig:
    """Flat experiment description; the seed fully determines all randomness."""

    subcommand: str
    n: int | None = None
    N: int | None = None
    V: int | None = None
    k: int | None = None
    kx: int | None = None
    ky: int | None = None
    alpha: float | None = None
    delta: float | None = None
    epsilon: float | None = None
    p: float | None = None
    p_coeffs: tuple[float, ...] | None = None
    queries: int | None = None
    variant: str | None = None
    kind: str | None = None
    fixed: str | None = None
    exhaustive_no: bool = False
    dim_b: int | None = None
    tau_samples: int | None = None
    nref: float | None = None
    target_k: int | None = None
    seed: int = 0
    trials: int = 1
    out: str | None = None

    def __post_init__(self) -> None:
        if self.subcommand not in SUBCOMMANDS:
            raise ValueError(f"unknown subcommand {self.subcommand!r}")
        if self.p_coeffs is not None:
            object.__setattr__(self, "p_coeffs", tuple(float(c) for c in self.p_coeffs))

    def canonical_json(self) -> str:
        data = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            if isinstance(value, tuple):
                value = list(value)
            data[f.name] = value
        return json.dumps(data, sort_keys=True, separators=(",", ":"))


_FIELD_NAMES = {f.name for f in ExperimentConfig.__dataclass_fields__.values()}


def load_config(path: str) -> ExperimentConfig:
    """Read a flat JSON config; unknown keys are rejected by name."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(
            f"config parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    if not isinstance(data, dict):
        raise ValueError("config must be a flat JSON object")
    unknown = sorted(set(data) - _FIELD_NAMES)
    if unknown:
        raise ValueError(f"unknown config key {unknown[0]!r}")
    if "subcommand" not in data:
        raise ValueError("config is missing the required key 'subcommand'")
    if "p_coeffs" in data and data["p_coeffs"] is not None:
        data["p_coeffs"] = tuple(data["p_coeffs"])
    return ExperimentConfig(**data)


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def render_csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    writer.writerow(header)
    for row in rows:
        writer.writerow([_format_cell(v) for v in row])
    return buf.getvalue()


def _emit(cfg: ExperimentConfig, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    text = render_csv(header, rows)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _require(cfg: ExperimentConfig, field_name: str):
    value = getattr(cfg, field_name)
    if value is None:
        raise ValueError(f"subcommand {cfg.subcommand!r} needs the field {field_name!r}")
    return value


def run_verify(cfg: ExperimentConfig) -> tuple[bool, list[str], list[list]]:
    header = [
        "instance_id", "n_or_N", "k_even", "label",
        "p_honest_i", "p_honest_ii", "p_honest", "lambda_max",
    ]
    instances: list[PreimageInstance] = []
    if cfg.exhaustive_no:
        n = _require(cfg, "n")
        instances = list(enumerate_instances(n, "NO"))
    elif cfg.n is not None:
        for trial in range(cfg.trials):
            rng = philox_stream(cfg.seed, trial)
            label = "YES" if trial % 2 == 0 else "NO"
            instances.append(random_instance(2**cfg.n, label, rng, n=cfg.n))
    elif cfg.N is not None:
        for trial in range(cfg.trials):
            rng = philox_stream(cfg.seed, trial)
            label = "YES" if trial % 2 == 0 else "NO"
            instances.append(random_instance(cfg.N, label, rng))
    else:
        raise ValueError("subcommand 'verify' needs either n or N")
    rows = []
    ok = True
    for inst in instances:
        report = run_verifier(inst, honest_witness(inst))
        lam, _ = optimal_witness_prob(inst)
        n_or_big = inst.n if inst.n is not None else inst.block
        rows.append([
            "-".join(str(m) for m in inst.subset.members),
            n_or_big, inst.k_even, inst.label,
            report.p_test_i, report.p_test_ii, report.p_accept, lam,
        ])
        if inst.label == "NO" and lam > SOUNDNESS_FLAG_TARGET:
            ok = False
        if inst.label == "YES" and lam < COMPLETENESS_FLAG_TARGET:
            ok = False
    return ok, header, rows


def run_dilate(cfg: ExperimentConfig) -> tuple[bool, list[str], list[list]]:
    n = cfg.n if cfg.n is not None else 1
    queries = cfg.queries if cfg.queries is not None else 2
    dim_b = cfg.dim_b if cfg.dim_b is not None else 2
    big_n = 2**n
    v = big_n**2
    exact = n == 1
    rows = []
    ok = True
    for trial in range(cfg.trials):
        rng = philox_stream(cfg.seed, trial)
        inst = random_instance(big_n, "YES" if trial % 2 == 0 else "NO", rng, n=n)
        sigma = random_representative(inst.subset, big_n, rng)
        if exact:
            taus = block_permutations(v, big_n)
        else:
            count = cfg.tau_samples if cfg.tau_samples is not None else 8
            taus = sample_block_permutations(v, big_n, count, rng)
        alg = random_query_algorithm(v, dim_b, queries, rng)
        initial = PureState(v * dim_b, haar_unitary(v * dim_b, rng)[:, 0])
        run = check_dilation(alg, inst.subset, sigma, taus, initial)
        for k, dist in enumerate(run.trace_distances):
            rows.append([trial, k, dist])
        if exact and run.max_trace_distance > 1e-9:
            ok = False
    if not exact:
        per_trial = {}
        for trial, _, dist in rows:
            per_trial[trial] = max(per_trial.get(trial, 0.0), dist)
        vals = np.array(list(per_trial.values()))
        print(
            f"sampled tau group: max trace distance {vals.max():.3g} "
            f"(mean {vals.mean():.3g} +/- {vals.std(ddof=1) if len(vals) > 1 else 0.0:.3g} across trials)",
            file=sys.stderr,
        )
    return ok, ["trial", "k", "trace_distance"], rows


def run_fix(cfg: ExperimentConfig) -> tuple[bool, list[str], list[list]]:
    v = cfg.V if cfg.V is not None else 16
    k = cfg.k if cfg.k is not None else 4
    alpha = cfg.alpha if cfg.alpha is not None else 0.25
    p_bits = cfg.p if cfg.p is not None else 2.0
    nref = cfg.nref if cfg.nref is not None else float(k)
    target_k = cfg.target_k if cfg.target_k is not None else max(1, math.floor(0.99 * k))
    target = TargetClass.fixed_size(v, target_k)
    size = max(1, math.ceil(math.comb(v, k) / 2.0**p_bits))
    rows = []
    ok = True
    for trial in range(cfg.trials):
        rng = philox_stream(cfg.seed, trial)
        family = sample_family(v, k, size, rng)
        cert = fixing_procedure(family, alpha, nref, target=target)
        good, diag = check_distributed(cert.family_prime, cert.s_fixed, alpha, target, nref)
        rows.append([
            trial, len(family), len(cert.s_fixed),
            diag["max_offfixed_fraction"], good,
        ])
        ok = ok and good
    return ok, ["seed", "family_size", "fixed_count", "max_fraction", "distributed_ok"], rows


def run_crossover(cfg: ExperimentConfig) -> tuple[bool, list[str], list[list]]:
    alpha = cfg.alpha if cfg.alpha is not None else 0.25
    coeffs = cfg.p_coeffs if cfg.p_coeffs is not None else (0.0, 1.0)
    variant = cfg.variant if cfg.variant is not None else "uniform"
    report = bound_crossover(alpha, coeffs, variant)
    rows = [[n, up, lo] for n, up, lo, _ in report.rows]
    print(report.message, file=sys.stderr)
    return report.n_star is not None, ["n", "log_upper", "log_lower"], rows


def run_relation(cfg: ExperimentConfig) -> tuple[bool, list[str], list[list]]:
    kind = cfg.kind if cfg.kind is not None else "subset"
    epsilon = cfg.epsilon if cfg.epsilon is not None else 0.0
    if kind == "subset":
        v = cfg.V if cfg.V is not None else 6
        kx = cfg.kx if cfg.kx is not None else 2
        ky = cfg.ky if cfg.ky is not None else 3
        core = tuple(int(t) for t in (cfg.fixed or "1").split())
        pred = lambda members: all(c in members for c in core)
        rel = build_subset_relation(
            enumerate_family(v, kx, pred), enumerate_family(v, ky, pred)
        )
    elif kind == "preimage":
        n = cfg.n if cfg.n is not None else 1
        sx = [i.subset for i in enumerate_instances(n, "YES")]
        sy = [i.subset for i in enumerate_instances(n, "NO")]
        rel = build_preimage_relation(
            SubsetFamily(4**n, tuple(sx)), SubsetFamily(4**n, tuple(sy)), 2**n
        )
    else:
        raise ValueError(f"unknown relation kind {kind!r}")
    stats = relation_stats(rel)
    bound = adversary_bound(stats, epsilon)
    rows = [[stats.m, stats.m_prime, stats.l_max, bound]]
    return True, ["m", "m_prime", "l_max", "bound"], rows


def run_wtrace(cfg: ExperimentConfig) -> tuple[bool, list[str], list[list]]:
    queries = cfg.queries if cfg.queries is not None else 5
    sx = enumerate_family(4, 2, lambda m: all(x % 2 == 0 for x in m))
    sy = enumerate_family(4, 2, lambda m: all(x % 2 == 1 for x in m))
    rel = build_preimage_relation(sx, sy, 2)
    rows = []
    ok = True
    for trial in range(cfg.trials):
        rng = philox_stream(cfg.seed, trial)
        alg = random_query_algorithm(4, 2, queries, rng)
        trace = progress_trace(rel, alg)
        for t, w in enumerate(trace.w_values):
            drop = "" if t == 0 else trace.drops[t - 1]
            rows.append([t, w, drop, trace.sqrt_lmax])
        if trace.drops and trace.max_drop > trace.sqrt_lmax + 1e-9:
            ok = False
    return ok, ["t", "w_t", "drop", "sqrt_lmax"], rows


def run_suite(cfg: ExperimentConfig) -> tuple[bool, list[str], list[list]]:
    results = suite_mod.run_all(cfg.seed)
    for result in results:
        print(result.line(), file=sys.stderr)
    passed = sum(1 for r in results if r.passed)
    print(f"{passed}/{len(results)} criteria passed", file=sys.stderr)
    rows = [[r.index, r.name, r.passed, r.summary] for r in results]
    return all(r.passed for r in results), ["criterion", "name", "passed", "summary"], rows


_RUNNERS = {
    "verify": run_verify,
    "dilate": run_dilate,
    "fix": run_fix,
    "crossover": run_crossover,
    "relation": run_relation,
    "wtrace": run_wtrace,
    "suite": run_suite,
}


def execute(cfg: ExperimentConfig) -> tuple[int, list[str], list[list]]:
    """Run one configuration; exit status 0 only if every pass/fail flag holds."""
    ok, header, rows = _RUNNERS[cfg.subcommand](cfg)
    return (0 if ok else 1), header, rows


def run(cfg: ExperimentConfig) -> int:
    code, header, rows = execute(cfg)
    _emit(cfg, header, rows)
    return code


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="permlab",
        description="Deterministic experiments over permutation oracles and subset verification",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=None, help="flat JSON config file")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--trials", type=int, default=None)
    common.add_argument("--out", type=str, default=None)

    p = sub.add_parser("verify", parents=[common], help="verifier sweep (CSV per instance)")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--N", type=int, default=None, dest="N")
    p.add_argument("--exhaustive-no", action="store_true", default=None, dest="exhaustive_no")

    p = sub.add_parser("dilate", parents=[common], help="dilation trace-distance runs")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--queries", type=int, default=None)
    p.add_argument("--dim-b", type=int, default=None, dest="dim_b")
    p.add_argument("--tau-samples", type=int, default=None, dest="tau_samples")

    p = sub.add_parser("fix", parents=[common], help="fixing procedure over random families")
    p.add_argument("--V", type=int, default=None, dest="V")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--nref", type=float, default=None)
    p.add_argument("--target-k", type=int, default=None, dest="target_k")

    p = sub.add_parser("crossover", parents=[common], help="counting-bound crossover curves")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--p-coeffs", type=str, default=None, dest="p_coeffs",
                   help="comma-separated polynomial coefficients, constant first")
    p.add_argument("--variant", choices=("uniform", "parity"), default=None)

    p = sub.add_parser("relation", parents=[common], help="relation statistics and bound")
    p.add_argument("--V", type=int, default=None, dest="V")
    p.add_argument("--kx", type=int, default=None)
    p.add_argument("--ky", type=int, default=None)
    p.add_argument("--kind", choices=("subset", "preimage"), default=None)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--fixed", type=str, default=None, help="space-separated core labels")

    p = sub.add_parser("wtrace", parents=[common], help="progress-measure trace")
    p.add_argument("--queries", type=int, default=None)

    sub.add_parser("suite", parents=[common], help="run every acceptance criterion")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    overrides = {
        key: value
        for key, value in vars(args).items()
        if key not in ("config",) and value is not None
    }
    if "p_coeffs" in overrides and isinstance(overrides["p_coeffs"], str):
        overrides["p_coeffs"] = tuple(float(t) for t in overrides["p_coeffs"].split(","))
    try:
        if args.config:
            base = load_config(args.config)
            merged = {
                f.name: getattr(base, f.name)
                for f in fields(ExperimentConfig)
            }
            merged.update(overrides)
            cfg = ExperimentConfig(**merged)
        else:
            cfg = ExperimentConfig(**overrides)
        return run(cfg)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
