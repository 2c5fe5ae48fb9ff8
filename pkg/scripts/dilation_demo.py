#!/usr/bin/env python3
"""Show the dilation equality on one random run, plus a negative control.

The dilated picture replaces the randomized oracle with a fixed permutation
followed by a control-permutation against a fresh uniform register per
query; tracing out the controls must reproduce the channel picture exactly.
Feeding a permutation with the wrong preimage set breaks the equality, which
is the sanity check that the comparison is not vacuous.
"""

import argparse

import numpy as np

from permlab.core import PureState, philox_stream, subset_state
from permlab.dilation import check_dilation, random_query_algorithm
from permlab.oracles import block_permutations, representative_sigma
from permlab.verifier import random_instance


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--queries", type=int, default=3)
    args = parser.parse_args()

    rng = philox_stream(args.seed)
    inst = random_instance(2, "YES", rng, n=1)
    taus = block_permutations(4, 2)
    alg = random_query_algorithm(4, 2, args.queries, rng)
    initial = PureState(8, np.kron(subset_state(inst.subset, 4).amplitudes, np.eye(2)[0]))

    sigma = representative_sigma(inst.subset, 2)
    run = check_dilation(alg, inst.subset, sigma, taus, initial)
    print(f"instance S = {inst.subset.members}, sigma = {sigma.to_text()}")
    print(f"consistent = {run.consistent}")
    for k, d in enumerate(run.trace_distances):
        print(f"  after query {k}: trace distance {d:.3e}")

    wrong = representative_sigma(inst.subset.complement(), 2)
    control = check_dilation(alg, inst.subset, wrong, taus, initial)
    print(f"negative control with sigma = {wrong.to_text()}: "
          f"consistent = {control.consistent}, "
          f"max distance {control.max_trace_distance:.3e}")


if __name__ == "__main__":
    main()
