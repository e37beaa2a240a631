"""Two-part optimizer against SESE on FSLHD(15,30;2,2).

Run from the repository root:  python demos/04_two_part.py [runs]
"""
import sys
import time
import warnings

import numpy as np

from fslhd import CriterionConfig, SeseParams, SliceSpec, generate_level_matrix, part1, part2, sese_optimize
from fslhd.twopart import grid_projection, needs_dedup, repeating_count, should_skip_part2

runs = int(sys.argv[1]) if len(sys.argv) > 1 else 5
spec = SliceSpec((15, 30), 2)
cfg = CriterionConfig()

print(spec, " grids needing de-duplication:", [i + 1 for i in range(spec.u) if needs_dedup(spec, i)])
print("skip part II by the sparsity rule:", should_skip_part2(spec))

M = generate_level_matrix(spec, 0)
print("repeated pairs on the random start:", [repeating_count(grid_projection(M, i)) for i in range(spec.u)])
r = part1(M, cfg, seed=0)
print("after part I:                      ", [repeating_count(grid_projection(r.design, i)) for i in range(spec.u)])

table = {"SESE": [], "Part-I": [], "Part-I+II": []}
times = {k: 0.0 for k in table}
for s in range(runs):
    M0 = generate_level_matrix(spec, 100 + s)
    t0 = time.time()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        r1 = part1(M0, cfg, seed=s)
    times["Part-I"] += time.time() - t0
    r2 = part2(r1.design, cfg, seed=s)
    times["Part-I+II"] += time.time() - t0
    t0 = time.time()
    _, tr = sese_optimize(M0, cfg, SeseParams(seed=s))
    times["SESE"] += time.time() - t0
    table["Part-I"].append(r1.value.combined)
    table["Part-I+II"].append(r2.value.combined)
    table["SESE"].append(tr.final)

print(f"\n{'method':<10}{'min':>9}{'mean':>9}{'max':>9}{'sd':>9}{'avg s':>8}")
for k, v in table.items():
    v = np.array(v)
    print(f"{k:<10}{v.min():9.4f}{v.mean():9.4f}{v.max():9.4f}{v.std():9.4f}{times[k] / runs:8.2f}")
