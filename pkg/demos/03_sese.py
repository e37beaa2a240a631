"""Random FSLHD(4,8,12;3,2) designs against the SESE optimizer.

Run from the repository root:  python demos/03_sese.py [R]
Writes sese_before.svg and sese_after.svg next to the working directory.
"""
import sys
import time

import numpy as np

from fslhd import CriterionConfig, SeseParams, SliceSpec, csm, generate_level_matrix, random_designs, sese_optimize, to_design
from fslhd.cli import render_svg

R = int(sys.argv[1]) if len(sys.argv) > 1 else 2000
spec = SliceSpec((4, 8, 12), 2)
cfg = CriterionConfig(t=50, w=0.5)

t0 = time.time()
vals = np.array([csm(to_design(M), cfg).combined for M in random_designs(spec, R, seed=1)])
print(f"{R} random designs in {time.time() - t0:.1f}s")
print(f"  min {vals.min():.4f}  mean {vals.mean():.4f}  max {vals.max():.4f}  sd {vals.std():.4f}")
print(f"  share below 8: {np.mean(vals < 8):.2%}")

M0 = generate_level_matrix(spec, seed=2)
t0 = time.time()
M, trace = sese_optimize(M0, cfg, SeseParams(P=20, N=10, seed=3))
print(f"\nSESE: {trace.initial:.4f} -> {trace.final:.4f} in {time.time() - t0:.1f}s")
acc = np.mean([r.accepted for r in trace.records])
print(f"  {len(trace.records)} steps, {acc:.0%} accepted")

# how the best value fell, slice by slice
for i in range(spec.u):
    recs = [r for r in trace.records if r.slice == i]
    print(f"  after slice {i + 1}: best {recs[-1].best:.4f}, last threshold {recs[-1].threshold:.2e}")

open("sese_before.svg", "w").write(render_svg(to_design(M0), grid=4))
open("sese_after.svg", "w").write(render_svg(to_design(M), grid=4))
print("\nwrote sese_before.svg, sese_after.svg")
