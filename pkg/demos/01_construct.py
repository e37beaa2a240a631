"""Build a flexible sliced Latin hypercube with slices of 3, 4 and 5 runs.

Run from the repository root:  python demos/01_construct.py
"""
import numpy as np

from fslhd import (SliceSpec, assign_slices, column_from_orders, generate_level_matrix, structure_violations,
                   to_design, csm)

spec = SliceSpec((3, 4, 5), 2)
print(spec, " n =", spec.n, " L =", spec.L)
print("level scale of the whole design t' =", spec.scale)
print("level scales of the slices t^i    =", spec.slice_scales)

# Step 1: hand out the ranks 1..n to the slices.  theta_j says how many
# slices take a rank at step j.
a = assign_slices(spec)
print("\ntheta =", a.theta)
for i, h in enumerate(a.H):
    # every slice's ranks fall into distinct cells of its own n_i-way split
    cells = np.ceil(np.array(h) * spec.slice_sizes[i] / spec.n).astype(int)
    print(f"H^{i + 1} = {h}   cells {cells.tolist()}")

# Step 2: each slice permutes its ranks; multiplying by t' gives levels.
col = column_from_orders(SliceSpec((3, 4, 5), 1), [(10, 7, 3), (5, 8, 2, 11), (6, 9, 12, 1, 4)])
print("\none hand-picked column:", col.tolist())

# A random design does the same for every column with its own stream.
M = generate_level_matrix(spec, seed=7)
print("\nrandom levels (slice, m1, m2):")
for lab, row in zip(spec.row_slice + 1, M.levels):
    print(f"  {lab}  {row[0]:3d} {row[1]:3d}")
print("violations:", structure_violations(spec, M.levels))

D = to_design(M)  # midpoints (m - 0.5) / L
v = csm(D)
print(f"\nphi_t whole {v.whole:.4f}, per slice {np.round(v.per_slice, 4).tolist()}, combined {v.combined:.4f}")
