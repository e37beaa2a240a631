"""Structure-preserving exchanges on a small FSLH(4,6;2,2).

Run from the repository root:  python demos/02_exchange_moves.py
"""
import numpy as np

from fslhd import LevelMatrix, SliceSpec, apply_move, count_neighbors, repeating_count, tau_candidates
from fslhd.neighborhood import ExchangeMove
from fslhd.twopart import grid_projection

spec = SliceSpec((4, 6), 2)
M = LevelMatrix(spec, np.array([[54, 12, 24, 42, 60, 30, 6, 18, 48, 36],
                                [54, 42, 12, 24, 18, 6, 36, 48, 60, 30]]).T)
print(spec, "valid:", M.is_valid(), " t^1 =", spec.slice_scales[0], " t' =", spec.scale)

# Which levels can replace 54 (slice 1, column 1) and keep the structure?
tau = tau_candidates(M, 0, 0, 54)
print("\nswap partners in the later slice:", sorted(tau.rho))
print("unused levels to switch to:      ", sorted(tau.sigma))

swap = ExchangeMove("different_slice", 0, (0, 4), (54, 60), (60, 54), (0, 1))
repl = ExchangeMove("out_slice", 0, (0,), (54,), (49,), (0,))
for mv in (swap, repl):
    M2 = apply_move(M, mv)
    print(f"{mv.kind:16s} -> column 1 = {M2.levels[:, 0].tolist()}  valid: {M2.is_valid()}")

# a swap that ignores the bins breaks slice 1
bad = apply_move(M, ExchangeMove("different_slice", 0, (1, 4), (12, 60), (60, 12), (0, 1)))
print("careless swap valid:", bad.is_valid())

n_in, n_diff, n_out = count_neighbors(M, 0)
print(f"\nneighbours of slice 1: within {n_in}, different-slice {n_diff}, out-slice {n_out}")

# Repeated rows on the coarse grids of each slice
for i in range(spec.u):
    G = grid_projection(M, i)
    print(f"grid {spec.slice_sizes[i]}x{spec.slice_sizes[i]}: {repeating_count(G)} repeated pairs")
