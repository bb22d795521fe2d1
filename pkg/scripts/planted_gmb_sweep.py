"""Recovery rate and best |cbar| per K on the planted generalized-boundary generator.

    python3 scripts/planted_gmb_sweep.py --seeds 50 --dr 5
"""

import argparse
from dataclasses import dataclass

import numpy as np

from ortho_lens.markov import find_generalized_mb, sweep_candidate_sizes
from ortho_lens.synthetic import planted_gmb


@dataclass(frozen=True)
class SweepConfig:
    seeds: int = 50
    n_r: int = 10
    d_r: int = 5
    k_max: int = 10


def main(cfg: SweepConfig) -> None:
    hits, exact, best = 0, 0, []
    for seed in range(cfg.seeds):
        inst = planted_gmb(seed)
        t = inst.table
        v = t.index(inst.target)
        planted = set(t.indices(inst.planted))
        res = find_generalized_mb(t, v, cfg.n_r, cfg.d_r, cfg.k_max, seed)
        hits += set(res.members) <= planted
        exact += set(res.members) == planted
        rows = sweep_candidate_sizes(t, v, range(1, cfg.k_max + 1), cfg.n_r, cfg.d_r, seed)
        best.append([r.best_abs_cbar for r in rows])
    print(f"members within planted set: {hits}/{cfg.seeds} (exactly planted: {exact})")
    best = np.array(best)
    print(" K   median |cbar|   mean |cbar|")
    for k, (med, mean) in enumerate(zip(np.median(best, axis=0), best.mean(axis=0)), start=1):
        print(f"{k:2d}   {med:12.3e}   {mean:11.3e}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seeds", type=int, default=50)
    p.add_argument("--nr", type=int, default=10)
    p.add_argument("--dr", type=int, default=5)
    p.add_argument("--kmax", type=int, default=10)
    a = p.parse_args()
    main(SweepConfig(a.seeds, a.nr, a.dr, a.kmax))
