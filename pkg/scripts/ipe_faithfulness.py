"""Build embeddings for random graphs and compare partial orthogonality with separation.

    python3 scripts/ipe_faithfulness.py --graphs 50 --max-n 7
"""

import argparse
from dataclasses import dataclass

import numpy as np

from ortho_lens.ipe import construct_ipe, find_perfect_epsilon, verify_ipe
from ortho_lens.synthetic import random_graph


@dataclass(frozen=True)
class FaithfulnessConfig:
    graphs: int = 50
    max_n: int = 7
    edge_prob: float = 0.4
    seed: int = 0


def main(cfg: FaithfulnessConfig) -> int:
    rng = np.random.default_rng(cfg.seed)
    bad = 0
    for i in range(cfg.graphs):
        g = random_graph(rng, int(rng.integers(2, cfg.max_n + 1)), cfg.edge_prob)
        eps = find_perfect_epsilon(g)
        report = verify_ipe(construct_ipe(g, eps), g)
        bad += len(report.mismatches)
        print(f"graph {i:3d}: n={g.n} edges={len(g.edges):2d} eps={eps:.4f} "
              f"checks={report.checked:5d} mismatches={len(report.mismatches)}")
    print(f"total mismatches: {bad}")
    return 1 if bad else 0


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--graphs", type=int, default=50)
    p.add_argument("--max-n", type=int, default=7)
    p.add_argument("--edge-prob", type=float, default=0.4)
    p.add_argument("--seed", type=int, default=0)
    a = p.parse_args()
    raise SystemExit(main(FaithfulnessConfig(a.graphs, a.max_n, a.edge_prob, a.seed)))
