"""Write every shipped synthetic instance to a directory, in text and binary form.

    python3 scripts/make_synthetic.py out/ --seed 7
"""

import argparse
import json
from pathlib import Path

from ortho_lens.io import save_table
from ortho_lens.synthetic import angle_probe, clustered_categories, noise_subspace_ranking, planted_gmb


def main(out: Path, seed: int) -> None:
    out.mkdir(parents=True, exist_ok=True)
    planted = planted_gmb(seed)
    categories, members = clustered_categories(seed)
    ranking, target, tied, decoy = noise_subspace_ranking(seed)
    probe, boundary, reference = angle_probe(seed)
    tables = {"planted": planted.table, "categories": categories, "ranking": ranking, "angles": probe}
    for name, table in tables.items():
        save_table(table, out / f"{name}.txt", "text")
        save_table(table, out / f"{name}.bin", "binary")
    (out / "categories.json").write_text(json.dumps(members, indent=2) + "\n")
    truth = {
        "seed": seed,
        "planted": {"target": planted.target, "members": list(planted.planted)},
        "ranking": {"target": target, "tied": tied, "decoy": decoy},
        "angles": {"boundary": boundary, "reference": reference},
    }
    (out / "ground_truth.json").write_text(json.dumps(truth, indent=2) + "\n")
    print(f"wrote {len(tables)} tables to {out}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("out", type=Path)
    p.add_argument("--seed", type=int, default=7)
    a = p.parse_args()
    main(a.out, a.seed)
