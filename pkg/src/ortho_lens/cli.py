"""``ortho-lens`` command line: analyses of embedding tables and IPE pipelines.

Every command writes one JSON report (stdout or ``--output``). Exit codes: 0 on
success, 2 for bad input, 3 when a size guard refuses the computation.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .errors import GuardRefusal, InvalidInputError, ParseError
from .geometry import Tolerance, cosine, orthonormal_basis, principal_angles
from .independence import (
    AXIOMS,
    EmbeddingTable,
    GraphSeparation,
    PartialOrthogonality,
    check_axioms,
    read_graph,
)
from .io import MAGIC, load_table, save_table
from .ipe import (
    construct_ipe,
    find_perfect_epsilon,
    is_perfect_perturbation,
    jl_project,
    reduction_plan,
    verify_ipe,
    verify_reduced_orthogonality,
)
from .markov import (
    DEFAULT_GMB_TOL,
    enumerate_markov_boundaries,
    find_generalized_mb,
    random_subspace_scores,
    sweep_candidate_sizes,
)
from . import synthetic

log = logging.getLogger("ortho_lens")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_GUARD = 3

IPE_FILE_TOL = 1e-5  # float32 payload limits exact orthogonality


@dataclass
class AnalysisConfig:
    command: str
    input: Optional[str] = None
    format: str = "auto"
    targets: tuple = ()
    seed: int = 0
    tol: Tolerance = field(default_factory=Tolerance)
    output: Optional[str] = None
    filter_threshold: float = 0.9
    normalize: bool = True
    n_r: int = 10
    d_r: int = 50
    K: int = 10

    def __post_init__(self):
        if not -1.0 <= self.filter_threshold <= 1.0 + 1e-12:
            raise InvalidInputError(f"filter threshold must lie in [-1, 1], got {self.filter_threshold}")
        if self.n_r < 1 or self.K < 1 or self.d_r < 0:
            raise InvalidInputError("--nr and --topk must be >= 1 and --dr >= 0")


# ---------------------------------------------------------------------------
# helpers


def filter_near_duplicates(table: EmbeddingTable, target: str, threshold: float = 0.9,
                           protect: Sequence[str] = ()) -> tuple[EmbeddingTable, list[str]]:
    """Drop every non-target row whose cosine with the target is at least ``threshold``."""
    t = table.index(target)
    unit = table.normalized().vectors
    cos = unit @ unit[t]
    protected = set(protect) | {target}
    keep, removed = [], []
    for i, label in enumerate(table.labels):
        if label not in protected and cos[i] >= threshold:
            removed.append(label)
        else:
            keep.append(i)
    return table.subset(keep), removed


def _sniff_format(path: str, fmt: str) -> str:
    if fmt != "auto":
        return fmt
    try:
        with open(path, "rb") as fh:
            return "binary" if fh.read(8) == MAGIC else "text"
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None


def _load(cfg: AnalysisConfig, exclude: Optional[str] = None) -> EmbeddingTable:
    if not cfg.input:
        raise InvalidInputError("--input is required")
    table = load_table(cfg.input, _sniff_format(cfg.input, cfg.format))
    if exclude:
        banned = {x.strip() for x in Path(exclude).read_text(encoding="utf-8").splitlines() if x.strip()}
        banned -= set(cfg.targets)
        table = table.subset([i for i, lab in enumerate(table.labels) if lab not in banned])
    return table.normalized() if cfg.normalize else table


def _labels_arg(value: Optional[str]) -> list[str]:
    if not value:
        return []
    return [x for x in (p.strip() for p in value.split(",")) if x]


def _parse_ks(text: str) -> list[int]:
    ks = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            ks.extend(range(int(lo), int(hi) + 1))
        elif part:
            ks.append(int(part))
    if not ks:
        raise InvalidInputError(f"empty --sweep-k value {text!r}")
    return ks


def _clean(obj):
    """Make a report JSON-safe: numpy scalars to Python, non-finite floats to null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _config_echo(args: argparse.Namespace) -> dict:
    skip = {"func", "timing"}
    return {k: getattr(args, k) for k in sorted(vars(args)) if k not in skip}


def _tolerance(args, default_ortho: float = 1e-8) -> Tolerance:
    return Tolerance(rank_tol=args.rank_tol,
                     ortho_tol=default_ortho if args.tol is None else args.tol,
                     zero_tol=args.zero_tol)


def _config(args, default_ortho: float = 1e-8) -> AnalysisConfig:
    return AnalysisConfig(
        command=args.command,
        input=args.input,
        format=args.format,
        targets=tuple(_labels_arg(args.target)),
        seed=args.seed,
        tol=_tolerance(args, default_ortho),
        output=args.output,
        filter_threshold=args.filter_threshold,
        normalize=not args.no_normalize,
        n_r=getattr(args, "nr", 10),
        d_r=getattr(args, "dr", 50),
        K=getattr(args, "topk", 10),
    )


def _require_targets(cfg: AnalysisConfig) -> list[str]:
    if not cfg.targets:
        raise InvalidInputError("--target is required")
    return list(cfg.targets)


# ---------------------------------------------------------------------------
# commands


def cmd_gmb(args) -> dict:
    cfg = _config(args)
    table = _load(cfg, args.exclude)
    ks = sorted(set(_parse_ks(args.sweep_k))) if args.sweep_k else None
    per_target, sweeps = [], []
    for target in _require_targets(cfg):
        filtered, removed = filter_near_duplicates(table, target, cfg.filter_threshold)
        v = filtered.index(target)
        res = find_generalized_mb(filtered, v, cfg.n_r, cfg.d_r, cfg.K, cfg.seed, cfg.tol,
                                  args.gmb_tol, args.workers)
        per_target.append({
            "target": target,
            "members": [filtered.labels[i] for i in res.members],
            "cbar": res.cbar,
            "excluded": res.excluded,
            "best_abs_cbar": res.best_abs_cbar,
            "subsets_searched": res.subsets_searched,
            "candidate_pool": [{"label": filtered.labels[i], "score": s} for i, s in res.candidate_pool],
            "filtered_out": removed,
        })
        if ks:
            rows = sweep_candidate_sizes(filtered, v, ks, cfg.n_r, cfg.d_r, cfg.seed, cfg.tol, args.gmb_tol)
            sweeps.append([(r.best_abs_cbar, [filtered.labels[i] for i in r.members]) for r in rows])
    results = {"targets": per_target}
    if ks:
        results["sweep"] = []
        for pos, k in enumerate(ks):
            best = [rows[pos][0] for rows in sweeps]
            results["sweep"].append({
                "K": k,
                "median_best_abs_cbar": float(np.median(best)),
                "mean_best_abs_cbar": float(np.mean(best)),
                "per_target": [{"target": t, "best_abs_cbar": rows[pos][0], "members": rows[pos][1]}
                               for t, rows in zip(cfg.targets, sweeps)],
            })
    return results


def cmd_mb_exact(args) -> dict:
    cfg = _config(args)
    table = _load(cfg, args.exclude)
    out = []
    for target in _require_targets(cfg):
        v = table.index(target)
        found = enumerate_markov_boundaries(table, v, cfg.tol, args.max_size, args.guard)
        projs = [b.projection_of_target for b in found]
        spread = max((float(np.linalg.norm(p - projs[0])) for p in projs), default=0.0)
        out.append({
            "target": target,
            "boundaries": [[table.labels[i] for i in b.members] for b in found],
            "projection_spread": spread,
            "residual_norms": [float(np.linalg.norm(table.vectors[v] - p)) for p in projs],
        })
    return {"targets": out}


def _read_categories(path: str, table: EmbeddingTable) -> list[tuple[str, str, list[str]]]:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read categories file {path}: {exc}") from None
    if not isinstance(raw, dict) or not raw:
        raise ParseError("categories file must be a nonempty JSON object")
    cats = []
    for name, entry in raw.items():
        if isinstance(entry, dict):
            cond, members = entry.get("condition", name), entry.get("members", [])
        else:
            cond, members = name, entry
        if not isinstance(members, list) or len(members) < 2:
            raise ParseError(f"category {name!r} needs a list of at least two members")
        cats.append((name, str(cond), [str(m) for m in members]))
    known = set(table.labels)
    missing = sorted({lab for _, cond, members in cats for lab in [cond, *members] if lab not in known})
    if missing:
        raise InvalidInputError(f"labels missing from table: {', '.join(missing)}")
    return cats


def _reduction(vectors: np.ndarray, pairs: np.ndarray, cond: np.ndarray, zero_tol: float) -> np.ndarray:
    """cos(a, b) minus cos of residuals after projecting out ``cond``; nan when degenerate."""
    unit_c = cond / np.linalg.norm(cond)
    a, b = vectors[pairs[:, 0]], vectors[pairs[:, 1]]
    na, nb = np.linalg.norm(a, axis=1), np.linalg.norm(b, axis=1)
    before = np.einsum("ij,ij->i", a, b) / (na * nb)
    ra = a - np.outer(a @ unit_c, unit_c)
    rb = b - np.outer(b @ unit_c, unit_c)
    nra, nrb = np.linalg.norm(ra, axis=1), np.linalg.norm(rb, axis=1)
    ok = (nra > zero_tol) & (nrb > zero_tol)
    after = np.full(len(pairs), np.nan)
    after[ok] = np.einsum("ij,ij->i", ra[ok], rb[ok]) / (nra[ok] * nrb[ok])
    return before - after


def cmd_condition_matrix(args) -> dict:
    cfg = _config(args)
    table = _load(cfg, args.exclude)
    if not args.categories:
        raise InvalidInputError("--categories is required")
    cats = _read_categories(args.categories, table)
    rng = np.random.default_rng(cfg.seed)
    n = table.n
    first = rng.integers(0, n, size=args.null_samples)
    second = (first + rng.integers(1, n, size=args.null_samples)) % n
    null_pairs = np.column_stack([first, second])
    vecs = table.vectors
    raw, z, null_stats = [], [], []
    for _, cond, _ in cats:
        c = vecs[table.index(cond)]
        null = _reduction(vecs, null_pairs, c, cfg.tol.zero_tol)
        null = null[np.isfinite(null)]
        mu, sd = float(np.mean(null)), float(np.std(null))
        null_stats.append({"condition": cond, "mean": mu, "std": sd, "samples": int(null.size)})
        raw_row, z_row = [], []
        for _, _, members in cats:
            idx = [table.index(m) for m in members if m != cond]
            pairs = np.array([(a, b) for i, a in enumerate(idx) for b in idx[i + 1:]], dtype=int).reshape(-1, 2)
            red = _reduction(vecs, pairs, c, cfg.tol.zero_tol) if len(pairs) else np.array([])
            red = red[np.isfinite(red)]
            value = float(np.mean(red)) if red.size else float("nan")
            raw_row.append(value)
            z_row.append((value - mu) / sd if sd > 0 else float("nan"))
        raw.append(raw_row)
        z.append(z_row)
    return {
        "rows": [name for name, _, _ in cats],
        "columns": [name for name, _, _ in cats],
        "raw_reduction": raw,
        "z_matrix": z,
        "null": null_stats,
        "note": "null pairs are shared across rows and conditioned on each row's category embedding",
    }


def cmd_rank(args) -> dict:
    cfg = _config(args)
    table = _load(cfg, args.exclude)
    out = []
    for target in _require_targets(cfg):
        filtered, removed = filter_near_duplicates(table, target, cfg.filter_threshold)
        v = filtered.index(target)
        raw = np.array([cosine(filtered.vectors[v], x, cfg.tol)[0] for x in filtered.vectors])
        agg = random_subspace_scores(filtered, v, cfg.n_r, cfg.d_r, cfg.seed, cfg.tol)

        def top(scores):
            order = sorted((u for u in range(filtered.n) if u != v), key=lambda u: (-scores[u], u))
            return [{"label": filtered.labels[u], "score": float(scores[u])} for u in order[:args.m]]

        out.append({"target": target, "before_projection": top(raw), "after_projection": top(agg),
                    "filtered_out": removed})
    return {"targets": out}


def cmd_angles(args) -> dict:
    cfg = _config(args)
    table = _load(cfg, args.exclude)
    boundary = _labels_arg(args.boundary)
    reference = _labels_arg(args.reference)
    if not boundary or not reference:
        raise InvalidInputError("--boundary and --reference are required")
    b_span = orthonormal_basis(table.vectors[table.indices(boundary)], cfg.tol)
    r_span = orthonormal_basis(table.vectors[table.indices(reference)], cfg.tol)
    angles = principal_angles(b_span, r_span)
    rng = np.random.default_rng(cfg.seed)
    pool = [i for i, lab in enumerate(table.labels) if lab not in set(reference)]
    if len(pool) < b_span.rank:
        raise InvalidInputError("not enough rows outside the reference set for random baselines")
    baseline = []
    for _ in range(args.random_baselines):
        pick = np.sort(rng.choice(pool, size=b_span.rank, replace=False))
        span = orthonormal_basis(table.vectors[pick], cfg.tol)
        baseline.append(float(principal_angles(span, r_span)[0]))
    baseline = np.array(baseline)
    smallest = float(angles[0])
    return {
        "angles": angles,
        "smallest_angle": smallest,
        "boundary_rank": b_span.rank,
        "reference_rank": r_span.rank,
        "baseline": {
            "count": int(baseline.size),
            "mean": float(baseline.mean()) if baseline.size else None,
            "std": float(baseline.std()) if baseline.size else None,
            "percentile_5": float(np.percentile(baseline, 5)) if baseline.size else None,
            "fraction_below": float(np.mean(baseline < smallest)) if baseline.size else None,
            "smallest_angles": baseline,
        },
    }


def cmd_axioms(args) -> dict:
    wanted = _labels_arg(args.axioms) or list(AXIOMS)
    if args.graph:
        g = read_graph(args.graph)
        model, universe, source = GraphSeparation(g), list(range(g.n)), "graph"
    else:
        cfg = _config(args)
        table = _load(cfg, args.exclude)
        universe = list(range(table.n))
        if len(universe) > args.max_universe:
            rng = np.random.default_rng(args.seed)
            universe = sorted(int(x) for x in rng.choice(table.n, size=args.max_universe, replace=False))
        model, source = PartialOrthogonality(table, cfg.tol), "partial_orthogonality"
    report = check_axioms(model, universe, wanted, args.trials, args.seed)
    return {
        "model": source,
        "universe_size": len(universe),
        "exhaustive": report.exhaustive,
        "tuples_checked": report.trials,
        "violation_counts": {a: report.count(a) for a in wanted},
        "violations": [{"trial": x.trial, "axiom": x.axiom, "A": x.A, "B": x.B, "C": x.C, "D": x.D}
                       for x in report.violations[:args.max_report]],
    }


def cmd_ipe_build(args) -> dict:
    if not args.graph:
        raise InvalidInputError("--graph is required")
    g = read_graph(args.graph)
    eps = args.epsilon if args.epsilon is not None else find_perfect_epsilon(g)
    perfect = is_perfect_perturbation(g, eps)
    ipe = construct_ipe(g, eps, normalize=args.unit_rows)
    if args.map_out:
        save_table(ipe.table(), args.map_out, "binary")
    return {
        "n": g.n,
        "edges": sorted(g.edges),
        "epsilon": eps,
        "perfect": perfect.perfect,
        "perfect_witness": perfect.witness,
        "unit_rows": bool(args.unit_rows),
        "gram": ipe.gram,
        "map_file": args.map_out,
    }


def _map_from_file(args, default_tol):
    cfg = _config(args, default_tol)
    table = _load(cfg)
    return cfg, table


def cmd_ipe_check(args) -> dict:
    if not args.graph:
        raise InvalidInputError("--graph is required")
    g = read_graph(args.graph)
    cfg, table = _map_from_file(args, IPE_FILE_TOL)
    report = verify_ipe(table.vectors, g, cfg.tol)
    return {
        "n": g.n,
        "checked": report.checked,
        "mismatch_count": len(report.mismatches),
        "faithful": report.faithful,
        "mismatches": [{"i": i, "j": j, "given": list(C), "orthogonal": o, "separated": s}
                       for i, j, C, o, s in report.mismatches[:50]],
        "ortho_tol": cfg.tol.ortho_tol,
    }


def cmd_ipe_reduce(args) -> dict:
    if not 0 < args.epsilon < 1:
        raise InvalidInputError("--epsilon must lie in (0, 1)")
    g = read_graph(args.graph) if args.graph else None
    if args.input:
        cfg, table = _map_from_file(args, IPE_FILE_TOL)
        rows, source = table.vectors, "file"
    elif g is not None:
        cfg = _config(args)
        pert = args.perturbation if args.perturbation is not None else find_perfect_epsilon(g)
        rows, source = construct_ipe(g, pert).rows, f"constructed (perturbation {pert:g})"
    else:
        raise InvalidInputError("ipe-reduce needs --input or --graph")
    if g is not None:
        if g.n != rows.shape[0]:
            raise InvalidInputError(f"graph has {g.n} vertices but the map has {rows.shape[0]} rows")
        boundaries = [sorted(g.neighbors(i)) for i in range(g.n)]
        boundary_source = "graph neighbourhoods"
    else:
        table = EmbeddingTable.from_vectors(rows)
        boundaries = [list(enumerate_markov_boundaries(table, i, cfg.tol)[0].members) for i in range(table.n)]
        boundary_source = "exact enumeration"
    unit = rows / np.linalg.norm(rows, axis=1, keepdims=True)
    plan = reduction_plan(unit, args.epsilon, [len(b) for b in boundaries], cfg.seed)
    k_used = plan.k
    capped = False
    if args.bypass_identity:
        reduced, k_used = unit.copy(), unit.shape[1]
    else:
        if args.cap_k is not None and args.cap_k < plan.k:
            k_used, capped = args.cap_k, True
        reduced = jl_project(unit, k_used, cfg.seed)
    report = verify_reduced_orthogonality(unit, reduced, boundaries, args.epsilon, cfg.tol)
    return {
        "source": source,
        "boundary_source": boundary_source,
        "plan": {"n": plan.n, "k": plan.k, "epsilon": plan.epsilon, "epsilon_prime": plan.epsilon_prime,
                 "lambda_min": plan.lambda_min, "lambda_max": plan.lambda_max, "r": plan.r, "C": plan.C},
        "k_used": k_used,
        "capped": capped,
        "bypass_identity": bool(args.bypass_identity),
        "best_effort": capped,
        "max_residual_inner_product": report.max_value,
        "checked": report.checked,
        "violation_count": len(report.violations),
        "bound_holds": report.bound_holds,
    }


def cmd_synth(args) -> dict:
    if not args.output_table:
        raise InvalidInputError("--table-out is required")
    fmt = "binary" if args.format == "binary" else "text"
    if args.kind == "planted":
        inst = synthetic.planted_gmb(args.seed)
        save_table(inst.table, args.output_table, fmt)
        return {"kind": "planted", "target": inst.target, "planted": list(inst.planted), "n": inst.table.n}
    if args.kind == "categories":
        table, cats = synthetic.clustered_categories(args.seed)
        save_table(table, args.output_table, fmt)
        if args.categories_out:
            Path(args.categories_out).write_text(json.dumps(cats, indent=2) + "\n", encoding="utf-8")
        return {"kind": "categories", "categories": cats, "n": table.n}
    if args.kind == "angles":
        table, boundary, reference = synthetic.angle_probe(args.seed)
        save_table(table, args.output_table, fmt)
        return {"kind": "angles", "boundary": boundary, "reference": reference, "n": table.n}
    table, target, tied, decoy = synthetic.noise_subspace_ranking(args.seed)
    save_table(table, args.output_table, fmt)
    return {"kind": "ranking", "target": target, "tied": tied, "decoy": decoy, "n": table.n}


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", help="embedding table path")
    p.add_argument("--format", choices=["auto", "text", "binary"], default="auto")
    p.add_argument("--target", help="target label(s), comma-separated")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=None, help="inner product treated as zero")
    p.add_argument("--zero-tol", type=float, default=1e-10, help="residual norm treated as zero")
    p.add_argument("--rank-tol", type=float, default=None, help="singular-value cutoff for spans")
    p.add_argument("--output", help="write the JSON report here instead of stdout")
    p.add_argument("--filter-threshold", type=float, default=0.9)
    p.add_argument("--exclude", help="file of labels to drop before analysis, one per line")
    p.add_argument("--no-normalize", action="store_true", help="keep raw vector norms")
    p.add_argument("--timing", action="store_true", help="add wall-clock seconds to the report")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ortho-lens", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gmb", help="randomized generalized Markov boundary search")
    _common(p)
    p.add_argument("--nr", type=int, default=10)
    p.add_argument("--dr", type=int, default=50)
    p.add_argument("--topk", type=int, default=10)
    p.add_argument("--sweep-k", help="K values, e.g. 1..10 or 1,3,5")
    p.add_argument("--gmb-tol", type=float, default=DEFAULT_GMB_TOL)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_gmb)

    p = sub.add_parser("mb-exact", help="enumerate exact Markov boundaries")
    _common(p)
    p.add_argument("--max-size", type=int, default=None)
    p.add_argument("--guard", type=int, default=20)
    p.set_defaults(func=cmd_mb_exact)

    p = sub.add_parser("condition-matrix", help="cosine reduction when conditioning on category words")
    _common(p)
    p.add_argument("--categories", help="JSON map of category label to member labels")
    p.add_argument("--null-samples", type=int, default=10000)
    p.set_defaults(func=cmd_condition_matrix)

    p = sub.add_parser("rank", help="neighbours before and after random-subspace projection")
    _common(p)
    p.add_argument("--nr", type=int, default=10)
    p.add_argument("--dr", type=int, default=50)
    p.add_argument("--topk", dest="m", type=int, default=10)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("angles", help="principal angles between two spans with a random baseline")
    _common(p)
    p.add_argument("--boundary", help="labels spanning the first subspace")
    p.add_argument("--reference", help="labels spanning the second subspace")
    p.add_argument("--random-baselines", type=int, default=50)
    p.set_defaults(func=cmd_angles)

    p = sub.add_parser("axioms", help="search for graphoid axiom violations")
    _common(p)
    p.add_argument("--graph", help="check graph separation on this graph instead of a table")
    p.add_argument("--axioms", help="comma-separated subset of A1..A6")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--max-universe", type=int, default=10)
    p.add_argument("--max-report", type=int, default=20)
    p.set_defaults(func=cmd_axioms)

    p = sub.add_parser("ipe-build", help="build an independence-preserving embedding of a graph")
    _common(p)
    p.add_argument("--graph")
    p.add_argument("--epsilon", type=float, default=None, help="perturbation factor (searched if omitted)")
    p.add_argument("--map-out", help="write the embedding rows here (binary format)")
    p.add_argument("--unit-rows", action="store_true")
    p.set_defaults(func=cmd_ipe_build)

    p = sub.add_parser("ipe-check", help="compare an embedding's partial orthogonality with a graph")
    _common(p)
    p.add_argument("--graph")
    p.set_defaults(func=cmd_ipe_check)

    p = sub.add_parser("ipe-reduce", help="plan and verify a random projection of an embedding")
    _common(p)
    p.add_argument("--graph")
    p.add_argument("--epsilon", type=float, default=0.25, help="bound on residual inner products")
    p.add_argument("--perturbation", type=float, default=None)
    p.add_argument("--cap-k", type=int, default=None)
    p.add_argument("--bypass-identity", action="store_true")
    p.set_defaults(func=cmd_ipe_reduce)

    p = sub.add_parser("synth", help="write a shipped synthetic instance")
    _common(p)
    p.add_argument("kind", choices=["planted", "categories", "ranking", "angles"])
    p.add_argument("--table-out", dest="output_table")
    p.add_argument("--categories-out")
    p.set_defaults(func=cmd_synth)
    return parser


def run(argv: Optional[Sequence[str]] = None) -> tuple[int, Optional[dict]]:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        results = args.func(args)
    except GuardRefusal as exc:
        print(f"ortho-lens: refused: {exc}", file=sys.stderr)
        return EXIT_GUARD, None
    except (InvalidInputError, OSError) as exc:
        print(f"ortho-lens: error: {exc}", file=sys.stderr)
        return EXIT_INPUT, None
    report = {
        "command": args.command,
        "version": __version__,
        "config": _config_echo(args),
        "results": results,
    }
    if args.timing:
        report["wall_clock_seconds"] = time.perf_counter() - start
    report = _clean(report)
    text = json.dumps(report, indent=2, allow_nan=False) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK, report


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
