"""Command-line interface: `select`, `oracle`, and `synth` subcommands.

`select` reads an embedding manifest, runs the configured selection for each
query, and writes selections.json, summary.tsv, and (by default) figures.
`oracle` dumps the brute-force subset-probability table for small fixtures.
`synth` writes a synthetic manifest from a JSON spec.

The DPPSELECT_THREADS environment variable caps per-query parallelism.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

from .core import Manifest, Query, View, load_manifest, write_manifest
from .dpp import SamplerMode, enumerate_oracle
from .errors import DppSelectError
from .kernel import build_kernel
from .pipeline import Mode, SelectConfig, select
from .scoring import clamp_scores, score_view
from .synth import SynthSpec, generate_manifest


def _thread_count(n_tasks: int) -> int:
    env = os.environ.get("DPPSELECT_THREADS")
    if env is not None:
        try:
            cap = int(env)
        except ValueError as exc:
            raise DppSelectError(f"DPPSELECT_THREADS must be an integer: {env!r}") from exc
        if cap < 1:
            raise DppSelectError("DPPSELECT_THREADS must be >= 1")
    else:
        cap = min(4, os.cpu_count() or 1)
    return max(1, min(cap, n_tasks))


def _pick_queries(manifest: Manifest, ids: list[str] | None) -> list[Query]:
    if not manifest.queries:
        raise DppSelectError("manifest contains no queries")
    if not ids:
        return list(manifest.queries)
    by_id = {q.id: q for q in manifest.queries}
    missing = [i for i in ids if i not in by_id]
    if missing:
        raise DppSelectError(f"unknown query ids: {missing}")
    return [by_id[i] for i in ids]


def _run_one(manifest: Manifest, query: Query, cfg: SelectConfig) -> tuple[dict, "object"]:
    selection = select(manifest.pair, query.embedding, cfg)
    record = {
        "query_id": query.id,
        "text": query.text,
        "frames": [
            {
                "view": e.view.value,
                "index": e.index,
                "timestamp": e.timestamp,
                "score": e.score,
            }
            for e in selection.entries
        ],
        "provenance": selection.provenance,
    }
    return record, selection


def _summary_rows(results: list[dict]) -> list[dict]:
    rows = []
    for res in results:
        prov = res["provenance"]
        scores = [f["score"] for f in res["frames"]]
        rows.append(
            {
                "query_id": res["query_id"],
                "mode": prov["mode"],
                "sampler": prov["sampler"],
                "seed": prov["seed"],
                "k_ego": prov["split"]["ego"],
                "k_exo": prov["split"]["exo"],
                "n_frames": len(res["frames"]),
                "mean_score": sum(scores) / len(scores),
                "first_ts": res["frames"][0]["timestamp"],
                "last_ts": res["frames"][-1]["timestamp"],
            }
        )
    return rows


def _write_summary_tsv(rows: list[dict], path: Path) -> None:
    cols = [
        "query_id", "mode", "sampler", "seed", "k_ego", "k_exo",
        "n_frames", "mean_score", "first_ts", "last_ts",
    ]
    lines = ["\t".join(cols)]
    for row in rows:
        cells = []
        for col in cols:
            val = row[col]
            cells.append(f"{val:.6f}" if isinstance(val, float) else str(val))
        lines.append("\t".join(cells))
    path.write_text("\n".join(lines) + "\n")


def _cmd_select(args: argparse.Namespace) -> int:
    manifest = load_manifest(args.manifest)
    queries = _pick_queries(manifest, args.query_id)
    base_cfg = SelectConfig(
        budget=args.budget,
        mode=Mode(args.mode),
        sampler=SamplerMode(args.sampler),
        seed=args.seed,
        score_floor=args.score_floor,
    )
    # Each query gets base seed + its run position, so runs are reproducible
    # and queries are decorrelated.
    tasks = [
        (query, replace(base_cfg, seed=base_cfg.seed + pos))
        for pos, query in enumerate(queries)
    ]
    workers = _thread_count(len(tasks))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outputs = list(
                pool.map(lambda t: _run_one(manifest, t[0], t[1]), tasks)
            )
    else:
        outputs = [_run_one(manifest, q, cfg) for q, cfg in tasks]
    results = [record for record, _ in outputs]

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {
        "manifest": str(args.manifest),
        "dim": manifest.dim,
        "n_ego": manifest.pair.ego.n,
        "n_exo": manifest.pair.exo.n,
        "budget": args.budget,
        "mode": args.mode,
        "sampler": args.sampler,
        "base_seed": args.seed,
        "score_floor": args.score_floor,
        "selections": results,
    }
    (out_dir / "selections.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n"
    )
    rows = _summary_rows(results)
    _write_summary_tsv(rows, out_dir / "summary.tsv")

    if args.figures:
        from . import report  # deferred: matplotlib import is slow

        fig_dir = out_dir / "figures"
        fig_dir.mkdir(exist_ok=True)
        for (res, selection), (query, _) in zip(outputs, tasks):
            relevance = {
                View.EGO: score_view(manifest.pair.ego, query.embedding),
                View.EXO: score_view(manifest.pair.exo, query.embedding),
            }
            report.save_query_figure(
                manifest.pair,
                relevance,
                selection,
                f"{res['query_id']} [{args.mode}/{args.sampler}]",
                fig_dir / f"{res['query_id']}.png",
            )
        report.save_split_summary_figure(rows, fig_dir / "summary.png")

    print(f"wrote {len(results)} selections to {out_dir / 'selections.json'}")
    return 0


def _cmd_oracle(args: argparse.Namespace) -> int:
    manifest = load_manifest(args.manifest)
    queries = _pick_queries(manifest, [args.query_id] if args.query_id else None)
    query = queries[0]
    views = [View.EGO, View.EXO] if args.view == "both" else [View(args.view)]
    tables = {}
    for view in views:
        stream = manifest.pair.stream(view)
        clamped = clamp_scores(score_view(stream, query.embedding), args.score_floor)
        kern = build_kernel(stream, clamped)
        tables[view.value] = enumerate_oracle(kern, args.k).to_jsonable()
    payload = {"query_id": query.id, "k": args.k, "tables": tables}
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote oracle table to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    spec = SynthSpec.from_json(Path(args.spec).read_text())
    manifest = generate_manifest(spec)
    write_manifest(manifest, args.out)
    print(f"wrote synthetic manifest ({spec.structure.value}) to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dppselect",
        description="Dual-view keyframe selection via per-view k-DPP sampling.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sel = sub.add_parser("select", help="run selection for every query in a manifest")
    p_sel.add_argument("--manifest", required=True, help="manifest directory")
    p_sel.add_argument("--budget", type=int, default=32, help="total frames to select")
    p_sel.add_argument(
        "--mode", choices=[m.value for m in Mode], default="soft"
    )
    p_sel.add_argument(
        "--sampler", choices=[s.value for s in SamplerMode], default="exact"
    )
    p_sel.add_argument("--seed", type=int, default=0)
    p_sel.add_argument("--score-floor", type=float, default=1e-6)
    p_sel.add_argument("--out", default=".", help="output directory")
    p_sel.add_argument(
        "--query-id", action="append", help="restrict to these query ids (repeatable)"
    )
    p_sel.add_argument(
        "--figures",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="render per-query figures next to the tabular output",
    )
    p_sel.set_defaults(func=_cmd_select)

    p_or = sub.add_parser("oracle", help="dump brute-force subset probabilities")
    p_or.add_argument("--manifest", required=True)
    p_or.add_argument("--k", type=int, required=True, help="subset size")
    p_or.add_argument("--query-id", default=None)
    p_or.add_argument("--view", choices=["ego", "exo", "both"], default="both")
    p_or.add_argument("--score-floor", type=float, default=1e-6)
    p_or.add_argument("--out", default=None, help="output file (default stdout)")
    p_or.set_defaults(func=_cmd_oracle)

    p_syn = sub.add_parser("synth", help="write a synthetic manifest")
    p_syn.add_argument("--spec", required=True, help="JSON spec file")
    p_syn.add_argument("--out", required=True, help="manifest directory to create")
    p_syn.set_defaults(func=_cmd_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DppSelectError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
