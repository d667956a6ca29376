"""Command-line entry point: ``harvest``, ``index``, ``query``, ``eval``, ``tune``.

Each ``cmd_*`` function takes parsed arguments and returns an exit code, so
they can be driven from Python as well as from the shell.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .answer import f1_error, labeling_from_json, labeling_to_json
from .harvest import HarvestError, RawDocument, extract_tables, read_jsonl, write_jsonl
from .index import STAGE1_K, CorpusError, Index, build_index
from .infer import ALGORITHMS, infer
from .labels import NR
from .model import ModelWeights, build_model, search_grid
from .pipeline import features_for, parse_columns, run_query

CONFIG_ENV = "TABLEQUERY_CONFIG"
DEFAULT_GRID = Path(__file__).with_name("data") / "default_grid.json"
log = logging.getLogger("tablequery")


class CliError(Exception):
    """A hard error reported to the user with exit code 2."""


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def load_weights(path: str | None, pmi2: bool = False) -> ModelWeights:
    """Weights from ``path``, else from ``$TABLEQUERY_CONFIG``, else defaults."""
    path = path or os.environ.get(CONFIG_ENV)
    weights = ModelWeights()
    if path:
        try:
            weights = ModelWeights.load(path)
        except FileNotFoundError as exc:
            raise CliError(f"config not found: {path}") from exc
        except (ValueError, TypeError) as exc:
            raise CliError(f"bad config {path}: {exc}") from exc
    if pmi2:
        weights = ModelWeights.from_json({**weights.to_json(), "use_pmi2": True})
    return weights


def load_index(path) -> Index:
    try:
        return Index.load(path)
    except FileNotFoundError as exc:
        raise CliError(f"no index at {path}") from exc
    except (CorpusError, ValueError, KeyError) as exc:
        raise CliError(f"unreadable index at {path}: {exc}") from exc


def _read_json(path, what: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise CliError(f"{what} file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise CliError(f"malformed {what} file {path}: {exc}") from exc


def load_queries(path) -> list[dict]:
    """A JSON list of ``{"query_id", "columns"}`` objects; extra keys are kept."""
    data = _read_json(path, "queries")
    if isinstance(data, dict):
        data = [data]
    out = []
    for k, q in enumerate(data):
        if "columns" not in q:
            raise CliError(f"query {k} in {path} has no columns")
        out.append({**q, "query_id": q.get("query_id", f"q{k}"), "columns": parse_columns(q["columns"])})
    return out


# --- harvest / index -----------------------------------------------------------


def _html_files(inputs: Sequence[str]) -> list[Path]:
    files = []
    for raw in inputs:
        p = Path(raw)
        if p.is_dir():
            files.extend(sorted(f for f in p.rglob("*") if f.suffix.lower() in (".html", ".htm")))
        elif p.exists():
            files.append(p)
        else:
            raise CliError(f"input not found: {raw}")
    return files


def cmd_harvest(args) -> int:
    files = _html_files(args.inputs)
    seen: dict[str, Path] = {}
    tables = []
    for f in files:
        url = f.stem
        if url in seen:
            raise CliError(f"{f} and {seen[url]} share the document name {url!r}")
        seen[url] = f
        try:
            html = f.read_text(encoding="utf-8", errors="replace")
            tables.extend(extract_tables(RawDocument(url, html)))
        except HarvestError as exc:
            log.warning("skipping %s: %s", f, exc)
    write_jsonl(tables, args.output)
    print(f"harvested {len(tables)} tables from {len(files)} documents -> {args.output}", file=sys.stderr)
    return 0


def cmd_index(args) -> int:
    try:
        tables = list(read_jsonl(args.corpus))
    except FileNotFoundError as exc:
        raise CliError(f"corpus not found: {args.corpus}") from exc
    try:
        index = Index(tables) if (args.allow_empty and not tables) else build_index(tables)
    except CorpusError as exc:
        raise CliError(str(exc)) from exc
    index.save(args.output)
    print(f"indexed {len(tables)} tables -> {args.output}", file=sys.stderr)
    return 0


# --- query ------------------------------------------------------------------------


def _query_columns(args) -> list[str]:
    cols = list(args.column or [])
    if args.columns:
        cols = parse_columns(args.columns) + cols
    if not cols:
        raise CliError("give --columns 'a|b|c' or at least one --column")
    try:
        return parse_columns(cols)
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def cmd_query(args) -> int:
    index = load_index(args.index)
    weights = load_weights(args.config, args.pmi2)
    columns = _query_columns(args)
    res = run_query(
        index, columns, weights, algo=args.algo, seed=args.seed, top_k=args.top_k, stage2=not args.no_stage2
    )
    labeling = labeling_to_json(args.query_id, res.labeling)
    labeling["meta"] = {
        "columns": columns,
        "algo": args.algo,
        "seed": args.seed,
        "top_k": args.top_k,
        "stage2": not args.no_stage2,
        "candidates": [t.id for t in res.tables],
        "weights": weights.to_json(),
    }
    timings = {name: round(res.timings.get(name, 0.0), 6) for name in ("probe", "read_parse", "column_map", "consolidate")}
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "answer.csv").write_text(res.answer.to_csv(), encoding="utf-8")
        (out / "answer.json").write_text(_dump(res.answer.to_json()), encoding="utf-8")
        (out / "labeling.json").write_text(_dump(labeling), encoding="utf-8")
        (out / "timings.json").write_text(_dump(timings), encoding="utf-8")
    else:
        sys.stdout.write(res.answer.to_csv())
    mapped = sum(1 for ls in res.labeling.values() if any(l != NR for l in ls))
    print(
        f"{len(res.tables)} candidate tables, {mapped} relevant, {len(res.answer.rows)} rows; "
        + ", ".join(f"{k} {v * 1000:.1f} ms" for k, v in timings.items()),
        file=sys.stderr,
    )
    return 0


# --- eval / tune --------------------------------------------------------------------


def _gold_by_query(path) -> dict:
    data = _read_json(path, "gold")
    if isinstance(data, dict):
        data = [data]
    try:
        return dict(labeling_from_json(d) for d in data)
    except (KeyError, ValueError, TypeError) as exc:
        raise CliError(f"malformed gold file {path}: {exc}") from exc


def eval_query(index: Index, columns, gold, weights, algo: str, *, seed: int = 0, candidates: str = "retrieved"):
    """F1 error of one query, or a string explaining why it could not be scored.

    With ``candidates="retrieved"`` the tables come from the probe; gold
    tables the probe missed count as predicted all-nr.
    """
    if candidates == "gold":
        missing = sorted(set(gold) - set(index.tables))
        if missing:
            return f"gold tables not in index: {', '.join(missing)}"
        tables = [index.tables[tid] for tid in sorted(gold)]
        y = infer(build_model(features_for(index, columns, tables, weights), weights), algo)
    else:
        res = run_query(index, columns, weights, algo=algo, seed=seed)
        uncovered = sorted(set(res.labeling) - set(gold))
        if uncovered:
            return f"gold misses candidate tables: {', '.join(uncovered)}"
        y = dict(res.labeling)
    for tid, labels in gold.items():
        y.setdefault(tid, (NR,) * len(labels))
    try:
        return f1_error(y, gold)
    except ValueError as exc:
        return str(exc)


def _bins(errors: Sequence[float], n: int) -> list[tuple[float, float, list[int]]]:
    edges = np.linspace(0.0, 1.0, n + 1)
    out = []
    for b in range(n):
        lo, hi = edges[b], edges[b + 1]
        members = [k for k, e in enumerate(errors) if lo <= e < hi or (b == n - 1 and e == hi)]
        out.append((float(lo), float(hi), members))
    return out


def cmd_eval(args) -> int:
    index = load_index(args.index)
    weights = load_weights(args.config, args.pmi2)
    queries = load_queries(args.queries)
    gold = _gold_by_query(args.gold)
    algos = args.algo or ["independent", "table-centric"]
    rows = []
    for q in queries:
        qid = q["query_id"]
        row = {"query_id": qid, "errors": {}, "flags": []}
        if qid not in gold:
            row["flags"].append("no gold labeling")
        else:
            for algo in algos:
                r = eval_query(index, q["columns"], gold[qid], weights, algo, seed=args.seed, candidates=args.candidates)
                if isinstance(r, str):
                    row["flags"].append(f"{algo}: {r}")
                else:
                    row["errors"][algo] = r
        rows.append(row)

    scored = [r for r in rows if len(r["errors"]) == len(algos)]
    means = {a: (float(np.mean([r["errors"][a] for r in scored])) if scored else None) for a in algos}
    report = {"algos": algos, "queries": rows, "mean": means, "scored": len(scored)}

    width = max([8] + [len(r["query_id"]) for r in rows])
    lines = ["query".ljust(width) + "".join(f"  {a:>16}" for a in algos)]
    for r in rows:
        cells = "".join(
            f"  {100 * r['errors'][a]:>15.1f}%" if a in r["errors"] else f"  {'--':>16}" for a in algos
        )
        flag = f"  [{'; '.join(r['flags'])}]" if r["flags"] else ""
        lines.append(r["query_id"].ljust(width) + cells + flag)
    lines.append(
        "mean".ljust(width)
        + "".join(f"  {100 * means[a]:>15.1f}%" if means[a] is not None else f"  {'--':>16}" for a in algos)
    )

    if args.bins and scored:
        base = args.baseline or algos[0]
        if base not in algos:
            raise CliError(f"baseline {base!r} is not among the evaluated algorithms")
        groups = []
        lines.append(f"\nbins by {base} error")
        for lo, hi, members in _bins([r["errors"][base] for r in scored], args.bins):
            if not members:
                continue
            g = {
                "low": lo,
                "high": hi,
                "count": len(members),
                "mean": {a: float(np.mean([scored[k]["errors"][a] for k in members])) for a in algos},
            }
            groups.append(g)
            lines.append(
                f"{100 * lo:5.1f}-{100 * hi:5.1f}% (n={len(members)})"
                + "".join(f"  {a} {100 * g['mean'][a]:.1f}%" for a in algos)
            )
        report["bins"] = {"baseline": base, "groups": groups}

    print("\n".join(lines))
    if args.out:
        Path(args.out).write_text(_dump(report), encoding="utf-8")
    return 0


def load_training(path, index: Index, weights: ModelWeights):
    """Feature sets for each training query, using its gold tables as candidates."""
    data = _read_json(path, "training")
    if isinstance(data, dict):
        data = [data]
    train = []
    for k, d in enumerate(data):
        try:
            columns = parse_columns(d["columns"])
            _, gold = labeling_from_json(d)
        except (KeyError, ValueError, TypeError) as exc:
            raise CliError(f"training query {k} in {path}: {exc}") from exc
        missing = sorted(set(gold) - set(index.tables))
        if missing:
            raise CliError(f"training query {k} names tables missing from the index: {', '.join(missing)}")
        tables = [index.tables[tid] for tid in sorted(gold)]
        train.append((features_for(index, columns, tables, weights), gold))
    return train


def cmd_tune(args) -> int:
    index = load_index(args.index)
    base = load_weights(args.config, args.pmi2)
    grid = _read_json(args.grid or DEFAULT_GRID, "grid")
    train = load_training(args.train, index, base)
    if not train:
        raise CliError("empty training set")
    try:
        results = search_grid(train, grid, args.algo, base)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    best, err = min(results, key=lambda r: (r[1], r[0].vector()))
    config = best.to_json()
    config["_meta"] = {"algo": args.algo, "train_error": err, "grid_points": len(results), "train_queries": len(train)}
    Path(args.output).write_text(_dump(config), encoding="utf-8")
    print(f"best mean F1 error {100 * err:.1f}% over {len(results)} grid points -> {args.output}", file=sys.stderr)
    return 0


# --- argument parsing -----------------------------------------------------------------


def _add_model_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help=f"weights JSON (default: ${CONFIG_ENV}, else built-in defaults)")
    p.add_argument("--pmi2", action="store_true", help="include the PMI^2 node feature")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tablequery", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("harvest", help="extract data tables from HTML files into a JSONL corpus")
    p.add_argument("inputs", nargs="+", help="HTML files or directories")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_harvest)

    p = sub.add_parser("index", help="build a searchable index from a JSONL corpus")
    p.add_argument("corpus")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--allow-empty", action="store_true", help="write an empty index instead of failing")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("query", help="answer a column-keyword query")
    p.add_argument("--index", required=True)
    p.add_argument("--columns", help="pipe-separated column keywords, e.g. 'name|nationality'")
    p.add_argument("--column", action="append", help="one column's keywords; repeatable")
    p.add_argument("--algo", choices=ALGORITHMS, default="table-centric")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--top-k", type=int, default=STAGE1_K)
    p.add_argument("--no-stage2", action="store_true")
    p.add_argument("--query-id", default="query")
    p.add_argument("--out", help="directory for answer.csv, answer.json, labeling.json, timings.json")
    _add_model_opts(p)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("eval", help="F1 error of one or more algorithms against gold labels")
    p.add_argument("--queries", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--index", required=True)
    p.add_argument("--algo", choices=ALGORITHMS, action="append")
    p.add_argument("--candidates", choices=("retrieved", "gold"), default="retrieved")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bins", type=int, default=0, help="group queries into this many baseline-error bins")
    p.add_argument("--baseline", choices=ALGORITHMS)
    p.add_argument("--out", help="write the report as JSON")
    _add_model_opts(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("tune", help="grid-search model weights on labeled queries")
    p.add_argument("--train", required=True, help="JSON list of {query_id, columns, labels}")
    p.add_argument("--grid", help="JSON object of weight name -> candidate values (default: bundled grid)")
    p.add_argument("--index", required=True)
    p.add_argument("--algo", choices=ALGORITHMS, default="table-centric")
    p.add_argument("-o", "--output", required=True)
    _add_model_opts(p)
    p.set_defaults(func=cmd_tune)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"tablequery {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
