"""Command-line front end.

Every subcommand writes a ``manifest.json`` echoing its fully resolved
configuration, so any artifact can be rebuilt from its manifest alone
(``manifest_to_argv``).  Reruns with identical flags produce byte-identical
files, independent of ``--jobs``.

Exit codes: 0 success, 2 configuration error, 3 I/O or input-format error,
4 empty output, 5 prediction/reference alignment mismatch.
"""

from __future__ import annotations

import argparse
import re
import sys
from pathlib import Path

from . import __version__, builder, corpus, inventory, jsonl, metrics, splits

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_EMPTY = 4
EXIT_ALIGNMENT = 5

_METRIC_RE = re.compile(r"^(bleu|rouge(?:[1-9]|L)|distinct[1-9]|bs|overlap)$")


class ConfigError(Exception):
    pass


class EmptyOutputError(Exception):
    pass


def _write_manifest(outdir: Path, command: str, args: dict, counts: dict) -> None:
    jsonl.write_json(
        outdir / "manifest.json",
        {
            "tool": "defmod",
            "version": __version__,
            "command": command,
            "args": args,
            "prng": builder.PRNG_NAME,
            "counts": counts,
        },
    )


def manifest_to_argv(manifest: dict, output_dir: str | None = None) -> list[str]:
    """Rebuild the argv that reproduces a manifest's artifacts."""
    argv = [manifest["command"]]
    for key, value in sorted(manifest["args"].items()):
        if value is None or value is False:
            continue
        flag = "--" + key.replace("_", "-")
        if value is True:
            argv.append(flag)
        elif isinstance(value, list):
            argv.append(flag)
            argv.extend(str(v) for v in value)
        else:
            argv.extend([flag, str(value)])
    if output_dir is not None:
        argv.extend(["-o", output_dir])
    return argv


def _outdir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _check_flags(args) -> None:
    limits = {
        "k": 0,
        "d": 1,
        "min_count": 1,
        "token_budget": builder.MIN_TOKEN_BUDGET,
        "jobs": 1,
        "bleu_max_n": 1,
    }
    for name, lo in limits.items():
        value = getattr(args, name, None)
        if value is not None and value < lo:
            raise ConfigError(f"--{name.replace('_', '-')} must be >= {lo}, got {value}")


def _load_sdm(path: str, validate: bool = True) -> list[builder.SdmEntry]:
    rows = jsonl.read_jsonl(path)
    entries = []
    for lineno, row in enumerate(rows, start=1):
        try:
            entries.append(builder.sdm_from_json(row, validate=validate))
        except (KeyError, ValueError) as exc:
            raise ValueError(f"{path}: line {lineno}: {exc}") from exc
    return entries


def _load_mdm(path: str) -> list[builder.MdmEntry]:
    rows = jsonl.read_jsonl(path)
    entries = []
    for lineno, row in enumerate(rows, start=1):
        try:
            entries.append(builder.mdm_from_json(row))
        except (KeyError, ValueError) as exc:
            raise ValueError(f"{path}: line {lineno}: {exc}") from exc
    return entries


def _load_inventory_arg(args) -> inventory.SenseInventory:
    drop = (
        inventory.load_drop_list(args.drop_list)
        if getattr(args, "drop_list", None)
        else frozenset()
    )
    return inventory.load_inventory(
        args.inventory, format=args.inventory_format, drop_words=drop
    )


def _write_model_file(
    path: Path, entries: list[builder.MdmEntry], inv: inventory.SenseInventory | None
) -> None:
    jsonl.write_jsonl(
        path,
        (builder.example_to_json(builder.format_example(e, inv)) for e in entries),
    )


# --- subcommands ----------------------------------------------------------

def cmd_build_index(args) -> int:
    documents = corpus.read_documents(args.corpus, doc_mode=args.doc_mode)
    index = corpus.build_index(documents, min_count=args.min_count, jobs=args.jobs)
    out = _outdir(args.output)
    corpus.save_index(index, out / "index.json")
    _write_manifest(
        out,
        "build-index",
        {
            "corpus": [str(p) for p in args.corpus],
            "doc_mode": args.doc_mode,
            "min_count": args.min_count,
            "jobs": args.jobs,
        },
        {
            "documents": len(documents),
            "sentences": len(index.sentences),
            "indexed_words": len(index.postings),
        },
    )
    print(f"indexed {len(index.sentences)} sentences, {len(index.postings)} words")
    return EXIT_OK


def cmd_build_wordwiki(args) -> int:
    if args.index and args.corpus:
        raise ConfigError("give either --corpus or --index, not both")
    if not args.index and not args.corpus:
        raise ConfigError("one of --corpus or --index is required")
    inv = _load_inventory_arg(args)
    if args.index:
        index = corpus.load_index(args.index)
    else:
        documents = corpus.read_documents(args.corpus, doc_mode=args.doc_mode)
        index = corpus.build_index(documents, min_count=args.min_count, jobs=args.jobs)
    entries = builder.build_wordwiki(
        index,
        inv,
        k=args.k,
        token_budget=args.token_budget,
        seed=args.seed,
        jobs=args.jobs,
    )
    if not entries:
        print("warning: corpus and inventory share no words", file=sys.stderr)
        raise EmptyOutputError("no entries built")
    out = _outdir(args.output)
    jsonl.write_jsonl(out / "mdm.jsonl", (builder.mdm_to_json(e) for e in entries))
    _write_model_file(out / "model.jsonl", entries, inv)
    built_words = {e.word for e in entries}
    _write_manifest(
        out,
        "build-wordwiki",
        {
            "corpus": [str(p) for p in args.corpus] if args.corpus else None,
            "index": args.index,
            "doc_mode": args.doc_mode,
            "inventory": args.inventory,
            "inventory_format": args.inventory_format,
            "drop_list": args.drop_list,
            "k": args.k,
            "token_budget": args.token_budget,
            "min_count": args.min_count,
            "seed": args.seed,
            "jobs": args.jobs,
        },
        {
            "entries": len(entries),
            "inventory_words": len(inv),
            "corpus_words": len(index.postings),
            "skipped_absent_from_corpus": len(inv) - len(built_words),
        },
    )
    print(f"built {len(entries)} entries -> {out / 'mdm.jsonl'}")
    return EXIT_OK


def cmd_build_easy(args) -> int:
    sdm = _load_sdm(args.sdm, validate=not args.no_validate)
    entries = builder.build_mdm_easy(sdm)
    if not entries:
        raise EmptyOutputError("no entries built")
    inv = _load_inventory_arg(args) if args.inventory else None
    out = _outdir(args.output)
    jsonl.write_jsonl(out / "easy.jsonl", (builder.mdm_to_json(e) for e in entries))
    _write_model_file(out / "model.jsonl", entries, inv)
    _write_manifest(
        out,
        "build-easy",
        {
            "sdm": args.sdm,
            "inventory": args.inventory,
            "inventory_format": args.inventory_format,
            "no_validate": args.no_validate,
            "jobs": args.jobs,
        },
        {"entries": len(entries), "sdm_rows": len(sdm)},
    )
    print(f"grouped {len(sdm)} rows into {len(entries)} entries")
    return EXIT_OK


def cmd_ungroup(args) -> int:
    mdm = _load_mdm(args.mdm)
    sdm = splits.ungroup(mdm)
    if not sdm:
        raise EmptyOutputError("no rows produced")
    out = _outdir(args.output)
    jsonl.write_jsonl(out / "sdm.jsonl", (builder.sdm_to_json(e) for e in sdm))
    _write_manifest(
        out,
        "ungroup",
        {"mdm": args.mdm, "jobs": args.jobs},
        {"entries": len(mdm), "sdm_rows": len(sdm)},
    )
    print(f"ungrouped {len(mdm)} entries into {len(sdm)} rows")
    return EXIT_OK


def cmd_build_del(args) -> int:
    sdm = _load_sdm(args.sdm, validate=not args.no_validate)
    split = splits.build_del(sdm, d=args.d, seed=args.seed)
    if not split.test:
        print(f"warning: no word has more than {args.d} senses; test set is empty",
              file=sys.stderr)
    out = _outdir(args.output)
    jsonl.write_jsonl(out / "train.jsonl", (builder.sdm_to_json(e) for e in split.train))
    jsonl.write_jsonl(out / "test.jsonl", (builder.sdm_to_json(e) for e in split.test))
    _write_manifest(
        out,
        "build-del",
        {
            "sdm": args.sdm,
            "d": args.d,
            "seed": args.seed,
            "no_validate": args.no_validate,
            "jobs": args.jobs,
        },
        {
            "train_rows": len(split.train),
            "test_rows": len(split.test),
            "test_words": len(split.held_out),
            "held_out": {w: list(v) for w, v in sorted(split.held_out.items())},
        },
    )
    print(f"train {len(split.train)} rows / test {len(split.test)} rows "
          f"({len(split.held_out)} words)")
    return EXIT_OK


def cmd_group_preds(args) -> int:
    mdm = _load_mdm(args.ref)
    rows = jsonl.read_jsonl(args.preds)
    preds = []
    for lineno, row in enumerate(rows, start=1):
        try:
            preds.append((row["word"], int(row["context_index"]), row["prediction"]))
        except (KeyError, ValueError) as exc:
            raise ValueError(f"{args.preds}: line {lineno}: {exc}") from exc
    grouped = splits.group_predictions(preds, mdm)
    refs = splits.group_references(mdm)
    out = _outdir(args.output)
    jsonl.write_jsonl(
        out / "grouped_preds.jsonl",
        ({"word": w, "prediction": p} for w, p in grouped),
    )
    jsonl.write_jsonl(
        out / "grouped_refs.jsonl",
        ({"word": w, "reference": r} for w, r in refs),
    )
    _write_manifest(
        out,
        "group-preds",
        {"preds": args.preds, "ref": args.ref, "jobs": args.jobs},
        {"words": len(grouped), "predictions": len(preds)},
    )
    print(f"grouped {len(preds)} predictions into {len(grouped)} words")
    return EXIT_OK


def cmd_to_model(args) -> int:
    if bool(args.sdm) == bool(args.mdm):
        raise ConfigError("give exactly one of --sdm or --mdm")
    inv = _load_inventory_arg(args) if args.inventory else None
    if args.sdm:
        sdm = _load_sdm(args.sdm, validate=not args.no_validate)
        entries = [
            builder.MdmEntry(e.word, (e.context,), (e.definition,), aligned=True)
            for e in sdm
        ]
        source = args.sdm
    else:
        entries = _load_mdm(args.mdm)
        source = args.mdm
    if not entries:
        raise EmptyOutputError("no examples produced")
    out = _outdir(args.output)
    _write_model_file(out / "model.jsonl", entries, inv)
    _write_manifest(
        out,
        "to-model",
        {
            "sdm": args.sdm,
            "mdm": args.mdm,
            "inventory": args.inventory,
            "inventory_format": args.inventory_format,
            "no_validate": args.no_validate,
            "jobs": args.jobs,
        },
        {"examples": len(entries)},
    )
    print(f"formatted {len(entries)} examples from {source}")
    return EXIT_OK


# --- eval -----------------------------------------------------------------

def _read_eval_file(path: str, fields: tuple[str, ...]) -> list[tuple[object, str]]:
    """Rows as (id, text); id is the 'word' value when every row has one,
    else the 0-based line index."""
    rows = jsonl.read_jsonl(path)
    out = []
    keyed = len(rows) > 0 and all("word" in r for r in rows)
    for i, row in enumerate(rows):
        text = None
        for f in fields:
            if f in row:
                text = str(row[f])
                break
        if text is None:
            raise ValueError(
                f"{path}: line {i + 1}: none of the fields {fields} present"
            )
        out.append((row["word"] if keyed else i, text))
    return out


def _align(
    preds: list[tuple[object, str]], refs: list[tuple[object, str]]
) -> list[tuple[object, str, str]]:
    pred_keyed = all(isinstance(k, str) for k, _ in preds)
    ref_keyed = all(isinstance(k, str) for k, _ in refs)
    if pred_keyed and ref_keyed:
        pmap: dict[object, str] = {}
        rmap: dict[object, str] = {}
        dupes = []
        for k, v in preds:
            if k in pmap:
                dupes.append(f"duplicate prediction word {k!r}")
            pmap[k] = v
        for k, v in refs:
            if k in rmap:
                dupes.append(f"duplicate reference word {k!r}")
            rmap[k] = v
        missing = sorted(set(rmap) - set(pmap))
        extra = sorted(set(pmap) - set(rmap))
        problems = dupes + [f"no prediction for {k!r}" for k in missing] + [
            f"no reference for {k!r}" for k in extra
        ]
        if problems:
            raise splits.AlignmentError(
                "alignment mismatch: " + "; ".join(problems), problems
            )
        return [(k, pmap[k], rmap[k]) for k in sorted(pmap)]
    if len(preds) != len(refs):
        raise splits.AlignmentError(
            f"line-aligned files differ in length: {len(preds)} predictions "
            f"vs {len(refs)} references",
            [],
        )
    return [(pk, pv, rv) for (pk, pv), (_, rv) in zip(preds, refs)]


def _summary_line(name: str, score: float) -> str:
    return f"{name:<16} {score:8.2f}"


def cmd_eval(args) -> int:
    if args.stats:
        stats = metrics.dataset_stats(_load_mdm(args.stats))
        print(f"{'entries':<22} {stats['entries']}")
        for key in ("mean_context_tokens", "mean_contexts", "mean_definitions"):
            print(f"{key:<22} {stats[key]:.2f}")
        if args.output:
            out = _outdir(args.output)
            jsonl.write_json(out / "report_stats.json", {"metric": "stats", **stats})
            _write_manifest(out, "eval", {"stats": args.stats}, {})
        return EXIT_OK

    if not args.preds or not args.refs:
        raise ConfigError("eval needs --preds and --refs (or --stats)")
    names = [m.strip() for m in args.metrics.split(",") if m.strip()]
    if not names:
        raise ConfigError("no metrics requested")
    for name in names:
        if not _METRIC_RE.match(name):
            raise ConfigError(f"unknown metric {name!r}")
    table = None
    if any(n == "bs" for n in names):
        if not args.embeddings:
            raise ConfigError("metric 'bs' requires --embeddings")
        table = metrics.load_embeddings(args.embeddings)

    preds = _read_eval_file(args.preds, ("prediction",))
    refs = _read_eval_file(args.refs, ("reference", "target", "definition"))
    aligned = _align(preds, refs)
    ids = [k for k, _, _ in aligned]
    pairs = [(p, r) for _, p, r in aligned]

    reports: list[metrics.MetricReport] = []
    for name in names:
        if name == "bleu":
            reports.append(
                metrics.bleu(pairs, max_n=args.bleu_max_n, variant=args.bleu_variant,
                             ids=ids)
            )
        elif name.startswith("rouge"):
            order = name[len("rouge"):]
            if order == "L":
                reports.append(metrics.rouge_l(pairs, ids=ids))
            else:
                reports.append(metrics.rouge_n(pairs, n=int(order), ids=ids))
        elif name.startswith("distinct"):
            n = int(name[len("distinct"):])
            groups = [p.split(builder.SEP_JOIN) for _, p, _ in aligned]
            result = metrics.distinct_n(groups, n)
            reports.append(
                metrics.MetricReport(
                    name=name,
                    corpus_score=result.intra,
                    per_entry=list(zip(ids, result.per_entry_inter)),
                    config={"n": n, "corpus_score_is": "intra",
                            "per_entry_is": "inter"},
                    details={"intra": result.intra, "inter": result.inter},
                )
            )
        elif name == "bs":
            reports.append(metrics.greedy_match_score(pairs, table, ids=ids))
        elif name == "overlap":
            if not all(isinstance(k, str) for k in ids):
                raise ConfigError("metric 'overlap' needs word-keyed files")
            entries = [(k, p.split(builder.SEP_JOIN)) for k, p, _ in aligned]
            flags = metrics.overlap_flags(entries)
            rate = metrics.overlap_rate(entries)
            reports.append(
                metrics.MetricReport(
                    name="overlap",
                    corpus_score=rate,
                    per_entry=[],
                    config={},
                    details={"definitions": len(flags),
                             "overlapping": int(sum(flags))},
                )
            )

    print(f"{'metric':<16} {'score':>8}")
    for rep in reports:
        if rep.name.startswith("distinct"):
            print(_summary_line(f"{rep.name}-intra", rep.details["intra"]))
            print(_summary_line(f"{rep.name}-inter", rep.details["inter"]))
        else:
            print(_summary_line(rep.name, rep.corpus_score))
    if args.output:
        out = _outdir(args.output)
        for rep in reports:
            jsonl.write_json(out / f"report_{rep.name}.json", rep.to_json())
        _write_manifest(
            out,
            "eval",
            {
                "preds": args.preds,
                "refs": args.refs,
                "metrics": args.metrics,
                "embeddings": args.embeddings,
                "bleu_variant": args.bleu_variant,
                "bleu_max_n": args.bleu_max_n,
            },
            {"pairs": len(pairs)},
        )
    return EXIT_OK


# --- parser ---------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser, output_required: bool = True) -> None:
    p.add_argument("-o", "--output", required=output_required, help="output directory")
    p.add_argument("--jobs", type=int, default=1, help="worker count (default 1)")


def _add_inventory_flags(p: argparse.ArgumentParser, required: bool) -> None:
    p.add_argument("--inventory", required=required, help="sense inventory file")
    p.add_argument("--inventory-format", choices=("tsv", "jsonl"), default=None,
                   help="inventory format (default: infer from extension)")
    p.add_argument("--drop-list", default=None,
                   help="file of words to drop from the inventory, one per line")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="defmod",
        description="Build and evaluate multi-definition generation datasets.",
    )
    parser.add_argument("--version", action="version", version=f"defmod {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-index", help="tokenize a corpus into a word index")
    p.add_argument("--corpus", nargs="+", required=True,
                   help="text files or directories of *.txt")
    p.add_argument("--doc-mode", choices=("file", "block"), default="file",
                   help="one document per file, or per blank-line block")
    p.add_argument("--min-count", type=int, default=corpus.DEFAULT_MIN_COUNT,
                   help="drop words rarer than this (default %(default)s)")
    _add_common(p)
    p.set_defaults(func=cmd_build_index)

    p = sub.add_parser("build-wordwiki",
                       help="build an unaligned dataset from corpus + inventory")
    p.add_argument("--corpus", nargs="+", default=None)
    p.add_argument("--index", default=None, help="prebuilt index.json")
    p.add_argument("--doc-mode", choices=("file", "block"), default="file")
    _add_inventory_flags(p, required=True)
    p.add_argument("--k", type=int, default=0,
                   help="extra contexts beyond the definition count (default 0; "
                        "0/2/4 are the documented presets)")
    p.add_argument("--token-budget", type=int, default=builder.DEFAULT_TOKEN_BUDGET,
                   help="whitespace-token cap for joined contexts (default %(default)s)")
    p.add_argument("--min-count", type=int, default=corpus.DEFAULT_MIN_COUNT)
    p.add_argument("--seed", type=int, default=0)
    _add_common(p)
    p.set_defaults(func=cmd_build_wordwiki)

    p = sub.add_parser("build-easy",
                       help="group aligned single-definition rows, one entry per word")
    p.add_argument("--sdm", required=True, help="single-definition JSON-Lines file")
    _add_inventory_flags(p, required=False)
    p.add_argument("--no-validate", action="store_true",
                   help="skip the context-contains-word check")
    _add_common(p)
    p.set_defaults(func=cmd_build_easy)

    p = sub.add_parser("ungroup",
                       help="flatten aligned entries back to single-definition rows")
    p.add_argument("--mdm", required=True, help="grouped-entry JSON-Lines file")
    _add_common(p)
    p.set_defaults(func=cmd_ungroup)

    p = sub.add_parser("build-del", help="hold out senses per word for novel-sense tests")
    p.add_argument("--sdm", required=True)
    p.add_argument("--d", type=int, required=True, help="senses held out per word")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-validate", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_build_del)

    p = sub.add_parser("group-preds",
                       help="concatenate per-context predictions per word")
    p.add_argument("--preds", required=True,
                   help="JSON-Lines with word, context_index, prediction")
    p.add_argument("--ref", required=True,
                   help="grouped dataset file giving each word's context order")
    _add_common(p)
    p.set_defaults(func=cmd_group_preds)

    p = sub.add_parser("to-model", help="format a dataset into source/target lines")
    p.add_argument("--sdm", default=None, help="single-definition JSON-Lines file")
    p.add_argument("--mdm", default=None, help="grouped-entry JSON-Lines file")
    _add_inventory_flags(p, required=False)
    p.add_argument("--no-validate", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_to_model)

    p = sub.add_parser("eval", help="score predictions against references")
    p.add_argument("--preds", default=None)
    p.add_argument("--refs", default=None)
    p.add_argument("--metrics", default="bleu,rouge1,rouge2,rougeL",
                   help="comma list: bleu, rouge1, rouge2, rougeL, distinct2, bs, overlap")
    p.add_argument("--embeddings", default=None, help="TSV table for metric 'bs'")
    p.add_argument("--bleu-variant", choices=("corpus", "sentence_avg"),
                   default="corpus")
    p.add_argument("--bleu-max-n", type=int, default=4)
    p.add_argument("--stats", default=None,
                   help="report dataset statistics for a grouped dataset file instead")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_eval)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _check_flags(args)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except splits.AlignmentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ALIGNMENT
    except EmptyOutputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except (OSError, ValueError, inventory.InventoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
