"""Command-line pipeline driver.

Subcommands cover the full dataset flow: ingest raw article/caption
files, clean, split, tag entities, generate entailment instances, build
the keyword dataset, render instruction prompts, evaluate generated
captions or keywords, print dataset stats, serve the annotation API, and
export verified annotations.

Exit codes: 0 success, 1 runtime failure (reported as JSON on stderr),
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import multiprocessing
import sys
from fractions import Fraction
from pathlib import Path

from . import FORMAT_VERSION, __version__
from .corpus import (
    Corpus,
    IngestError,
    Split,
    build_keyword_dataset,
    clean,
    load_corpus,
    load_corpus_dir,
    save_corpus,
    split,
)
from .entities import GazetteerTagger, load_tags, write_tags
from .metrics import EvalPair, build_idf, evaluate, keyword_f_at_10_corpus
from .negatives import MixConfig, assemble, read_instances, write_instances
from .prompts import (
    TokenBudget,
    record_to_row,
    render_caption_prompt,
    render_entailment_prompt,
    render_keywords_prompt,
)
from .util import read_jsonl, write_json, write_jsonl


def _fail(kind: str, detail: str, **extra) -> int:
    payload = {"error": kind, "detail": detail}
    payload.update(extra)
    print(json.dumps(payload, ensure_ascii=False), file=sys.stderr)
    return 1


def _parse_fractions(text: str) -> tuple[float, float, float]:
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 3:
        raise ValueError("expected three comma-separated fractions")
    return (parts[0], parts[1], parts[2])


def _parse_ratio(text: str) -> Fraction:
    """Accept "1:2", "1/2", or a decimal; the value is positives per negative."""
    text = text.strip()
    if ":" in text:
        num, _, den = text.partition(":")
        return Fraction(int(num), int(den))
    return Fraction(text)


def _parse_weights(text: str) -> tuple[float, float, float]:
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 3:
        raise ValueError("expected three comma-separated weights")
    return (parts[0], parts[1], parts[2])


# --- subcommands -------------------------------------------------------------

def cmd_ingest(args) -> int:
    corpus = load_corpus(args.articles, args.captions)
    save_corpus(corpus, args.out)
    print(json.dumps({"articles": len(corpus.articles), "records": len(corpus.records)}))
    return 0


def cmd_clean(args) -> int:
    corpus = clean(load_corpus_dir(args.corpus))
    save_corpus(corpus, args.out)
    print(json.dumps({"records": len(corpus.records), "provenance": corpus.provenance},
                     sort_keys=True))
    return 0


def cmd_split(args) -> int:
    corpus = split(load_corpus_dir(args.corpus), _parse_fractions(args.fractions), args.seed)
    save_corpus(corpus, args.out)
    counts = {bucket.value: 0 for bucket in Split}
    for rec in corpus.records:
        counts[rec.split.value] += 1
    print(json.dumps(counts, sort_keys=True))
    return 0


_TAG_WORKER: GazetteerTagger | None = None


def _init_tag_worker(tagger: GazetteerTagger) -> None:
    global _TAG_WORKER
    _TAG_WORKER = tagger


def _tag_one(text: str):
    assert _TAG_WORKER is not None
    return _TAG_WORKER.tag(text)


def cmd_tag(args) -> int:
    corpus = load_corpus_dir(args.corpus)
    tagger = GazetteerTagger.from_file(args.gazetteer)
    if args.field == "captions":
        keyed = [(rec.record_id, rec.caption) for rec in corpus.records]
    else:
        keyed = [(aid, art.body) for aid, art in corpus.articles.items()]
    texts = [text for _, text in keyed]
    if args.jobs > 1 and len(texts) > 1:
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(args.jobs, initializer=_init_tag_worker, initargs=(tagger,)) as pool:
            results = pool.map(_tag_one, texts, chunksize=max(1, len(texts) // (args.jobs * 4)))
    else:
        results = [tagger.tag(text) for text in texts]
    tags = {key: ents for (key, _), ents in zip(keyed, results) if ents}
    count = write_tags(args.out, tags)
    print(json.dumps({"tagged": len(tags), "entities": count}))
    return 0


def cmd_gen_entailment(args) -> int:
    corpus = load_corpus_dir(args.corpus)
    captions = {rec.record_id: rec.caption for rec in corpus.records}
    tags, _stats = load_tags(args.tags, captions) if args.tags else ({}, {})
    config = MixConfig(
        seed=args.seed,
        ratio_pos_to_neg=_parse_ratio(args.ratio),
        class_weights=_parse_weights(args.weights),
        max_retries=args.max_retries,
    )
    instances, report = assemble(corpus, tags, config, jobs=args.jobs)
    write_instances(args.out, instances)
    if args.skip_report:
        write_json(args.skip_report, report)
    print(json.dumps({"instances": len(instances), "skips": report}, sort_keys=True))
    return 0


def cmd_build_keywords(args) -> int:
    corpus = load_corpus_dir(args.corpus)
    instances, skipped = build_keyword_dataset(corpus)
    write_jsonl(args.out, ({
        "article_id": inst.article_id,
        "input_text": inst.input_text,
        "target_keywords": inst.target_keywords,
    } for inst in instances))
    print(json.dumps({"instances": len(instances), "skipped": skipped}, sort_keys=True))
    return 0


def cmd_render(args) -> int:
    budget = TokenBudget(context_max=args.context_max, caption_max=args.caption_max,
                         entity_max=args.entity_max)
    fidelity = not args.normalized
    rows = []
    if args.task == "caption":
        corpus = load_corpus_dir(args.corpus)
        entity_tags = {}
        if args.tags:
            bodies = {aid: art.body for aid, art in corpus.articles.items()}
            entity_tags, _ = load_tags(args.tags, bodies)
        for rec in corpus.records:
            context = corpus.articles[rec.article_id].body
            entities = entity_tags.get(rec.article_id) or None
            record = render_caption_prompt(context, budget=budget, entities=entities,
                                           caption=rec.caption, fidelity=fidelity,
                                           instance_id=rec.record_id)
            rows.append(record_to_row(record))
    elif args.task == "entailment":
        for inst in read_instances(args.instances):
            record = render_entailment_prompt(inst.caption, inst.context,
                                              entails=inst.label.value == "entails",
                                              budget=budget, fidelity=fidelity,
                                              instance_id=inst.instance_id)
            rows.append(record_to_row(record))
    else:
        for _, row in read_jsonl(args.keywords):
            record = render_keywords_prompt(str(row["input_text"]),
                                            list(row["target_keywords"]),
                                            budget=budget, fidelity=fidelity,
                                            instance_id=str(row["article_id"]))
            rows.append(record_to_row(record))
    write_jsonl(args.out, rows)
    print(json.dumps({"rendered": len(rows)}))
    return 0


def _load_references(path: str) -> dict[str, list[str]]:
    root = Path(path)
    records_path = root / "records.jsonl" if root.is_dir() else root
    refs: dict[str, list[str]] = {}
    for _, row in read_jsonl(records_path):
        refs.setdefault(str(row["record_id"]), []).append(str(row["caption"]))
    return refs


def cmd_eval(args) -> int:
    if args.task == "captions":
        refs = _load_references(args.references)
        tagger = GazetteerTagger.from_file(args.gazetteer) if args.gazetteer else None
        pairs = []
        missing = 0
        for _, row in read_jsonl(args.generated):
            instance_id = str(row["instance_id"])
            candidate = str(row["caption"])
            if instance_id not in refs:
                missing += 1
                continue
            references = refs[instance_id]
            cand_ents = ref_ents = None
            if tagger is not None:
                cand_ents = [e.surface for e in tagger.tag(candidate)]
                ref_ents = [e.surface for e in tagger.tag(references[0])]
            pairs.append(EvalPair(instance_id, candidate, references,
                                  candidate_entities=cand_ents, reference_entities=ref_ents))
        if not pairs:
            return _fail("no_pairs", "no generated captions matched the references")
        report = evaluate(pairs, idf=build_idf(pairs))
        doc = report.to_json()
        doc["counts"]["unmatched_generated"] = missing
        write_json(args.out, doc)
        print(json.dumps(doc["corpus"], sort_keys=True))
    else:
        gold = {str(row["article_id"]): list(row["target_keywords"])
                for _, row in read_jsonl(args.gold)}
        instances = []
        missing = 0
        for _, row in read_jsonl(args.generated):
            key = str(row.get("instance_id", row.get("article_id", "")))
            if key not in gold:
                missing += 1
                continue
            instances.append((list(row["keywords"]), gold[key]))
        if not instances:
            return _fail("no_pairs", "no generated keyword rows matched the gold file")
        score, skipped = keyword_f_at_10_corpus(instances)
        doc = {
            "corpus": {"keyword_f_at_10": score},
            "counts": {"instances": len(instances), "skipped_empty_gold": skipped,
                       "unmatched_generated": missing},
        }
        write_json(args.out, doc)
        print(json.dumps(doc["corpus"], sort_keys=True))
    return 0


def cmd_stats(args) -> int:
    corpus = load_corpus_dir(args.corpus)
    split_of = {rec.record_id: rec.split for rec in corpus.records}
    buckets = (Split.TRAIN, Split.VAL, Split.TEST)

    def row_counts(items, key):
        counts = dict.fromkeys(buckets, 0)
        other = 0
        for item in items:
            bucket = key(item)
            if bucket in counts:
                counts[bucket] += 1
            else:
                other += 1
        return counts, other

    lines: list[tuple[str, dict, int]] = []
    caption_counts, caption_other = row_counts(corpus.records, lambda r: r.split)
    lines.append(("News Image Captioning", caption_counts, caption_other))
    if args.entailment:
        instances = read_instances(args.entailment)
        ent_counts, ent_other = row_counts(
            instances, lambda i: split_of.get(i.source_record_id, Split.UNASSIGNED))
        lines.append(("Contextual Visual Entailment", ent_counts, ent_other))
    if args.keywords:
        n_kw = sum(1 for _ in read_jsonl(args.keywords))
        lines.append(("Keyword Extraction", dict.fromkeys(buckets, 0), n_kw))

    name_width = max(len(name) for name, _, _ in lines)
    header = f"{'Dataset':<{name_width}}  {'Train':>9}  {'Val':>9}  {'Test':>9}  {'Other':>9}"
    print(header)
    print("-" * len(header))
    for name, counts, other in lines:
        print(f"{name:<{name_width}}  {counts[Split.TRAIN]:>9}  {counts[Split.VAL]:>9}  "
              f"{counts[Split.TEST]:>9}  {other:>9}")
    return 0


def cmd_serve(args) -> int:
    # Imported lazily so pipeline commands stay light.
    import uvicorn

    from .annotation import AnnotationStore
    from .api import create_app

    store = AnnotationStore(args.store, claim_timeout=args.claim_timeout)
    app = create_app(store, ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_export_annotations(args) -> int:
    from .annotation import AnnotationStore

    store = AnnotationStore(args.store, fsync=False)
    try:
        instances = store.export(pair_positives=args.pair_positives)
        write_instances(args.out, instances)
    finally:
        store.close()
    print(json.dumps({"instances": len(instances)}))
    return 0


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contextcap",
        description="Build and evaluate context-assisted captioning datasets.",
    )
    parser.add_argument("--version", action="version",
                        version=f"contextcap {__version__} (formats v{FORMAT_VERSION})")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("ingest", help="read article/caption files into a corpus directory")
    p.add_argument("--articles", required=True)
    p.add_argument("--captions", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("clean", help="apply the cleaning rules and log provenance")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("split", help="assign train/val/test deterministically")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--fractions", default="0.8,0.1,0.1")
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("tag", help="tag entities with a gazetteer")
    p.add_argument("--corpus", required=True)
    p.add_argument("--gazetteer", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--field", choices=("captions", "articles"), default="captions")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_tag)

    p = sub.add_parser("gen-entailment", help="emit positives plus synthetic negatives")
    p.add_argument("--corpus", required=True)
    p.add_argument("--tags", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--ratio", default="1:1", help="positives per negative, e.g. 1:1 or 1:2")
    p.add_argument("--weights", default="1,1,1", help="N1,N2,N3 class weights")
    p.add_argument("--max-retries", type=int, default=20)
    p.add_argument("--skip-report", default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_gen_entailment)

    p = sub.add_parser("build-keywords", help="one keyword instance per usable article")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_keywords)

    p = sub.add_parser("render", help="render instruction prompts")
    p.add_argument("--task", choices=("caption", "entailment", "keywords"), required=True)
    p.add_argument("--corpus", help="corpus directory (caption task)")
    p.add_argument("--instances", help="entailment instances file (entailment task)")
    p.add_argument("--keywords", help="keyword dataset file (keywords task)")
    p.add_argument("--tags", default=None, help="article entity tags for the entity-aware caption prompt")
    p.add_argument("--out", required=True)
    p.add_argument("--normalized", action="store_true", help="tidy template whitespace/casing")
    p.add_argument("--context-max", type=int, default=512)
    p.add_argument("--caption-max", type=int, default=30)
    p.add_argument("--entity-max", type=int, default=64)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("eval", help="score generated captions or keywords")
    p.add_argument("--task", choices=("captions", "keywords"), default="captions")
    p.add_argument("--generated", required=True)
    p.add_argument("--references", help="corpus directory or records file (captions task)")
    p.add_argument("--gold", help="keyword dataset file (keywords task)")
    p.add_argument("--gazetteer", default=None, help="enables entity precision/recall")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("stats", help="print dataset size table")
    p.add_argument("--corpus", required=True)
    p.add_argument("--entailment", default=None)
    p.add_argument("--keywords", default=None)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("serve", help="run the annotation HTTP service")
    p.add_argument("--port", type=int, required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--claim-timeout", type=float, default=30 * 60.0)
    p.add_argument("--ui-dir", default=None, help="serve a built UI from this directory")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("export-annotations", help="write verified annotations as entailment instances")
    p.add_argument("--store", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--pair-positives", action="store_true")
    p.set_defaults(func=cmd_export_annotations)

    return parser


def _validate_args(parser: argparse.ArgumentParser, args) -> None:
    if args.command == "render":
        needed = {"caption": "corpus", "entailment": "instances", "keywords": "keywords"}
        attr = needed[args.task]
        if getattr(args, attr) is None:
            parser.error(f"render --task {args.task} requires --{attr}")
    if args.command == "eval":
        if args.task == "captions" and not args.references:
            parser.error("eval --task captions requires --references")
        if args.task == "keywords" and not args.gold:
            parser.error("eval --task keywords requires --gold")
    if getattr(args, "jobs", 1) < 1:
        parser.error("--jobs must be at least 1")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    _validate_args(parser, args)
    try:
        return args.func(args)
    except OSError as exc:
        return _fail("io", str(exc), path=str(exc.filename or ""))
    except IngestError as exc:
        return _fail("ingest", str(exc))
    except (ValueError, KeyError) as exc:
        return _fail("invalid_input", str(exc))


if __name__ == "__main__":
    sys.exit(main())
