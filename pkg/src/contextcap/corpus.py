"""News corpus ingestion, cleaning, splitting, and keyword-dataset construction.

A corpus pairs news articles with image caption records. Cleaning applies
three rules in a fixed order (missing image, caption length, duplicate
caption) and logs removal counts per rule. Splitting assigns records to
train/val/test buckets deterministically from a seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Mapping

from .util import normalize_text, read_jsonl, stable_hash, word_count, write_json, write_jsonl

# Keep captions whose whitespace word count lies in this closed interval.
MIN_CAPTION_WORDS = 5
MAX_CAPTION_WORDS = 31

CLEAN_RULES = ("no_image", "short", "long", "dup")


class Split(str, Enum):
    TRAIN = "train"
    VAL = "val"
    TEST = "test"
    UNASSIGNED = "unassigned"


class IngestError(ValueError):
    """Raised on malformed input records or broken references."""


@dataclass
class Article:
    article_id: str
    body: str
    source: str = ""
    gold_keywords: list[str] = field(default_factory=list)
    metadata: dict[str, Any] = field(default_factory=dict)


@dataclass
class ImageRef:
    image_id: str
    uri: str
    content_hash: str | None = None


@dataclass
class CaptionRecord:
    record_id: str
    image: ImageRef
    caption: str
    article_id: str
    split: Split = Split.UNASSIGNED


@dataclass
class KeywordInstance:
    article_id: str
    input_text: str
    target_keywords: list[str]


@dataclass
class Corpus:
    """Articles keyed by id plus caption records in input order.

    Treat instances as immutable: operations return new corpora and never
    mutate their input.
    """

    articles: dict[str, Article]
    records: list[CaptionRecord]
    provenance: dict[str, int] = field(default_factory=dict)

    def article_for(self, record: CaptionRecord) -> Article:
        return self.articles[record.article_id]


def _require(obj: Mapping[str, Any], key: str, kind: type) -> Any:
    if key not in obj:
        raise IngestError(f"missing field {key!r}")
    value = obj[key]
    if not isinstance(value, kind):
        raise IngestError(f"field {key!r} must be {kind.__name__}")
    return value


def parse_article(obj: Mapping[str, Any]) -> Article:
    article_id = _require(obj, "article_id", str)
    body = _require(obj, "body", str)
    if not body.strip():
        raise IngestError("field 'body' must be non-empty")
    keywords = obj.get("keywords") or []
    if not isinstance(keywords, list) or not all(isinstance(k, str) for k in keywords):
        raise IngestError("field 'keywords' must be a list of strings")
    metadata = obj.get("metadata") or {}
    if not isinstance(metadata, dict):
        raise IngestError("field 'metadata' must be an object")
    return Article(
        article_id=article_id,
        body=body,
        source=str(obj.get("source", "")),
        gold_keywords=list(keywords),
        metadata=dict(metadata),
    )


def parse_caption_record(obj: Mapping[str, Any]) -> CaptionRecord:
    record_id = _require(obj, "record_id", str)
    caption = _require(obj, "caption", str)
    article_id = _require(obj, "article_id", str)
    image = ImageRef(
        image_id=str(obj.get("image_id", "")),
        uri=str(obj.get("image_uri", "") or ""),
        content_hash=obj.get("image_hash"),
    )
    split = Split(obj["split"]) if "split" in obj else Split.UNASSIGNED
    return CaptionRecord(record_id=record_id, image=image, caption=caption,
                         article_id=article_id, split=split)


def ingest(articles: Iterable[Mapping[str, Any]], captions: Iterable[Mapping[str, Any]]) -> Corpus:
    """Build a raw corpus from parsed article and caption rows.

    Record order is preserved. Malformed rows raise IngestError naming the
    1-based row position; captions referencing unknown articles raise a
    single IngestError listing every offender.
    """
    article_map: dict[str, Article] = {}
    for pos, obj in enumerate(articles, 1):
        try:
            art = parse_article(obj)
        except IngestError as exc:
            raise IngestError(f"article row {pos}: {exc}") from None
        if art.article_id in article_map:
            raise IngestError(f"article row {pos}: duplicate article_id {art.article_id!r}")
        article_map[art.article_id] = art

    records: list[CaptionRecord] = []
    seen_ids: set[str] = set()
    dangling: list[str] = []
    for pos, obj in enumerate(captions, 1):
        try:
            rec = parse_caption_record(obj)
        except IngestError as exc:
            raise IngestError(f"caption row {pos}: {exc}") from None
        if rec.record_id in seen_ids:
            raise IngestError(f"caption row {pos}: duplicate record_id {rec.record_id!r}")
        seen_ids.add(rec.record_id)
        if rec.article_id not in article_map:
            dangling.append(rec.article_id)
        records.append(rec)
    if dangling:
        offenders = ", ".join(sorted(set(dangling)))
        raise IngestError(f"captions reference unknown articles: {offenders}")
    return Corpus(articles=article_map, records=records, provenance={})


def clean(corpus: Corpus) -> Corpus:
    """Drop unusable caption records and log removal counts per rule.

    Rules fire in order: records without an image uri, captions outside
    the [5, 31] word range, then duplicates of an earlier caption under
    normalization (first occurrence kept). Each removal is attributed to
    the first rule that fired. Idempotent: cleaning a clean corpus changes
    nothing, including the provenance counts.
    """
    removed = {rule: 0 for rule in CLEAN_RULES}
    kept: list[CaptionRecord] = []
    seen: set[str] = set()
    for rec in corpus.records:
        if not rec.image.uri:
            removed["no_image"] += 1
            continue
        n_words = word_count(rec.caption)
        if n_words < MIN_CAPTION_WORDS:
            removed["short"] += 1
            continue
        if n_words > MAX_CAPTION_WORDS:
            removed["long"] += 1
            continue
        key = normalize_text(rec.caption)
        if key in seen:
            removed["dup"] += 1
            continue
        seen.add(key)
        kept.append(rec)
    provenance = dict(corpus.provenance)
    for rule in CLEAN_RULES:
        provenance[rule] = provenance.get(rule, 0) + removed[rule]
    return Corpus(articles=dict(corpus.articles), records=kept, provenance=provenance)


def _largest_remainder(total: int, fractions: tuple[float, float, float]) -> list[int]:
    quotas = [total * f for f in fractions]
    counts = [math.floor(q) for q in quotas]
    remainder = total - sum(counts)
    # Hand leftover slots to the largest fractional parts; ties go to the
    # earlier bucket (train, val, test order).
    order = sorted(range(3), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order[:remainder]:
        counts[i] += 1
    return counts


def split(corpus: Corpus, fractions: tuple[float, float, float], seed: int) -> Corpus:
    """Assign records to train/val/test deterministically.

    Records are ranked by a stable hash of (seed, record_id) and buckets
    are filled to counts obtained by largest-remainder rounding of the
    fractions, so the assignment is independent of input order.
    """
    if len(fractions) != 3:
        raise ValueError("fractions must be a (train, val, test) triple")
    if any(f < 0 for f in fractions) or abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError("fractions must be non-negative and sum to 1")
    counts = _largest_remainder(len(corpus.records), fractions)
    ranked = sorted(corpus.records, key=lambda r: (stable_hash(seed, r.record_id), r.record_id))
    assignment: dict[str, Split] = {}
    cursor = 0
    for bucket, count in zip((Split.TRAIN, Split.VAL, Split.TEST), counts):
        for rec in ranked[cursor:cursor + count]:
            assignment[rec.record_id] = bucket
        cursor += count
    new_records = [replace(rec, split=assignment[rec.record_id]) for rec in corpus.records]
    return Corpus(articles=dict(corpus.articles), records=new_records,
                  provenance=dict(corpus.provenance))


def build_keyword_dataset(corpus: Corpus) -> tuple[list[KeywordInstance], dict[str, int]]:
    """One keyword instance per article that carries gold keywords.

    Articles are visited in article_id order; articles without keywords
    are skipped, and later articles whose normalized body duplicates an
    earlier one are dropped. Returns (instances, skip counts).
    """
    instances: list[KeywordInstance] = []
    skipped = {"no_keywords": 0, "dup_body": 0}
    seen_bodies: set[str] = set()
    for article_id in sorted(corpus.articles):
        art = corpus.articles[article_id]
        if not art.gold_keywords:
            skipped["no_keywords"] += 1
            continue
        key = normalize_text(art.body)
        if key in seen_bodies:
            skipped["dup_body"] += 1
            continue
        seen_bodies.add(key)
        instances.append(KeywordInstance(article_id=art.article_id, input_text=art.body,
                                         target_keywords=list(art.gold_keywords)))
    return instances, skipped


# --- file round trip -------------------------------------------------------
#
# A corpus directory holds articles.jsonl, records.jsonl, and
# provenance.json. The row schemas match the ingestion formats; records
# additionally carry their split assignment.

def article_to_row(art: Article) -> dict[str, Any]:
    return {
        "article_id": art.article_id,
        "body": art.body,
        "source": art.source,
        "keywords": list(art.gold_keywords),
        "metadata": dict(art.metadata),
    }


def record_to_row(rec: CaptionRecord) -> dict[str, Any]:
    return {
        "record_id": rec.record_id,
        "image_id": rec.image.image_id,
        "image_uri": rec.image.uri,
        "image_hash": rec.image.content_hash,
        "caption": rec.caption,
        "article_id": rec.article_id,
        "split": rec.split.value,
    }


def load_corpus(articles_path: str | Path, captions_path: str | Path) -> Corpus:
    """Ingest from article and caption JSONL files.

    Errors carry file and line positions.
    """
    try:
        articles = [obj for _, obj in read_jsonl(articles_path)]
        captions = [obj for _, obj in read_jsonl(captions_path)]
    except ValueError as exc:
        raise IngestError(str(exc)) from None
    return ingest(articles, captions)


def save_corpus(corpus: Corpus, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_jsonl(out / "articles.jsonl", (article_to_row(a) for a in corpus.articles.values()))
    write_jsonl(out / "records.jsonl", (record_to_row(r) for r in corpus.records))
    write_json(out / "provenance.json", corpus.provenance)


def load_corpus_dir(path: str | Path) -> Corpus:
    root = Path(path)
    corpus = load_corpus(root / "articles.jsonl", root / "records.jsonl")
    prov_path = root / "provenance.json"
    if prov_path.exists():
        import json

        corpus.provenance.update(json.loads(prov_path.read_text(encoding="utf-8")))
    return corpus
