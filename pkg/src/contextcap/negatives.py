"""Synthetic negatives for contextual visual entailment.

Three strategies produce captions that no longer entail their image and
article context:

- N1 pairs the image/context with a random different caption.
- N2 keeps the caption frame and swaps every entity for same-typed
  entities from one donor caption.
- N3 keeps the source entities and re-homes them into a donor caption
  with the exact same entity-type signature.

All generation is driven by per-record random streams derived from
(seed, record_id), so results do not depend on processing order.
"""

from __future__ import annotations

import multiprocessing
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import floor
from pathlib import Path
from random import Random
from typing import Any, Iterable, Mapping, Sequence

from .corpus import CaptionRecord, Corpus, ImageRef, Split
from .entities import Entity, Signature, signature_of
from .util import normalize_text, read_jsonl, record_rng, write_jsonl


class Label(str, Enum):
    ENTAILS = "entails"
    NOT_ENTAILS = "not_entails"


class NegClass(str, Enum):
    P = "P"
    N1 = "N1"
    N2 = "N2"
    N3 = "N3"
    MANUAL = "Manual"


SKIP_REASONS = ("no_entities", "no_match", "retries_exhausted")


@dataclass
class EntailmentInstance:
    instance_id: str
    image: ImageRef
    caption: str
    context: str
    label: Label
    neg_class: NegClass
    source_record_id: str
    donor_record_id: str | None = None


class GenerationSkipped(Exception):
    """A negative could not be generated for this record.

    reason is one of "no_entities", "no_match", "retries_exhausted".
    """

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass
class MixConfig:
    """Assembly knobs: positive-to-negative ratio and class mix.

    ratio_pos_to_neg is the number of positives per negative, so 1:2 is
    Fraction(1, 2). class_weights orders (N1, N2, N3).
    """

    seed: int
    ratio_pos_to_neg: Fraction = Fraction(1)
    class_weights: tuple[float, float, float] = (1.0, 1.0, 1.0)
    max_retries: int = 20

    def __post_init__(self):
        self.ratio_pos_to_neg = Fraction(self.ratio_pos_to_neg)
        if self.ratio_pos_to_neg <= 0:
            raise ValueError("ratio_pos_to_neg must be positive")
        if len(self.class_weights) != 3 or any(w < 0 for w in self.class_weights):
            raise ValueError("class_weights must be three non-negative numbers")
        if not any(self.class_weights):
            raise ValueError("class_weights must not all be zero")
        if self.max_retries < 1:
            raise ValueError("max_retries must be at least 1")


def replace_spans(text: str, entities: Sequence[Entity], replacements: Sequence[str]) -> str:
    """Substitute replacement surfaces at the given spans, left to right.

    Characters outside the spans are preserved verbatim; offsets shift
    with the replacement lengths.
    """
    parts: list[str] = []
    cursor = 0
    for ent, rep in zip(entities, replacements):
        parts.append(text[cursor:ent.start])
        parts.append(rep)
        cursor = ent.end
    parts.append(text[cursor:])
    return "".join(parts)


def _positive(record: CaptionRecord, context: str) -> EntailmentInstance:
    return EntailmentInstance(
        instance_id=f"{record.record_id}#P",
        image=record.image,
        caption=record.caption,
        context=context,
        label=Label.ENTAILS,
        neg_class=NegClass.P,
        source_record_id=record.record_id,
    )


def gen_n1(
    record: CaptionRecord,
    context: str,
    pool: Sequence[CaptionRecord],
    rng: Random,
    instance_id: str | None = None,
) -> EntailmentInstance:
    """Random-caption negative: a donor caption that differs from the
    source under normalization, drawn uniformly from the pool."""
    source_key = normalize_text(record.caption)
    eligible = [r for r in pool if normalize_text(r.caption) != source_key]
    if not eligible:
        raise GenerationSkipped("no_match")
    donor = eligible[rng.randrange(len(eligible))]
    return EntailmentInstance(
        instance_id=instance_id or f"{record.record_id}#N1",
        image=record.image,
        caption=donor.caption,
        context=context,
        label=Label.NOT_ENTAILS,
        neg_class=NegClass.N1,
        source_record_id=record.record_id,
        donor_record_id=donor.record_id,
    )


def gen_n2(
    record: CaptionRecord,
    context: str,
    entities: Sequence[Entity],
    pool: Sequence[tuple[CaptionRecord, Sequence[Entity]]],
    rng: Random,
    max_retries: int = 20,
    instance_id: str | None = None,
) -> EntailmentInstance:
    """Entity-swap negative: one donor supplies a same-typed replacement
    for every source entity, consumed in the donor's left-to-right order.

    At least one replacement must differ (case-insensitive) from the
    surface it replaces. Donors are redrawn up to max_retries times.
    """
    if not entities:
        raise GenerationSkipped("no_entities")
    needed = Counter(e.etype for e in entities)
    candidates = [(rec, ents) for rec, ents in pool if rec.record_id != record.record_id]
    if not candidates:
        raise GenerationSkipped("no_match")
    source_key = normalize_text(record.caption)
    for _ in range(max_retries):
        donor, donor_entities = candidates[rng.randrange(len(candidates))]
        supply: dict[Any, list[str]] = {}
        for ent in donor_entities:
            supply.setdefault(ent.etype, []).append(ent.surface)
        if any(len(supply.get(etype, ())) < count for etype, count in needed.items()):
            continue
        cursors = {etype: 0 for etype in needed}
        replacements: list[str] = []
        for ent in entities:
            replacements.append(supply[ent.etype][cursors[ent.etype]])
            cursors[ent.etype] += 1
        if all(normalize_text(rep) == normalize_text(ent.surface)
               for rep, ent in zip(replacements, entities)):
            continue
        caption = replace_spans(record.caption, entities, replacements)
        if normalize_text(caption) == source_key:
            continue
        return EntailmentInstance(
            instance_id=instance_id or f"{record.record_id}#N2",
            image=record.image,
            caption=caption,
            context=context,
            label=Label.NOT_ENTAILS,
            neg_class=NegClass.N2,
            source_record_id=record.record_id,
            donor_record_id=donor.record_id,
        )
    raise GenerationSkipped("retries_exhausted")


def gen_n3(
    record: CaptionRecord,
    context: str,
    entities: Sequence[Entity],
    sig_index: Mapping[Signature, Sequence[str]],
    tagged_pool: Mapping[str, tuple[CaptionRecord, Sequence[Entity]]],
    rng: Random,
    max_retries: int = 20,
    instance_id: str | None = None,
) -> EntailmentInstance:
    """Content-swap negative: the source entities are planted into a donor
    caption whose entity-type signature matches exactly.

    Donor entities are replaced left to right, each taking the next unused
    source surface of its type, so the output conserves the source entity
    multiset while everything around it changes.
    """
    if not entities:
        raise GenerationSkipped("no_entities")
    sig = signature_of(entities)
    candidates = [rid for rid in sig_index.get(sig, ())
                  if rid != record.record_id and rid in tagged_pool]
    if not candidates:
        raise GenerationSkipped("no_match")
    source_by_type: dict[Any, list[str]] = {}
    for ent in entities:
        source_by_type.setdefault(ent.etype, []).append(ent.surface)
    source_key = normalize_text(record.caption)
    for _ in range(max_retries):
        donor_id = candidates[rng.randrange(len(candidates))]
        donor, donor_entities = tagged_pool[donor_id]
        cursors = {etype: 0 for etype in source_by_type}
        replacements: list[str] = []
        for ent in donor_entities:
            replacements.append(source_by_type[ent.etype][cursors[ent.etype]])
            cursors[ent.etype] += 1
        caption = replace_spans(donor.caption, donor_entities, replacements)
        if normalize_text(caption) == source_key:
            continue
        return EntailmentInstance(
            instance_id=instance_id or f"{record.record_id}#N3",
            image=record.image,
            caption=caption,
            context=context,
            label=Label.NOT_ENTAILS,
            neg_class=NegClass.N3,
            source_record_id=record.record_id,
            donor_record_id=donor_id,
        )
    raise GenerationSkipped("retries_exhausted")


def _weighted_class(rng: Random, weights: Sequence[float]) -> int:
    total = sum(weights)
    draw = rng.random() * total
    acc = 0.0
    for idx, weight in enumerate(weights):
        acc += weight
        if draw < acc:
            return idx
    return len(weights) - 1


@dataclass
class _GenEnv:
    """Everything record-level generation needs, built once per assembly."""

    articles_body: dict[str, str]
    pool: list[CaptionRecord]
    tagged: dict[str, list[Entity]]
    n2_pool: list[tuple[CaptionRecord, list[Entity]]]
    sig_index: dict[Signature, list[str]]
    tagged_pool: dict[str, tuple[CaptionRecord, list[Entity]]]
    config: MixConfig


def _generate_for_record(env: _GenEnv, record: CaptionRecord) -> tuple[list[EntailmentInstance], list[tuple[str, str]]]:
    config = env.config
    rng = record_rng(config.seed, record.record_id)
    context = env.articles_body[record.article_id]
    instances = [_positive(record, context)]
    skips: list[tuple[str, str]] = []

    per_pos = Fraction(1) / config.ratio_pos_to_neg
    count = floor(per_pos)
    remainder = per_pos - count
    if remainder > 0 and rng.random() < float(remainder):
        count += 1

    entities = env.tagged.get(record.record_id, [])
    for idx in range(count):
        cls = _weighted_class(rng, config.class_weights)
        try:
            if cls == 0:
                inst = gen_n1(record, context, env.pool, rng,
                              instance_id=f"{record.record_id}#N1-{idx}")
            elif cls == 1:
                inst = gen_n2(record, context, entities, env.n2_pool, rng,
                              config.max_retries, instance_id=f"{record.record_id}#N2-{idx}")
            else:
                inst = gen_n3(record, context, entities, env.sig_index, env.tagged_pool,
                              rng, config.max_retries, instance_id=f"{record.record_id}#N3-{idx}")
        except GenerationSkipped as skip:
            skips.append((NegClass(("N1", "N2", "N3")[cls]).value, skip.reason))
            continue
        instances.append(inst)
    return instances, skips


_WORKER_ENV: _GenEnv | None = None


def _init_worker(env: _GenEnv) -> None:
    global _WORKER_ENV
    _WORKER_ENV = env


def _worker_generate(record: CaptionRecord):
    assert _WORKER_ENV is not None
    return _generate_for_record(_WORKER_ENV, record)


def assemble(
    corpus: Corpus,
    tagged: Mapping[str, Sequence[Entity]],
    config: MixConfig,
    jobs: int = 1,
) -> tuple[list[EntailmentInstance], dict[str, dict[str, int]]]:
    """Emit one positive plus configured negatives per training record.

    Records in the train split drive generation; when the corpus carries
    no split assignment at all, every record does. Donors are drawn from
    the same record set. Returns (instances, skip report); the report
    counts skips per negative class and reason. Output is a pure function
    of (corpus, tagged, config) and is identical for any jobs value.
    """
    has_split = any(rec.split is not Split.UNASSIGNED for rec in corpus.records)
    if has_split:
        records = [rec for rec in corpus.records if rec.split is Split.TRAIN]
    else:
        records = list(corpus.records)

    tagged_map = {rid: list(ents) for rid, ents in tagged.items() if ents}
    n2_pool = [(rec, tagged_map[rec.record_id]) for rec in records
               if rec.record_id in tagged_map]
    tagged_pool = {rec.record_id: (rec, tagged_map[rec.record_id]) for rec, _ in n2_pool}
    sig_index: dict[Signature, list[str]] = {}
    for rec, ents in n2_pool:
        sig_index.setdefault(signature_of(ents), []).append(rec.record_id)
    for ids in sig_index.values():
        ids.sort()

    env = _GenEnv(
        articles_body={aid: art.body for aid, art in corpus.articles.items()},
        pool=records,
        tagged=tagged_map,
        n2_pool=n2_pool,
        sig_index=sig_index,
        tagged_pool=tagged_pool,
        config=config,
    )

    if jobs > 1 and len(records) > 1:
        ctx = multiprocessing.get_context("fork")
        chunk = max(1, len(records) // (jobs * 4))
        with ctx.Pool(jobs, initializer=_init_worker, initargs=(env,)) as pool:
            results = pool.map(_worker_generate, records, chunksize=chunk)
    else:
        results = [_generate_for_record(env, rec) for rec in records]

    instances: list[EntailmentInstance] = []
    report = {cls: {reason: 0 for reason in SKIP_REASONS} for cls in ("N1", "N2", "N3")}
    for batch, skips in results:
        instances.extend(batch)
        for cls, reason in skips:
            report[cls][reason] += 1
    return instances, report


# --- file round trip -------------------------------------------------------

def instance_to_row(inst: EntailmentInstance) -> dict[str, Any]:
    return {
        "instance_id": inst.instance_id,
        "image_id": inst.image.image_id,
        "image_uri": inst.image.uri,
        "caption": inst.caption,
        "context": inst.context,
        "label": inst.label.value,
        "neg_class": inst.neg_class.value,
        "source_record_id": inst.source_record_id,
        "donor_record_id": inst.donor_record_id,
    }


def instance_from_row(row: Mapping[str, Any]) -> EntailmentInstance:
    return EntailmentInstance(
        instance_id=str(row["instance_id"]),
        image=ImageRef(image_id=str(row.get("image_id", "")), uri=str(row.get("image_uri", ""))),
        caption=str(row["caption"]),
        context=str(row["context"]),
        label=Label(row["label"]),
        neg_class=NegClass(row["neg_class"]),
        source_record_id=str(row.get("source_record_id", "")),
        donor_record_id=row.get("donor_record_id"),
    )


def write_instances(path: str | Path, instances: Iterable[EntailmentInstance]) -> int:
    return write_jsonl(path, (instance_to_row(inst) for inst in instances))


def read_instances(path: str | Path) -> list[EntailmentInstance]:
    return [instance_from_row(row) for _, row in read_jsonl(path)]
