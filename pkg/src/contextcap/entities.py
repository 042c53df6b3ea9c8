"""Typed named-entity spans, gazetteer tagging, and signature indexing.

Only six entity labels are kept (people, facilities, organizations,
geopolitical entities, locations, events); anything else a tagger emits
is discarded. Spans are half-open character offsets into the tagged text.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .util import nfc, read_jsonl, write_jsonl

logger = logging.getLogger(__name__)


class EntityType(str, Enum):
    PERSON = "PERSON"
    FAC = "FAC"
    ORG = "ORG"
    GPE = "GPE"
    LOC = "LOC"
    EVENT = "EVENT"


ENTITY_TYPE_NAMES = frozenset(t.value for t in EntityType)

# (type_name, count) pairs sorted by type name; the multiset of entity
# types in a caption.
Signature = tuple[tuple[str, int], ...]


@dataclass(frozen=True)
class Entity:
    surface: str
    etype: EntityType
    start: int
    end: int


def surface_key(surface: str) -> str:
    """Entity surfaces compare case-insensitively on their NFC form."""
    return nfc(surface).lower()


def signature_of(entities: Iterable[Entity]) -> Signature:
    counts = Counter(e.etype.value for e in entities)
    return tuple(sorted(counts.items()))


def format_signature(sig: Signature) -> str:
    return ",".join(f"{name}:{count}" for name, count in sig)


def parse_signature(text: str) -> Signature:
    if not text:
        return ()
    pairs = []
    for part in text.split(","):
        name, _, count = part.partition(":")
        pairs.append((name, int(count)))
    return tuple(sorted(pairs))


@dataclass
class TaggedCaption:
    record_id: str
    entities: list[Entity]

    @property
    def signature(self) -> Signature:
        # Derived on demand so it can never go stale.
        return signature_of(self.entities)


def validate_entities(text: str, entities: Sequence[Entity]) -> None:
    """Check span consistency: inside the text, matching the surface,
    non-overlapping, sorted by start."""
    prev_end = 0
    for ent in entities:
        if not (0 <= ent.start < ent.end <= len(text)):
            raise ValueError(f"span ({ent.start}, {ent.end}) out of bounds")
        if text[ent.start:ent.end] != ent.surface:
            raise ValueError(
                f"span ({ent.start}, {ent.end}) text {text[ent.start:ent.end]!r} "
                f"does not match surface {ent.surface!r}")
        if ent.start < prev_end:
            raise ValueError(f"span ({ent.start}, {ent.end}) overlaps a previous span")
        prev_end = ent.end


def resolve_overlaps(candidates: Iterable[Entity]) -> list[Entity]:
    """Keep a non-overlapping subset: longer span wins, then earlier start,
    then lexicographically smaller type name. Result sorted by start."""
    ranked = sorted(candidates, key=lambda e: (-(e.end - e.start), e.start, e.etype.value))
    kept: list[Entity] = []
    for cand in ranked:
        if all(cand.end <= k.start or cand.start >= k.end for k in kept):
            kept.append(cand)
    kept.sort(key=lambda e: e.start)
    return kept


def _word_bounded(text: str, start: int, end: int) -> bool:
    if start > 0 and text[start - 1].isalnum() and text[start].isalnum():
        return False
    if end < len(text) and text[end - 1].isalnum() and text[end].isalnum():
        return False
    return True


class GazetteerTagger:
    """Deterministic lexicon tagger.

    Matching is exact (case-sensitive) and requires word boundaries: a
    match may not butt an alphanumeric character up against another one.
    Overlapping matches resolve longest-first, then leftmost, then by
    type name.
    """

    def __init__(self, lexicon: Mapping[str, EntityType | str]):
        self._lexicon: dict[str, EntityType] = {}
        for surface, etype in lexicon.items():
            if not surface:
                continue
            name = etype.value if isinstance(etype, EntityType) else str(etype)
            if name not in ENTITY_TYPE_NAMES:
                logger.debug("gazetteer: dropping %r with unsupported type %r", surface, name)
                continue
            etype = EntityType(name)
            prior = self._lexicon.get(surface)
            if prior is None or etype.value < prior.value:
                self._lexicon[surface] = etype

    @classmethod
    def from_file(cls, path: str | Path) -> "GazetteerTagger":
        """Load "surface<TAB>TYPE" lines; blank lines and # comments ignored."""
        lexicon: dict[str, str] = {}
        with open(path, "r", encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line.strip() or line.lstrip().startswith("#"):
                    continue
                surface, sep, etype = line.partition("\t")
                if not sep or not surface or not etype.strip():
                    raise ValueError(f"{path}:{line_no}: expected 'surface<TAB>TYPE'")
                lexicon[surface] = etype.strip()
        return cls(lexicon)

    def __len__(self) -> int:
        return len(self._lexicon)

    def tag(self, text: str) -> list[Entity]:
        candidates: list[Entity] = []
        for surface, etype in self._lexicon.items():
            start = text.find(surface)
            while start != -1:
                end = start + len(surface)
                if _word_bounded(text, start, end):
                    candidates.append(Entity(surface, etype, start, end))
                start = text.find(surface, start + 1)
        return resolve_overlaps(candidates)


def ingest_external_tags(
    rows: Iterable[Mapping[str, Any]],
    texts: Mapping[str, str],
) -> tuple[dict[str, list[Entity]], dict[str, int]]:
    """Validate and filter third-party entity annotations.

    rows carry {"record_id", "surface", "type", "start", "end"}; texts maps
    record_id to the annotated text. Rows with unsupported types, unknown
    records, or spans that do not reproduce the surface are dropped and
    counted. Surviving spans are de-overlapped per record and sorted.
    """
    tags: dict[str, list[Entity]] = {}
    stats = {"type_filtered": 0, "unknown_record": 0, "span_mismatch": 0, "overlap_dropped": 0}
    for pos, row in enumerate(rows, 1):
        try:
            record_id = str(row["record_id"])
            surface = str(row["surface"])
            type_name = str(row["type"])
            start = int(row["start"])
            end = int(row["end"])
        except (KeyError, TypeError, ValueError):
            raise ValueError(f"annotation row {pos}: expected record_id, surface, type, start, end") from None
        if type_name not in ENTITY_TYPE_NAMES:
            stats["type_filtered"] += 1
            continue
        if record_id not in texts:
            logger.warning("annotation row %d: unknown record %r", pos, record_id)
            stats["unknown_record"] += 1
            continue
        text = texts[record_id]
        if not (0 <= start < end <= len(text)) or text[start:end] != surface:
            logger.warning("annotation row %d: span (%d, %d) does not match %r",
                           pos, start, end, surface)
            stats["span_mismatch"] += 1
            continue
        tags.setdefault(record_id, []).append(Entity(surface, EntityType(type_name), start, end))
    for record_id, entities in tags.items():
        kept = resolve_overlaps(entities)
        stats["overlap_dropped"] += len(entities) - len(kept)
        tags[record_id] = kept
    return tags, stats


def signature_index(tagged: Iterable[TaggedCaption]) -> dict[Signature, list[str]]:
    """Partition record ids by entity-type signature; ids sorted within
    each bucket."""
    index: dict[Signature, list[str]] = {}
    for tc in tagged:
        index.setdefault(tc.signature, []).append(tc.record_id)
    for ids in index.values():
        ids.sort()
    return index


def tags_to_rows(tags: Mapping[str, Sequence[Entity]]) -> Iterable[dict[str, Any]]:
    for record_id, entities in tags.items():
        for ent in sorted(entities, key=lambda e: e.start):
            yield {
                "record_id": record_id,
                "surface": ent.surface,
                "type": ent.etype.value,
                "start": ent.start,
                "end": ent.end,
            }


def write_tags(path: str | Path, tags: Mapping[str, Sequence[Entity]]) -> int:
    return write_jsonl(path, tags_to_rows(tags))


def load_tags(path: str | Path, texts: Mapping[str, str]) -> tuple[dict[str, list[Entity]], dict[str, int]]:
    return ingest_external_tags((obj for _, obj in read_jsonl(path)), texts)
