from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contextcap.entities import (
    Entity,
    EntityType,
    GazetteerTagger,
    TaggedCaption,
    format_signature,
    ingest_external_tags,
    parse_signature,
    resolve_overlaps,
    signature_index,
    signature_of,
    validate_entities,
)


@pytest.fixture()
def tagger():
    return GazetteerTagger({
        "John Garrison": "PERSON",
        "New York": "GPE",
        "York": "GPE",
        "Berlin": "GPE",
        "Acme Corp": "ORG",
    })


def test_tag_spans_reproduce_surfaces(tagger):
    text = "John Garrison speaks in Berlin today"
    entities = tagger.tag(text)
    assert [(e.surface, e.etype) for e in entities] == \
        [("John Garrison", EntityType.PERSON), ("Berlin", EntityType.GPE)]
    validate_entities(text, entities)


def test_tag_longest_match_wins(tagger):
    entities = tagger.tag("A parade in New York today")
    assert [(e.surface, e.start, e.end) for e in entities] == [("New York", 12, 20)]


def test_tag_word_boundaries(tagger):
    assert tagger.tag("The Yorkshire terrier ran") == []
    assert [e.surface for e in tagger.tag("Flight to Berlin, then home")] == ["Berlin"]


def test_tag_repeated_surface_tagged_per_occurrence(tagger):
    entities = tagger.tag("Berlin guide for people living in Berlin")
    assert [e.start for e in entities] == [0, 34]
    assert all(e.surface == "Berlin" for e in entities)


def test_tag_case_sensitive(tagger):
    assert tagger.tag("travel to berlin was cheap") == []


def test_gazetteer_drops_unknown_types():
    tagger = GazetteerTagger({"Monday": "DATE", "Berlin": "GPE"})
    assert len(tagger) == 1


def test_gazetteer_file_parse_error(tmp_path):
    path = tmp_path / "gaz.tsv"
    path.write_text("Berlin GPE\n", encoding="utf-8")  # space, not a tab
    with pytest.raises(ValueError, match="gaz.tsv:1"):
        GazetteerTagger.from_file(path)


def test_resolve_overlaps_tie_breaks():
    # Same span, equal length, different types: smaller type name wins.
    a = Entity("Delta", EntityType.ORG, 0, 5)
    b = Entity("Delta", EntityType.GPE, 0, 5)
    assert resolve_overlaps([a, b]) == [b]
    # Equal length, overlapping, earlier start wins.
    c = Entity("ab cd", EntityType.LOC, 0, 5)
    d = Entity("cd ef", EntityType.LOC, 3, 8)
    assert resolve_overlaps([c, d]) == [c]


def test_signature_is_order_invariant():
    ents = [Entity("Berlin", EntityType.GPE, 10, 16),
            Entity("John", EntityType.PERSON, 0, 4),
            Entity("Paris", EntityType.GPE, 20, 25)]
    assert signature_of(ents) == (("GPE", 2), ("PERSON", 1))
    assert signature_of(reversed(ents)) == signature_of(ents)
    assert parse_signature(format_signature(signature_of(ents))) == signature_of(ents)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sampled_from(list(EntityType)), max_size=8), st.randoms())
def test_signature_permutation_property(types, rnd):
    ents = [Entity(f"e{i}", t, i * 10, i * 10 + 2) for i, t in enumerate(types)]
    shuffled = list(ents)
    rnd.shuffle(shuffled)
    assert signature_of(shuffled) == signature_of(ents)


def test_signature_index_partitions():
    tagged = [
        TaggedCaption("r1", [Entity("A", EntityType.PERSON, 0, 1)]),
        TaggedCaption("r3", [Entity("B", EntityType.PERSON, 0, 1)]),
        TaggedCaption("r2", [Entity("C", EntityType.GPE, 0, 1)]),
        TaggedCaption("r4", []),
    ]
    index = signature_index(tagged)
    assert index[(("PERSON", 1),)] == ["r1", "r3"]
    assert index[(("GPE", 1),)] == ["r2"]
    assert index[()] == ["r4"]
    all_ids = [rid for ids in index.values() for rid in ids]
    assert sorted(all_ids) == ["r1", "r2", "r3", "r4"]


def test_ingest_external_tags_filters_and_validates():
    texts = {"r1": "John Garrison spoke in Berlin"}
    rows = [
        {"record_id": "r1", "surface": "John", "type": "PERSON", "start": 0, "end": 4},
        {"record_id": "r1", "surface": "Mark", "type": "PERSON", "start": 0, "end": 4},
        {"record_id": "r1", "surface": "Berlin", "type": "GPE", "start": 23, "end": 29},
        {"record_id": "r1", "surface": "spoke", "type": "VERB", "start": 14, "end": 19},
        {"record_id": "zz", "surface": "John", "type": "PERSON", "start": 0, "end": 4},
        {"record_id": "r1", "surface": "spoke", "type": "ORG", "start": 19, "end": 14},
    ]
    tags, stats = ingest_external_tags(rows, texts)
    assert [(e.surface, e.etype.value) for e in tags["r1"]] == \
        [("John", "PERSON"), ("Berlin", "GPE")]
    assert stats["type_filtered"] == 1
    assert stats["unknown_record"] == 1
    assert stats["span_mismatch"] == 2  # wrong surface and inverted span
    validate_entities(texts["r1"], tags["r1"])


def test_ingest_external_tags_resolves_overlaps():
    texts = {"r1": "New York parade"}
    rows = [
        {"record_id": "r1", "surface": "New York", "type": "GPE", "start": 0, "end": 8},
        {"record_id": "r1", "surface": "York", "type": "GPE", "start": 4, "end": 8},
    ]
    tags, stats = ingest_external_tags(rows, texts)
    assert [e.surface for e in tags["r1"]] == ["New York"]
    assert stats["overlap_dropped"] == 1


def test_validate_entities_rejects_bad_spans():
    with pytest.raises(ValueError, match="out of bounds"):
        validate_entities("abc", [Entity("d", EntityType.GPE, 2, 9)])
    with pytest.raises(ValueError, match="does not match"):
        validate_entities("abcdef", [Entity("xyz", EntityType.GPE, 0, 3)])
