from __future__ import annotations

from fractions import Fraction
from random import Random

import pytest

from contextcap.corpus import Article, CaptionRecord, Corpus, ImageRef, Split
from contextcap.entities import GazetteerTagger, TaggedCaption, signature_index
from contextcap.negatives import (
    EntailmentInstance,
    GenerationSkipped,
    Label,
    MixConfig,
    NegClass,
    assemble,
    gen_n1,
    gen_n2,
    gen_n3,
    instance_from_row,
    instance_to_row,
    replace_spans,
)
from contextcap.util import normalize_text

GAZ = GazetteerTagger({
    "John Garrison": "PERSON", "Mark Pattinson": "PERSON", "Alice Smith": "PERSON",
    "Priya Nair": "PERSON", "Berlin": "GPE", "London": "GPE", "Paris": "GPE",
    "Acme Corp": "ORG",
})


def _rec(record_id, caption, article_id="a0"):
    return CaptionRecord(record_id, ImageRef(f"i-{record_id}", f"http://img/{record_id}.jpg"),
                         caption, article_id)


def _tagged(record):
    return GAZ.tag(record.caption)


# Independent re-derivations of the swap outputs, used to cross-check the
# generators span by span.

def _oracle_n2(source_caption, source_entities, donor_entities):
    queues: dict = {}
    for ent in donor_entities:
        queues.setdefault(ent.etype, []).append(ent.surface)
    out = []
    cursor = 0
    for ent in source_entities:
        out.append(source_caption[cursor:ent.start])
        out.append(queues[ent.etype].pop(0))
        cursor = ent.end
    out.append(source_caption[cursor:])
    return "".join(out)


def _oracle_n3(source_entities, donor_caption, donor_entities):
    queues: dict = {}
    for ent in source_entities:
        queues.setdefault(ent.etype, []).append(ent.surface)
    out = []
    cursor = 0
    for ent in donor_entities:
        out.append(donor_caption[cursor:ent.start])
        out.append(queues[ent.etype].pop(0))
        cursor = ent.end
    out.append(donor_caption[cursor:])
    return "".join(out)


def _residual(text, entities):
    out = []
    cursor = 0
    for ent in entities:
        out.append(text[cursor:ent.start])
        cursor = ent.end
    out.append(text[cursor:])
    return "".join(out)


def test_gen_n1_donor_differs_and_is_deterministic():
    src = _rec("r0", "a crowd gathers near the station")
    pool = [src,
            _rec("r1", "A Crowd gathers  near the station"),  # same after normalization
            _rec("r2", "two dogs run across the park"),
            _rec("r3", "rain falls over the harbor at night")]
    picks = {gen_n1(src, "ctx", pool, Random(s)).donor_record_id for s in range(30)}
    assert "r1" not in picks and "r0" not in picks
    assert picks <= {"r2", "r3"}
    a = gen_n1(src, "ctx", pool, Random(5))
    b = gen_n1(src, "ctx", pool, Random(5))
    assert a == b
    assert a.label is Label.NOT_ENTAILS and a.neg_class is NegClass.N1
    assert a.source_record_id == "r0" and a.context == "ctx"


def test_gen_n1_no_eligible_donor():
    src = _rec("r0", "a crowd gathers near the station")
    with pytest.raises(GenerationSkipped) as err:
        gen_n1(src, "ctx", [src], Random(0))
    assert err.value.reason == "no_match"


def test_gen_n2_reproduces_entity_swap_pattern():
    src = _rec("r1", "John Garrison performing in Berlin, April 2015")
    donor = _rec("r2", "Mark Pattinson attends a gala in London")
    inst = gen_n2(src, "ctx", _tagged(src), [(donor, _tagged(donor))], Random(0))
    assert inst.caption == "Mark Pattinson performing in London, April 2015"
    assert inst.donor_record_id == "r2"
    assert inst.label is Label.NOT_ENTAILS and inst.neg_class is NegClass.N2


def test_gen_n2_type_sequence_and_residual_preserved():
    src = _rec("r1", "Alice Smith met Priya Nair in Paris near Acme Corp")
    donor = _rec("r2", "John Garrison and Mark Pattinson toured Berlin for Acme Corp wait London")
    src_ents = _tagged(src)
    donor_ents = _tagged(donor)
    inst = gen_n2(src, "ctx", src_ents, [(donor, donor_ents)], Random(1))
    assert inst.caption == _oracle_n2(src.caption, src_ents, donor_ents)
    # Non-entity characters survive verbatim.
    out_ents = GAZ.tag(inst.caption)
    assert _residual(inst.caption, out_ents) == _residual(src.caption, src_ents)
    assert [e.etype for e in out_ents] == [e.etype for e in src_ents]


def test_gen_n2_requires_full_type_supply():
    src = _rec("r1", "Alice Smith spoke in Paris and London")
    donor = _rec("r2", "John Garrison visited Berlin")  # one GPE short
    with pytest.raises(GenerationSkipped) as err:
        gen_n2(src, "ctx", _tagged(src), [(donor, _tagged(donor))], Random(0), max_retries=5)
    assert err.value.reason == "retries_exhausted"


def test_gen_n2_rejects_case_insensitive_identical_swap():
    src = _rec("r1", "Alice Smith spoke in Paris")
    donor = _rec("r2", "ALICE SMITH returned to PARIS")
    tagger = GazetteerTagger({"Alice Smith": "PERSON", "ALICE SMITH": "PERSON",
                              "Paris": "GPE", "PARIS": "GPE"})
    with pytest.raises(GenerationSkipped) as err:
        gen_n2(src, "ctx", tagger.tag(src.caption),
               [(donor, tagger.tag(donor.caption))], Random(0), max_retries=8)
    assert err.value.reason == "retries_exhausted"


def test_gen_n2_no_entities_skips():
    src = _rec("r1", "a plain caption without any names")
    with pytest.raises(GenerationSkipped) as err:
        gen_n2(src, "ctx", [], [(_rec("r2", "x"), [])], Random(0))
    assert err.value.reason == "no_entities"


def test_gen_n3_reproduces_content_swap_pattern():
    src = _rec("r1", "John Garrison performing in Berlin, April 2015")
    donor = _rec("r3", "Alice Smith waiting in queue for filing tax returns in Paris, April 2015")
    src_ents, donor_ents = _tagged(src), _tagged(donor)
    index = signature_index([TaggedCaption("r1", src_ents), TaggedCaption("r3", donor_ents)])
    pool = {"r1": (src, src_ents), "r3": (donor, donor_ents)}
    inst = gen_n3(src, "ctx", src_ents, index, pool, Random(0))
    assert inst.caption == \
        "John Garrison waiting in queue for filing tax returns in Berlin, April 2015"
    assert inst.donor_record_id == "r3"
    assert inst.neg_class is NegClass.N3


def test_gen_n3_conserves_entity_multiset_and_donor_residual():
    src = _rec("r1", "Alice Smith met Priya Nair in Paris")
    donor = _rec("r2", "John Garrison greeted Mark Pattinson outside London yesterday")
    src_ents, donor_ents = _tagged(src), _tagged(donor)
    index = signature_index([TaggedCaption("r1", src_ents), TaggedCaption("r2", donor_ents)])
    pool = {"r1": (src, src_ents), "r2": (donor, donor_ents)}
    inst = gen_n3(src, "ctx", src_ents, index, pool, Random(3))
    assert inst.caption == _oracle_n3(src_ents, donor.caption, donor_ents)
    out_ents = GAZ.tag(inst.caption)
    assert sorted(e.surface.lower() for e in out_ents) == \
        sorted(e.surface.lower() for e in src_ents)
    assert _residual(inst.caption, out_ents) == _residual(donor.caption, donor_ents)


def test_gen_n3_requires_exact_signature():
    src = _rec("r1", "Alice Smith spoke in Paris")
    donor = _rec("r2", "John Garrison met Mark Pattinson in Berlin")  # extra PERSON
    src_ents, donor_ents = _tagged(src), _tagged(donor)
    index = signature_index([TaggedCaption("r1", src_ents), TaggedCaption("r2", donor_ents)])
    pool = {"r1": (src, src_ents), "r2": (donor, donor_ents)}
    with pytest.raises(GenerationSkipped) as err:
        gen_n3(src, "ctx", src_ents, index, pool, Random(0))
    assert err.value.reason == "no_match"


def test_gen_n3_skips_when_output_equals_source():
    # Donor differs only in entity surfaces, so after substitution the
    # output collapses back to the source caption.
    src = _rec("r1", "Alice Smith spoke in Paris")
    donor = _rec("r2", "John Garrison spoke in Berlin")
    src_ents, donor_ents = _tagged(src), _tagged(donor)
    index = signature_index([TaggedCaption("r1", src_ents), TaggedCaption("r2", donor_ents)])
    pool = {"r1": (src, src_ents), "r2": (donor, donor_ents)}
    with pytest.raises(GenerationSkipped) as err:
        gen_n3(src, "ctx", src_ents, index, pool, Random(0), max_retries=4)
    assert err.value.reason == "retries_exhausted"


def test_replace_spans_preserves_outside_characters():
    text = "aa BB cc DD ee"
    from contextcap.entities import Entity, EntityType
    ents = [Entity("BB", EntityType.GPE, 3, 5), Entity("DD", EntityType.GPE, 9, 11)]
    assert replace_spans(text, ents, ["XXX", "Y"]) == "aa XXX cc Y ee"


def _small_corpus(n=12):
    articles = {"a0": Article("a0", "Context body for every record here.")}
    records = []
    people = ["John Garrison", "Mark Pattinson", "Alice Smith", "Priya Nair"]
    places = ["Berlin", "London", "Paris"]
    for i in range(n):
        caption = f"{people[i % 4]} visits {places[i % 3]} on day {i}"
        records.append(_rec(f"r{i:03d}", caption))
    return Corpus(articles=articles, records=records)


def test_assemble_ratio_one_to_one_weights_n1_only():
    corpus = _small_corpus(10)
    tagged = {r.record_id: GAZ.tag(r.caption) for r in corpus.records}
    config = MixConfig(seed=11, ratio_pos_to_neg=Fraction(1), class_weights=(1, 0, 0))
    instances, report = assemble(corpus, tagged, config)
    pos = [i for i in instances if i.neg_class is NegClass.P]
    neg = [i for i in instances if i.neg_class is NegClass.N1]
    assert len(pos) == 10 and len(neg) == 10
    assert all(i.label is Label.ENTAILS for i in pos)
    assert all(i.label is Label.NOT_ENTAILS for i in neg)
    assert report["N2"] == {"no_entities": 0, "no_match": 0, "retries_exhausted": 0}


def test_assemble_label_soundness_and_referential_integrity():
    corpus = _small_corpus(12)
    record_ids = {r.record_id for r in corpus.records}
    captions = {r.record_id: r.caption for r in corpus.records}
    tagged = {r.record_id: GAZ.tag(r.caption) for r in corpus.records}
    config = MixConfig(seed=5, ratio_pos_to_neg=Fraction(1, 2))
    instances, _ = assemble(corpus, tagged, config)
    ids = [i.instance_id for i in instances]
    assert len(ids) == len(set(ids))
    for inst in instances:
        assert inst.source_record_id in record_ids
        if inst.label is Label.NOT_ENTAILS:
            assert inst.donor_record_id in record_ids
            assert normalize_text(inst.caption) != normalize_text(captions[inst.source_record_id])
        else:
            assert inst.donor_record_id is None
            assert inst.caption == captions[inst.source_record_id]


def test_assemble_uses_train_split_only_when_assigned():
    corpus = _small_corpus(9)
    for i, rec in enumerate(corpus.records):
        rec.split = Split.TRAIN if i < 3 else Split.TEST
    tagged = {r.record_id: GAZ.tag(r.caption) for r in corpus.records}
    instances, _ = assemble(corpus, tagged, MixConfig(seed=2, class_weights=(1, 0, 0)))
    sources = {i.source_record_id for i in instances}
    assert sources == {"r000", "r001", "r002"}
    donors = {i.donor_record_id for i in instances if i.donor_record_id}
    assert donors <= sources


def test_assemble_deterministic_and_jobs_independent():
    corpus = _small_corpus(12)
    tagged = {r.record_id: GAZ.tag(r.caption) for r in corpus.records}
    config = MixConfig(seed=7)
    first, report_a = assemble(corpus, tagged, config)
    second, report_b = assemble(corpus, tagged, config)
    assert first == second and report_a == report_b
    parallel, report_c = assemble(corpus, tagged, config, jobs=4)
    assert parallel == first and report_c == report_a


def test_mix_config_validation():
    with pytest.raises(ValueError):
        MixConfig(seed=1, ratio_pos_to_neg=Fraction(0))
    with pytest.raises(ValueError):
        MixConfig(seed=1, class_weights=(0, 0, 0))
    with pytest.raises(ValueError):
        MixConfig(seed=1, class_weights=(1, -1, 1))
    with pytest.raises(ValueError):
        MixConfig(seed=1, max_retries=0)


def test_instance_row_round_trip():
    inst = EntailmentInstance(
        instance_id="r1#N2-0",
        image=ImageRef("i1", "http://img/1.jpg"),
        caption="Mark Pattinson performing in London, April 2015",
        context="Some article body.",
        label=Label.NOT_ENTAILS,
        neg_class=NegClass.N2,
        source_record_id="r1",
        donor_record_id="r2",
    )
    row = instance_to_row(inst)
    assert row["label"] == "not_entails" and row["neg_class"] == "N2"
    back = instance_from_row(row)
    assert back.instance_id == inst.instance_id
    assert back.caption == inst.caption
    assert back.label is Label.NOT_ENTAILS
    assert back.donor_record_id == "r2"
