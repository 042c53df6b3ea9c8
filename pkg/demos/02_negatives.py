"""Show the three synthetic negative-caption strategies side by side.

N1 borrows a random caption from another image. N2 keeps the wording and
swaps the named entities for same-typed ones from a donor caption. N3
keeps the entities and swaps the wording for a donor caption with the
same entity-type signature.
"""
from fractions import Fraction
from random import Random

from contextcap import (
    Article,
    CaptionRecord,
    Corpus,
    GazetteerTagger,
    ImageRef,
    MixConfig,
    TaggedCaption,
    assemble,
    gen_n1,
    gen_n2,
    gen_n3,
    signature_index,
)

LEXICON = {
    "John Garrison": "PERSON", "Mark Pattinson": "PERSON",
    "Alice Smith": "PERSON", "Berlin": "GPE", "London": "GPE",
    "Paris": "GPE", "Acme Corp": "ORG",
}

CAPTIONS = {
    "r1": "John Garrison performing in Berlin, April 2015",
    "r2": "Mark Pattinson attends a gala in London",
    "r3": "Alice Smith waiting in queue for filing tax returns in Paris, April 2015",
    "r4": "Acme Corp opens a new office in London this spring",
    "r5": "General view of the harbour on a calm morning",
}


def record(rid):
    return CaptionRecord(rid, ImageRef(f"im-{rid}", f"http://img/{rid}.jpg"),
                         CAPTIONS[rid], "a1")


def main():
    tagger = GazetteerTagger(LEXICON)
    records = {rid: record(rid) for rid in CAPTIONS}
    tagged = {rid: tagger.tag(text) for rid, text in CAPTIONS.items()}

    src = records["r1"]
    print("source :", src.caption)
    for ent in tagged["r1"]:
        print(f"  entity {ent.etype.value:7s} [{ent.start}:{ent.end}] {ent.surface}")

    n1 = gen_n1(src, "ctx", list(records.values()), Random(1))
    print("\nN1 random caption  :", n1.caption, f"(donor {n1.donor_record_id})")

    n2 = gen_n2(src, "ctx", tagged["r1"],
                [(records["r2"], tagged["r2"])], Random(1))
    print("N2 entity swap     :", n2.caption)

    index = signature_index(
        [TaggedCaption(rid, ents) for rid, ents in tagged.items()])
    pool = {rid: (records[rid], tagged[rid]) for rid in records}
    n3 = gen_n3(src, "ctx", tagged["r1"], index, pool, Random(1))
    print("N3 content swap    :", n3.caption, f"(donor {n3.donor_record_id})")

    # Batch mode: one positive per record plus a seeded mix of negatives.
    article = Article("a1", "City desk wrap-up of spring arts and civic events.")
    corpus = Corpus(articles={"a1": article}, records=list(records.values()))
    config = MixConfig(seed=11, ratio_pos_to_neg=Fraction(1, 2),
                       class_weights=(1, 2, 2))
    instances, skips = assemble(corpus, tagged, config)
    print(f"\nassembled {len(instances)} instances "
          f"({sum(1 for i in instances if i.label.value == 'entails')} positive)")
    print("skip report:", skips)


if __name__ == "__main__":
    main()
