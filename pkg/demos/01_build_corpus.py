"""Walk a raw article/caption dump through ingest, clean and split.

Run from the repository root:  python3 demos/01_build_corpus.py
Everything lands in a temporary directory that is printed at the end.
"""
import json
import tempfile
from pathlib import Path

from contextcap import clean, ingest, save_corpus, split

ARTICLES = [
    {"article_id": "a1",
     "body": "The city marathon drew a record field on Sunday. Organisers "
             "praised the volunteers and the closing ceremony ran long.",
     "keywords": ["marathon", "city", "volunteers"]},
    {"article_id": "a2",
     "body": "A heatwave pushed power demand to a seasonal high as grid "
             "operators asked households to delay appliance use."},
]

CAPTIONS = [
    {"record_id": "r1", "image_id": "im1", "image_uri": "http://img/1.jpg",
     "caption": "Runners cross the finish line under grey skies",
     "article_id": "a1"},
    {"record_id": "r2", "image_id": "im2", "image_uri": "http://img/2.jpg",
     "caption": "Volunteers hand out water along the marathon route",
     "article_id": "a1"},
    # duplicate text of r1, different casing and spacing: dropped as dup
    {"record_id": "r3", "image_id": "im3", "image_uri": "http://img/3.jpg",
     "caption": "runners  cross the Finish Line under grey skies",
     "article_id": "a1"},
    # four words: below the 5-31 word window
    {"record_id": "r4", "image_id": "im4", "image_uri": "http://img/4.jpg",
     "caption": "Crowd at the race", "article_id": "a1"},
    # no image uri: unusable for a vision task
    {"record_id": "r5", "image_id": "im5", "image_uri": "",
     "caption": "Empty power grid control room during the heatwave alert",
     "article_id": "a2"},
    {"record_id": "r6", "image_id": "im6", "image_uri": "http://img/6.jpg",
     "caption": "Engineers monitor electricity demand from the control room",
     "article_id": "a2"},
]


def main():
    corpus = ingest(ARTICLES, CAPTIONS)
    print(f"ingested {len(corpus.records)} records, {len(corpus.articles)} articles")

    cleaned = clean(corpus)
    print(f"after cleaning: {len(cleaned.records)} records")
    print("drop reasons:", json.dumps(cleaned.provenance))

    assigned = split(cleaned, fractions=(0.8, 0.1, 0.1), seed=7)
    counts = {}
    for record in assigned.records:
        counts[record.split.value] = counts.get(record.split.value, 0) + 1
    print("split counts:", counts)

    out = Path(tempfile.mkdtemp(prefix="contextcap-demo-"))
    save_corpus(assigned, out)
    print("corpus directory:", out)
    for name in ("articles.jsonl", "records.jsonl", "provenance.json"):
        print(f"  {name}: {(out / name).stat().st_size} bytes")


if __name__ == "__main__":
    main()
