"""Score model captions with the full metric battery.

Two small scenes stand in for a validation set. The report carries the
corpus scores, per-instance rows, and flags for degenerate cases such as
a single-image corpus where the idf table is uninformative.
"""
import json

from contextcap import EvalPair, evaluate, keyword_f_at_10, ne_pr

PAIRS = [
    EvalPair(
        instance_id="v1",
        candidate="a red bus drives past the old station",
        references=["A red bus drives past the station.",
                    "The bus passes the station building."],
        candidate_entities=["Midtown Station"],
        reference_entities=["Midtown Station", "Route 9"],
    ),
    EvalPair(
        instance_id="v2",
        candidate="two dogs run across the park",
        references=["Two dogs chase a ball in the park."],
        candidate_entities=[],
        reference_entities=[],
    ),
]


def main():
    report = evaluate(PAIRS)
    print("corpus scores:")
    for name, value in sorted(report.corpus.items()):
        print(f"  {name:12s} {value:.4f}")
    print("counts:", report.counts)
    print("flags :", report.flags or "(none)")

    print("\nper-instance:")
    for row in report.per_instance:
        print(" ", json.dumps(row, sort_keys=True))

    # Entity overlap is a multiset match on case-folded surfaces.
    precision, recall = ne_pr(PAIRS)
    print(f"\nentity precision={precision:.3f} recall={recall:.3f}")

    # Keyword scoring fixes the precision denominator at 10 regardless of
    # how many phrases the model emitted.
    predicted = ["concert hall", "renovation", "mayor", "ribbon cutting"]
    gold = ["Concert Hall", "renovations", "city budget"]
    print(f"keyword F@10  ={keyword_f_at_10(predicted, gold):.4f}")


if __name__ == "__main__":
    main()
