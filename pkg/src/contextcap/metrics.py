"""Caption and keyword scoring.

Corpus BLEU-4, ROUGE-L, a reduced METEOR (exact and stemmed matching
stages only), CIDEr-D, named-entity precision/recall over surface
multisets, and F1 at the top 10 keyphrases. All text passes through one
shared tokenizer: NFC, lowercase, punctuation separated, whitespace
split.
"""

from __future__ import annotations

import math
import re
import unicodedata
import warnings
from collections import Counter
from dataclasses import dataclass, field
from statistics import fmean
from typing import Any, Iterable, Mapping, Sequence

from .entities import surface_key
from .stem import porter_stem

CIDER_SIGMA = 6.0
CIDER_SCALE = 10.0
BLEU_ORDER = 4
ROUGE_BETA = 1.2

_TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)


def metric_tokenize(text: str) -> list[str]:
    """NFC, lowercase, punctuation split off as separate tokens."""
    return _TOKEN_RE.findall(unicodedata.normalize("NFC", text).lower())


@dataclass
class EvalPair:
    """One candidate caption against its reference captions.

    Entity lists are optional surface strings (or objects with a
    .surface attribute) used by the entity precision/recall metric.
    """

    instance_id: str
    candidate: str
    references: list[str]
    candidate_entities: list | None = None
    reference_entities: list | None = None

    def __post_init__(self):
        if not self.references:
            raise ValueError(f"pair {self.instance_id!r} has no references")


def _surfaces(items: Iterable) -> list[str]:
    return [getattr(item, "surface", item) for item in items]


# --- BLEU-4 -----------------------------------------------------------------

def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def _closest_ref_len(cand_len: int, ref_lens: Sequence[int]) -> int:
    # Closest reference length; ties break toward the shorter reference.
    return min(ref_lens, key=lambda r: (abs(r - cand_len), r))


def bleu4(pairs: Sequence[EvalPair]) -> float:
    """Corpus BLEU-4: geometric mean of modified n-gram precisions for
    n = 1..4 with uniform weights, times the brevity penalty.

    Zero overlap at any order yields 0 (no smoothing at corpus level).
    """
    if not pairs:
        raise ValueError("bleu4 needs at least one pair")
    matched = [0] * BLEU_ORDER
    total = [0] * BLEU_ORDER
    cand_len = 0
    ref_len = 0
    for pair in pairs:
        cand = metric_tokenize(pair.candidate)
        refs = [metric_tokenize(r) for r in pair.references]
        cand_len += len(cand)
        ref_len += _closest_ref_len(len(cand), [len(r) for r in refs])
        for n in range(1, BLEU_ORDER + 1):
            counts = _ngram_counts(cand, n)
            total[n - 1] += sum(counts.values())
            clip: Counter = Counter()
            for ref in refs:
                clip |= _ngram_counts(ref, n)
            matched[n - 1] += sum(min(c, clip.get(g, 0)) for g, c in counts.items())
    if any(t == 0 or m == 0 for m, t in zip(matched, total)):
        return 0.0
    log_precision = fmean(math.log(m / t) for m, t in zip(matched, total))
    if cand_len == 0:
        return 0.0
    brevity = 1.0 if cand_len > ref_len else math.exp(1.0 - ref_len / cand_len)
    return brevity * math.exp(log_precision)


def sentence_bleu4(candidate: str, references: Sequence[str], epsilon: float = 0.1) -> float:
    """Per-sentence BLEU-4 with epsilon smoothing of zero match counts."""
    cand = metric_tokenize(candidate)
    refs = [metric_tokenize(r) for r in references]
    if not cand:
        return 0.0
    log_sum = 0.0
    for n in range(1, BLEU_ORDER + 1):
        counts = _ngram_counts(cand, n)
        total = sum(counts.values())
        if total == 0:
            return 0.0
        clip: Counter = Counter()
        for ref in refs:
            clip |= _ngram_counts(ref, n)
        m = sum(min(c, clip.get(g, 0)) for g, c in counts.items())
        log_sum += math.log((m if m > 0 else epsilon) / total) / BLEU_ORDER
    ref_len = _closest_ref_len(len(cand), [len(r) for r in refs])
    brevity = 1.0 if len(cand) > ref_len else math.exp(1.0 - ref_len / len(cand))
    return brevity * math.exp(log_sum)


# --- ROUGE-L ----------------------------------------------------------------

def _lcs_len(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for tok_a in a:
        row = [0]
        for j, tok_b in enumerate(b, 1):
            if tok_a == tok_b:
                row.append(prev[j - 1] + 1)
            else:
                row.append(max(prev[j], row[j - 1]))
        prev = row
    return prev[-1]


def _rouge_l_f(cand: Sequence[str], ref: Sequence[str], beta: float) -> float:
    lcs = _lcs_len(cand, ref)
    if lcs == 0:
        return 0.0
    precision = lcs / len(cand)
    recall = lcs / len(ref)
    return ((1 + beta * beta) * precision * recall) / (recall + beta * beta * precision)


def rouge_l_sentence(candidate: str, references: Sequence[str], beta: float = ROUGE_BETA) -> float:
    """LCS F-score against the best reference."""
    cand = metric_tokenize(candidate)
    return max(_rouge_l_f(cand, metric_tokenize(r), beta) for r in references)


def rouge_l(pairs: Sequence[EvalPair], beta: float = ROUGE_BETA) -> float:
    """Mean per-instance ROUGE-L F-score (max over references)."""
    if not pairs:
        raise ValueError("rouge_l needs at least one pair")
    return fmean(rouge_l_sentence(p.candidate, p.references, beta) for p in pairs)


# --- reduced METEOR ---------------------------------------------------------

def _meteor_align(cand: Sequence[str], ref: Sequence[str]) -> list[tuple[int, int]]:
    """Greedy one-to-one alignment: an exact-match stage, then a stemmed
    stage over the leftovers. Candidate tokens take the leftmost free
    reference token."""
    matched_ref = [False] * len(ref)
    pairs: list[tuple[int, int]] = []
    remaining = list(range(len(cand)))
    for key in (lambda t: t, porter_stem):
        ref_keys = [key(t) for t in ref]
        leftover = []
        for ci in remaining:
            want = key(cand[ci])
            for ri, ref_key in enumerate(ref_keys):
                if not matched_ref[ri] and ref_key == want:
                    matched_ref[ri] = True
                    pairs.append((ci, ri))
                    break
            else:
                leftover.append(ci)
        remaining = leftover
    pairs.sort()
    return pairs


def _meteor_sentence(cand: Sequence[str], ref: Sequence[str]) -> float:
    pairs = _meteor_align(cand, ref)
    matches = len(pairs)
    if matches == 0:
        return 0.0
    precision = matches / len(cand)
    recall = matches / len(ref)
    f_mean = 10 * precision * recall / (recall + 9 * precision)
    chunks = 1
    for (pc, pr), (cc, cr) in zip(pairs, pairs[1:]):
        if cc != pc + 1 or cr != pr + 1:
            chunks += 1
    penalty = 0.5 * (chunks / matches) ** 3
    return f_mean * (1.0 - penalty)


def meteor_lite_sentence(candidate: str, references: Sequence[str]) -> float:
    cand = metric_tokenize(candidate)
    if not cand:
        return 0.0
    return max(_meteor_sentence(cand, metric_tokenize(r)) for r in references)


def meteor_lite(pairs: Sequence[EvalPair]) -> float:
    """Mean per-instance reduced METEOR (best reference)."""
    if not pairs:
        raise ValueError("meteor_lite needs at least one pair")
    return fmean(meteor_lite_sentence(p.candidate, p.references) for p in pairs)


# --- CIDEr-D ----------------------------------------------------------------

@dataclass
class IdfTable:
    """Document frequencies over the reference images of an evaluation
    corpus; idf(g) = log(N / df(g)), with unseen n-grams weighted log N."""

    n_images: int
    df: dict[tuple, int] = field(default_factory=dict)

    def idf(self, gram: tuple) -> float:
        return math.log(self.n_images) - math.log(max(1.0, self.df.get(gram, 0)))


def build_idf(pairs: Sequence[EvalPair]) -> IdfTable:
    """Count, per n-gram (n = 1..4), the reference images whose reference
    set contains it."""
    df: dict[tuple, int] = {}
    for pair in pairs:
        grams: set[tuple] = set()
        for ref in pair.references:
            tokens = metric_tokenize(ref)
            for n in range(1, BLEU_ORDER + 1):
                grams.update(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))
        for gram in grams:
            df[gram] = df.get(gram, 0) + 1
    return IdfTable(n_images=len(pairs), df=df)


def _tfidf_vectors(tokens: Sequence[str], idf: IdfTable):
    vecs: list[dict[tuple, float]] = [{} for _ in range(BLEU_ORDER)]
    norms = [0.0] * BLEU_ORDER
    for n in range(1, BLEU_ORDER + 1):
        for gram, count in _ngram_counts(tokens, n).items():
            weight = count * idf.idf(gram)
            vecs[n - 1][gram] = weight
            norms[n - 1] += weight * weight
    return vecs, [math.sqrt(v) for v in norms]


def cider_d_instance(candidate: str, references: Sequence[str], idf: IdfTable) -> float:
    cand = metric_tokenize(candidate)
    cand_vecs, cand_norms = _tfidf_vectors(cand, idf)
    total = 0.0
    for reference in references:
        ref = metric_tokenize(reference)
        ref_vecs, ref_norms = _tfidf_vectors(ref, idf)
        delta = len(cand) - len(ref)
        length_penalty = math.exp(-(delta * delta) / (2.0 * CIDER_SIGMA ** 2))
        for n in range(BLEU_ORDER):
            if cand_norms[n] == 0.0 or ref_norms[n] == 0.0:
                continue  # zero-vector cosine is 0
            dot = sum(min(weight, ref_vecs[n].get(gram, 0.0)) * ref_vecs[n].get(gram, 0.0)
                      for gram, weight in cand_vecs[n].items())
            total += (dot / (cand_norms[n] * ref_norms[n])) * length_penalty / BLEU_ORDER
    return CIDER_SCALE * total / len(references)


def cider_d(pairs: Sequence[EvalPair], idf: IdfTable | None = None) -> float:
    """Mean length-penalized clipped tf-idf cosine over n = 1..4, scaled
    by 10. The idf table defaults to one built from the pairs' own
    references."""
    if not pairs:
        raise ValueError("cider_d needs at least one pair")
    if idf is None:
        idf = build_idf(pairs)
    if idf.n_images == 0 or not idf.df:
        raise ValueError(
            "empty idf table: build it from the evaluation reference corpus with build_idf()")
    if idf.n_images < 2:
        warnings.warn("single-image reference corpus: every idf weight is zero, CIDEr-D is 0",
                      stacklevel=2)
    return fmean(cider_d_instance(p.candidate, p.references, idf) for p in pairs)


# --- entity precision/recall ------------------------------------------------

def _entity_counts(pairs: Sequence[EvalPair]):
    matched = 0
    cand_total = 0
    ref_total = 0
    empty_candidates = 0
    empty_references = 0
    for pair in pairs:
        cand = Counter(surface_key(s) for s in _surfaces(pair.candidate_entities or []))
        ref = Counter(surface_key(s) for s in _surfaces(pair.reference_entities or []))
        if not cand:
            empty_candidates += 1
        if not ref:
            empty_references += 1
        matched += sum((cand & ref).values())
        cand_total += sum(cand.values())
        ref_total += sum(ref.values())
    return matched, cand_total, ref_total, empty_candidates, empty_references


def ne_pr(pairs: Sequence[EvalPair]) -> tuple[float, float]:
    """Micro-averaged precision and recall of entity surface multisets,
    case-insensitive on NFC. A zero denominator reports 0."""
    matched, cand_total, ref_total, _, _ = _entity_counts(pairs)
    precision = matched / cand_total if cand_total else 0.0
    recall = matched / ref_total if ref_total else 0.0
    return precision, recall


# --- keyword F1 at 10 -------------------------------------------------------

def _phrase_key(phrase: str) -> str:
    return " ".join(porter_stem(tok) for tok in metric_tokenize(phrase))


def keyword_f_at_10(predicted: Sequence[str], gold: Iterable[str], k: int = 10) -> float:
    """F1 over the top-k predicted phrases with the fixed denominator k.

    Phrases match on stemmed, lowercased exact form. Raises on empty gold.
    """
    gold_keys = {_phrase_key(g) for g in gold}
    if not gold_keys:
        raise ValueError("gold keyword set is empty")
    top = {_phrase_key(p) for p in predicted[:k]}
    hits = len(top & gold_keys)
    precision = hits / k
    recall = hits / len(gold_keys)
    if precision + recall == 0.0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def keyword_f_at_10_corpus(
    instances: Iterable[tuple[Sequence[str], Iterable[str]]],
    k: int = 10,
) -> tuple[float, int]:
    """Mean instance score; instances with empty gold are skipped and
    counted. Returns (score, skipped)."""
    scores = []
    skipped = 0
    for predicted, gold in instances:
        try:
            scores.append(keyword_f_at_10(predicted, gold, k))
        except ValueError:
            skipped += 1
    return (fmean(scores) if scores else 0.0), skipped


# --- report -----------------------------------------------------------------

@dataclass
class MetricReport:
    corpus: dict[str, float]
    counts: dict[str, int]
    flags: dict[str, Any]
    per_instance: list[dict[str, Any]]

    def to_json(self) -> dict[str, Any]:
        return {
            "corpus": self.corpus,
            "counts": self.counts,
            "flags": self.flags,
            "per_instance": self.per_instance,
        }


def evaluate(pairs: Sequence[EvalPair], idf: IdfTable | None = None) -> MetricReport:
    """Score all caption metrics over the pairs.

    Entity precision/recall appears only when at least one pair carries
    entity lists. Flags record undefined-denominator cases.
    """
    if not pairs:
        raise ValueError("evaluate needs at least one pair")
    if idf is None:
        idf = build_idf(pairs)
    single_image = idf.n_images < 2
    flags: dict[str, Any] = {}
    corpus: dict[str, float] = {
        "bleu4": bleu4(pairs),
        "rouge_l": rouge_l(pairs),
        "meteor_lite": meteor_lite(pairs),
    }
    if single_image:
        flags["cider_zero_idf"] = True
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            corpus["cider_d"] = cider_d(pairs, idf)
    else:
        corpus["cider_d"] = cider_d(pairs, idf)
    counts = {"pairs": len(pairs)}
    has_entities = any(p.candidate_entities is not None or p.reference_entities is not None
                       for p in pairs)
    if has_entities:
        matched, cand_total, ref_total, empty_cand, empty_ref = _entity_counts(pairs)
        corpus["ne_precision"] = matched / cand_total if cand_total else 0.0
        corpus["ne_recall"] = matched / ref_total if ref_total else 0.0
        counts["ne_empty_candidates"] = empty_cand
        counts["ne_empty_references"] = empty_ref
        if cand_total == 0:
            flags["ne_precision_undefined"] = True
        if ref_total == 0:
            flags["ne_recall_undefined"] = True
    per_instance = [
        {
            "instance_id": p.instance_id,
            "bleu4": sentence_bleu4(p.candidate, p.references),
            "rouge_l": rouge_l_sentence(p.candidate, p.references),
            "meteor_lite": meteor_lite_sentence(p.candidate, p.references),
            "cider_d": cider_d_instance(p.candidate, p.references, idf),
        }
        for p in pairs
    ]
    return MetricReport(corpus=corpus, counts=counts, flags=flags, per_instance=per_instance)
