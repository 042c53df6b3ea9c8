"""Dataset construction and evaluation toolkit for context-assisted image
captioning, contextual visual entailment, and keyword extraction.

Submodules:

- corpus: ingestion, cleaning, splitting, keyword dataset construction
- entities: typed entity spans, gazetteer tagging, signature indexing
- negatives: synthetic entailment negatives (N1/N2/N3) and assembly
- prompts: instruction prompt rendering under token budgets
- metrics: BLEU-4, ROUGE-L, reduced METEOR, CIDEr-D, entity P/R, F1@10
- annotation: peer-verified caption editing over an event log
- api: HTTP wrapper around the annotation store
- cli: the contextcap command
"""

__version__ = "0.1.0"

# Version of the JSONL row schemas written and read by this package.
FORMAT_VERSION = 1

from .corpus import (  # noqa: E402
    Article,
    CaptionRecord,
    Corpus,
    ImageRef,
    KeywordInstance,
    Split,
    build_keyword_dataset,
    clean,
    ingest,
    load_corpus_dir,
    save_corpus,
    split,
)
from .entities import (  # noqa: E402
    Entity,
    EntityType,
    GazetteerTagger,
    TaggedCaption,
    ingest_external_tags,
    signature_index,
    signature_of,
)
from .negatives import (  # noqa: E402
    EntailmentInstance,
    GenerationSkipped,
    Label,
    MixConfig,
    NegClass,
    assemble,
    gen_n1,
    gen_n2,
    gen_n3,
)
from .prompts import (  # noqa: E402
    InstructionRecord,
    TokenBudget,
    WhitespaceTokenizer,
    render_caption_prompt,
    render_entailment_prompt,
    render_keywords_prompt,
)
from .metrics import (  # noqa: E402
    EvalPair,
    IdfTable,
    MetricReport,
    bleu4,
    build_idf,
    cider_d,
    evaluate,
    keyword_f_at_10,
    meteor_lite,
    metric_tokenize,
    ne_pr,
    rouge_l,
)
from .annotation import AnnotationStore, SpanEdit, TaskStatus  # noqa: E402

__all__ = [
    "__version__",
    "FORMAT_VERSION",
    "Article", "CaptionRecord", "Corpus", "ImageRef", "KeywordInstance", "Split",
    "build_keyword_dataset", "clean", "ingest", "load_corpus_dir", "save_corpus", "split",
    "Entity", "EntityType", "GazetteerTagger", "TaggedCaption",
    "ingest_external_tags", "signature_index", "signature_of",
    "EntailmentInstance", "GenerationSkipped", "Label", "MixConfig", "NegClass",
    "assemble", "gen_n1", "gen_n2", "gen_n3",
    "InstructionRecord", "TokenBudget", "WhitespaceTokenizer",
    "render_caption_prompt", "render_entailment_prompt", "render_keywords_prompt",
    "EvalPair", "IdfTable", "MetricReport", "bleu4", "build_idf", "cider_d",
    "evaluate", "keyword_f_at_10", "meteor_lite", "metric_tokenize", "ne_pr", "rouge_l",
    "AnnotationStore", "SpanEdit", "TaskStatus",
]
