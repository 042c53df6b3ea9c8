"""Instruction prompt rendering under fixed token budgets.

Each task fills a fixed template with clipped text segments. The default
fidelity mode reproduces the historical template strings byte for byte,
quirks included (the double space in "image  and", the lowercase
entity-aware caption prompt); normalized mode tidies whitespace and
casing for new datasets.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Protocol, Sequence

# Default budgets: article context, caption, and entity-list token caps.
DEFAULT_CONTEXT_TOKENS = 512
DEFAULT_CAPTION_TOKENS = 30
DEFAULT_ENTITY_TOKENS = 64

ENTITY_SEPARATOR = ", "
KEYWORD_TARGET_SEPARATOR = " , "


class Task(str, Enum):
    CAPTION = "caption"
    ENTAILMENT = "entailment"
    KEYWORDS = "keywords"


class Mode(str, Enum):
    FIDELITY = "fidelity"
    NORMALIZED = "normalized"


_TEMPLATES = {
    Mode.FIDELITY: {
        "caption": "What does the image describe based on the text {context} ?",
        "caption_entities": "what does the image describe about the names {entities} based on the text {context}?",
        "entailment": "Is the text {caption} consistent with the image  and the text {context} ?",
        "keywords": "What are the keywords in the article {context}?",
    },
    Mode.NORMALIZED: {
        "caption": "What does the image describe based on the text {context}?",
        "caption_entities": "What does the image describe about the names {entities} based on the text {context}?",
        "entailment": "Is the text {caption} consistent with the image and the text {context}?",
        "keywords": "What are the keywords in the article {context}?",
    },
}


@dataclass(frozen=True)
class TokenBudget:
    context_max: int = DEFAULT_CONTEXT_TOKENS
    caption_max: int = DEFAULT_CAPTION_TOKENS
    entity_max: int = DEFAULT_ENTITY_TOKENS

    def __post_init__(self):
        for name in ("context_max", "caption_max", "entity_max"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")


class Tokenizer(Protocol):
    def tokenize(self, text: str) -> list[str]: ...

    def count(self, text: str) -> int: ...

    def clip(self, text: str, max_tokens: int) -> str: ...


class WhitespaceTokenizer:
    """Splits on whitespace. Clipping keeps the first max_tokens tokens;
    text already within budget passes through unchanged."""

    def tokenize(self, text: str) -> list[str]:
        return text.split()

    def count(self, text: str) -> int:
        return len(text.split())

    def clip(self, text: str, max_tokens: int) -> str:
        tokens = text.split()
        if len(tokens) <= max_tokens:
            return text
        return " ".join(tokens[:max_tokens])


@dataclass
class InstructionRecord:
    task: Task
    prompt: str
    target: str
    prompt_tokens: int
    target_tokens: int
    instance_id: str = ""

    @property
    def token_counts(self) -> tuple[int, int]:
        return (self.prompt_tokens, self.target_tokens)


def _mode(fidelity: bool) -> Mode:
    return Mode.FIDELITY if fidelity else Mode.NORMALIZED


def _surface(entity) -> str:
    return getattr(entity, "surface", entity)


def render_caption_prompt(
    context: str,
    budget: TokenBudget | None = None,
    tokenizer: Tokenizer | None = None,
    entities: Sequence | None = None,
    caption: str = "",
    fidelity: bool = True,
    instance_id: str = "",
) -> InstructionRecord:
    """Captioning instruction; with entities, the entity-aware variant.

    The context is clipped to the context budget before insertion; the
    entity list joins with ", " and is clipped to the entity budget. The
    target is the (clipped) reference caption when one is supplied.
    """
    if not context:
        raise ValueError("context must be non-empty")
    budget = budget or TokenBudget()
    tokenizer = tokenizer or WhitespaceTokenizer()
    templates = _TEMPLATES[_mode(fidelity)]
    ctx = tokenizer.clip(context, budget.context_max)
    if entities:
        joined = ENTITY_SEPARATOR.join(_surface(e) for e in entities)
        ents = tokenizer.clip(joined, budget.entity_max)
        prompt = templates["caption_entities"].format(entities=ents, context=ctx)
    else:
        prompt = templates["caption"].format(context=ctx)
    target = tokenizer.clip(caption, budget.caption_max) if caption else ""
    return InstructionRecord(Task.CAPTION, prompt, target,
                             tokenizer.count(prompt), tokenizer.count(target), instance_id)


def render_entailment_prompt(
    caption: str,
    context: str,
    entails: bool,
    budget: TokenBudget | None = None,
    tokenizer: Tokenizer | None = None,
    fidelity: bool = True,
    instance_id: str = "",
) -> InstructionRecord:
    """Yes/no consistency question over a caption and its article context."""
    if not caption:
        raise ValueError("caption must be non-empty")
    if not context:
        raise ValueError("context must be non-empty")
    budget = budget or TokenBudget()
    tokenizer = tokenizer or WhitespaceTokenizer()
    template = _TEMPLATES[_mode(fidelity)]["entailment"]
    prompt = template.format(
        caption=tokenizer.clip(caption, budget.caption_max),
        context=tokenizer.clip(context, budget.context_max),
    )
    target = "Yes" if entails else "No"
    return InstructionRecord(Task.ENTAILMENT, prompt, target,
                             tokenizer.count(prompt), tokenizer.count(target), instance_id)


def render_keywords_prompt(
    article: str,
    gold: Sequence[str],
    budget: TokenBudget | None = None,
    tokenizer: Tokenizer | None = None,
    fidelity: bool = True,
    instance_id: str = "",
) -> InstructionRecord:
    """Keyword-listing instruction; the target joins gold keywords with " , "."""
    if not article:
        raise ValueError("article must be non-empty")
    if not gold:
        raise ValueError("gold keywords must be non-empty")
    budget = budget or TokenBudget()
    tokenizer = tokenizer or WhitespaceTokenizer()
    template = _TEMPLATES[_mode(fidelity)]["keywords"]
    prompt = template.format(context=tokenizer.clip(article, budget.context_max))
    target = KEYWORD_TARGET_SEPARATOR.join(gold)
    return InstructionRecord(Task.KEYWORDS, prompt, target,
                             tokenizer.count(prompt), tokenizer.count(target), instance_id)


def record_to_row(record: InstructionRecord) -> dict:
    return {
        "task": record.task.value,
        "prompt": record.prompt,
        "target": record.target,
        "prompt_tokens": record.prompt_tokens,
        "target_tokens": record.target_tokens,
        "instance_id": record.instance_id,
    }
