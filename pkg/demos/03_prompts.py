"""Render the three instruction families and show token budgets at work.

Every training instance becomes a (prompt, target) pair. The wording is
frozen; only the slotted-in text varies, and each slot is clipped to its
token budget before insertion so downstream models see bounded inputs.
"""
from contextcap import (
    TokenBudget,
    WhitespaceTokenizer,
    render_caption_prompt,
    render_entailment_prompt,
    render_keywords_prompt,
)

CONTEXT = (
    "Crowds filled the square on Saturday as the city marked the reopening "
    "of the concert hall after a two-year renovation."
)


def show(label, rec):
    print(f"[{label}] prompt_tokens={rec.prompt_tokens} target_tokens={rec.target_tokens}")
    print("  prompt:", rec.prompt)
    print("  target:", rec.target)


def main():
    show("caption", render_caption_prompt(CONTEXT, caption="A crowd outside the hall"))
    show("caption+entities", render_caption_prompt(
        CONTEXT, entities=["Anna Kowalski", "Vienna"], caption="Anna Kowalski in Vienna"))
    show("entailment/yes", render_entailment_prompt(
        "A crowd outside the hall", CONTEXT, entails=True))
    show("entailment/no", render_entailment_prompt(
        "An empty parking lot", CONTEXT, entails=False))
    show("keywords", render_keywords_prompt(CONTEXT, ["concert hall", "reopening"]))

    # Budgets clip each slot independently; the fixed wording is never cut.
    tok = WhitespaceTokenizer()
    tiny = TokenBudget(context_max=8, caption_max=4, entity_max=3)
    rec = render_caption_prompt(CONTEXT, budget=tiny, tokenizer=tok,
                                caption="a long caption that will be clipped hard")
    print("\nwith context_max=8, caption_max=4:")
    show("caption/clipped", rec)
    kept = tok.clip(CONTEXT, tiny.context_max)
    print("  context kept:", repr(kept))


if __name__ == "__main__":
    main()
