"""Shared fixtures plus the acceptance-criteria summary.

Acceptance tests register their criterion before asserting and mark it
passed at the end; the terminal summary prints one PASS/FAIL line per
criterion that ran.
"""

from __future__ import annotations

_acceptance: dict[str, str] = {}


def acceptance_start(name: str) -> None:
    _acceptance.setdefault(name, "FAIL")


def acceptance_pass(name: str) -> None:
    _acceptance[name] = "PASS"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, status in _acceptance.items():
        terminalreporter.write_line(f"{status}  {name}")


# --- fixture builders --------------------------------------------------------

def cleaning_fixture_rows() -> tuple[list[dict], list[dict]]:
    """100 caption records: 77 keepers, 10 later exact duplicates, 5 short
    (4 words), 5 long (32 words), 3 without an image uri. Violations are
    disjoint by construction."""
    articles = [{"article_id": "a0", "body": "A report about many events in several places.",
                 "source": "unit", "keywords": ["events"], "metadata": {}}]
    captions: list[dict] = []

    def add(record_id: str, caption: str, uri: str = "http://img/x.jpg") -> None:
        captions.append({
            "record_id": record_id,
            "image_id": f"img-{record_id}",
            "image_uri": uri,
            "image_hash": None,
            "caption": caption,
            "article_id": "a0",
        })

    keepers = [
        f"unique scene number {i} captured by a photographer on site"  # 10 words
        for i in range(77)
    ]
    for i, caption in enumerate(keepers):
        add(f"k{i:03d}", caption)
    for i in range(10):
        add(f"d{i:03d}", keepers[i])  # exact duplicate of an earlier keeper
    for i in range(5):
        add(f"s{i:03d}", f"short caption number {i}")  # 4 words
    for i in range(5):
        filler = " ".join(f"w{j}" for j in range(29))
        add(f"l{i:03d}", f"long caption {i} {filler}")  # 32 words
    for i in range(3):
        add(f"m{i:03d}", f"record without any image shows crowd scene {i}", uri="")
    assert len(captions) == 100
    return articles, captions


PEOPLE = ["John Garrison", "Mark Pattinson", "Alice Smith", "Priya Nair", "Tom Alvarez",
          "Mei Lin", "Omar Haddad", "Eva Novak"]
PLACES = ["Berlin", "London", "Paris", "Madrid", "Oslo", "Cairo", "Tokyo", "Lima"]
ORGS = ["Acme Corp", "Globex", "Initech", "Umbrella Group"]
EVENTS = ["Harvest Festival", "Winter Games", "Jazz Week"]
FACS = ["Central Station", "City Stadium", "Opera House"]
LOCS = ["North River", "Green Valley", "East Coast"]


def synth_gazetteer_lines() -> str:
    pairs = ([(name, "PERSON") for name in PEOPLE]
             + [(name, "GPE") for name in PLACES]
             + [(name, "ORG") for name in ORGS]
             + [(name, "EVENT") for name in EVENTS]
             + [(name, "FAC") for name in FACS]
             + [(name, "LOC") for name in LOCS])
    return "".join(f"{surface}\t{etype}\n" for surface, etype in pairs)


def synth_corpus_rows(n_records: int, seed: int) -> tuple[list[dict], list[dict]]:
    """Deterministic synthetic news corpus with entity-bearing captions."""
    from random import Random

    rng = Random(seed)
    articles = []
    captions = []
    n_articles = max(1, n_records // 2)
    for a in range(n_articles):
        topic = rng.choice(["markets", "sports", "culture", "weather", "transit"])
        person = rng.choice(PEOPLE)
        place = rng.choice(PLACES)
        body = (f"Article {a} covers {topic} news. {person} spoke in {place} on day {a}. "
                f"Officials described the {topic} situation in detail and promised updates. "
                f"Residents of {place} followed the story closely throughout the week.")
        articles.append({"article_id": f"a{a:05d}", "body": body, "source": "synth",
                         "keywords": [topic, place.lower(), "news"], "metadata": {}})
    templates = [
        "{person} performing in {place}, April 2015",
        "{person} attends the {event} at {fac} in {place}",
        "{org} opens a new office in {place} this spring",
        "Crowd gathers near {loc} during the {event} celebrations",
        "{person} meets {person2} in {place} before the summit",
        "General view of the skyline on a cloudy afternoon number {i}",
    ]
    for i in range(n_records):
        template = templates[rng.randrange(len(templates))]
        person, person2 = rng.sample(PEOPLE, 2)
        caption = template.format(
            person=person, person2=person2, place=rng.choice(PLACES),
            event=rng.choice(EVENTS), fac=rng.choice(FACS), org=rng.choice(ORGS),
            loc=rng.choice(LOCS), i=i,
        )
        caption = f"{caption} near landmark {i}"  # keep captions unique
        captions.append({
            "record_id": f"r{i:05d}",
            "image_id": f"im{i:05d}",
            "image_uri": f"http://images.example/{i}.jpg",
            "image_hash": f"h{i:05d}",
            "caption": caption,
            "article_id": f"a{rng.randrange(n_articles):05d}",
        })
    return articles, captions
