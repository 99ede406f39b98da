"""Generated ticket corpora for offline experiments and tests."""
from __future__ import annotations

import numpy as np

from .ingest import BUG, NBUG, Corpus, Ticket

FILLER = """
when the we it this that using with on in for to of is not and from after before
version new user server client request response file configuration module method
class value default code config release build test page data query index session
node property connection handler method call return instance current following
""".split()

BUG_TERMS = """
crash exception nullpointerexception stacktrace fails failure error broken hang
deadlock incorrect wrong segfault leak thrown corrupt unexpected regression npe
timeout infinite loop cannot throws invalid missing lost race
""".split()

NBUG_TERMS = """
add support feature improve documentation refactor option enhancement allow
provide javadoc upgrade cleanup simplify extend proposal configurable api
optional introduce rename deprecate example tutorial performance faster
""".split()

NBUG_CATEGORIES = ("RFE", "IMPROVEMENT", "DOCUMENTATION", "REFACTORING", "BUILD_SYSTEM", "TEST", "OTHER")
TYPES = ("BUG", "IMPROVEMENT", "NEW FEATURE", "TASK", "WISH")


def _sentence(rng, n_words: int, class_terms, other_terms, project_terms, signal: float,
              leak: float) -> str:
    words = []
    for _ in range(n_words):
        u = rng.random()
        if u < signal:
            pool = other_terms if rng.random() < leak else class_terms
        elif u < signal + 0.15:
            pool = project_terms
        else:
            pool = FILLER
        words.append(pool[int(rng.integers(len(pool)))])
    return " ".join(words)


def make_corpus(n_tickets: int = 400, projects=("ALPHA", "BETA"), bug_fraction: float = 0.4,
                signal: float = 0.3, leak: float = 0.1, seed: int = 0) -> Corpus:
    """Tickets whose wording is statistically tied to their label.

    ``signal`` is the share of words drawn from the label's own vocabulary and
    ``leak`` the chance such a word comes from the opposite vocabulary instead.
    Tickets are spread round-robin over ``projects``.
    """
    rng = np.random.default_rng(seed)
    project_terms = {p: [f"{p.lower()}{w}" for w in ("core", "store", "api", "util", "web")]
                     for p in projects}
    tickets = []
    counters = {p: 0 for p in projects}
    for i in range(n_tickets):
        project = projects[i % len(projects)]
        counters[project] += 1
        is_bug = rng.random() < bug_fraction
        own, other = (BUG_TERMS, NBUG_TERMS) if is_bug else (NBUG_TERMS, BUG_TERMS)
        summary = _sentence(rng, int(rng.integers(3, 8)), own, other, project_terms[project],
                            signal * 1.5, leak)
        description = _sentence(rng, int(rng.integers(15, 45)), own, other, project_terms[project],
                                signal, leak)
        classified = BUG if is_bug else NBUG_CATEGORIES[int(rng.integers(len(NBUG_CATEGORIES)))]
        tickets.append(Ticket(
            key=f"{project}-{counters[project]}",
            summary=summary,
            description=description,
            classified=classified,
            type=TYPES[int(rng.integers(len(TYPES)))],
            label=BUG if is_bug else NBUG,
        ))
    return Corpus(tickets)


def make_trigram_corpus(n_tickets: int = 200, seed: int = 0, project: str = "TRI") -> Corpus:
    """Tickets whose label is carried only by word order over three tokens.

    BUG tickets use the phrase "pa qa ra" or "sa qa ta"; NBUG tickets use
    "pa qa ta" or "sa qa ra".  The phrase is the whole summary and also sits in
    the description among filler words.  Inside a phrase every unigram and
    bigram occurs equally often in both classes, so the label is readable from
    tri-grams but not from any single word.
    """
    rng = np.random.default_rng(seed)
    bug_phrases = ("pa qa ra", "sa qa ta")
    nbug_phrases = ("pa qa ta", "sa qa ra")
    tickets = []
    for i in range(n_tickets):
        is_bug = i % 2 == 0
        phrase = (bug_phrases if is_bug else nbug_phrases)[int(rng.integers(2))]
        filler = lambda n: " ".join(FILLER[int(rng.integers(len(FILLER)))] for _ in range(n))
        tickets.append(Ticket(
            key=f"{project}-{i + 1}",
            summary=phrase,
            description=f"{filler(int(rng.integers(2, 6)))} {phrase} {filler(int(rng.integers(2, 6)))}",
            classified=BUG if is_bug else "IMPROVEMENT",
            type="BUG",
            label=BUG if is_bug else NBUG,
        ))
    return Corpus(tickets)
