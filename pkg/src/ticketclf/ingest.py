"""Ticket corpus loading, labeling and retrieval from a Jira-style REST API.

The corpus file is a UTF-8 JSON array whose elements carry exactly six
fields::

    {
      "key": "HTTPCLIENT-126",
      "summary": "Default charset",
      "description": "...",
      "classified": "IMPROVEMENT",
      "type": "BUG",
      "label": "NBUG"
    }

Curation files map ticket keys to their curated category, one
``key<TAB>classification`` pair per line; ``#`` starts a comment.
"""
from __future__ import annotations

import json
import logging
import os
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
import requests

logger = logging.getLogger(__name__)

BUG = "BUG"
NBUG = "NBUG"
LABELS = (BUG, NBUG)

TICKET_FIELDS = ("key", "summary", "description", "classified", "type", "label")
TOKEN_ENV_VAR = "TICKETCLF_ITS_TOKEN"


class CorpusError(ValueError):
    """Raised when a corpus or curation file violates its schema."""


class TransportError(RuntimeError):
    """Network-level failure talking to the issue tracker (retryable)."""


class TicketNotFound(LookupError):
    pass


class UnlabeledTicketsError(CorpusError):
    def __init__(self, keys: Sequence[str]):
        self.keys = list(keys)
        super().__init__("tickets missing from curation map: " + ", ".join(self.keys))


@dataclass(frozen=True)
class Ticket:
    key: str
    summary: str
    description: str = ""
    classified: str = ""
    type: str = ""
    label: str | None = None

    @property
    def project(self) -> str:
        return project_of(self.key)

    @property
    def is_bug(self) -> bool:
        return self.label == BUG


def project_of(key: str) -> str:
    """Project name encoded in an ITS key (``"LUCENE-12"`` -> ``"LUCENE"``)."""
    return key.split("-", 1)[0]


def label_for(classified: str) -> str:
    return BUG if classified == BUG else NBUG


class Corpus(Sequence[Ticket]):
    """Immutable ordered collection of labeled tickets with unique keys."""

    def __init__(self, tickets: Iterable[Ticket] = ()):
        tickets = tuple(tickets)
        seen = set()
        for t in tickets:
            if not t.key:
                raise CorpusError("ticket with empty key")
            if t.key in seen:
                raise CorpusError(f"duplicate ticket key {t.key!r}")
            if t.label not in LABELS:
                raise CorpusError(f"ticket {t.key!r} has invalid label {t.label!r}")
            seen.add(t.key)
        self._tickets = tickets

    def __getitem__(self, i):
        if isinstance(i, slice):
            return Corpus(self._tickets[i])
        return self._tickets[i]

    def __len__(self) -> int:
        return len(self._tickets)

    def __eq__(self, other) -> bool:
        return isinstance(other, Corpus) and self._tickets == other._tickets

    def __repr__(self) -> str:
        return f"Corpus({len(self)} tickets)"

    @property
    def tickets(self) -> tuple[Ticket, ...]:
        return self._tickets

    def labels(self):
        """Binary label vector, 1 for BUG."""
        return np.array([1 if t.label == BUG else 0 for t in self._tickets], dtype=np.int64)

    def projects(self) -> list[str]:
        return list(OrderedDict.fromkeys(t.project for t in self._tickets))

    def subset(self, indices) -> "Corpus":
        return Corpus(self._tickets[int(i)] for i in indices)

    def by_project(self, project: str) -> "Corpus":
        return Corpus(t for t in self._tickets if t.project == project)


def _ticket_from_record(rec, index: int) -> Ticket:
    if not isinstance(rec, dict):
        raise CorpusError(f"element {index} is not a JSON object")
    unknown = set(rec) - set(TICKET_FIELDS)
    if unknown:
        raise CorpusError(f"element {index}: unknown fields {sorted(unknown)}")
    for name in ("key", "summary", "classified", "label"):
        if name not in rec:
            raise CorpusError(f"element {index}: missing field {name!r}")
    description = rec.get("description") or ""
    label = rec["label"]
    if label not in LABELS:
        raise CorpusError(f"element {index} ({rec['key']}): unknown label {label!r}")
    if label != label_for(rec["classified"]):
        raise CorpusError(
            f"element {index} ({rec['key']}): label {label!r} inconsistent with "
            f"classified {rec['classified']!r}"
        )
    return Ticket(
        key=str(rec["key"]),
        summary=rec["summary"] or "",
        description=description,
        classified=rec["classified"],
        type=rec.get("type") or "",
        label=label,
    )


def load_corpus(path) -> Corpus:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        line = text.splitlines()[exc.lineno - 1] if text.splitlines() else ""
        raise CorpusError(
            f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}\n"
            f"    {line.strip()}"
        ) from exc
    if not isinstance(data, list):
        raise CorpusError(f"{path}: top-level JSON value must be an array")
    return Corpus(_ticket_from_record(rec, i) for i, rec in enumerate(data))


def save_corpus(corpus: Corpus, path) -> None:
    records = [asdict(t) for t in corpus]
    Path(path).write_text(json.dumps(records, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def load_raw_tickets(path) -> list[Ticket]:
    """Load unlabeled tickets (``key``, ``summary``, ``description``, ``type``)."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    raw = []
    for i, rec in enumerate(data):
        if "key" not in rec:
            raise CorpusError(f"raw ticket {i} has no key")
        raw.append(
            Ticket(
                key=rec["key"],
                summary=rec.get("summary") or "",
                description=rec.get("description") or "",
                type=rec.get("type") or "",
            )
        )
    return raw


def load_curation(path) -> dict[str, str]:
    curation: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split("\t")]
        if len(parts) != 2 or not all(parts):
            raise CorpusError(f"{path}:{lineno}: expected 'key<TAB>classification'")
        key, classified = parts
        if key in curation:
            raise CorpusError(f"{path}:{lineno}: duplicate key {key!r}")
        curation[key] = classified
    return curation


def attach_labels(raw: Iterable[Ticket], curation: Mapping[str, str]) -> Corpus:
    raw = list(raw)
    missing = [t.key for t in raw if t.key not in curation]
    if missing:
        raise UnlabeledTicketsError(missing)
    return Corpus(
        Ticket(
            key=t.key,
            summary=t.summary,
            description=t.description,
            classified=curation[t.key],
            type=t.type,
            label=label_for(curation[t.key]),
        )
        for t in raw
    )


@dataclass(frozen=True)
class ProjectStats:
    project: str
    n_reports: int
    n_bug: int
    n_nbug: int


def corpus_stats(corpus: Corpus) -> tuple[list[ProjectStats], ProjectStats]:
    """Per-project BUG/NBUG counts plus a ``"Total"`` row."""
    counts: OrderedDict[str, list[int]] = OrderedDict()
    for t in corpus:
        c = counts.setdefault(t.project, [0, 0])
        c[0 if t.label == BUG else 1] += 1
    rows = [ProjectStats(p, b + n, b, n) for p, (b, n) in counts.items()]
    total = ProjectStats(
        "Total",
        sum(r.n_reports for r in rows),
        sum(r.n_bug for r in rows),
        sum(r.n_nbug for r in rows),
    )
    return rows, total


def format_stats(rows: Sequence[ProjectStats], total: ProjectStats) -> str:
    lines = ["project\treports\tbug\tnbug"]
    for r in list(rows) + [total]:
        lines.append(f"{r.project}\t{r.n_reports}\t{r.n_bug}\t{r.n_nbug}")
    return "\n".join(lines)


class JiraClient:
    """Minimal read-only client for ``GET /rest/api/2/issue/{key}``."""

    def __init__(self, base_url: str, token: str | None = None, timeout: float = 30.0,
                 session: requests.Session | None = None):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.session = session or requests.Session()
        token = token if token is not None else os.environ.get(TOKEN_ENV_VAR)
        self.headers = {"Accept": "application/json"}
        if token:
            self.headers["Authorization"] = f"Bearer {token}"

    def fetch_ticket(self, key: str) -> Ticket:
        url = f"{self.base_url}/rest/api/2/issue/{key}"
        try:
            resp = self.session.get(
                url,
                headers=self.headers,
                params={"fields": "summary,description,issuetype"},
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise TransportError(f"{key}: {exc}") from exc
        if resp.status_code == 404:
            raise TicketNotFound(key)
        if resp.status_code >= 400:
            raise TransportError(f"{key}: HTTP {resp.status_code}")
        fields = resp.json().get("fields", {})
        issuetype = fields.get("issuetype") or {}
        return Ticket(
            key=key,
            summary=fields.get("summary") or "",
            description=fields.get("description") or "",
            type=(issuetype.get("name") or "").upper(),
        )

    def fetch_many(self, keys: Sequence[str], max_workers: int = 4):
        """Fetch tickets with bounded concurrency.

        Returns ``(tickets, failures)`` where ``failures`` maps key to an error message.
        Ticket order follows ``keys``.
        """

        def one(key):
            try:
                return key, self.fetch_ticket(key), None
            except (TransportError, TicketNotFound) as exc:
                return key, None, f"{type(exc).__name__}: {exc}"

        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(one, keys))
        tickets = [t for _, t, _ in results if t is not None]
        failures = {k: err for k, _, err in results if err is not None}
        for k, err in failures.items():
            logger.warning("failed to fetch %s: %s", k, err)
        return tickets, failures


def fetch_ticket(endpoint: str, key: str) -> Ticket:
    return JiraClient(endpoint).fetch_ticket(key)
