import numpy as np
import pytest

from ticketclf.ingest import Corpus, Ticket

SAMPLE_TICKET = {
    "key": "HTTPCLIENT-126",
    "summary": "Default charset",
    "description": (
        "As defined in RFC2616 the default character set is ISO-8859-1 an not US-ASCII \n"
        "as defined in HttpMethodBase. See \"3.7.1 Canonicalization and Text Defaults\" at\n"
        "RFC 2616"
    ),
    "classified": "IMPROVEMENT",
    "type": "BUG",
    "label": "NBUG",
}


def ticket(key, summary, description="", bug=False):
    return Ticket(key=key, summary=summary, description=description,
                  classified="BUG" if bug else "RFE", type="BUG",
                  label="BUG" if bug else "NBUG")


def small_corpus(docs, labels=None):
    labels = labels if labels is not None else [i % 2 == 0 for i in range(len(docs))]
    return Corpus(ticket(f"T-{i}", d, bug=b) for i, (d, b) in enumerate(zip(docs, labels)))


@pytest.fixture
def sample_ticket():
    return Ticket(**SAMPLE_TICKET)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    rows = []
    for outcome in ("passed", "failed", "skipped"):
        for rep in terminalreporter.stats.get(outcome, []):
            props = dict(getattr(rep, "user_properties", []))
            if "criterion" in props and rep.when in ("call", "setup"):
                rows.append((props["criterion"], outcome, props.get("detail", ""), rep))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, detail, rep in sorted(rows, key=lambda r: int(r[0].split(".")[0])):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[outcome]
        if outcome == "skipped" and isinstance(rep.longrepr, tuple):
            detail = rep.longrepr[2]
        elif outcome == "failed":
            detail = str(rep.longrepr).strip().splitlines()[-1][:160]
        terminalreporter.write_line(f"{status}  {name}  {detail}".rstrip())
