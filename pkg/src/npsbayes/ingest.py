"""Survey ingestion and posterior-state persistence.

Scores on the 0-10 recommendation scale are bucketed as detractors (0-6),
passives (7-8) and promoters (9-10).  A :class:`PosteriorState` keeps the
initial prior, the running posterior and the list of applied batches, and
is stored as pretty-printed JSON so quarter-over-quarter updates can be
audited by eye.
"""

from __future__ import annotations

import csv
import enum
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DataError, ScoreError, StateFormatError, StateInvariantError
from .model import Counts, DirichletParams, update_posterior

STATE_FORMAT_VERSION = 1


class Category(enum.IntEnum):
    DETRACTOR = 1
    PASSIVE = 2
    PROMOTER = 3


@dataclass(frozen=True)
class SurveyRecord:
    score: int
    label: str | None = None

    def __post_init__(self):
        if isinstance(self.score, bool) or not isinstance(self.score, int):
            raise ScoreError(f"score must be an integer, got {self.score!r}")
        if not 0 <= self.score <= 10:
            raise ScoreError(f"score must be in 0..10, got {self.score}")


def categorize_score(score: int) -> Category:
    if isinstance(score, bool) or not isinstance(score, int):
        raise ScoreError(f"score must be an integer, got {score!r}")
    if not 0 <= score <= 10:
        raise ScoreError(f"score must be in 0..10, got {score}")
    if score <= 6:
        return Category.DETRACTOR
    if score <= 8:
        return Category.PASSIVE
    return Category.PROMOTER


def tally_scores(records) -> Counts:
    """Category counts for a sequence of records or bare integer scores."""
    tally = [0, 0, 0]
    for rec in records:
        score = rec.score if isinstance(rec, SurveyRecord) else rec
        tally[categorize_score(score) - 1] += 1
    return Counts(*tally)


def _parse_score(text, row):
    text = (text or "").strip()
    if not text:
        raise ScoreError("missing score", row=row)
    try:
        score = int(text)
    except ValueError:
        raise ScoreError(f"score {text!r} is not an integer", row=row) from None
    if not 0 <= score <= 10:
        raise ScoreError(f"score {score} outside 0..10", row=row)
    return score


def read_scores(path) -> list[SurveyRecord]:
    """Read a CSV with a ``score`` column and an optional ``label`` column.

    Row numbers in errors count the header as row 1.
    """
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from exc
    with fh:
        # csv.reader rather than DictReader: blank rows are missing scores, not skippable
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty file, expected a header row")
    header = [h.strip() for h in rows[0]]
    if "score" not in header:
        raise DataError(f"{path}: header has no 'score' column")
    score_col = header.index("score")
    label_col = header.index("label") if "label" in header else None
    while len(rows) > 1 and not rows[-1]:
        rows.pop()
    records = []
    for row_no, row in enumerate(rows[1:], start=2):
        score = _parse_score(row[score_col] if score_col < len(row) else "", row_no)
        label = None
        if label_col is not None and label_col < len(row):
            label = row[label_col].strip() or None
        records.append(SurveyRecord(score, label))
    return records


@dataclass(frozen=True)
class HistoryEntry:
    label: str
    counts: Counts


@dataclass
class PosteriorState:
    prior: DirichletParams
    params: DirichletParams
    history: list[HistoryEntry] = field(default_factory=list)

    @classmethod
    def fresh(cls, prior: DirichletParams) -> PosteriorState:
        return cls(prior, prior, [])

    def apply(self, counts: Counts, label: str | None = None) -> PosteriorState:
        """Return the state after one more batch of counts."""
        if label is None:
            label = f"batch{len(self.history) + 1}"
        return PosteriorState(
            self.prior,
            update_posterior(self.params, counts),
            [*self.history, HistoryEntry(label, counts)],
        )

    def expected_params(self) -> DirichletParams:
        p = self.prior
        for entry in self.history:
            p = update_posterior(p, entry.counts)
        return p

    def check(self):
        expected = self.expected_params()
        for got, want in zip(self.params.as_tuple(), expected.as_tuple()):
            if not math.isclose(got, want, rel_tol=1e-12, abs_tol=0.0):
                raise StateInvariantError(
                    f"alpha {list(self.params.as_tuple())} does not equal prior plus "
                    f"history {list(expected.as_tuple())}"
                )

    def to_dict(self) -> dict:
        return {
            "format_version": STATE_FORMAT_VERSION,
            "prior": list(self.prior.as_tuple()),
            "alpha": list(self.params.as_tuple()),
            "history": [
                {"label": e.label, "counts": list(e.counts.as_tuple())} for e in self.history
            ],
        }

    @classmethod
    def from_dict(cls, data) -> PosteriorState:
        if not isinstance(data, dict):
            raise StateFormatError("state must be a JSON object")
        version = data.get("format_version")
        if version != STATE_FORMAT_VERSION:
            raise StateFormatError(f"unsupported format_version {version!r}")
        try:
            prior = DirichletParams.from_sequence(data["prior"])
            params = DirichletParams.from_sequence(data["alpha"])
            history = [
                HistoryEntry(str(e["label"]), Counts.from_sequence(e["counts"]))
                for e in data["history"]
            ]
        except (KeyError, TypeError, ValueError, DataError) as exc:
            raise StateFormatError(f"malformed state: {exc}") from exc
        state = cls(prior, params, history)
        state.check()
        return state


def save_state(state: PosteriorState, path) -> None:
    state.check()
    text = json.dumps(state.to_dict(), indent=2) + "\n"
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def load_state(path) -> PosteriorState:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read state file {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StateFormatError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    return PosteriorState.from_dict(data)
