"""Fixation ingestion: raw eye-tracking events to per-word averaged reading times.

Three word-based measures are produced per participant and then averaged
across the participants who read the text, counting skipped words as zero:

* first fixation: duration of the pass-1, order-1 fixation (0 if none)
* gaze duration: sum of all pass-1 fixation durations
* total fixation: sum of all fixation durations

The monotonicity 0 <= first <= gaze <= total holds per participant by
construction and is preserved by averaging.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import DataError
from .tables import read_tsv, rows_as_dicts, write_tsv

log = logging.getLogger(__name__)

FIXATION_COLUMNS = ("participant", "text_id", "word_index", "word", "pass", "order_in_pass", "duration_ms")

WORDS_COLUMNS = ("language", "text_id", "word_index", "word", "length", "ff_ms", "gd_ms", "tf_ms", "n_participants")

# Source-column adapters. "default" is the engine's own schema; "meco"
# maps the release's column names and can be patched per file with
# --map key=source_column overrides.
COLUMN_PRESETS: dict[str, dict[str, str]] = {
    "default": {c: c for c in FIXATION_COLUMNS},
    "meco": {
        "participant": "uniform_id",
        "text_id": "trialid",
        "word_index": "ianum",
        "word": "ia",
        "pass": "run",
        "order_in_pass": "fix_order_in_run",
        "duration_ms": "dur",
    },
}


@dataclass(frozen=True)
class Fixation:
    participant_id: str
    language: str
    text_id: int
    word_index: int
    duration: float
    pass_index: int
    within_pass_order: int


@dataclass(frozen=True)
class WordRecord:
    language: str
    text_id: int
    word_index: int
    surface: str
    first_fixation: float
    gaze_duration: float
    total_fixation: float
    n_participants: int
    length: int = field(default=0)

    def __post_init__(self):
        if self.length == 0:
            object.__setattr__(self, "length", len(self.surface))

    def measure(self, name: str) -> float:
        return {
            "first_fixation": self.first_fixation,
            "gaze_duration": self.gaze_duration,
            "total_fixation": self.total_fixation,
        }[name]


MEASURES = ("first_fixation", "gaze_duration", "total_fixation")


def compute_measures(fixations: Sequence[Fixation]) -> tuple[float, float, float]:
    """Per-participant (first_fixation, gaze_duration, total_fixation).

    All fixations must belong to one (participant, word); an empty list is
    a skip and yields (0, 0, 0).
    """
    first = 0.0
    gaze = 0.0
    total = 0.0
    seen_first = False
    for fx in fixations:
        if fx.duration < 0:
            raise DataError(
                f"negative fixation duration {fx.duration} for participant "
                f"{fx.participant_id!r}, text {fx.text_id}, word {fx.word_index}"
            )
        total += fx.duration
        if fx.pass_index == 1:
            gaze += fx.duration
            if fx.within_pass_order == 1 and not seen_first:
                first = fx.duration
                seen_first = True
    return first, gaze, total


def average_across_participants(triples: Sequence[tuple[float, float, float]]) -> tuple[float, float, float, int]:
    """Arithmetic mean of each measure over participants, zeros included."""
    n = len(triples)
    if n == 0:
        raise DataError("no participant triples to average")
    ff = sum(t[0] for t in triples) / n
    gd = sum(t[1] for t in triples) / n
    tf = sum(t[2] for t in triples) / n
    return ff, gd, tf, n


def aggregate_words(fixations: Iterable[Fixation], surfaces: Mapping[tuple[int, int], str]) -> list[WordRecord]:
    """Group fixation events into averaged WordRecords.

    The word inventory of a text is the union of word indices seen across
    participants; every participant with at least one fixation anywhere in
    the text contributes a triple for every word of that text, (0, 0, 0)
    for words they skipped.
    """
    by_word: dict[tuple[str, int, int], dict[str, list[Fixation]]] = {}
    text_participants: dict[tuple[str, int], set[str]] = {}

    for fx in fixations:
        key = (fx.language, fx.text_id, fx.word_index)
        by_word.setdefault(key, {}).setdefault(fx.participant_id, []).append(fx)
        text_participants.setdefault((fx.language, fx.text_id), set()).add(fx.participant_id)

    records: list[WordRecord] = []
    for key in sorted(by_word):
        language, text_id, word_index = key
        participants = sorted(text_participants[(language, text_id)])
        if not participants:
            log.warning("word %s omitted: no participants", key)
            continue
        per_part = by_word[key]
        triples = [compute_measures(per_part.get(pid, [])) for pid in participants]
        ff, gd, tf, n = average_across_participants(triples)
        records.append(
            WordRecord(
                language=language,
                text_id=text_id,
                word_index=word_index,
                surface=surfaces[(text_id, word_index)],
                first_fixation=ff,
                gaze_duration=gd,
                total_fixation=tf,
                n_participants=n,
            )
        )
    return records


def read_fixations_tsv(path, language: str, preset: str = "default", overrides: Mapping[str, str] | None = None) -> tuple[list[Fixation], dict[tuple[int, int], str]]:
    """Parse a fixation TSV into events plus the word surface inventory.

    Punctuation stays attached to the word exactly as delimited in the
    source; no normalization is applied.
    """
    if preset not in COLUMN_PRESETS:
        raise DataError(f"unknown column preset {preset!r}; have {sorted(COLUMN_PRESETS)}")
    colmap = dict(COLUMN_PRESETS[preset])
    if overrides:
        colmap.update(overrides)
    header, rows = read_tsv(path, expected_columns=list(colmap.values()))
    fixations: list[Fixation] = []
    surfaces: dict[tuple[int, int], str] = {}
    for lineno, row in enumerate(rows_as_dicts(header, rows), start=2):
        try:
            text_id = int(row[colmap["text_id"]])
            word_index = int(row[colmap["word_index"]])
            duration = float(row[colmap["duration_ms"]])
            pass_index = int(row[colmap["pass"]])
            order = int(row[colmap["order_in_pass"]])
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: bad numeric field: {exc}") from exc
        pid = row[colmap["participant"]]
        word = row[colmap["word"]]
        if duration < 0:
            raise DataError(
                f"{path}:{lineno}: negative fixation duration {duration} for "
                f"participant {pid!r}, text {text_id}, word {word_index} ({word!r})"
            )
        key = (text_id, word_index)
        prior = surfaces.get(key)
        if prior is None:
            surfaces[key] = word
        elif prior != word:
            log.warning("%s:%d: conflicting surface for text %d word %d: %r vs %r (keeping first)", path, lineno, text_id, word_index, prior, word)
        fixations.append(
            Fixation(
                participant_id=pid,
                language=language,
                text_id=text_id,
                word_index=word_index,
                duration=duration,
                pass_index=pass_index,
                within_pass_order=order,
            )
        )
    return fixations, surfaces


def ingest(path, language: str, preset: str = "default", overrides: Mapping[str, str] | None = None) -> list[WordRecord]:
    """Full ingest of one language file: parse, aggregate, average."""
    fixations, surfaces = read_fixations_tsv(path, language, preset, overrides)
    return aggregate_words(fixations, surfaces)


def write_words_tsv(path, records: Sequence[WordRecord], comments: Sequence[str] = ()) -> None:
    rows = [
        (r.language, r.text_id, r.word_index, r.surface, r.length, r.first_fixation, r.gaze_duration, r.total_fixation, r.n_participants)
        for r in records
    ]
    write_tsv(path, WORDS_COLUMNS, rows, comments=comments)


def read_words_tsv(path) -> list[WordRecord]:
    header, rows = read_tsv(path, expected_columns=WORDS_COLUMNS)
    records = []
    for row in rows_as_dicts(header, rows):
        rec = WordRecord(
            language=row["language"],
            text_id=int(row["text_id"]),
            word_index=int(row["word_index"]),
            surface=row["word"],
            first_fixation=float(row["ff_ms"]),
            gaze_duration=float(row["gd_ms"]),
            total_fixation=float(row["tf_ms"]),
            n_participants=int(row["n_participants"]),
        )
        if rec.length != int(row["length"]):
            raise DataError(
                f"{path}: length column {row['length']} does not match surface "
                f"{row['word']!r} for text {rec.text_id} word {rec.word_index}"
            )
        records.append(rec)
    return records
