"""Overlapping analysis windows over the corpus date range.

Windows are half-open ``[start, end)`` so boundary events are never counted
twice. A new window starts every ``step_days`` from the range start for as
long as the start lies inside the range; with the default 7-day window and
4-day step, consecutive windows overlap. Trailing windows that would run
past the range end are clipped and kept by default — this is the endpoint
policy that reproduces the documented 182-slot reference setup over the
range 2010-04-04 .. 2012-03-31 (see README), and it can be disabled via
``include_trailing_partial=False`` to keep full windows only.
"""
from __future__ import annotations

import csv
import logging
from bisect import bisect_left
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from pathlib import Path

from .ingest import Comment, Corpus, Post, format_timestamp, parse_timestamp

logger = logging.getLogger(__name__)


def as_utc_instant(value: date | datetime) -> datetime:
    """Normalize a date (midnight UTC) or datetime to an aware UTC datetime."""
    if isinstance(value, datetime):
        if value.tzinfo is None:
            return value.replace(tzinfo=timezone.utc)
        return value.astimezone(timezone.utc)
    return datetime(value.year, value.month, value.day, tzinfo=timezone.utc)


@dataclass(frozen=True)
class SlotConfig:
    window_days: int = 7
    step_days: int = 4
    include_trailing_partial: bool = True

    def __post_init__(self) -> None:
        if self.window_days <= 0 or self.step_days <= 0:
            raise ValueError("window_days and step_days must be positive")
        if self.step_days > self.window_days:
            raise ValueError("step_days must not exceed window_days")


@dataclass(frozen=True)
class TimeSlot:
    index: int
    start: datetime
    end: datetime

    def contains(self, instant: datetime) -> bool:
        return self.start <= instant < self.end


def enumerate_slots(
    range_start: date | datetime,
    range_end: date | datetime,
    config: SlotConfig = SlotConfig(),
) -> list[TimeSlot]:
    """Enumerate analysis windows covering ``[range_start, range_end)``.

    Slot k starts at ``range_start + k * step_days``. Trailing windows are
    clipped to the range end and included unless the config says otherwise.
    A range shorter than one window with partials disabled yields an empty
    list (with a warning) rather than an error.
    """
    start = as_utc_instant(range_start)
    end = as_utc_instant(range_end)
    if end <= start:
        raise ValueError(f"range_end {end} must be after range_start {start}")

    window = timedelta(days=config.window_days)
    step = timedelta(days=config.step_days)
    slots: list[TimeSlot] = []
    k = 0
    while True:
        s = start + k * step
        if s >= end:
            break
        e = s + window
        if e > end:
            if config.include_trailing_partial:
                slots.append(TimeSlot(len(slots), s, end))
            k += 1
            continue
        slots.append(TimeSlot(len(slots), s, e))
        k += 1
    if not slots:
        logger.warning(
            "range %s..%s shorter than one %d-day window; no slots", start, end, config.window_days
        )
    return slots


def events_in_slot(corpus: Corpus, slot: TimeSlot) -> tuple[list[Post], list[Comment]]:
    """Posts and comments whose timestamp falls in ``[slot.start, slot.end)``.

    Events belong to every overlapping slot; membership is a pure interval
    test, so repeated calls are idempotent.
    """
    p_lo = bisect_left(corpus._post_times, slot.start)
    p_hi = bisect_left(corpus._post_times, slot.end)
    c_lo = bisect_left(corpus._comment_times, slot.start)
    c_hi = bisect_left(corpus._comment_times, slot.end)
    return list(corpus.posts_sorted[p_lo:p_hi]), list(corpus.comments[c_lo:c_hi])


def write_slots_csv(slots: list[TimeSlot], path: Path | str) -> int:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["slot_index", "start", "end"])
        for s in slots:
            writer.writerow([s.index, format_timestamp(s.start), format_timestamp(s.end)])
    return len(slots)


def read_slots_csv(path: Path | str) -> list[TimeSlot]:
    slots = []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            slots.append(
                TimeSlot(int(row["slot_index"]), parse_timestamp(row["start"]), parse_timestamp(row["end"]))
            )
    slots.sort(key=lambda s: s.index)
    return slots
