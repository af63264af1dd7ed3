"""Elasticity-pattern mini-language: parsing, matching, and evaluation.

A pattern adjusts a resource's baseline usage on matching days::

    <mode>: every <months> [on <days>] <op><number>

``temp`` patterns rescale matching days and leave no trace afterwards;
``perm`` patterns mutate the running usage level, so they compound into
linear or exponential growth/decay. Keywords are case-insensitive and
whitespace-tolerant. Ranges (``jun-aug``, ``25-30``, ``mon-fri``) are
written without internal spaces so the dash can never be confused with
the subtraction operator.

Evaluation semantics:

* A perm pattern without a day clause fires once at the start of each
  matching month, except the first simulated month, which keeps the raw
  baseline. A perm pattern with a day clause fires at the start of each
  matching day.
* A temp pattern without a day clause applies to every day of matching
  months; with a day clause, to matching days only.
* All perm mutations for a day happen before temp transformations; within
  each class, declaration order rules.
* Flows contribute level/days-in-month per day and bill the monthly sum;
  stocks contribute the level itself and bill the time-average (GB-month).
* Every operator application clamps negative results to 0, recording a
  warning. ``/0`` and negative exponents are rejected at parse time;
  ``0^0`` evaluates to 1.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from datetime import date
from typing import Callable, Iterator

from .errors import EvaluationError, PatternError
from .months import Month, SimulationWindow

TEMP = "temp"
PERM = "perm"
MODES = (TEMP, PERM)

STOCK = "stock"
FLOW = "flow"

MONTH_NAMES = ("jan", "feb", "mar", "apr", "may", "jun",
               "jul", "aug", "sep", "oct", "nov", "dec")
DOW_NAMES = ("mon", "tue", "wed", "thu", "fri", "sat", "sun")
OPERATORS = "+-*/^"

# Day-selector kinds
EMPTY = "empty"
EVERYDAY = "everyday"
WEEKDAYS = "weekdays"
WEEKENDS = "weekends"
DOM = "dom"
DOM_RANGE = "dom_range"
DOW = "dow"
DOW_RANGE = "dow_range"

WarnFn = Callable[[str], None]


@dataclass(frozen=True)
class MonthSelector:
    """Selects calendar months; ranges may wrap the year end (nov-feb)."""

    start: int | None = None  # 1..12; None selects every month
    end: int | None = None

    @classmethod
    def every(cls) -> MonthSelector:
        return cls(None, None)

    @classmethod
    def single(cls, month: int) -> MonthSelector:
        return cls(month, month)

    @classmethod
    def span(cls, start: int, end: int) -> MonthSelector:
        return cls(start, end)

    def contains(self, month: int) -> bool:
        if self.start is None:
            return True
        assert self.end is not None
        if self.start <= self.end:
            return self.start <= month <= self.end
        return month >= self.start or month <= self.end  # wrapped range


@dataclass(frozen=True)
class DaySelector:
    """Selects days within a matching month.

    ``empty`` is mode-dependent: every day of the month for temp patterns,
    only the month's first day (the firing point) for perm patterns; that
    asymmetry lives in :func:`matches`.
    """

    kind: str = EMPTY
    a: int | None = None  # day-of-month 1..31 or weekday index 0..6
    b: int | None = None

    def matches_day(self, day: date) -> bool:
        k = self.kind
        if k == EVERYDAY:
            return True
        if k == WEEKDAYS:
            return day.weekday() < 5
        if k == WEEKENDS:
            return day.weekday() >= 5
        if k == DOM:
            return day.day == self.a
        if k == DOM_RANGE:
            return self.a <= day.day <= self.b
        if k == DOW:
            return day.weekday() == self.a
        if k == DOW_RANGE:
            return self.a <= day.weekday() <= self.b
        raise AssertionError(f"unhandled day selector {k!r}")


EMPTY_DAYS = DaySelector(EMPTY)


@dataclass(frozen=True)
class PatternSpec:
    """Parsed elasticity pattern."""

    mode: str
    months: MonthSelector
    days: DaySelector
    op: str
    operand: float
    source: str = field(default="", compare=False, repr=False)


class _Scanner:
    """Cursor over a pattern string that raises positioned errors."""

    _word_re = re.compile(r"[A-Za-z]+(?:-[A-Za-z]+)?")
    _dom_re = re.compile(r"\d{1,2}(?:-\d{1,2})?")
    _number_re = re.compile(r"[-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?")

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def fail(self, message: str, pos: int | None = None) -> None:
        raise PatternError(message, self.text, self.pos if pos is None else pos)

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def eof(self) -> bool:
        return self.pos >= len(self.text)

    def peek(self) -> str | None:
        return None if self.eof() else self.text[self.pos]

    def take(self, regex: re.Pattern[str]) -> tuple[str, int] | None:
        m = regex.match(self.text, self.pos)
        if not m:
            return None
        start = self.pos
        self.pos = m.end()
        return m.group(0), start

    def rest_token(self) -> str:
        m = re.match(r"\S+", self.text[self.pos:])
        return m.group(0) if m else ""


def _parse_months(s: _Scanner) -> MonthSelector:
    got = s.take(s._word_re)
    if got is None:
        s.fail("expected 'month' or a month name after 'every'")
    word, start = got
    token = word.lower()
    if token == "month":
        return MonthSelector.every()
    if "-" in token:
        lo, hi = token.split("-", 1)
        for part in (lo, hi):
            if part not in MONTH_NAMES:
                s.fail(f"unknown month {part!r}", start)
        return MonthSelector.span(MONTH_NAMES.index(lo) + 1, MONTH_NAMES.index(hi) + 1)
    if token not in MONTH_NAMES:
        s.fail(f"unknown month token {token!r}", start)
    return MonthSelector.single(MONTH_NAMES.index(token) + 1)


def _parse_days(s: _Scanner) -> DaySelector:
    if s.eof():
        s.fail("expected a day selector after 'on'")
    ch = s.peek()
    if ch is not None and ch.isdigit():
        got = s.take(s._dom_re)
        assert got is not None
        token, start = got
        if "-" in token:
            lo_text, hi_text = token.split("-", 1)
            lo, hi = int(lo_text), int(hi_text)
        else:
            lo = hi = int(token)
        for value in (lo, hi):
            if not 1 <= value <= 31:
                s.fail(f"day of month out of range: {value:02d}", start)
        if lo > hi:
            s.fail(f"decreasing day range {lo:02d}-{hi:02d}", start)
        if lo == hi and "-" not in token:
            return DaySelector(DOM, lo)
        return DaySelector(DOM_RANGE, lo, hi)
    got = s.take(s._word_re)
    if got is None:
        s.fail("expected a day selector after 'on'")
    word, start = got
    token = word.lower()
    if "-" in token:
        lo, hi = token.split("-", 1)
        for part in (lo, hi):
            if part not in DOW_NAMES:
                s.fail(f"unknown day token {part!r}", start)
        a, b = DOW_NAMES.index(lo), DOW_NAMES.index(hi)
        if a > b:
            s.fail(f"day-of-week range may not wrap: {lo}-{hi}", start)
        return DaySelector(DOW_RANGE, a, b)
    if token == EVERYDAY:
        return DaySelector(EVERYDAY)
    if token == WEEKDAYS:
        return DaySelector(WEEKDAYS)
    if token == WEEKENDS:
        return DaySelector(WEEKENDS)
    if token in DOW_NAMES:
        return DaySelector(DOW, DOW_NAMES.index(token))
    s.fail(f"unknown day token {token!r}", start)
    raise AssertionError("unreachable")


def parse_pattern(text: str) -> PatternSpec:
    """Parse one pattern string, raising :class:`PatternError` on any defect."""
    s = _Scanner(text)
    s.skip_ws()
    got = s.take(re.compile(r"[A-Za-z]+"))
    if got is None:
        s.fail("expected pattern mode 'temp' or 'perm'")
    word, start = got
    mode = word.lower()
    if mode not in MODES:
        s.fail(f"unknown mode {word!r}, expected 'temp' or 'perm'", start)
    s.skip_ws()
    if s.peek() != ":":
        s.fail("expected ':' after the mode keyword")
    s.pos += 1
    s.skip_ws()
    got = s.take(re.compile(r"[A-Za-z]+"))
    if got is None or got[0].lower() != "every":
        s.fail("expected 'every'", s.pos if got is None else got[1])
    s.skip_ws()
    months = _parse_months(s)
    s.skip_ws()
    days = EMPTY_DAYS
    mark = s.pos
    got = s.take(re.compile(r"[A-Za-z]+"))
    if got is not None and got[0].lower() == "on":
        s.skip_ws()
        days = _parse_days(s)
        s.skip_ws()
    else:
        s.pos = mark  # whatever follows must be the variation operator
    if s.eof():
        s.fail("missing variation operator")
    op = s.peek()
    if op not in OPERATORS:
        s.fail(f"unknown variation operator {op!r}")
    s.pos += 1
    s.skip_ws()
    if s.eof():
        s.fail("missing operand")
    num_pos = s.pos
    got = s.take(s._number_re)
    if got is None:
        s.fail(f"expected a numeric operand, got {s.rest_token()!r}")
    operand = float(got[0])
    s.skip_ws()
    if not s.eof():
        s.fail(f"unexpected trailing input {s.rest_token()!r}")
    if not math.isfinite(operand):
        s.fail("operand must be finite", num_pos)
    if op == "/" and operand == 0:
        s.fail("division by zero", num_pos)
    if op == "^" and operand < 0:
        s.fail("exponent must not be negative", num_pos)
    return PatternSpec(mode, months, days, op, operand, source=text.strip())


def parse_patterns(block: str) -> list[PatternSpec]:
    """Parse a comma- or newline-separated block of patterns."""
    specs = []
    for segment in re.split(r"[,\n]", block):
        if segment.strip():
            specs.append(parse_pattern(segment))
    return specs


def matches(pattern: PatternSpec, day: date) -> bool:
    """True when ``day`` is selected by the pattern.

    An absent day clause selects every day of a matching month for temp
    patterns but only the month's first day (the firing point) for perm
    patterns.
    """
    if not pattern.months.contains(day.month):
        return False
    if pattern.days.kind == EMPTY:
        return day.day == 1 if pattern.mode == PERM else True
    return pattern.days.matches_day(day)


@dataclass(frozen=True)
class UsageSchedule:
    """A resource's baseline plus its ordered elasticity patterns."""

    kind_class: str  # STOCK or FLOW
    baseline: float
    patterns: tuple[PatternSpec, ...] = ()

    def __post_init__(self) -> None:
        if self.kind_class not in (STOCK, FLOW):
            raise ValueError(f"unknown kind class {self.kind_class!r}")
        if not math.isfinite(self.baseline) or self.baseline < 0:
            raise ValueError(f"baseline must be finite and >= 0, got {self.baseline}")


def _apply_op(value: float, op: str, operand: float) -> float:
    try:
        if op == "+":
            result = value + operand
        elif op == "-":
            result = value - operand
        elif op == "*":
            result = value * operand
        elif op == "/":
            result = value / operand
        else:
            result = value ** operand  # operand >= 0 by parse; 0**0 == 1.0
    except OverflowError as exc:
        raise EvaluationError(f"value overflowed applying '{op}{operand:g}'") from exc
    if math.isinf(result) or math.isnan(result):
        raise EvaluationError(f"value overflowed applying '{op}{operand:g}'")
    return result


def _clamped(value: float, pattern: PatternSpec, index: int, day: date,
             warn: WarnFn | None) -> float:
    if value >= 0:
        return value
    if warn is not None:
        label = pattern.source or f"{pattern.op}{pattern.operand:g}"
        warn(f"clamped negative value to 0 on {day.isoformat()} (pattern {index + 1}: {label})")
    return 0.0


def _walk_days(schedule: UsageSchedule, sim_start: Month, last: Month,
               warn: WarnFn | None = None) -> Iterator[tuple[date, float]]:
    """Yield (day, value) from sim_start's first day through last's last day.

    This is the single source of evaluation truth: per-day replay keeps the
    float operation sequence identical no matter which public entry point
    drives it, so results are bit-reproducible.
    """
    level = float(schedule.baseline)
    month = sim_start
    while month <= last:
        days_in_month = month.days()
        for dom in range(1, days_in_month + 1):
            day = date(month.year, month.month, dom)
            for index, p in enumerate(schedule.patterns):
                if p.mode != PERM or not matches(p, day):
                    continue
                if p.days.kind == EMPTY and month == sim_start:
                    continue  # the first simulated month keeps the raw baseline
                level = _clamped(_apply_op(level, p.op, p.operand), p, index, day, warn)
            value = level if schedule.kind_class == STOCK else level / days_in_month
            for index, p in enumerate(schedule.patterns):
                if p.mode != TEMP or not matches(p, day):
                    continue
                value = _clamped(_apply_op(value, p.op, p.operand), p, index, day, warn)
            yield day, value
        month = month.next()


def evaluate_day(schedule: UsageSchedule, day: date, sim_start: Month,
                 warn: WarnFn | None = None) -> float:
    """The day's effective value: perm level replayed from sim_start, then temps.

    For flows the value is the day's contribution (level / days in month,
    scaled by temps); for stocks it is the held level itself.
    """
    if day < sim_start.first_day():
        raise ValueError(f"{day} precedes the simulation start {sim_start}")
    for d, value in _walk_days(schedule, sim_start, Month.of(day), warn):
        if d == day:
            return value
    raise AssertionError("unreachable")


def monthly_quantity(schedule: UsageSchedule, month: Month, sim_start: Month,
                     warn: WarnFn | None = None) -> float:
    """The month's billable quantity: sum of daily values for flows, their
    time-average (GB-month) for stocks."""
    if month < sim_start:
        raise ValueError(f"{month} precedes the simulation start {sim_start}")
    total = 0.0
    for day, value in _walk_days(schedule, sim_start, month, warn):
        if day.year == month.year and day.month == month.month:
            total += value
    if schedule.kind_class == STOCK:
        return total / month.days()
    return total


def monthly_series(schedule: UsageSchedule, window: SimulationWindow,
                   usage_start: Month | None = None,
                   warn: WarnFn | None = None) -> list[tuple[Month, float]]:
    """Billable quantities for every month of the window, in one replay pass.

    ``usage_start`` anchors the pattern replay; it defaults to the window
    start and must not lie after it.
    """
    start = usage_start or window.start
    if start > window.start:
        raise ValueError(f"usage start {start} is after the window start {window.start}")
    series: list[tuple[Month, float]] = []
    acc = 0.0
    acc_month = start
    for day, value in _walk_days(schedule, start, window.end, warn):
        m = Month.of(day)
        if m != acc_month:
            if acc_month in window:
                series.append((acc_month, _finalize(schedule, acc, acc_month)))
            acc = 0.0
            acc_month = m
        acc += value
    if acc_month in window:
        series.append((acc_month, _finalize(schedule, acc, acc_month)))
    return series


def _finalize(schedule: UsageSchedule, total: float, month: Month) -> float:
    return total / month.days() if schedule.kind_class == STOCK else total
