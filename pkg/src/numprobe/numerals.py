"""Numeral location, value parsing, and style-preserving re-rendering.

The grammar covers plain cardinals (optional sign, thousands commas, decimal
fraction), scaled numbers (million/billion words or M/B suffixes), percent
and currency context, month-name and numeric dates, H:MM(:SS) clock times
with optional AM/PM, and "<number> <unit>" durations. Exact token patterns
are documented in docs/grammar.md.

Two surface conventions matter throughout:

- Percent signs and currency symbols sit *outside* the mention span. They are
  recorded on the style (they drive kind classification and plausibility
  checks) but are never rewritten, so substituting a new numeral leaves them
  untouched.
- Scale words and duration units sit *inside* the span, because perturbations
  rewrite them ("110 million" -> "0.11 billion", "1 week" -> "7 days").

Values are exact decimals of the *surface* magnitude: "15M" and "15%" both
parse to 15. Dates parse to a day index (days since 1970-01-01) and clock
times to whole minutes since midnight; a ":SS" component is carried verbatim
in the style. Mentions without a printed year are anchored to the reference
year 2000.
"""

from __future__ import annotations

import datetime as dt
import re
from dataclasses import dataclass
from decimal import Decimal
from typing import Optional, Union

from .errors import ParseError, RenderError

EPOCH = dt.date(1970, 1, 1)
REFERENCE_YEAR = 2000  # leap year, so no-year "2/29" still parses

KIND_CARDINAL = "cardinal"
KIND_PERCENTAGE = "percentage"
KIND_MONETARY = "monetary"
KIND_DATE = "date"
KIND_TIME = "time"
KIND_DURATION = "duration"

CURRENCY_SYMBOLS = "$€£¥"

MONTH_BY_NAME = {
    "january": 1, "jan": 1, "february": 2, "feb": 2, "march": 3, "mar": 3,
    "april": 4, "apr": 4, "may": 5, "june": 6, "jun": 6, "july": 7, "jul": 7,
    "august": 8, "aug": 8, "september": 9, "sept": 9, "sep": 9,
    "october": 10, "oct": 10, "november": 11, "nov": 11, "december": 12, "dec": 12,
}
_MONTH_FULL = ["January", "February", "March", "April", "May", "June", "July",
               "August", "September", "October", "November", "December"]
_MONTH_ABBR = ["Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep",
               "Oct", "Nov", "Dec"]

DURATION_UNITS = ["minute", "hour", "day", "week", "month", "year"]
# surface-to-days factors used only by the unit-normalized distance mode
DURATION_DAYS = {
    "minute": Decimal(1) / Decimal(1440),
    "hour": Decimal(1) / Decimal(24),
    "day": Decimal(1),
    "week": Decimal(7),
    "month": Decimal(30),
    "year": Decimal(365),
}

SCALE_FACTOR = {"million": Decimal(10) ** 6, "billion": Decimal(10) ** 9}


def _scale_of(token: str) -> str:
    t = token.lower()
    if t in ("million", "m"):
        return "million"
    if t in ("billion", "b"):
        return "billion"
    raise ValueError(f"unknown scale token {token!r}")


# ---------------------------------------------------------------------------
# styles

@dataclass(frozen=True)
class DigitStyle:
    """Plain / scaled numbers: '1,000', '3.56', '110 million', '15M'."""

    thousands_sep: bool = False
    decimals: int = 0
    scale_token: Optional[str] = None   # 'million', 'Billion', 'M', ... (inside span)
    scale_sep: str = " "
    percent: bool = False               # '%' immediately after the span
    currency: Optional[str] = None      # symbol immediately before the span


@dataclass(frozen=True)
class DateStyle:
    shape: str                # 'name' | 'mdy' | 'iso'
    month_form: str = "abbr"  # 'full' | 'abbr' | 'abbr4' (Sept)
    month_dot: bool = False
    day_width: int = 1
    month_width: int = 1      # numeric shapes only
    year_width: int = 0       # 0 = no year printed


@dataclass(frozen=True)
class TimeStyle:
    hour_width: int = 1
    seconds_token: str = ""   # ':SS' carried verbatim, not part of the value
    meridiem: str = ""        # exact token including leading space, e.g. ' AM'


@dataclass(frozen=True)
class DurationStyle:
    unit: str                 # singular lowercase unit word
    decimals: int = 0


Style = Union[DigitStyle, DateStyle, TimeStyle, DurationStyle]


@dataclass(frozen=True)
class FinNumLabel:
    category: str
    subcategory: str


# (category, subcategory) pairs legal under the FinNum taxonomy
LABEL_TABLE = frozenset([
    ("Monetary", "money"), ("Monetary", "quote"), ("Monetary", "change"),
    ("Monetary", "forecast"), ("Monetary", "buy_price"), ("Monetary", "sell_price"),
    ("Monetary", "support_or_resistance"), ("Monetary", "stop_loss"),
    ("Temporal", "date"), ("Temporal", "time"),
    ("Percentage", "relative"), ("Percentage", "absolute"),
    ("Quantity", "quantity"),
    ("ProductNumber", "product_number"),
    ("Indicator", "indicator"),
    ("Option", "exercise_price"), ("Option", "maturity_date"),
])


def label_is_legal(label: FinNumLabel) -> bool:
    return (label.category, label.subcategory) in LABEL_TABLE


@dataclass
class NumeralMention:
    """One numeral occurrence inside a sentence."""

    start: int
    end: int
    raw: str
    value: Decimal
    kind: str
    style: Style
    label: Optional[FinNumLabel] = None

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)

    def decimals(self) -> int:
        if isinstance(self.style, DigitStyle):
            return self.style.decimals
        if isinstance(self.style, DurationStyle):
            return self.style.decimals
        return 0


# ---------------------------------------------------------------------------
# token patterns (see docs/grammar.md)

_NUM = r"-?(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?"

_MONTH_ALT = "|".join(sorted(
    {m.capitalize() for m in MONTH_BY_NAME} | {"Sept"}, key=len, reverse=True))

RE_DATE_NAME = re.compile(
    rf"(?<![A-Za-z])(?P<month>{_MONTH_ALT})(?P<dot>\.)?\s+(?P<day>\d{{1,2}})"
    rf"(?:,\s*(?P<year>\d{{4}}))?(?![\d%])")
RE_DATE_MDY = re.compile(
    r"(?<![\d./-])(?P<m>\d{1,2})/(?P<d>\d{1,2})(?:/(?P<y>\d{4}))?(?![\d/%])")
RE_DATE_ISO = re.compile(
    r"(?<![\d.-])(?P<y>\d{4})-(?P<m>\d{2})-(?P<d>\d{2})(?![\d%])")
RE_TIME = re.compile(
    r"(?<![\d:.])(?P<h>\d{1,2}):(?P<min>\d{2})(?P<sec>:\d{2})?"
    r"(?P<mer>\s?(?:[AP]\.?M\.?|[ap]\.?m\.?)(?![A-Za-z]))?(?![\d:])")
RE_DURATION = re.compile(
    rf"(?<![\w.,])(?P<num>\d+(?:\.\d+)?) (?P<unit>minutes?|hours?|days?|weeks?|months?|years?)\b")
RE_SCALED = re.compile(
    rf"(?<![\w.,])(?P<num>{_NUM})(?:(?P<sep>\s?)(?P<word>[Mm]illion|[Bb]illion)\b|(?P<suffix>[MB])\b)")
RE_NUMBER = re.compile(rf"(?<![\w.,])(?P<num>{_NUM})(?!\w)(?!\.\d)")

LENIENT_DATE_RE = re.compile(
    rf"(?P<month>{_MONTH_ALT})\.?\s+(?P<day>\d{{1,2}})(?:st|nd|rd|th)?(?:,\s*(?P<year>\d{{4}}))?")
LENIENT_TIME_RE = re.compile(
    r"(?P<h>\d{1,2}):(?P<min>\d{1,2})(?::(?P<sec>\d{1,2}))?(?P<mer>\s?(?:[AP]\.?M\.?|[ap]\.?m\.?))?")


def _valid_date(year: int, month: int, day: int) -> Optional[dt.date]:
    try:
        return dt.date(year, month, day)
    except ValueError:
        return None


def _day_index(d: dt.date) -> Decimal:
    return Decimal((d - EPOCH).days)


def date_from_day_index(value: Decimal) -> dt.date:
    if value != value.to_integral_value():
        raise RenderError(f"day index {value} is not a whole day")
    return EPOCH + dt.timedelta(days=int(value))


def _month_form(token: str) -> str:
    base = token.rstrip(".")
    if base in _MONTH_FULL:
        return "full"
    if base == "Sept":
        return "abbr4"
    return "abbr"


def _month_token(month: int, form: str) -> str:
    if form == "full":
        return _MONTH_FULL[month - 1]
    if form == "abbr4" and month == 9:
        return "Sept"
    return _MONTH_ABBR[month - 1]


# ---------------------------------------------------------------------------
# extraction

def extract_numerals(text: str) -> list[NumeralMention]:
    """Locate every numeral in text, ordered by span start.

    Patterns are tried in priority order (dates, times, durations, scaled
    numbers, plain numbers); a span claimed by an earlier pattern blocks any
    overlapping later candidate, so "Sep. 28, 2025" is one date mention and
    never three cardinals.
    """
    claimed: list[tuple[int, int]] = []
    mentions: list[NumeralMention] = []

    def overlaps(start: int, end: int) -> bool:
        return any(s < end and start < e for s, e in claimed)

    def claim(m: NumeralMention) -> None:
        claimed.append((m.start, m.end))
        mentions.append(m)

    for match in RE_DATE_NAME.finditer(text):
        year = int(match["year"]) if match["year"] else REFERENCE_YEAR
        month = MONTH_BY_NAME[match["month"].lower()]
        date = _valid_date(year, month, int(match["day"]))
        if date is None or overlaps(match.start(), match.end()):
            continue
        style = DateStyle(
            shape="name",
            month_form=_month_form(match["month"]),
            month_dot=bool(match["dot"]),
            day_width=len(match["day"]),
            year_width=4 if match["year"] else 0,
        )
        claim(NumeralMention(match.start(), match.end(), match.group(0),
                             _day_index(date), KIND_DATE, style))

    for match in RE_DATE_ISO.finditer(text):
        date = _valid_date(int(match["y"]), int(match["m"]), int(match["d"]))
        if date is None or overlaps(match.start(), match.end()):
            continue
        style = DateStyle(shape="iso", month_width=2, day_width=2, year_width=4)
        claim(NumeralMention(match.start(), match.end(), match.group(0),
                             _day_index(date), KIND_DATE, style))

    for match in RE_DATE_MDY.finditer(text):
        year = int(match["y"]) if match["y"] else REFERENCE_YEAR
        month, day = int(match["m"]), int(match["d"])
        if not 1 <= month <= 12:
            continue
        date = _valid_date(year, month, day)
        if date is None or overlaps(match.start(), match.end()):
            continue
        style = DateStyle(shape="mdy", month_width=len(match["m"]),
                          day_width=len(match["d"]),
                          year_width=4 if match["y"] else 0)
        claim(NumeralMention(match.start(), match.end(), match.group(0),
                             _day_index(date), KIND_DATE, style))

    for match in RE_TIME.finditer(text):
        hour, minute = int(match["h"]), int(match["min"])
        meridiem = match["mer"] or ""
        if minute > 59 or (match["sec"] and int(match["sec"][1:]) > 59):
            continue
        if meridiem:
            if not 1 <= hour <= 12:
                continue
            h24 = (hour % 12) + (12 if "p" in meridiem.lower() else 0)
        else:
            if hour > 23:
                continue
            h24 = hour
        if overlaps(match.start(), match.end()):
            continue
        style = TimeStyle(hour_width=len(match["h"]),
                          seconds_token=match["sec"] or "", meridiem=meridiem)
        claim(NumeralMention(match.start(), match.end(), match.group(0),
                             Decimal(h24 * 60 + minute), KIND_TIME, style))

    for match in RE_DURATION.finditer(text):
        if overlaps(match.start(), match.end()):
            continue
        num = match["num"]
        unit = match["unit"].removesuffix("s")
        if unit not in DURATION_UNITS:
            continue
        value = Decimal(num)
        if (value == 1) != (not match["unit"].endswith("s")):
            continue  # number/plural disagreement: not a duration surface form
        style = DurationStyle(unit=unit, decimals=_frac_len(num))
        claim(NumeralMention(match.start(), match.end(), match.group(0),
                             value, KIND_DURATION, style))

    for match in RE_SCALED.finditer(text):
        if overlaps(match.start(), match.end()):
            continue
        token = match["word"] or match["suffix"]
        sep = match["sep"] if match["word"] else ""
        num = match["num"]
        style = DigitStyle(thousands_sep="," in num, decimals=_frac_len(num),
                           scale_token=token, scale_sep=sep,
                           percent=_percent_follows(text, match.end()),
                           currency=_currency_before(text, match.start()))
        kind = KIND_MONETARY if style.currency else KIND_CARDINAL
        claim(NumeralMention(match.start(), match.end(), match.group(0),
                             Decimal(num.replace(",", "")), kind, style))

    for match in RE_NUMBER.finditer(text):
        if overlaps(match.start(), match.end()):
            continue
        num = match["num"]
        style = DigitStyle(thousands_sep="," in num, decimals=_frac_len(num),
                           percent=_percent_follows(text, match.end()),
                           currency=_currency_before(text, match.start()))
        if style.percent:
            kind = KIND_PERCENTAGE
        elif style.currency:
            kind = KIND_MONETARY
        else:
            kind = KIND_CARDINAL
        claim(NumeralMention(match.start(), match.end(), match.group(0),
                             Decimal(num.replace(",", "")), kind, style))

    mentions.sort(key=lambda m: m.start)
    return mentions


def _frac_len(num: str) -> int:
    return len(num.split(".")[1]) if "." in num else 0


def _percent_follows(text: str, end: int) -> bool:
    return end < len(text) and text[end] == "%"


def _currency_before(text: str, start: int) -> Optional[str]:
    if start > 0 and text[start - 1] in CURRENCY_SYMBOLS:
        return text[start - 1]
    return None


def mention_at(text: str, start: int) -> Optional[NumeralMention]:
    """The mention starting exactly at start, if any."""
    for m in extract_numerals(text):
        if m.start == start:
            return m
    return None


def parse_value(raw: str) -> Decimal:
    """Parse a numeral surface string to its exact decimal value.

    The string must be a single mention covering the whole input; scale
    words and unit symbols do not rescale the value ("15M" -> 15).
    """
    mentions = extract_numerals(raw)
    if len(mentions) != 1 or (mentions[0].start, mentions[0].end) != (0, len(raw)):
        raise ParseError(raw)
    return mentions[0].value


# ---------------------------------------------------------------------------
# rendering

def render_number(value: Decimal, style: Style) -> str:
    """Render a value in a previously observed surface style.

    Round-trip contract: render(parse(raw), style-of-raw) == raw. Transforms
    that legitimately change the surface (extra decimal digit, scale-word
    rewrites) pass an adjusted style.
    """
    if isinstance(style, DigitStyle):
        return _render_digits(value, style)
    if isinstance(style, DateStyle):
        return _render_date(value, style)
    if isinstance(style, TimeStyle):
        return _render_time(value, style)
    if isinstance(style, DurationStyle):
        return _render_duration(value, style)
    raise RenderError(f"unknown style {style!r}")


def _render_digits(value: Decimal, style: DigitStyle) -> str:
    quant = value.quantize(Decimal(1).scaleb(-style.decimals))
    if quant != value:
        raise RenderError(
            f"value {value} not representable with {style.decimals} decimals")
    sign = "-" if quant.is_signed() else ""
    mag = abs(quant)
    int_part = int(mag)
    body = f"{int_part:,}" if style.thousands_sep else str(int_part)
    if style.decimals:
        frac = format(mag, "f").split(".")[1]
        body += "." + frac
    out = sign + body
    if style.scale_token is not None:
        out += style.scale_sep + style.scale_token
    return out


def _render_date(value: Decimal, style: DateStyle) -> str:
    date = date_from_day_index(value)
    if style.year_width == 0 and date.year != REFERENCE_YEAR:
        raise RenderError(
            f"{date.isoformat()} has no printable year in a no-year shape")
    if style.shape == "name":
        month = _month_token(date.month, style.month_form)
        if style.month_dot:
            month += "."
        day = str(date.day).zfill(style.day_width)
        out = f"{month} {day}"
        if style.year_width:
            out += f", {date.year}"
        return out
    if style.shape == "iso":
        return f"{date.year:04d}-{date.month:02d}-{date.day:02d}"
    month = str(date.month).zfill(style.month_width)
    day = str(date.day).zfill(style.day_width)
    out = f"{month}/{day}"
    if style.year_width:
        out += f"/{date.year}"
    return out


def _render_time(value: Decimal, style: TimeStyle) -> str:
    if value != value.to_integral_value() or not 0 <= value < 1440:
        raise RenderError(f"{value} is not a minutes-since-midnight value")
    total = int(value)
    h24, minute = divmod(total, 60)
    if style.meridiem:
        hour = h24 % 12 or 12
        meridiem = _swap_meridiem(style.meridiem, pm=h24 >= 12)
    else:
        hour = h24
        meridiem = ""
    return f"{str(hour).zfill(style.hour_width)}:{minute:02d}{style.seconds_token}{meridiem}"


def _swap_meridiem(token: str, pm: bool) -> str:
    want, other = ("p", "a") if pm else ("a", "p")
    out = token.replace(other, want).replace(other.upper(), want.upper())
    return out


def _render_duration(value: Decimal, style: DurationStyle) -> str:
    body = _plain_decimal(value, style.decimals)
    unit = style.unit if abs(value) == 1 else style.unit + "s"
    return f"{body} {unit}"


def _plain_decimal(value: Decimal, decimals: int) -> str:
    quant = value.quantize(Decimal(1).scaleb(-decimals))
    if quant != value:
        raise RenderError(f"value {value} not representable with {decimals} decimals")
    return format(quant, "f")


def min_decimals(value: Decimal) -> int:
    """Fewest decimal places that represent value exactly."""
    norm = value.normalize()
    exp = norm.as_tuple().exponent
    return max(0, -int(exp)) if isinstance(exp, int) else 0


# ---------------------------------------------------------------------------
# substitution

def replace_mention(text: str, mention: NumeralMention, new_raw: str) -> str:
    """Swap the mention's span for new_raw, leaving the rest untouched."""
    return text[:mention.start] + new_raw + text[mention.end:]


def canonical_digits(raw: str) -> str:
    """Digits-with-commas key used to match annotator targets to mentions."""
    return re.sub(r"[^\d.,-]", "", raw).strip(".,")


def normalized_value(mention_value: Decimal, style: Style) -> Decimal:
    """Value under the unit-normalized distance mode.

    Scale words multiply ("0.11 billion" -> 110,000,000) and durations convert
    to days; dates, times, percentages, and plain cardinals are unchanged.
    """
    if isinstance(style, DigitStyle) and style.scale_token is not None:
        return mention_value * SCALE_FACTOR[_scale_of(style.scale_token)]
    if isinstance(style, DurationStyle):
        return mention_value * DURATION_DAYS[style.unit]
    return mention_value


__all__ = [
    "CURRENCY_SYMBOLS", "DURATION_DAYS", "DURATION_UNITS", "EPOCH",
    "KIND_CARDINAL", "KIND_DATE", "KIND_DURATION", "KIND_MONETARY",
    "KIND_PERCENTAGE", "KIND_TIME", "LABEL_TABLE", "REFERENCE_YEAR",
    "DateStyle", "DigitStyle", "DurationStyle", "FinNumLabel",
    "NumeralMention", "SCALE_FACTOR", "Style", "TimeStyle",
    "LENIENT_DATE_RE", "LENIENT_TIME_RE", "MONTH_BY_NAME",
    "canonical_digits", "date_from_day_index", "extract_numerals",
    "label_is_legal", "mention_at", "min_decimals", "normalized_value",
    "parse_value", "render_number", "replace_mention",
]
