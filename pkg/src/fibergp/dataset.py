"""Natural-fiber property table: interval cells, canonical data and CSV I/O."""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

FEATURES = ("cellulose", "hemicellulose", "lignin", "moisture", "microfibrillar_angle")
FEATURE_SYMBOLS = ("C", "H", "L", "Mc", "Ma")
TARGETS = ("uts", "elongation", "youngs_modulus")
POLICIES = ("midpoint", "lo", "hi")
CSV_HEADER = ("name",) + FEATURES + ("youngs_modulus", "uts", "elongation")

# Kenaf is absent from every published result table.
PAPER9 = (
    "Flax", "Hemp", "Jute", "Ramie", "Sisal", "Banana", "Oil palm", "Cotton", "Coir",
)

_NUM = r"(?:\d+(?:\.\d*)?|\.\d+)"
_RANGE_RE = re.compile(rf"^({_NUM})(?:\s*[-–]\s*({_NUM}))?$")
# "10 .22": a stray space-dot standing in for the dash
_SPACE_DOT_RE = re.compile(rf"^(\d+)\s+\.(\d+)$")


class DataError(ValueError):
    """Malformed or invariant-violating fiber data."""


@dataclass(frozen=True)
class RangeValue:
    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise DataError(f"non-finite range bound ({self.lo}, {self.hi})")
        if self.lo > self.hi:
            raise DataError(f"range lower bound {self.lo} exceeds upper bound {self.hi}")

    @property
    def midpoint(self) -> float:
        return (self.lo + self.hi) / 2

    def resolve(self, policy: str = "midpoint") -> float:
        return resolve(self, policy)

    def __str__(self) -> str:
        return format_range(self)


def _fmt_number(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def format_range(r: RangeValue) -> str:
    if r.lo == r.hi:
        return _fmt_number(r.lo)
    return f"{_fmt_number(r.lo)}-{_fmt_number(r.hi)}"


def parse_range(text: str, cell: str | None = None) -> RangeValue:
    """Parse ``"690"``, ``"345-1500"``, ``"12- 13"`` or ``"10 .22"`` into a range.

    ``cell`` names the offending location in error messages.
    """
    where = f" in cell {cell}" if cell else ""
    s = str(text).strip()
    m = _RANGE_RE.match(s) or _SPACE_DOT_RE.match(s)
    if m is None:
        raise DataError(f"cannot parse range {text!r}{where}")
    lo = float(m.group(1))
    hi = float(m.group(2)) if m.group(2) is not None else lo
    try:
        return RangeValue(lo, hi)
    except DataError as exc:
        raise DataError(f"{exc}{where}") from None


def resolve(r: RangeValue, policy: str = "midpoint") -> float:
    if policy == "midpoint":
        return r.midpoint
    if policy == "lo":
        return r.lo
    if policy == "hi":
        return r.hi
    raise ValueError(f"unknown resolve policy {policy!r}; expected one of {POLICIES}")


@dataclass(frozen=True)
class FiberRecord:
    name: str
    cellulose: RangeValue
    hemicellulose: RangeValue
    lignin: RangeValue
    moisture: RangeValue
    microfibrillar_angle: RangeValue
    youngs_modulus: RangeValue
    uts: RangeValue
    elongation: RangeValue

    def __post_init__(self):
        if not self.name:
            raise DataError("fiber name is empty")
        for f in fields(self)[1:]:
            r = getattr(self, f.name)
            if not isinstance(r, RangeValue):
                raise DataError(f"{self.name}.{f.name} is not a RangeValue")
            if r.lo < 0:
                raise DataError(f"{self.name}.{f.name} is negative")
        for name in ("cellulose", "hemicellulose", "lignin", "moisture"):
            if getattr(self, name).hi > 100:
                raise DataError(f"{self.name}.{name} exceeds 100 wt.%")
        if self.microfibrillar_angle.hi > 90:
            raise DataError(f"{self.name}.microfibrillar_angle exceeds 90 degrees")

    def features(self, policy: str = "midpoint") -> np.ndarray:
        return np.array([resolve(getattr(self, f), policy) for f in FEATURES])


@dataclass(frozen=True)
class FiberTable:
    records: tuple[FiberRecord, ...]
    provenance: str = ""

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        if not self.records:
            raise DataError("fiber table is empty")
        names = [r.name for r in self.records]
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise DataError(f"duplicate fiber names: {', '.join(dupes)}")

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.records)

    def __getitem__(self, name: str) -> FiberRecord:
        for r in self.records:
            if r.name == name:
                return r
        raise KeyError(name)

    def __eq__(self, other):
        # provenance is descriptive only
        return isinstance(other, FiberTable) and self.records == other.records

    __hash__ = None


@dataclass(frozen=True)
class ResolvedDataset:
    feature_names: tuple[str, ...]
    X: np.ndarray
    y: np.ndarray
    target_name: str
    sample_names: tuple[str, ...]

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if X.ndim != 2 or X.shape[0] != y.shape[0] or X.shape[0] != len(self.sample_names):
            raise DataError("X rows, y length and sample names disagree")
        if not (np.isfinite(X).all() and np.isfinite(y).all()):
            raise DataError("resolved dataset has non-finite entries")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return len(self.y)


# Columns: C, H, L, Mc, Ma, E (GPa), UTS (MPa), elongation (%)
_TABLE1 = [
    ("Flax", "71", "18.6-20.6", "2.2", "8-12", "5-10", "27.6", "345-1500", "2.7-3.2"),
    ("Hemp", "70-74", "17.9-22.4", "3.7-5.7", "6.2-12", "2-6.2", "70", "690", "1.6"),
    ("Jute", "61-71.5", "13.6-20.4", "12- 13", "12.5-13.7", "8", "13-26.5", "393-800", "1.16-1.5"),
    ("Kenaf", "45-57", "21.5", "8 - 13", "6.2-9.1", "7.1-15", "53", "930", "1.6"),
    ("Ramie", "68.6-76.2", "13.1-16.7", "0.6-0.7", "7.5-17", "7.5", "61.4-128", "400-938", "1.2-3.8"),
    ("Sisal", "66-78", "10 - 14", "10 - 14", "10 - 22", "10 .22", "9.4-22", "468-700", "3.0-7.0"),
    ("Banana", "63-64", "10", "5", "10 - 12", "10-12", "12- 33", "355-500", "1.5-9"),
    ("Oil palm", "50-65", "30", "17-19", "11-29", "42-46", "3.2", "248", "2.5"),
    # printed with E and UTS columns swapped; stored corrected
    ("Cotton", "82.7-95", "2-15", "0.1-2", "7.85-8.5", "33-34", "5.5-12.6", "287-800", "3-10"),
    ("Coir", "32-45", "0.15-0.25", "40-45", "8", "30-49", "4-6", "131-220", "15-40"),
]

CANONICAL_PROVENANCE = (
    "Literature survey of 10 natural fibers. Corrections: sisal microfibrillar angle "
    "'10 .22' read as 10-22; cotton and coir Young's modulus and UTS columns un-swapped "
    "(cotton E 5.5-12.6 GPa, UTS 287-800 MPa; coir E 4-6 GPa, UTS 131-220 MPa); "
    "whitespace inside ranges ignored."
)


def _record_from_cells(cells: Sequence[str], row: str) -> FiberRecord:
    name, *rest = cells
    values = {
        col: parse_range(text, cell=f"{row}, column {col!r}")
        for col, text in zip(CSV_HEADER[1:], rest)
    }
    return FiberRecord(name=name.strip(), **values)


def load_canonical() -> FiberTable:
    records = [_record_from_cells(row, row[0]) for row in _TABLE1]
    return FiberTable(tuple(records), CANONICAL_PROVENANCE)


def write_csv(table: FiberTable, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if table.provenance:
            fh.write(f"# {' '.join(table.provenance.splitlines())}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in table:
            writer.writerow([r.name] + [format_range(getattr(r, c)) for c in CSV_HEADER[1:]])


def load_csv(path: str | Path) -> FiberTable:
    """Read a fiber table; lines starting with ``#`` carry provenance."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such data file: {path}")
    provenance = []
    with open(path, newline="", encoding="utf-8") as fh:
        lines = []
        for line in fh:
            if line.startswith("#"):
                provenance.append(line[1:].strip())
            elif line.strip():
                lines.append(line)
    rows = list(csv.reader(lines))
    if not rows or tuple(c.strip() for c in rows[0]) != CSV_HEADER:
        raise DataError(f"{path}: header must be {','.join(CSV_HEADER)}")
    records = []
    for lineno, cells in enumerate(rows[1:], start=2):
        if len(cells) != len(CSV_HEADER):
            raise DataError(f"{path}: data row {lineno - 1} has {len(cells)} cells, expected {len(CSV_HEADER)}")
        try:
            records.append(_record_from_cells(cells, f"row {lineno - 1}"))
        except DataError as exc:
            raise DataError(f"{path}: {exc}") from None
    return FiberTable(tuple(records), " ".join(provenance))


def resolve_subset(table: FiberTable, subset: str | Iterable[str] | None) -> tuple[str, ...]:
    """Expand ``"paper9"``, ``"all"``, a comma list or a name sequence."""
    if subset is None or subset == "all":
        return table.names
    if subset == "paper9":
        names = PAPER9
    elif isinstance(subset, str):
        names = tuple(s.strip() for s in subset.split(",") if s.strip())
    else:
        names = tuple(subset)
    unknown = [n for n in names if n not in table.names]
    if unknown:
        raise KeyError(f"unknown fiber name(s) in subset: {', '.join(unknown)}")
    # table order, not request order
    return tuple(n for n in table.names if n in set(names))


def to_resolved(
    table: FiberTable,
    target: str,
    policy: str = "midpoint",
    subset: str | Iterable[str] | None = None,
) -> ResolvedDataset:
    if target not in TARGETS:
        raise ValueError(f"unknown target {target!r}; expected one of {TARGETS}")
    if policy not in POLICIES:
        raise ValueError(f"unknown resolve policy {policy!r}; expected one of {POLICIES}")
    names = resolve_subset(table, subset)
    recs = [table[n] for n in names]
    X = np.array([r.features(policy) for r in recs]).reshape(len(recs), len(FEATURES))
    y = np.array([resolve(getattr(r, target), policy) for r in recs])
    return ResolvedDataset(FEATURE_SYMBOLS, X, y, target, names)
