"""Load firm-size columns from a CSV file.

The file is UTF-8, comma-delimited, with a header row.  Each mapped
column must hold plain decimal numbers; rows whose mapped values are
missing, malformed, non-finite or non-positive are counted as dropped
(with a warning) instead of being repaired.
"""

from __future__ import annotations

import csv
import re
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

from .stats_core import Series

__all__ = [
    "ROLES",
    "DEFAULT_COLUMNS",
    "IngestError",
    "MissingFileError",
    "MissingHeaderError",
    "EmptyDatasetError",
    "DroppedRowWarning",
    "FirmRecord",
    "Dataset",
    "parse_decimal",
    "load_csv",
    "column",
    "write_csv",
]

ROLES = ("employees", "sale")
DEFAULT_COLUMNS = {"employees": "employees", "sale": "sale"}

# no thousands separators, no underscores, no inf/nan spellings
_DECIMAL = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")


class IngestError(ValueError):
    pass


class MissingFileError(IngestError, FileNotFoundError):
    pass


class MissingHeaderError(IngestError):
    pass


class EmptyDatasetError(IngestError):
    pass


class DroppedRowWarning(UserWarning):
    pass


@dataclass(frozen=True)
class FirmRecord:
    id: str
    employees: Optional[float] = None
    sale: Optional[float] = None


@dataclass(frozen=True)
class Dataset:
    records: tuple[FirmRecord, ...]
    source: str
    dropped: int = 0
    roles: tuple[str, ...] = ROLES
    drop_reasons: tuple[str, ...] = field(default=(), repr=False)

    def __len__(self) -> int:
        return len(self.records)


def parse_decimal(text: str) -> float:
    """Parse a plain decimal real, rejecting anything locale-dependent."""
    t = text.strip()
    if not _DECIMAL.fullmatch(t):
        raise ValueError(f"not a decimal number: {text!r}")
    v = float(t)
    if v in (float("inf"), float("-inf")):
        raise ValueError(f"out of range: {text!r}")
    return v


def load_csv(path, column_map: Mapping[str, str] | None = None) -> Dataset:
    """Read the mapped columns of ``path`` into a :class:`Dataset`.

    ``column_map`` maps a role (``employees``, ``sale``, optionally ``id``)
    to a header name; roles left out are not loaded.  An unmapped ``id``
    role falls back to an ``id`` header when present, otherwise records
    are numbered from 1 in file order.
    """
    column_map = dict(DEFAULT_COLUMNS if column_map is None else column_map)
    unknown = set(column_map) - set(ROLES) - {"id"}
    if unknown:
        raise IngestError(f"unknown column roles: {sorted(unknown)}")
    roles = tuple(r for r in ROLES if r in column_map)
    if not roles:
        raise IngestError("column_map selects no value columns")

    p = Path(path)
    if not p.is_file():
        raise MissingFileError(f"input file not found: {p}")

    with p.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise MissingHeaderError(f"{p}: file is empty, expected a header row")
        header = [h.strip() for h in header]
        index = {}
        for role, name in column_map.items():
            if name not in header:
                raise MissingHeaderError(
                    f"{p}: column {name!r} (role {role}) not in header {header}"
                )
            index[role] = header.index(name)
        if "id" not in index and "id" in header:
            index["id"] = header.index("id")

        records = []
        reasons = []
        raw_rows = 0
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            raw_rows += 1
            values = {}
            problem = None
            for role in roles:
                col = index[role]
                cell = row[col] if col < len(row) else ""
                if not cell.strip():
                    problem = f"line {lineno}: missing {role} value"
                    break
                try:
                    v = parse_decimal(cell)
                except ValueError as exc:
                    problem = f"line {lineno}: {role} {exc}"
                    break
                if not v > 0:
                    problem = f"line {lineno}: {role} value {cell.strip()!r} is not positive"
                    break
                values[role] = v
            if problem is not None:
                reasons.append(problem)
                continue
            if "id" in index:
                rid = row[index["id"]].strip() if index["id"] < len(row) else ""
            else:
                rid = str(raw_rows)
            records.append(FirmRecord(id=rid, **values))

    dropped = raw_rows - len(records)
    if dropped:
        shown = "; ".join(reasons[:5]) + ("; ..." if len(reasons) > 5 else "")
        warnings.warn(f"{p}: dropped {dropped} of {raw_rows} rows ({shown})", DroppedRowWarning, stacklevel=2)
    if not records:
        raise EmptyDatasetError(f"{p}: no valid rows after validation ({raw_rows} read, {dropped} dropped)")
    return Dataset(
        records=tuple(records), source=str(path), dropped=dropped, roles=roles, drop_reasons=tuple(reasons)
    )


def column(d: Dataset, role: str) -> Series:
    """Values of ``role`` in record order, labelled with the role name."""
    if role not in d.roles:
        raise IngestError(f"role {role!r} was not loaded (available: {list(d.roles)})")
    return Series([getattr(r, role) for r in d.records], label=role)


def write_csv(path, columns: Mapping[str, Series], ids: list[str] | None = None) -> None:
    """Write equal-length series as a CSV that :func:`load_csv` reads back.

    Floats are written with ``repr`` so they round-trip exactly.
    """
    names = list(columns)
    n = len(columns[names[0]])
    if any(len(columns[c]) != n for c in names):
        raise IngestError("columns must have equal length")
    ids = ids if ids is not None else [str(i) for i in range(1, n + 1)]
    cols = [columns[c].values.tolist() for c in names]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", *names])
        for i in range(n):
            w.writerow([ids[i], *(repr(col[i]) for col in cols)])
