"""CSV sample files, atomic report writers, and the bundled toy data.

Sample files hold one observation per row, UTF-8 with "." as the
decimal separator. A header row is optional; when present, a column
named "group" with values P/Q labels each row's sample membership so a
two-sample problem fits in one file. Floats are always written with 17
significant digits, which round-trips IEEE doubles exactly.

Report writers (JSON and CSV) build the full output text first and then
write through a temporary file in the target directory followed by an
atomic rename, so a crashed or failed run never leaves a truncated
report behind.
"""

import csv
import io
import json
import math
import os
import tempfile
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import DataFormatError
from .kernel import SampleSet

GROUP_COLUMN = "group"


def format_float(v) -> str:
    """Shortest-safe decimal form: 17 significant digits."""
    return format(float(v), ".17g")


def read_samples(path, header: bool = False) -> SampleSet:
    """Parse a CSV sample file; see the module docstring for the format.

    Malformed input raises DataFormatError naming the file line and
    column. Group labels are recognized only when `header` is set and a
    "group" column exists.
    """
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        raw = list(csv.reader(fh))
    rows = [(lineno, row) for lineno, row in enumerate(raw, start=1) if row]
    if not rows:
        raise DataFormatError(f"{path}: file is empty")
    group_idx = None
    if header:
        names = [c.strip() for c in rows[0][1]]
        body = rows[1:]
        if not body:
            raise DataFormatError(f"{path}: no data rows after the header")
        if GROUP_COLUMN in names:
            group_idx = names.index(GROUP_COLUMN)
        width = len(names)
    else:
        body = rows
        width = len(body[0][1])
    data = []
    labels = [] if group_idx is not None else None
    for lineno, row in body:
        if len(row) != width:
            raise DataFormatError(
                f"{path}: line {lineno}: expected {width} columns, got {len(row)}")
        vals = []
        for col, cell in enumerate(row, start=1):
            if group_idx is not None and col - 1 == group_idx:
                label = cell.strip()
                if label not in ("P", "Q"):
                    raise DataFormatError(
                        f"{path}: line {lineno}, column {col}: "
                        f"group label must be P or Q, got {cell!r}")
                labels.append(label)
                continue
            try:
                v = float(cell)
            except ValueError:
                raise DataFormatError(
                    f"{path}: line {lineno}, column {col}: "
                    f"could not parse {cell!r} as a number") from None
            if not math.isfinite(v):
                raise DataFormatError(
                    f"{path}: line {lineno}, column {col}: non-finite value {cell!r}")
            vals.append(v)
        data.append(vals)
    group = np.asarray(labels) if labels is not None else None
    try:
        return SampleSet(data=np.asarray(data, dtype=np.float64), group=group)
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from None


def write_samples(path, samples: SampleSet, header: bool | None = None) -> None:
    """Write a SampleSet as CSV; labeled sets get a trailing "group"
    column and therefore require a header (the default follows suit)."""
    labeled = samples.group is not None
    if header is None:
        header = labeled
    if labeled and not header:
        raise ValueError("labeled output requires a header naming the group column")
    lines = []
    if header:
        names = [f"x{j}" for j in range(samples.dim)]
        if labeled:
            names.append(GROUP_COLUMN)
        lines.append(",".join(names))
    for i in range(samples.n):
        cells = [format_float(v) for v in samples.data[i]]
        if labeled:
            cells.append(str(samples.group[i]))
        lines.append(",".join(cells))
    _atomic_write_text(path, "\n".join(lines) + "\n")


def _atomic_write_text(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj) -> None:
    """Serialize first (so failures leave the target untouched), then
    write atomically. Keys are sorted for byte-stable reports."""
    text = json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"
    _atomic_write_text(path, text)


def write_csv(path, rows) -> None:
    """Write an iterable of row tuples as CSV; floats get the 17-digit
    treatment, everything else plain str()."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow([format_float(v) if isinstance(v, (float, np.floating)) else str(v)
                         for v in row])
    _atomic_write_text(path, buf.getvalue())


def toy_paths() -> dict:
    """Filesystem paths of the bundled miniature two-sample dataset."""
    base = resources.files("kerndiv") / "data"
    return {
        "p": Path(str(base / "toy_p.csv")),
        "q": Path(str(base / "toy_q.csv")),
        "labeled": Path(str(base / "toy_labeled.csv")),
    }
