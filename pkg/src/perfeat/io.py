"""Readers and writers for the study's file formats.

All inputs are plain CSV with a header row.  Rating files put item ids in
the first column and one rater per remaining column, with empty cells for
missing ratings.  Sidecar files carry per-song track annotations and manual
tempo counts.  Machine-readable outputs are full-precision CSV preceded by
``# key=value`` parameter lines so a run can be reproduced from its output.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .midi_features import TableCalibration
from .smf import TrackCategory
from .stats import RatingMatrix

PathLike = Union[str, Path]


class SchemaError(ValueError):
    """A file does not match its expected layout; messages carry line numbers."""


class OutOfScale(ValueError):
    """A rating lies outside the declared response scale."""


_CATEGORY_ALIASES = {
    "melody": TrackCategory.MELODY,
    "mel": TrackCategory.MELODY,
    "accompaniment": TrackCategory.ACCOMPANIMENT,
    "acc": TrackCategory.ACCOMPANIMENT,
    "bass": TrackCategory.BASS,
    "bas": TrackCategory.BASS,
    "drums": TrackCategory.DRUMS,
    "drum": TrackCategory.DRUMS,
    "dru": TrackCategory.DRUMS,
}


def _data_rows(path: PathLike):
    """Yield (line_number, row) for non-empty, non-comment CSV rows."""
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        for row in reader:
            if not row or (row[0].startswith("#") and len(row) == 1):
                continue
            if row[0].lstrip().startswith("#"):
                continue
            yield reader.line_num, [cell.strip() for cell in row]


def _parse_float(cell: str, path: PathLike, line: int) -> float:
    try:
        return float(cell)
    except ValueError:
        raise SchemaError(f"{path}:{line}: {cell!r} is not a number") from None


def load_ratings(
    path: PathLike, scale: Optional[Tuple[float, float]] = (1.0, 9.0)
) -> RatingMatrix:
    """Read an items-by-raters rating matrix.

    The header row is the rater ids (its first cell labels the item column
    and is ignored).  Empty cells are missing values.  With ``scale`` set,
    any value outside the closed interval raises :class:`OutOfScale`;
    pass ``scale=None`` for unbounded responses.
    """
    rows = list(_data_rows(path))
    if not rows:
        raise SchemaError(f"{path}: empty ratings file")
    header_line, header = rows[0]
    if len(header) < 3:
        raise SchemaError(f"{path}:{header_line}: need an id column and two raters")
    rater_ids = tuple(header[1:])
    item_ids: List[str] = []
    values: List[List[float]] = []
    for line, row in rows[1:]:
        if len(row) != len(header):
            raise SchemaError(
                f"{path}:{line}: {len(row)} cells, header has {len(header)}"
            )
        item_ids.append(row[0])
        parsed = []
        for rater_id, cell in zip(rater_ids, row[1:]):
            if cell == "":
                parsed.append(math.nan)
                continue
            value = _parse_float(cell, path, line)
            if scale is not None and not scale[0] <= value <= scale[1]:
                raise OutOfScale(
                    f"{path}:{line}: rating {value} for item {row[0]!r} by "
                    f"{rater_id!r} is outside [{scale[0]}, {scale[1]}]"
                )
            parsed.append(value)
        values.append(parsed)
    if not values:
        raise SchemaError(f"{path}: ratings file has a header but no items")
    return RatingMatrix(
        values=np.array(values, dtype=float),
        item_ids=tuple(item_ids),
        rater_ids=rater_ids,
    )


def load_annotations(path: PathLike) -> Dict[str, Dict[int, TrackCategory]]:
    """Read per-song track role annotations: song_id, track_id, category."""
    out: Dict[str, Dict[int, TrackCategory]] = {}
    rows = list(_data_rows(path))
    for line, row in rows:
        if row[0] == "song_id":  # header
            continue
        if len(row) != 3:
            raise SchemaError(f"{path}:{line}: expected song_id,track_id,category")
        song_id, track_cell, category_cell = row
        try:
            track_id = int(track_cell)
        except ValueError:
            raise SchemaError(
                f"{path}:{line}: track id {track_cell!r} is not an integer"
            ) from None
        category = _CATEGORY_ALIASES.get(category_cell.lower())
        if category is None:
            raise SchemaError(
                f"{path}:{line}: unknown category {category_cell!r}; expected one "
                f"of {sorted(set(_CATEGORY_ALIASES))}"
            )
        out.setdefault(song_id, {})[track_id] = category
    return out


def load_tempos(path: PathLike) -> Dict[str, float]:
    """Read manually counted tempi: song_id, beats_per_second."""
    out: Dict[str, float] = {}
    for line, row in _data_rows(path):
        if row[0] == "song_id":
            continue
        if len(row) != 2:
            raise SchemaError(f"{path}:{line}: expected song_id,beats_per_second")
        value = _parse_float(row[1], path, line)
        if value <= 0:
            raise SchemaError(f"{path}:{line}: tempo must be positive")
        out[row[0]] = value
    return out


def load_calibration(path: PathLike) -> TableCalibration:
    """Read a measured loudness grid: velocity, volume, dB."""
    triples = []
    for line, row in _data_rows(path):
        if row[0] == "velocity":
            continue
        if len(row) != 3:
            raise SchemaError(f"{path}:{line}: expected velocity,volume,dB")
        try:
            velocity = int(row[0])
            volume = int(row[1])
        except ValueError:
            raise SchemaError(
                f"{path}:{line}: velocity and volume must be integers"
            ) from None
        triples.append((velocity, volume, _parse_float(row[2], path, line)))
    if not triples:
        raise SchemaError(f"{path}: empty calibration file")
    try:
        return TableCalibration.from_rows(triples)
    except ValueError as err:
        raise SchemaError(f"{path}: {err}") from None


def load_table(path: PathLike) -> Tuple[Tuple[str, ...], Tuple[str, ...], np.ndarray]:
    """Read a numeric table: id column, named columns, empty cells -> NaN.

    Returns (item ids, column names, values).  ``# key=value`` preamble
    lines written by this package's own outputs are skipped.
    """
    rows = list(_data_rows(path))
    if not rows:
        raise SchemaError(f"{path}: empty table")
    header_line, header = rows[0]
    if len(header) < 2:
        raise SchemaError(f"{path}:{header_line}: need an id column and one variable")
    names = tuple(header[1:])
    item_ids: List[str] = []
    values: List[List[float]] = []
    for line, row in rows[1:]:
        if len(row) != len(header):
            raise SchemaError(
                f"{path}:{line}: {len(row)} cells, header has {len(header)}"
            )
        item_ids.append(row[0])
        values.append(
            [math.nan if cell == "" else _parse_float(cell, path, line) for cell in row[1:]]
        )
    if not values:
        raise SchemaError(f"{path}: table has a header but no rows")
    return tuple(item_ids), names, np.array(values, dtype=float)


def format_number(value) -> str:
    """Full-precision, round-tripping text for machine output; '' for absent."""
    if value is None:
        return ""
    value = float(value)
    if math.isnan(value):
        return ""
    return repr(value)


def write_csv(
    path: PathLike,
    header: Sequence[str],
    rows: Iterable[Sequence],
    parameters: Optional[Dict[str, object]] = None,
) -> None:
    """Write a machine-readable CSV with a ``# key=value`` preamble.

    Numeric cells are written at full precision; None and NaN become empty
    cells.  Parameter lines come first, in the given order, so outputs are
    byte-identical across runs with the same inputs.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        for key, value in (parameters or {}).items():
            handle.write(f"# {key}={value}\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            cells = []
            for cell in row:
                if cell is None:
                    cells.append("")
                elif isinstance(cell, bool):
                    cells.append(str(cell).lower())
                elif isinstance(cell, float):
                    cells.append(format_number(cell))
                else:
                    cells.append(str(cell))
            writer.writerow(cells)


def load_config(path: PathLike) -> Dict[str, object]:
    """Read a JSON run configuration: one flat object of option values."""
    with open(path, encoding="utf-8") as handle:
        try:
            config = json.load(handle)
        except json.JSONDecodeError as err:
            raise SchemaError(f"{path}: not valid JSON ({err})") from None
    if not isinstance(config, dict):
        raise SchemaError(f"{path}: configuration must be a JSON object")
    return config
