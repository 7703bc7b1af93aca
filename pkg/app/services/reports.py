"""CSV / JSON serialization for command outputs."""

import csv
import io
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

from app.services.utils import format_float

logger = logging.getLogger(__name__)


def _cell(value: Any) -> Any:
    if isinstance(value, float):
        return format_float(value)
    if value is None:
        return ""
    return value


def rows_to_csv(
    rows: Iterable[Dict[str, Any]], fieldnames: Optional[Sequence[str]] = None
) -> tuple[str, int]:
    """
    Convert a sequence of row dictionaries to CSV text.

    Floats are written with 17 significant digits so files are
    reproducible byte for byte.

    Args:
        rows: dictionaries sharing the same keys
        fieldnames: column order; defaults to the keys of the first row

    Returns:
        CSV string with header, and the number of data rows.
        Returns a header-only string when fieldnames are given but rows are empty,
        and an empty string when neither is available.
    """
    rows = [{k: _cell(v) for k, v in row.items()} for row in rows]
    if fieldnames is None:
        if not rows:
            return "", 0
        fieldnames = list(rows[0].keys())

    output = io.StringIO()
    writer = csv.DictWriter(output, fieldnames=list(fieldnames), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    output.seek(0)
    return output.getvalue(), len(rows)


def save_text(content: str, path: Union[str, Path]) -> Path:
    """Write text content to path, creating parent directories."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(content)
    logger.info(f"Wrote {path}")
    return path


def write_csv(
    rows: List[Dict[str, Any]],
    path: Union[str, Path],
    fieldnames: Optional[Sequence[str]] = None,
) -> int:
    """Serialize rows and save them; returns the data row count."""
    content, count = rows_to_csv(rows, fieldnames)
    save_text(content, path)
    return count


def _round_trip_floats(obj: Any) -> Any:
    # json already emits repr() for floats, which is round-trip exact;
    # this only normalizes numpy scalars and tuples.
    if isinstance(obj, dict):
        return {str(k): _round_trip_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_trip_floats(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _round_trip_floats(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def to_json(payload: Dict[str, Any]) -> str:
    return json.dumps(_round_trip_floats(payload), indent=2, sort_keys=True) + "\n"


def write_json(payload: Dict[str, Any], path: Union[str, Path]) -> Path:
    return save_text(to_json(payload), path)
