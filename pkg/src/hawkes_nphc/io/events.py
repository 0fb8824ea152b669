"""
Event file ingestion and export.

CSV:   header `node_id,timestamp`, then one event per line.
JSONL: one `{"node": int, "t": float}` record per line.
"""

import csv
import json
from enum import Enum
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple, Union

import numpy as np
from loguru import logger

from ..errors import DataIOError, ParseError, ValidationError
from ..model import EventSequences
from .matrices import utf8_lines

CSV_HEADER = ("node_id", "timestamp")

PathLike = Union[str, Path]


class EventFormat(Enum):
    CSV = "csv"
    JSONL = "jsonl"


def _parse_node(raw, line: int, nodes: Optional[int]) -> int:
    try:
        value = float(raw)
    except (TypeError, ValueError):
        raise ParseError(f"Line {line}: node id {raw!r} is not an integer", line)
    if not value.is_integer() or isinstance(raw, bool):
        raise ParseError(f"Line {line}: node id {raw!r} is not an integer", line)
    node = int(value)
    if node < 0 or (nodes is not None and node >= nodes):
        upper = f"{nodes - 1}" if nodes is not None else "d-1"
        raise ParseError(f"Line {line}: node id {node} is outside 0..{upper}", line, node=node)
    return node


def _parse_time(raw, line: int) -> float:
    try:
        t = float(raw)
    except (TypeError, ValueError):
        raise ParseError(f"Line {line}: timestamp {raw!r} is not a number", line)
    if isinstance(raw, bool) or not np.isfinite(t) or t < 0:
        raise ParseError(f"Line {line}: timestamp {raw!r} must be finite and >= 0", line)
    return t


def _csv_records(path: Path) -> Iterator[Tuple[int, object, object]]:
    reader = csv.reader(utf8_lines(path))
    header_seen = False
    for row in reader:
        line = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        if not header_seen:
            if tuple(cell.strip() for cell in row) != CSV_HEADER:
                raise ParseError(
                    f"Line {line}: expected header {','.join(CSV_HEADER)!r}, got {','.join(row)!r}",
                    line)
            header_seen = True
            continue
        if len(row) != 2:
            raise ParseError(f"Line {line}: expected 2 columns, got {len(row)}", line)
        yield line, row[0].strip(), row[1].strip()


def _jsonl_records(path: Path) -> Iterator[Tuple[int, object, object]]:
    for line, text in enumerate(utf8_lines(path), 1):
        if not text.strip():
            continue
        try:
            record = json.loads(text)
        except json.JSONDecodeError as e:
            raise ParseError(f"Line {line}: invalid JSON ({e.msg})", line)
        if not isinstance(record, dict) or "node" not in record or "t" not in record:
            raise ParseError(f"Line {line}: expected an object with 'node' and 't'", line)
        yield line, record["node"], record["t"]


def ingest_events(path: PathLike, fmt: Union[str, EventFormat] = EventFormat.CSV,
                  horizon: Optional[float] = None,
                  nodes: Optional[int] = None) -> EventSequences:
    """
    Read an event file into validated, per-node sorted EventSequences.

    Args:
        path: Input file
        fmt: "csv" or "jsonl"
        horizon: Observation horizon T (default: the largest timestamp)
        nodes: Number of nodes d (default: largest node id + 1)

    Returns:
        EventSequences

    Raises:
        ParseError: malformed line, with its 1-based line number
        ValidationError: duplicate timestamp within a node, or a timestamp past the horizon
    """
    path = Path(path)
    fmt = EventFormat(fmt)
    if not path.exists():
        raise DataIOError(f"Event file not found: {path}", path=str(path))
    if nodes is not None and nodes < 1:
        raise ValidationError(f"nodes must be >= 1, got {nodes}")

    records = _csv_records(path) if fmt == EventFormat.CSV else _jsonl_records(path)
    seen: Dict[Tuple[int, float], int] = {}
    per_node: Dict[int, List[float]] = {}
    for line, raw_node, raw_time in records:
        node = _parse_node(raw_node, line, nodes)
        t = _parse_time(raw_time, line)
        first = seen.get((node, t))
        if first is not None:
            raise ValidationError(
                f"Duplicate timestamp {t!r} for node {node} on lines {first} and {line}",
                node=node, lines=[first, line])
        seen[(node, t)] = line
        per_node.setdefault(node, []).append(t)

    d = nodes if nodes is not None else (max(per_node) + 1 if per_node else 0)
    if d == 0:
        raise ValidationError("No events found; pass the number of nodes explicitly")
    latest = max((max(ts) for ts in per_node.values()), default=None)
    if horizon is None:
        if latest is None:
            raise ValidationError("No events found; pass the horizon explicitly")
        horizon = latest
    elif latest is not None and latest > horizon:
        raise ValidationError(f"Timestamp {latest!r} lies beyond the horizon {horizon!r}")

    events = tuple(np.sort(np.asarray(per_node.get(i, []), dtype=float)) for i in range(d))
    result = EventSequences(horizon_T=horizon, events=events)
    logger.info("Ingested {} events on {} nodes from {}", result.total_events, d, path)
    return result


def write_events_csv(events: EventSequences, path: PathLike):
    """Write events in the ingestion CSV format, ordered by node then time."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for node, times in enumerate(events.events):
            for t in times:
                writer.writerow((node, repr(float(t))))
