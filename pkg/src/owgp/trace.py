"""JSON-lines serialisation of execution traces."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Union

from .executive import ExecutionTrace


def dumps_record(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"), allow_nan=False)


def emit_trace(trace: Union[ExecutionTrace, Iterable[dict]], path) -> None:
    """Write one JSON record per line; an empty trace gives an empty file."""
    records = trace.records if isinstance(trace, ExecutionTrace) else list(trace)
    text = "".join(dumps_record(r) + "\n" for r in records)
    Path(path).write_text(text, encoding="utf-8")


def read_trace(path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
