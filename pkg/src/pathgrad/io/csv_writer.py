"""CSV tables with a provenance comment line.

Every table starts with ``# pathgrad <version> seed=<seed> config=<hash>``
followed by a header row. The hash is the first 12 hex digits of the
sha256 of the run configuration serialized as canonical JSON.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import sys
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path
from typing import Any, TextIO

from pydantic import BaseModel

logger = logging.getLogger(__name__)

HASH_LENGTH = 12


def canonical_json(payload: BaseModel | Mapping[str, Any]) -> str:
    data = payload.model_dump(mode="json") if isinstance(payload, BaseModel) else dict(payload)
    return json.dumps(data, sort_keys=True, separators=(",", ":"), default=str)


def config_hash(payload: BaseModel | Mapping[str, Any]) -> str:
    """sha256 of the canonical JSON, truncated to 12 hex digits."""
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()[:HASH_LENGTH]


def provenance_line(seed: int, digest: str) -> str:
    from pathgrad import __version__

    return f"# pathgrad {__version__} seed={seed} config={digest}"


def render_table(
    records: Iterable[Mapping[str, Any]], columns: Sequence[str], seed: int, digest: str
) -> str:
    """Table text: provenance line, header row, one line per record."""
    buf = io.StringIO()
    buf.write(provenance_line(seed, digest) + "\n")
    writer = csv.DictWriter(buf, fieldnames=list(columns), extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for record in records:
        writer.writerow({key: _format(record.get(key, "")) for key in columns})
    return buf.getvalue()


def write_table(
    records: Iterable[Mapping[str, Any]],
    columns: Sequence[str],
    seed: int,
    digest: str,
    path: Path | str | None = None,
    stream: TextIO | None = None,
) -> Path | None:
    """Write a table to ``path`` (parents created) or to ``stream``/stdout.

    Raises:
        OSError: If the file cannot be written
    """
    text = render_table(records, columns, seed, digest)
    if path is None:
        (stream or sys.stdout).write(text)
        return None
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8")
    logger.info("Wrote %s", out)
    return out


def read_table(path: Path | str) -> tuple[str, list[dict[str, str]]]:
    """(provenance line, rows) of a table written by ``write_table``."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith("# pathgrad"):
        raise ValueError(f"{path} is not a pathgrad table")
    return lines[0], list(csv.DictReader(lines[1:]))


def _format(value: Any) -> Any:
    if isinstance(value, float):
        return repr(value)
    return value
