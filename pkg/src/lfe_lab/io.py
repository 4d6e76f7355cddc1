"""CSV and JSON writers that stamp every file with its run configuration.

CSV files start with ``# lfe-lab <version> <config-json>``; JSON documents
carry the same information under a leading ``"header"`` key.  Floats are
written with ``repr`` so that reruns reproduce files byte for byte.
"""

from __future__ import annotations

import json
import sys
from contextlib import contextmanager
from typing import Any, Iterable, Iterator, Sequence, TextIO

from . import __version__

__all__ = ["header_line", "read_header", "write_csv", "write_json", "read_csv"]

_PREFIX = "# lfe-lab"


def _plain(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if hasattr(obj, "item"):
        return obj.item()
    return obj


def header_line(config: dict) -> str:
    return f"{_PREFIX} {__version__} " + json.dumps(_plain(config), sort_keys=True, separators=(",", ":"))


def read_header(line: str) -> tuple[str, dict]:
    """Parse a CSV header line into ``(version, config)``."""
    if not line.startswith(_PREFIX + " "):
        raise ValueError("not an lfe-lab header line")
    rest = line[len(_PREFIX) + 1 :].strip()
    version, _, cfg = rest.partition(" ")
    return version, json.loads(cfg)


@contextmanager
def _sink(path: str | None) -> Iterator[TextIO]:
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _fmt(v: Any) -> str:
    if hasattr(v, "item"):
        v = v.item()
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path: str | None, config: dict, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    with _sink(path) as fh:
        fh.write(header_line(config) + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_json(path: str | None, config: dict, payload: dict) -> None:
    doc = {"header": {"tool": "lfe-lab", "version": __version__, "config": config}}
    doc.update(payload)
    with _sink(path) as fh:
        fh.write(json.dumps(_plain(doc), indent=2) + "\n")


def read_csv(path: str) -> tuple[dict, list[str], list[list[float]]]:
    """Read a file written by :func:`write_csv`; the header line is optional."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    config: dict = {}
    if lines and lines[0].startswith("#"):
        _, config = read_header(lines[0])
        lines = lines[1:]
    cols = lines[0].split(",")
    rows = [[float(x) for x in ln.split(",")] for ln in lines[1:]]
    return config, cols, rows
