"""Byte-stable file output helpers.

All writers go through an atomic temp-write-and-rename so interrupted runs
never leave partially written files, and float formatting uses shortest
round-trip repr so identical results serialize to identical bytes.
"""
from __future__ import annotations

import hashlib
import os
import tempfile
from collections.abc import Iterable, Mapping
from typing import Any


def fmt_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if hasattr(value, "item"):  # numpy scalar
        return fmt_value(value.item())
    return str(value)


def atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def render_csv(header: Iterable[str], rows: Iterable[Iterable[Any]]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt_value(v) for v in row))
    return "\n".join(lines) + "\n"


def write_csv(path: str, header: Iterable[str], rows: Iterable[Iterable[Any]]) -> None:
    atomic_write_text(path, render_csv(header, rows))


def render_kv(mapping: Mapping[str, Any]) -> str:
    return "".join(f"{key} = {fmt_value(val)}\n" for key, val in mapping.items())


def write_kv(path: str, mapping: Mapping[str, Any]) -> None:
    atomic_write_text(path, render_kv(mapping))


def sha256_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()
