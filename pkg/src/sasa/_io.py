"""Helpers shared by the plain-text artifact formats."""

from __future__ import annotations

from .errors import FormatError


def parse_header(line: str, keys: tuple[str, ...]) -> dict[str, str]:
    """Parse a ``key=value key=value`` header line, requiring ``keys``."""
    fields = {}
    for part in line.split():
        key, sep, value = part.partition("=")
        if not sep:
            raise FormatError(f"malformed header field {part!r}")
        fields[key] = value
    missing = [k for k in keys if k not in fields]
    if missing:
        raise FormatError(f"header {line!r} missing {', '.join(missing)}")
    return fields


def split_fields(line: str, count: int, what: str, lineno: int) -> list[str]:
    parts = line.split("\t")
    if len(parts) != count:
        raise FormatError(f"{what} line {lineno}: expected {count} tab-separated fields")
    return parts
