"""CSV and JSON emission helpers.

All CSV output is comma-delimited with a header row, ``.`` decimal separator,
and floats printed with 17 significant digits so values round-trip exactly.
"""

from __future__ import annotations

import json
import os
from typing import Iterable, Sequence


def fmt(value) -> str:
    """Format one cell: floats at 17 significant digits, everything else via str."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def write_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def publish(partial_path: str) -> str:
    """Atomically promote a ``.partial`` file to its final name."""
    if not partial_path.endswith(".partial"):
        raise ValueError(f"not a partial path: {partial_path}")
    final = partial_path[: -len(".partial")]
    os.replace(partial_path, final)
    return final
