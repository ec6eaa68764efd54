"""Rendering of string tables as TSV or Markdown."""

from __future__ import annotations

from typing import Sequence

FORMATS = ("tsv", "json", "markdown")


def render_tsv(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    lines = ["\t".join(headers)] + ["\t".join(r) for r in rows]
    return "\n".join(lines) + "\n"


def render_markdown(headers: Sequence[str], rows: Sequence[Sequence[str]], numeric_from: int = 1) -> str:
    """GitHub-style table; columns from ``numeric_from`` on are right-aligned."""
    align = ["---" if i < numeric_from else "---:" for i in range(len(headers))]
    lines = [
        "| " + " | ".join(headers) + " |",
        "| " + " | ".join(align) + " |",
    ]
    lines += ["| " + " | ".join(r) + " |" for r in rows]
    return "\n".join(lines) + "\n"


def render(headers: Sequence[str], rows: Sequence[Sequence[str]], fmt: str, numeric_from: int = 1) -> str:
    if fmt == "tsv":
        return render_tsv(headers, rows)
    if fmt == "markdown":
        return render_markdown(headers, rows, numeric_from)
    raise ValueError(f"table format must be tsv or markdown, got {fmt!r}")
