"""Streaming JSONL transcript I/O.

The canonical transcript format holds one campaign per line:

    {"campaign_id": "...", "posts": [{"post_id": "...", "author_id": "...",
                                      "paragraphs": ["..."]}]}

Dice rolls are recovered from inline notation on load rather than stored;
the annotated output format adds a ``rolls`` array per post. Streaming
keeps memory flat on large corpora.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import IO, Any, Iterable, Iterator

from .dice import extract_rolls
from .errors import FormatError
from .models import Campaign, Post


def campaign_from_record(record: dict[str, Any], line: int | None = None) -> Campaign:
    """Build a Campaign from one decoded JSONL record.

    Posts are re-indexed 0..n-1 in file order and inline dice notation is
    materialized into rolls.
    """
    try:
        campaign_id = record["campaign_id"]
        raw_posts = record["posts"]
    except (KeyError, TypeError) as exc:
        raise FormatError(f"missing field {exc}", line=line) from exc
    posts = []
    for index, raw in enumerate(raw_posts):
        try:
            paragraphs = tuple(raw["paragraphs"])
            post = Post(
                post_id=raw["post_id"],
                author_id=raw["author_id"],
                index=index,
                paragraphs=paragraphs,
                rolls=tuple(extract_rolls(paragraphs)),
            )
        except (KeyError, TypeError) as exc:
            raise FormatError(
                f"post {index} of campaign {campaign_id!r}: missing field {exc}",
                line=line,
            ) from exc
        except ValueError as exc:
            raise FormatError(
                f"post {index} of campaign {campaign_id!r}: {exc}", line=line
            ) from exc
        posts.append(post)
    try:
        return Campaign(campaign_id=campaign_id, posts=tuple(posts))
    except ValueError as exc:
        raise FormatError(f"campaign {campaign_id!r}: {exc}", line=line) from exc


def iter_jsonl(path: str | Path) -> Iterator[tuple[int, dict[str, Any]]]:
    """Yield (line_number, decoded_object) pairs; malformed lines raise."""
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise FormatError(f"invalid JSON ({exc.msg})", line=lineno) from exc
            yield lineno, obj


def load_campaigns(path: str | Path) -> Iterator[Campaign]:
    """Stream campaigns from a transcript file in file order."""
    for lineno, record in iter_jsonl(path):
        yield campaign_from_record(record, line=lineno)


def dump_json_line(obj: Any) -> str:
    """Canonical single-line JSON: compact separators, UTF-8 verbatim."""
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def write_campaigns(
    path_or_handle: str | Path | IO[str],
    campaigns: Iterable[Campaign],
    include_rolls: bool = False,
) -> None:
    """Write campaigns in canonical form; write(load(x)) is byte-identical
    for files already canonical."""

    def _write(handle: IO[str]) -> None:
        for campaign in campaigns:
            handle.write(dump_json_line(campaign.to_dict(include_rolls=include_rolls)))
            handle.write("\n")

    if isinstance(path_or_handle, (str, Path)):
        with open(path_or_handle, "w", encoding="utf-8") as handle:
            _write(handle)
    else:
        _write(path_or_handle)
