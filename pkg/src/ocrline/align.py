"""Optimal string alignment and error tabulation.

The aligner is a unit-cost Levenshtein alignment (substitute / insert /
delete, no transpositions) with a fixed traceback preference of
diagonal > up > left, so identical inputs always produce identical op lists.
Adjacent errors are reported as segments, e.g. ``te -> s`` when a
substitution and a deletion touch, and tabulated across a collection with
the statistics

  n_e  count of this exact error segment
  n_m  total misses of the reference character (single-character refs only)
  n_c  total occurrences of that character in the reference collection
"""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

from .corpus import LinePair
from .errors import DataError


class OpKind(Enum):
    Match = "match"
    Substitute = "substitute"
    Delete = "delete"
    Insert = "insert"


@dataclass(frozen=True)
class AlignOp:
    """One step of an alignment between a reference and a hypothesis."""

    kind: OpKind
    ref_char: Optional[str] = None
    hyp_char: Optional[str] = None

    def __post_init__(self):
        if self.kind is OpKind.Match and self.ref_char != self.hyp_char:
            raise DataError("Match op with differing characters")
        if self.kind is OpKind.Substitute and (
            self.ref_char is None or self.hyp_char is None or self.ref_char == self.hyp_char
        ):
            raise DataError("Substitute op needs two differing characters")
        if self.kind is OpKind.Delete and (self.ref_char is None or self.hyp_char is not None):
            raise DataError("Delete op consumes only a reference character")
        if self.kind is OpKind.Insert and (self.hyp_char is None or self.ref_char is not None):
            raise DataError("Insert op produces only a hypothesis character")


@dataclass(frozen=True)
class ErrorSegment:
    """One alignment-derived error: a reference substring read as another."""

    ref_str: str
    hyp_str: str

    def __post_init__(self):
        if self.ref_str == self.hyp_str:
            raise DataError("error segment must differ between ref and hyp")


@dataclass(frozen=True)
class ErrorTableRow:
    """One row of an error table: a segment with its collection statistics."""

    segment: ErrorSegment
    n_e: int
    n_m: Optional[int] = None
    n_c: Optional[int] = None

    def __post_init__(self):
        if self.n_m is not None and self.n_c is not None:
            if not (self.n_e <= self.n_m <= self.n_c):
                raise DataError(
                    f"row {self.segment}: requires n_e <= n_m <= n_c, "
                    f"got {self.n_e}, {self.n_m}, {self.n_c}"
                )


def align(ref: str, hyp: str) -> list[AlignOp]:
    """Minimum-cost alignment of ``ref`` onto ``hyp``.

    The number of non-Match ops equals ``edit_distance(ref, hyp)`` and both
    strings are exactly recoverable from the op list.  Among equal-cost
    alignments the traceback prefers Match/Substitute, then Delete, then
    Insert at every cell.
    """
    n, m = len(ref), len(hyp)
    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        dist[i][0] = i
    for j in range(m + 1):
        dist[0][j] = j
    for i in range(1, n + 1):
        row = dist[i]
        prev = dist[i - 1]
        rc = ref[i - 1]
        for j in range(1, m + 1):
            row[j] = min(
                prev[j - 1] + (rc != hyp[j - 1]),
                prev[j] + 1,
                row[j - 1] + 1,
            )
    ops: list[AlignOp] = []
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and dist[i][j] == dist[i - 1][j - 1] + (ref[i - 1] != hyp[j - 1]):
            if ref[i - 1] == hyp[j - 1]:
                ops.append(AlignOp(OpKind.Match, ref[i - 1], hyp[j - 1]))
            else:
                ops.append(AlignOp(OpKind.Substitute, ref[i - 1], hyp[j - 1]))
            i -= 1
            j -= 1
        elif i > 0 and dist[i][j] == dist[i - 1][j] + 1:
            ops.append(AlignOp(OpKind.Delete, ref[i - 1]))
            i -= 1
        else:
            ops.append(AlignOp(OpKind.Insert, None, hyp[j - 1]))
            j -= 1
    ops.reverse()
    return ops


def _run_to_segment(run: Sequence[AlignOp]) -> ErrorSegment:
    return ErrorSegment(
        ref_str="".join(op.ref_char for op in run if op.ref_char is not None),
        hyp_str="".join(op.hyp_char for op in run if op.hyp_char is not None),
    )


def merge_segments(ops: Sequence[AlignOp]) -> list[ErrorSegment]:
    """Merge maximal runs of consecutive non-Match ops into error segments."""
    segments = []
    run: list[AlignOp] = []
    for op in ops:
        if op.kind is OpKind.Match:
            if run:
                segments.append(_run_to_segment(run))
                run = []
        else:
            run.append(op)
    if run:
        segments.append(_run_to_segment(run))
    return segments


def _tabulation_segments(ops: Sequence[AlignOp]) -> list[ErrorSegment]:
    """Error segments as counted in the error tables.

    A run consisting purely of substitutions is counted one character at a
    time (each substitution is its own confusion), while runs that mix
    substitutions with insertions or deletions are counted as one
    multi-character segment.
    """
    segments = []
    for run_segment, run in _runs(ops):
        if all(op.kind is OpKind.Substitute for op in run):
            segments.extend(_run_to_segment([op]) for op in run)
        else:
            segments.append(run_segment)
    return segments


def _runs(ops: Sequence[AlignOp]):
    run: list[AlignOp] = []
    for op in ops:
        if op.kind is OpKind.Match:
            if run:
                yield _run_to_segment(run), run
                run = []
        else:
            run.append(op)
    if run:
        yield _run_to_segment(run), run


def tabulate_errors(pairs: Sequence[LinePair], top_n: int = 10) -> list[ErrorTableRow]:
    """The ``top_n`` most common error segments across all pairs.

    Rows are sorted by descending n_e, ties by (ref_str, hyp_str).  n_m and
    n_c are only defined for single-character reference sides; insertions and
    multi-character segments render them as "--".
    """
    if top_n < 1:
        raise DataError("top_n must be >= 1")
    segment_counts: Counter[ErrorSegment] = Counter()
    miss_counts: Counter[str] = Counter()
    ref_char_counts: Counter[str] = Counter()
    for pair in pairs:
        ref_char_counts.update(pair.reference.text)
        for segment in _tabulation_segments(align(pair.reference.text, pair.hypothesis_text)):
            segment_counts[segment] += 1
            if len(segment.ref_str) == 1:
                miss_counts[segment.ref_str] += 1
    ordered = sorted(
        segment_counts.items(), key=lambda item: (-item[1], item[0].ref_str, item[0].hyp_str)
    )
    rows = []
    for segment, n_e in ordered[:top_n]:
        if len(segment.ref_str) == 1:
            rows.append(
                ErrorTableRow(
                    segment,
                    n_e,
                    n_m=miss_counts[segment.ref_str],
                    n_c=ref_char_counts[segment.ref_str],
                )
            )
        else:
            rows.append(ErrorTableRow(segment, n_e))
    return rows


def error_table_csv(rows: Sequence[ErrorTableRow]) -> str:
    """Serialize an error table as RFC 4180 CSV with empty cells for "--"."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\r\n")
    writer.writerow(["ref", "hyp", "n_e", "n_m", "n_c"])
    for row in rows:
        writer.writerow(
            [
                row.segment.ref_str,
                row.segment.hyp_str,
                row.n_e,
                "" if row.n_m is None else row.n_m,
                "" if row.n_c is None else row.n_c,
            ]
        )
    return buffer.getvalue()


def error_table_markdown(rows: Sequence[ErrorTableRow]) -> str:
    """Serialize an error table in the two-column-arrow markdown layout."""
    lines = [
        "| Error | | | n_e | n_m | n_c |",
        "| --- | --- | --- | --- | --- | --- |",
    ]
    for row in rows:
        lines.append(
            "| `{}` | → | `{}` | {} | {} | {} |".format(
                row.segment.ref_str,
                row.segment.hyp_str,
                row.n_e,
                "--" if row.n_m is None else row.n_m,
                "--" if row.n_c is None else row.n_c,
            )
        )
    return "\n".join(lines) + "\n"
