"""Data model and ingestion for line-level OCR datasets.

Supports tesstrain-style ``<stem>.gt.txt`` + image pairs, a subset of
ALTO-XML (TextLine/String/HYP with geometry), and JSON-Lines dataset
manifests.  All text is NFC-normalized at ingestion so that composed vs
decomposed encodings of letters like á, č, đ, ŋ never count as OCR errors.
"""

from __future__ import annotations

import json
import logging
import unicodedata
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field, asdict, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional

from .errors import AltoError, DataError, ManifestError, MatchError

logger = logging.getLogger(__name__)

DEFAULT_LANGUAGES = ("sma", "sme", "smj", "smn", "nor", "mixed")
DEFAULT_IMAGE_EXTENSIONS = ("png", "tif", "jpg", "bin.png")


class Split(str, Enum):
    """Dataset split a line belongs to."""

    GT = "GT"
    Pred = "Pred"
    Synth = "Synth"
    Val = "Val"
    Test = "Test"
    OOD = "OOD"


@dataclass(frozen=True)
class Box:
    """Axis-aligned rectangle in pixel coordinates."""

    x: float
    y: float
    width: float
    height: float

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise DataError(f"box must have positive size, got {self}")

    @property
    def area(self) -> float:
        return self.width * self.height

    def iou(self, other: "Box") -> float:
        """Intersection-over-union with another box."""
        ix = max(self.x, other.x)
        iy = max(self.y, other.y)
        ix2 = min(self.x + self.width, other.x + other.width)
        iy2 = min(self.y + self.height, other.y + other.height)
        inter = max(ix2 - ix, 0.0) * max(iy2 - iy, 0.0)
        union = self.area + other.area - inter
        if union <= 0:
            return 0.0
        return inter / union


@dataclass(frozen=True)
class TranscribedLine:
    """One transcribed text line, the atomic unit of every dataset."""

    id: str
    text: str
    language: str = "mixed"
    split: Split = Split.GT
    image_path: Optional[Path] = None
    bbox: Optional[Box] = None
    page_id: Optional[str] = None
    line_index: int = 0

    def __post_init__(self):
        if "\n" in self.text or "\r" in self.text:
            raise DataError(f"line {self.id!r}: text contains line breaks")
        if self.line_index < 0:
            raise DataError(f"line {self.id!r}: negative line_index")


@dataclass(frozen=True)
class LinePair:
    """A (reference, hypothesis) pair, the unit of evaluation.

    Both texts are NFC-normalized before any metric sees them.
    """

    reference: TranscribedLine
    hypothesis_text: str
    source: str = "unknown"

    def __post_init__(self):
        object.__setattr__(
            self, "hypothesis_text", unicodedata.normalize("NFC", self.hypothesis_text)
        )
        normalized = unicodedata.normalize("NFC", self.reference.text)
        if normalized != self.reference.text:
            object.__setattr__(self, "reference", replace(self.reference, text=normalized))


@dataclass
class DatasetManifest:
    """Ordered collection of lines plus free-form provenance metadata."""

    entries: list[TranscribedLine] = field(default_factory=list)
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        seen = set()
        for entry in self.entries:
            if entry.id in seen:
                raise ManifestError(f"duplicate entry id {entry.id!r}")
            seen.add(entry.id)
            if entry.split is Split.Synth and not entry.image_path:
                raise ManifestError(f"Synth entry {entry.id!r} has no image_path")


def _nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


def load_gt_pairs(
    directory: Path | str,
    image_extensions: Iterable[str] = DEFAULT_IMAGE_EXTENSIONS,
    language: str = "mixed",
    split: Split = Split.GT,
) -> list[TranscribedLine]:
    """Load a tesstrain-style directory of ``<stem>.gt.txt`` + sibling images.

    Lines are ordered lexicographically by stem.  A missing sibling image is
    logged as a warning; the line is still loaded with ``image_path=None``.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise DataError(f"not a directory: {directory}")
    lines = []
    for i, gt_file in enumerate(sorted(directory.glob("*.gt.txt"))):
        stem = gt_file.name[: -len(".gt.txt")]
        try:
            text = gt_file.read_text(encoding="utf-8")
        except UnicodeDecodeError as exc:
            raise DataError(f"{gt_file}: not valid UTF-8: {exc}") from exc
        text = _nfc(text.rstrip("\r\n"))
        image_path = None
        for ext in image_extensions:
            candidate = directory / f"{stem}.{ext}"
            if candidate.exists():
                image_path = candidate
                break
        if image_path is None:
            logger.warning("no sibling image for %s", gt_file)
        lines.append(
            TranscribedLine(
                id=stem,
                text=text,
                language=language,
                split=split,
                image_path=image_path,
                line_index=i,
            )
        )
    return lines


_ALTO_KEPT_TAGS = {"Page", "TextBlock", "TextLine", "String", "HYP", "SP"}


def _local_name(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _parse_box(elem: ET.Element) -> Optional[Box]:
    values = [elem.get(a) for a in ("HPOS", "VPOS", "WIDTH", "HEIGHT")]
    if any(v is None for v in values):
        return None
    try:
        x, y, w, h = (float(v) for v in values)
        return Box(x, y, w, h)
    except (ValueError, DataError):
        return None


def parse_alto(
    file: Path | str,
    keep_hyphen: bool = True,
    language: str = "mixed",
    split: Split = Split.Test,
) -> list[TranscribedLine]:
    """Parse a (namespaced or plain) ALTO-XML file into transcribed lines.

    Only Page/TextBlock/TextLine/String/HYP/SP elements are interpreted.
    Line text is the String CONTENTs joined by single spaces; a trailing HYP
    is appended to the text when ``keep_hyphen`` is true.  TextLines without
    String children are skipped with a warning.
    """
    file = Path(file)
    try:
        tree = ET.parse(file)
    except ET.ParseError as exc:
        raise AltoError(f"{file}: malformed XML at {exc.position}: {exc}") from exc

    lines: list[TranscribedLine] = []
    pages = [e for e in tree.getroot().iter() if _local_name(e.tag) == "Page"]
    if not pages:
        # Some exports omit the Page element; treat the document as one page.
        pages = [tree.getroot()]
    for page_number, page in enumerate(pages):
        page_id = page.get("ID") or f"page{page_number}"
        line_index = 0
        for text_line in (e for e in page.iter() if _local_name(e.tag) == "TextLine"):
            tokens = []
            hyphen = ""
            for child in text_line:
                name = _local_name(child.tag)
                if name == "String":
                    content = child.get("CONTENT")
                    if content is not None:
                        tokens.append(content)
                elif name == "HYP" and keep_hyphen:
                    hyphen = child.get("CONTENT", "-") or "-"
            if not tokens:
                logger.warning(
                    "%s: TextLine %s has no String children, skipped",
                    file,
                    text_line.get("ID", "?"),
                )
                continue
            text = _nfc(" ".join(tokens) + hyphen)
            lines.append(
                TranscribedLine(
                    id=text_line.get("ID") or f"{page_id}_l{line_index}",
                    text=text,
                    language=language,
                    split=split,
                    bbox=_parse_box(text_line),
                    page_id=page_id,
                    line_index=line_index,
                )
            )
            line_index += 1
    return lines


class MatchPolicy(str, Enum):
    """How to pair ground-truth lines with hypothesis lines."""

    bbox_iou = "bbox_iou"
    order = "order"


def match_hypotheses(
    gt: list[TranscribedLine],
    hyp: list[TranscribedLine],
    policy: MatchPolicy = MatchPolicy.bbox_iou,
    iou_threshold: float = 0.5,
    source: str = "unknown",
) -> list[LinePair]:
    """Pair each ground-truth line with at most one hypothesis line.

    ``bbox_iou`` pairs lines greedily by descending rectangle IoU, accepting
    pairs at or above ``iou_threshold``.  ``order`` pairs by
    ``(page_id, line_index)``.  Unmatched ground-truth lines are logged as
    warnings, never silently dropped.
    """
    policy = MatchPolicy(policy)
    pairs: list[LinePair] = []
    matched_gt: set[int] = set()
    if policy is MatchPolicy.bbox_iou:
        if any(line.bbox is None for line in gt) or any(line.bbox is None for line in hyp):
            raise MatchError("bbox_iou matching requires bboxes on all lines")
        candidates = []
        for gi, g in enumerate(gt):
            for hi, h in enumerate(hyp):
                if g.page_id != h.page_id:
                    continue
                iou = g.bbox.iou(h.bbox)
                if iou >= iou_threshold:
                    candidates.append((iou, gi, hi))
        # Greedy, highest IoU first; index tie-break keeps this deterministic.
        candidates.sort(key=lambda c: (-c[0], c[1], c[2]))
        matched_hyp: set[int] = set()
        chosen = []
        for iou, gi, hi in candidates:
            if gi in matched_gt or hi in matched_hyp:
                continue
            matched_gt.add(gi)
            matched_hyp.add(hi)
            chosen.append((gi, hi))
        for gi, hi in sorted(chosen):
            pairs.append(LinePair(gt[gi], hyp[hi].text, source=source))
    else:
        by_key = {(h.page_id, h.line_index): h for h in hyp}
        for gi, g in enumerate(gt):
            h = by_key.get((g.page_id, g.line_index))
            if h is not None:
                matched_gt.add(gi)
                pairs.append(LinePair(g, h.text, source=source))
    for gi, g in enumerate(gt):
        if gi not in matched_gt:
            logger.warning("unmatched ground-truth line %r (page %s)", g.id, g.page_id)
    return pairs


def _entry_to_json(line: TranscribedLine) -> dict:
    record = asdict(line)
    record["split"] = line.split.value
    record["image_path"] = str(line.image_path) if line.image_path else None
    return record


def _entry_from_json(record: dict) -> TranscribedLine:
    bbox = record.get("bbox")
    return TranscribedLine(
        id=record["id"],
        text=record["text"],
        language=record.get("language", "mixed"),
        split=Split(record.get("split", "GT")),
        image_path=Path(record["image_path"]) if record.get("image_path") else None,
        bbox=Box(**bbox) if bbox else None,
        page_id=record.get("page_id"),
        line_index=record.get("line_index", 0),
    )


def manifest_to_jsonl(manifest: DatasetManifest) -> str:
    """JSON-Lines serialization: one metadata header, one entry per line."""
    lines = [json.dumps({"metadata": manifest.metadata}, ensure_ascii=False, sort_keys=True)]
    lines.extend(
        json.dumps(_entry_to_json(entry), ensure_ascii=False, sort_keys=True)
        for entry in manifest.entries
    )
    return "\n".join(lines) + "\n"


def write_manifest(manifest: DatasetManifest, path: Path | str) -> None:
    """Write a manifest as JSON-Lines (see :func:`manifest_to_jsonl`)."""
    Path(path).write_text(manifest_to_jsonl(manifest), encoding="utf-8")


def read_manifest(path: Path | str) -> DatasetManifest:
    """Read a JSON-Lines manifest written by :func:`write_manifest`."""
    path = Path(path)
    entries = []
    metadata: dict[str, str] = {}
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                record = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"{path}:{lineno}: malformed JSON: {exc}") from exc
            if lineno == 1 and "metadata" in record and "id" not in record:
                metadata = record["metadata"]
                continue
            try:
                entries.append(_entry_from_json(record))
            except (KeyError, ValueError, DataError) as exc:
                raise ManifestError(f"{path}:{lineno}: bad entry: {exc}") from exc
    try:
        return DatasetManifest(entries=entries, metadata=metadata)
    except ManifestError as exc:
        raise ManifestError(f"{path}: {exc}") from exc
