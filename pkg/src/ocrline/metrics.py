"""Collection-level CER/WER, character F1 and model selection.

CER is a micro-average: the sum of per-line character edit distances divided
by the total reference length.  WER joins all lines of a collection with
single spaces into one token sequence per side and computes one token-level
edit distance.  The F1 score for characters-of-interest is count-based: for
each line and character, TP = min(n_true, n_pred), FN = max(n_true - n_pred, 0),
FP = max(n_pred - n_true, 0), pooled over the whole collection.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, TYPE_CHECKING

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .corpus import LinePair
from .errors import DataError, MetricError

if TYPE_CHECKING:
    from .report import EvalReport


def edit_distance(a: Sequence, b: Sequence) -> int:
    """Minimal number of single-element substitutions, insertions and
    deletions transforming ``a`` into ``b``.

    Works on strings (character level) and on token lists (word level).
    """
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(
                min(
                    previous[j] + 1,
                    current[j - 1] + 1,
                    previous[j - 1] + (ca != cb),
                )
            )
        previous = current
    return previous[-1]


def cer(pairs: Sequence[LinePair]) -> float:
    """Collection character error rate: summed per-line edit distances over
    summed reference lengths.  May exceed 1.
    """
    total_ref = sum(len(p.reference.text) for p in pairs)
    if total_ref == 0:
        raise MetricError("undefined CER: empty reference collection")
    total_dist = sum(edit_distance(p.reference.text, p.hypothesis_text) for p in pairs)
    return total_dist / total_ref


def _tokens(texts: Sequence[str]) -> list[str]:
    return " ".join(texts).split()


def wer(pairs: Sequence[LinePair]) -> float:
    """Collection word error rate over whitespace tokens.

    All lines are joined with single spaces into one reference and one
    hypothesis token sequence; a single token-level edit distance is divided
    by the reference token count.
    """
    ref_tokens = _tokens([p.reference.text for p in pairs])
    if not ref_tokens:
        raise MetricError("undefined WER: no reference tokens")
    hyp_tokens = _tokens([p.hypothesis_text for p in pairs])
    return edit_distance(ref_tokens, hyp_tokens) / len(ref_tokens)


@dataclass(frozen=True)
class CharCounts:
    """Count-based error statistics for one character on one line."""

    char: str
    n_true: int
    n_pred: int
    tp: int
    fn_: int
    fp: int

    def __post_init__(self):
        if len(self.char) != 1:
            raise DataError(f"char must be a single scalar, got {self.char!r}")
        if self.tp != min(self.n_true, self.n_pred):
            raise DataError("tp must equal min(n_true, n_pred)")
        if self.fn_ != max(self.n_true - self.n_pred, 0):
            raise DataError("fn_ must equal max(n_true - n_pred, 0)")
        if self.fp != max(self.n_pred - self.n_true, 0):
            raise DataError("fp must equal max(n_pred - n_true, 0)")

    @classmethod
    def from_counts(cls, char: str, n_true: int, n_pred: int) -> "CharCounts":
        return cls(
            char=char,
            n_true=n_true,
            n_pred=n_pred,
            tp=min(n_true, n_pred),
            fn_=max(n_true - n_pred, 0),
            fp=max(n_pred - n_true, 0),
        )


@dataclass(frozen=True)
class CharacterSet:
    """A named set of characters-of-interest (post-NFC single scalars)."""

    name: str
    chars: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "chars", frozenset(self.chars))
        if not self.chars:
            raise DataError(f"character set {self.name!r} is empty")
        for c in self.chars:
            if len(c) != 1 or unicodedata.normalize("NFC", c) != c:
                raise DataError(f"character set {self.name!r}: {c!r} is not an NFC scalar")


# Per-language defaults cover the letters outside the Norwegian alphabet used
# by each contemporary orthography.  These are configurable defaults, not
# authoritative alphabets; override via a charset file where needed.
_DEFAULT_CHARSET_CHARS = {
    "sme-special": "áčđŋšŧžÁČĐŊŠŦŽ",
    "sma-special": "ïÏ",
    "smj-special": "áŋÁŊ",
    "smn-special": "áâäčđŋšžÁÂÄČĐŊŠŽ",
    "all-sami-special": "áÁâčČđïšŠžŋä",
}

DEFAULT_CHARSETS = {
    name: CharacterSet(name, frozenset(chars))
    for name, chars in _DEFAULT_CHARSET_CHARS.items()
}


def load_character_sets(path: Path | str) -> dict[str, CharacterSet]:
    """Load character sets from a TOML file of ``name = "chars"`` entries."""
    path = Path(path)
    try:
        with path.open("rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise DataError(f"{path}: invalid charset file: {exc}") from exc
    sets = {}
    for name, chars in data.items():
        if not isinstance(chars, str):
            raise DataError(f"{path}: value for {name!r} must be a string")
        sets[name] = CharacterSet(name, frozenset(unicodedata.normalize("NFC", chars)))
    return sets


def resolve_charset(name_or_path: str) -> CharacterSet:
    """Resolve a built-in charset name or a path to a single-set charset file."""
    if name_or_path in DEFAULT_CHARSETS:
        return DEFAULT_CHARSETS[name_or_path]
    path = Path(name_or_path)
    if path.exists():
        sets = load_character_sets(path)
        if len(sets) == 1:
            return next(iter(sets.values()))
        raise DataError(
            f"{path} defines {len(sets)} charsets; use NAME@FILE to pick one"
        )
    if "@" in name_or_path:
        name, _, file = name_or_path.partition("@")
        sets = load_character_sets(file)
        if name not in sets:
            raise DataError(f"{file}: no charset named {name!r}")
        return sets[name]
    raise DataError(f"unknown character set {name_or_path!r}")


def line_char_counts(ref: str, hyp: str, cs: CharacterSet) -> dict[str, CharCounts]:
    """Per-character counts for a single (reference, hypothesis) line pair."""
    return {
        c: CharCounts.from_counts(c, ref.count(c), hyp.count(c)) for c in sorted(cs.chars)
    }


def char_f1(
    pairs: Sequence[LinePair], cs: CharacterSet
) -> tuple[dict[str, Optional[float]], Optional[float]]:
    """Count-based F1 per character-of-interest and pooled over the set.

    Returns ``(per_char, overall)``.  A character absent from both sides of
    the whole collection has no defined F1 and maps to ``None``; ``overall``
    is ``None`` when no character-of-interest occurs anywhere.
    """
    tally = {c: [0, 0, 0] for c in cs.chars}  # tp, fn, fp
    for pair in pairs:
        for c, counts in line_char_counts(pair.reference.text, pair.hypothesis_text, cs).items():
            tally[c][0] += counts.tp
            tally[c][1] += counts.fn_
            tally[c][2] += counts.fp
    per_char: dict[str, Optional[float]] = {}
    total_tp = total_fn = total_fp = 0
    for c in sorted(cs.chars):
        tp, fn, fp = tally[c]
        total_tp += tp
        total_fn += fn
        total_fp += fp
        denom = 2 * tp + fn + fp
        per_char[c] = (2 * tp / denom) if denom else None
    overall_denom = 2 * total_tp + total_fn + total_fp
    overall = (2 * total_tp / overall_denom) if overall_denom else None
    return per_char, overall


@dataclass(frozen=True)
class MetricValues:
    """CER, WER and optional F1 for one group of pairs."""

    cer: float
    wer: float
    f1: Optional[float] = None

    @property
    def mean_cer_wer(self) -> float:
        return (self.cer + self.wer) / 2


def select_best(candidates: dict[str, MetricValues]) -> str:
    """Name of the candidate with minimal mean(CER, WER).

    Ties are broken by the lexicographically smallest name.
    """
    if not candidates:
        raise MetricError("select_best: empty candidate map")
    return min(candidates, key=lambda name: (candidates[name].mean_cer_wer, name))


def compute_metrics(pairs: Sequence[LinePair], cs: CharacterSet) -> MetricValues:
    """CER, WER and overall F1 for one group of pairs."""
    _, overall_f1 = char_f1(pairs, cs)
    return MetricValues(cer=cer(pairs), wer=wer(pairs), f1=overall_f1)


def evaluate(
    pairs: Sequence[LinePair],
    cs: CharacterSet,
    group_by_language: bool = False,
    model_name: str = "model",
    top_n_errors: int = 0,
) -> "EvalReport":
    """Evaluate a pair collection into a report with an ``overall`` group and,
    when requested, one group per reference language.
    """
    from .align import tabulate_errors
    from .report import EvalReport

    if not pairs:
        raise MetricError("evaluate: empty pair list")
    groups = {"overall": compute_metrics(pairs, cs)}
    if group_by_language:
        languages: dict[str, list[LinePair]] = {}
        for pair in pairs:
            languages.setdefault(pair.reference.language, []).append(pair)
        for language in sorted(languages):
            groups[language] = compute_metrics(languages[language], cs)
    error_table = tabulate_errors(pairs, top_n_errors) if top_n_errors else []
    return EvalReport(
        model_name=model_name,
        groups=groups,
        error_table=error_table,
        pair_count=len(pairs),
    )
