"""Line-level OCR evaluation and synthetic text-line image generation."""

from .corpus import (
    Box,
    DatasetManifest,
    LinePair,
    MatchPolicy,
    Split,
    TranscribedLine,
    load_gt_pairs,
    match_hypotheses,
    parse_alto,
    read_manifest,
    write_manifest,
)
from .metrics import (
    CharCounts,
    CharacterSet,
    DEFAULT_CHARSETS,
    MetricValues,
    cer,
    char_f1,
    edit_distance,
    evaluate,
    select_best,
    wer,
)
from .align import AlignOp, ErrorSegment, ErrorTableRow, OpKind, merge_segments, tabulate_errors
from . import align
from .synth import DegradationKind, DegradationSpec, SynthConfig, degrade, generate_dataset, load_corpus_lines, render_line
from .report import Comparison, EvalReport, emit_csv, emit_json, emit_markdown, improvement_factors
from .errors import DataError, OcrlineError, RenderError

__version__ = "0.1.0"
