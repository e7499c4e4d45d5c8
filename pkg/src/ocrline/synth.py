"""Deterministic synthetic text-line image generation.

Renders corpus lines with varied fonts and colours, adds an uppercase twin
for a configurable fraction of lines (default 10 %), applies parameterized
scan-like degradations, and writes tesstrain-style ``<stem>.png`` +
``<stem>.gt.txt`` pairs plus a JSON-Lines manifest.

Every random choice is driven by a per-line seed derived from
(master seed, line text, duplicate index), so the whole run is a pure
function of (lines, config): re-running produces byte-identical images and
manifests, and the output for one line does not depend on which other lines
are present.

The default degradation magnitudes (noise sigma 2-8, blur radius up to
1.5 px, rotation within ±2°, JPEG quality 30-80) are invented placeholders,
not calibrated against any scanner model; tune them per use case.
"""

from __future__ import annotations

import hashlib
import io
import logging
import unicodedata
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from PIL import Image, ImageDraw, ImageFilter, ImageFont
from fontTools.ttLib import TTFont

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .corpus import DatasetManifest, Split, TranscribedLine, write_manifest
from .errors import DataError, RenderError

logger = logging.getLogger(__name__)

RGB = tuple[int, int, int]


class DegradationKind(str, Enum):
    GaussianNoise = "gaussian_noise"
    Blur = "blur"
    Rotate = "rotate"
    JpegArtifact = "jpeg_artifact"
    BleedThrough = "bleed_through"
    SaltPepper = "salt_pepper"


_DEFAULT_PARAMS: dict[DegradationKind, dict[str, tuple[float, float]]] = {
    DegradationKind.GaussianNoise: {"sigma": (2.0, 8.0)},
    DegradationKind.Blur: {"radius": (0.0, 1.5)},
    DegradationKind.Rotate: {"degrees": (-2.0, 2.0)},
    DegradationKind.JpegArtifact: {"quality": (30.0, 80.0)},
    DegradationKind.BleedThrough: {"alpha": (0.05, 0.25)},
    DegradationKind.SaltPepper: {"density": (0.0005, 0.005)},
}

MAX_ROTATION_DEGREES = 3.0


@dataclass(frozen=True)
class DegradationSpec:
    """One degradation with its application probability and parameter ranges."""

    kind: DegradationKind
    probability: float = 1.0
    params: dict[str, tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise DataError(f"{self.kind}: probability must be in [0, 1]")
        merged = dict(_DEFAULT_PARAMS[DegradationKind(self.kind)])
        merged.update({k: (float(lo), float(hi)) for k, (lo, hi) in self.params.items()})
        object.__setattr__(self, "params", merged)
        if self.kind is DegradationKind.Rotate:
            lo, hi = self.params["degrees"]
            if max(abs(lo), abs(hi)) > MAX_ROTATION_DEGREES:
                raise DataError(f"rotation bounded to ±{MAX_ROTATION_DEGREES} degrees")


DEFAULT_DEGRADATIONS = (
    DegradationSpec(DegradationKind.GaussianNoise, probability=0.5),
    DegradationSpec(DegradationKind.Blur, probability=0.3),
    DegradationSpec(DegradationKind.Rotate, probability=0.3),
    DegradationSpec(DegradationKind.JpegArtifact, probability=0.3),
)


def _luminance(color: RGB) -> float:
    r, g, b = color
    return 0.299 * r + 0.587 * g + 0.114 * b


@dataclass(frozen=True)
class SynthConfig:
    """Configuration for a synthetic dataset run."""

    fonts: tuple[Path, ...]
    output_dir: Path
    font_size_range: tuple[int, int] = (24, 48)
    padding_px: int = 8
    fg_colors: tuple[RGB, ...] = ((0, 0, 0), (40, 40, 40), (60, 30, 10))
    bg_colors: tuple[RGB, ...] = ((255, 255, 255), (245, 240, 225), (230, 225, 210))
    uppercase_prob: float = 0.10
    degradations: tuple[DegradationSpec, ...] = DEFAULT_DEGRADATIONS
    seed: int = 0
    contrast_floor: float = 50.0

    def __post_init__(self):
        if not self.fonts:
            raise DataError("at least one font is required")
        if self.font_size_range[0] < 6:
            raise DataError("minimum font size is 6 pt")
        if self.font_size_range[0] > self.font_size_range[1]:
            raise DataError("font_size_range must be (min, max)")
        if self.padding_px < 0:
            raise DataError("padding_px must be >= 0")
        if not self.fg_colors or not self.bg_colors:
            raise DataError("fg_colors and bg_colors must be non-empty")
        if not 0.0 <= self.uppercase_prob <= 1.0:
            raise DataError("uppercase_prob must be in [0, 1]")
        if not self._contrast_pairs():
            raise DataError(
                f"no fg/bg pair reaches the contrast floor of {self.contrast_floor}"
            )

    def _contrast_pairs(self) -> list[tuple[RGB, RGB]]:
        return [
            (fg, bg)
            for fg in self.fg_colors
            for bg in self.bg_colors
            if abs(_luminance(fg) - _luminance(bg)) >= self.contrast_floor
        ]


@dataclass(frozen=True)
class RenderRecord:
    """Choices made while rendering one line."""

    font: Path
    size_pt: int
    fg: RGB
    bg: RGB


def derive_seed(master_seed: int, text: str, occurrence: int, role: str = "render") -> int:
    """Stable 64-bit per-line seed; independent of the line's position."""
    digest = hashlib.blake2b(
        f"{master_seed}\x1f{occurrence}\x1f{role}\x1f{text}".encode("utf-8"),
        digest_size=8,
    ).digest()
    return int.from_bytes(digest, "big")


_CMAP_CACHE: dict[Path, set[int]] = {}


def _font_codepoints(font_path: Path) -> set[int]:
    if font_path not in _CMAP_CACHE:
        try:
            tt = TTFont(str(font_path), fontNumber=0, lazy=True)
            _CMAP_CACHE[font_path] = set(tt.getBestCmap().keys())
            tt.close()
        except Exception as exc:
            raise RenderError(f"cannot read font {font_path}: {exc}") from exc
    return _CMAP_CACHE[font_path]


def _missing_glyphs(text: str, font_path: Path) -> list[str]:
    cmap = _font_codepoints(font_path)
    return [c for c in dict.fromkeys(text) if c != " " and ord(c) not in cmap]


def render_line(
    text: str, cfg: SynthConfig, rng: np.random.Generator
) -> tuple[Image.Image, RenderRecord]:
    """Render one text line on a padded raster with config-driven styling.

    The font is drawn at random; if it lacks a glyph for the text the
    remaining fonts are tried in config order.  If no font covers the text
    a RenderError names the missing scalars.
    """
    text = text.strip()
    if not text:
        raise RenderError("empty text line")
    start = int(rng.integers(len(cfg.fonts)))
    font_path = None
    missing: list[str] = []
    for offset in range(len(cfg.fonts)):
        candidate = cfg.fonts[(start + offset) % len(cfg.fonts)]
        missing = _missing_glyphs(text, candidate)
        if not missing:
            font_path = candidate
            break
    if font_path is None:
        raise RenderError(
            f"no font covers scalars {missing!r} (tried {[str(f) for f in cfg.fonts]})"
        )
    size = int(rng.integers(cfg.font_size_range[0], cfg.font_size_range[1] + 1))
    pairs = cfg._contrast_pairs()
    fg, bg = pairs[int(rng.integers(len(pairs)))]
    font = ImageFont.truetype(str(font_path), size)
    ascent, descent = font.getmetrics()
    left, _, right, _ = font.getbbox(text)
    width = max(int(right - left), 1) + 2 * cfg.padding_px
    height = ascent + descent + 2 * cfg.padding_px
    image = Image.new("RGB", (width, height), bg)
    draw = ImageDraw.Draw(image)
    draw.text((cfg.padding_px - left, cfg.padding_px), text, font=font, fill=fg)
    return image, RenderRecord(font=font_path, size_pt=size, fg=fg, bg=bg)


def _sample(rng: np.random.Generator, bounds: tuple[float, float]) -> float:
    lo, hi = bounds
    if lo == hi:
        return lo
    return float(rng.uniform(lo, hi))


def _apply_degradation(
    image: Image.Image, spec: DegradationSpec, rng: np.random.Generator
) -> Image.Image:
    kind = spec.kind
    if kind is DegradationKind.GaussianNoise:
        sigma = _sample(rng, spec.params["sigma"])
        arr = np.asarray(image, dtype=np.float64)
        arr = arr + rng.normal(0.0, sigma, size=arr.shape)
        return Image.fromarray(np.clip(arr, 0, 255).astype(np.uint8))
    if kind is DegradationKind.Blur:
        radius = _sample(rng, spec.params["radius"])
        return image.filter(ImageFilter.GaussianBlur(radius))
    if kind is DegradationKind.Rotate:
        degrees = _sample(rng, spec.params["degrees"])
        if degrees == 0.0:
            return image
        fill = image.getpixel((0, 0))
        return image.rotate(
            degrees, resample=Image.Resampling.BICUBIC, expand=True, fillcolor=fill
        )
    if kind is DegradationKind.JpegArtifact:
        quality = int(round(_sample(rng, spec.params["quality"])))
        buffer = io.BytesIO()
        image.save(buffer, format="JPEG", quality=quality)
        buffer.seek(0)
        return Image.open(buffer).convert("RGB")
    if kind is DegradationKind.BleedThrough:
        alpha = _sample(rng, spec.params["alpha"])
        mirrored = image.transpose(Image.Transpose.FLIP_LEFT_RIGHT)
        return Image.blend(image, mirrored, alpha)
    if kind is DegradationKind.SaltPepper:
        density = _sample(rng, spec.params["density"])
        arr = np.array(image)
        mask = rng.random(arr.shape[:2]) < density
        values = rng.integers(0, 2, size=arr.shape[:2]) * 255
        arr[mask] = values[mask][:, None]
        return Image.fromarray(arr)
    raise DataError(f"unknown degradation kind {kind!r}")


def degrade(
    image: Image.Image, specs: Sequence[DegradationSpec], rng: np.random.Generator
) -> Image.Image:
    """Apply each degradation independently with its probability.

    Deterministic for a fixed generator state; only Rotate may change the
    image dimensions (bounding-box expansion).
    """
    for spec in specs:
        if rng.random() < spec.probability:
            image = _apply_degradation(image, spec, rng)
    return image


def load_corpus_lines(files: Iterable[Path | str], max_len: int = 200) -> list[str]:
    """Read corpus text files into clean candidate lines.

    Lines are trimmed, NFC-normalized, deduplicated preserving first
    occurrence; empty lines and lines longer than ``max_len`` scalars are
    dropped (the latter counted in a log summary).
    """
    seen: dict[str, None] = {}
    skipped_long = 0
    for file in files:
        file = Path(file)
        try:
            content = file.read_text(encoding="utf-8")
        except UnicodeDecodeError as exc:
            raise DataError(f"{file}: not valid UTF-8: {exc}") from exc
        for raw in content.splitlines():
            line = unicodedata.normalize("NFC", raw.strip())
            if not line:
                continue
            if len(line) > max_len:
                skipped_long += 1
                continue
            seen.setdefault(line, None)
    if skipped_long:
        logger.info("load_corpus_lines: skipped %d lines longer than %d", skipped_long, max_len)
    return list(seen)


@dataclass(frozen=True)
class PlannedLine:
    """One planned output pair (text, file stem, render seed)."""

    text: str
    stem: str
    seed: int
    uppercase_twin: bool = False


def plan_dataset(lines: Sequence[str], cfg: SynthConfig) -> list[PlannedLine]:
    """Decide, without rendering, which pairs a run will produce.

    Each input line yields one pair; with probability ``uppercase_prob``
    (decided by the line's derived seed) an extra uppercase pair follows it.
    """
    occurrences: dict[str, int] = {}
    planned = []
    for index, raw in enumerate(lines):
        text = unicodedata.normalize("NFC", raw.strip())
        if not text:
            continue
        occurrence = occurrences.get(text, 0)
        occurrences[text] = occurrence + 1
        planned.append(
            PlannedLine(
                text=text,
                stem=f"{index:06d}",
                seed=derive_seed(cfg.seed, text, occurrence, "render"),
            )
        )
        upper_rng = np.random.default_rng(derive_seed(cfg.seed, text, occurrence, "uppercase"))
        if upper_rng.random() < cfg.uppercase_prob:
            planned.append(
                PlannedLine(
                    text=text.upper(),
                    stem=f"{index:06d}_upper",
                    seed=derive_seed(cfg.seed, text, occurrence, "render-upper"),
                    uppercase_twin=True,
                )
            )
    return planned


def generate_dataset(
    lines: Sequence[str], cfg: SynthConfig, language: str = "mixed"
) -> DatasetManifest:
    """Render, degrade and write the full synthetic dataset.

    Writes ``<stem>.png`` + ``<stem>.gt.txt`` pairs and ``manifest.jsonl``
    under ``cfg.output_dir``.  Per-line render failures are logged and
    counted, not fatal.  Output is a pure function of (lines, cfg).
    """
    if not lines:
        raise DataError("generate_dataset: no input lines")
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    skipped = 0
    for planned in plan_dataset(lines, cfg):
        rng = np.random.default_rng(planned.seed)
        try:
            image, _record = render_line(planned.text, cfg, rng)
        except RenderError as exc:
            logger.warning("skipping line %r: %s", planned.text, exc)
            skipped += 1
            continue
        image = degrade(image, cfg.degradations, rng)
        image_name = f"{planned.stem}.png"
        image.save(out / image_name, format="PNG")
        (out / f"{planned.stem}.gt.txt").write_text(planned.text + "\n", encoding="utf-8")
        entries.append(
            TranscribedLine(
                id=planned.stem,
                text=planned.text,
                language=language,
                split=Split.Synth,
                image_path=Path(image_name),
                line_index=len(entries),
            )
        )
    manifest = DatasetManifest(
        entries=entries,
        metadata={
            "generator": "ocrline-synth",
            "seed": str(cfg.seed),
            "input_lines": str(len(lines)),
            "pairs": str(len(entries)),
            "skipped": str(skipped),
        },
    )
    write_manifest(manifest, out / "manifest.jsonl")
    return manifest


def load_synth_config(path: Path | str, **overrides) -> SynthConfig:
    """Load a SynthConfig from a TOML file; keyword overrides win."""
    path = Path(path)
    with path.open("rb") as fh:
        data = tomllib.load(fh)
    kwargs: dict = {}
    if "fonts" in data:
        kwargs["fonts"] = tuple(Path(f) for f in data["fonts"])
    if "output_dir" in data:
        kwargs["output_dir"] = Path(data["output_dir"])
    for key in ("padding_px", "uppercase_prob", "seed", "contrast_floor"):
        if key in data:
            kwargs[key] = data[key]
    if "font_size_range" in data:
        kwargs["font_size_range"] = tuple(data["font_size_range"])
    for key in ("fg_colors", "bg_colors"):
        if key in data:
            kwargs[key] = tuple(tuple(c) for c in data[key])
    if "degradations" in data:
        kwargs["degradations"] = tuple(
            DegradationSpec(
                kind=DegradationKind(d["kind"]),
                probability=d.get("probability", 1.0),
                params={k: tuple(v) for k, v in d.get("params", {}).items()},
            )
            for d in data["degradations"]
        )
    kwargs.update(overrides)
    if "fonts" not in kwargs or "output_dir" not in kwargs:
        raise DataError(f"{path}: config must define fonts and output_dir")
    return SynthConfig(**kwargs)
