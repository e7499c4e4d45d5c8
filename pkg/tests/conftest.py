import sys
from functools import lru_cache
from pathlib import Path

import pytest

from ocrline.corpus import LinePair, TranscribedLine

DATA_DIR = Path(__file__).parent / "data"

# The brute-force oracle recurses once per character pair.
sys.setrecursionlimit(10000)

# Glyph coverage for Sámi letters differs between these; DejaVu Sans covers
# á č đ ŋ š ŧ ž, which is what the synthetic tests rely on.
FONT_CANDIDATES = [
    Path("/usr/share/fonts/truetype/dejavu/DejaVuSans.ttf"),
    Path("/usr/share/fonts/truetype/dejavu/DejaVuSerif.ttf"),
]


@pytest.fixture(scope="session")
def fonts():
    available = [f for f in FONT_CANDIDATES if f.exists()]
    if not available:
        import matplotlib

        ttf = Path(matplotlib.get_data_path()) / "fonts" / "ttf"
        available = [ttf / "DejaVuSans.ttf", ttf / "DejaVuSerif.ttf"]
    return tuple(available)


def make_pair(ref: str, hyp: str, language: str = "mixed", pair_id: str = "p") -> LinePair:
    return LinePair(
        reference=TranscribedLine(id=pair_id, text=ref, language=language),
        hypothesis_text=hyp,
        source="test",
    )


def reference_edit_distance(a, b) -> int:
    """Brute-force memoized edit distance, straight from the recurrence.

    Kept independent of the implementation under test on purpose.
    """

    @lru_cache(maxsize=None)
    def d(i: int, j: int) -> int:
        if i == 0:
            return j
        if j == 0:
            return i
        return min(
            d(i - 1, j) + 1,
            d(i, j - 1) + 1,
            d(i - 1, j - 1) + (a[i - 1] != b[j - 1]),
        )

    return d(len(a), len(b))
