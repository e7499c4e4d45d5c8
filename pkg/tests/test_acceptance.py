"""Acceptance suite: one test per release criterion, one printed line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the pass/fail
lines.
"""

import hashlib
import json
import random
import time
from fractions import Fraction

import pytest

from ocrline.align import align, tabulate_errors, OpKind
from ocrline.cli import run
from ocrline.corpus import Box
from ocrline.errors import AltoError
from ocrline.metrics import (
    CharacterSet,
    DEFAULT_CHARSETS,
    MetricValues,
    cer,
    char_f1,
    edit_distance,
    line_char_counts,
    select_best,
    wer,
)
from ocrline.corpus import parse_alto
from ocrline.report import Comparison, EvalReport, improvement_factors, parse_report_json
from ocrline.synth import SynthConfig, generate_dataset, plan_dataset

from conftest import DATA_DIR, make_pair, reference_edit_distance

ALPHABET = "abcdefghijklmnop áčđŋšžâï.,-"


def _random_text(rng, max_len=20):
    return "".join(rng.choice(ALPHABET) for _ in range(rng.randint(0, max_len)))


def _report(name, cer_value, wer_value, f1=None):
    return EvalReport(
        model_name=name,
        groups={"overall": MetricValues(cer=cer_value, wer=wer_value, f1=f1)},
        pair_count=848,
    )


def _done(n, message):
    print(f"ACCEPTANCE {n}: {message}: PASS")


def test_criterion_1_edit_distance_oracle():
    rng = random.Random(12345)
    start = time.perf_counter()
    for _ in range(1000):
        a = _random_text(rng)
        b = _random_text(rng)
        assert edit_distance(a, b) == reference_edit_distance(a, b)
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0
    _done(1, f"edit-distance oracle, 1000 pairs in {elapsed:.2f}s")


# Ten-pair fixture with expected values derived twice: once by hand DP and
# direct formula evaluation, once by an independent recursive-DP script.
# Exact fractions are frozen below.
FIXTURE_PAIRS = [
    ("boađe dál", "boađe dál", "sme"),
    ("čáppa girji", "cáppa girji", "sme"),
    ("sámi giella", "sami giela", "sme"),
    ("ïje jïh", "ije jih", "sma"),
    ("åarjel saemien", "åarjel saemien", "sma"),
    ("gåetie lea stoerre", "gåetie lea stoere", "sma"),
    ("mijjen gïele", "mijen giele", "sma"),
    ("đe ŋal", "de nal", "sme"),
    ("guokte", "guoktte", "sme"),
    ("ážžut", "ážut", "sme"),
]

FIXTURE_EXPECTED = {
    "overall": (Fraction(4, 33), Fraction(12, 19), Fraction(5, 9)),
    "sme": (Fraction(7, 48), Fraction(7, 10), Fraction(2, 3)),
    "sma": (Fraction(5, 51), Fraction(5, 9), Fraction(0)),
}

FIXTURE_PER_CHAR = {
    "á": Fraction(6, 7),
    "đ": Fraction(2, 3),
    "ž": Fraction(2, 3),
    "ï": Fraction(0),
    "č": Fraction(0),
    "ŋ": Fraction(0),
}


def test_criterion_2_metric_fixture():
    cs = DEFAULT_CHARSETS["all-sami-special"]
    pairs = [make_pair(r, h, language=l, pair_id=f"f{i}")
             for i, (r, h, l) in enumerate(FIXTURE_PAIRS)]
    rel = 1e-9
    for group, (exp_cer, exp_wer, exp_f1) in FIXTURE_EXPECTED.items():
        subset = pairs if group == "overall" else [p for p in pairs if p.reference.language == group]
        assert cer(subset) == pytest.approx(float(exp_cer), rel=rel)
        assert wer(subset) == pytest.approx(float(exp_wer), rel=rel)
        _, overall_f1 = char_f1(subset, cs)
        assert overall_f1 == pytest.approx(float(exp_f1), rel=rel, abs=1e-12)
    per_char, _ = char_f1(pairs, cs)
    for char, expected in FIXTURE_PER_CHAR.items():
        assert per_char[char] == pytest.approx(float(expected), rel=rel, abs=1e-12)
    for char in "âäÁČŠš":
        assert per_char[char] is None
    _done(2, "10-pair metric fixture reproduced to 1e-9 relative")


def test_criterion_3_f1_formula_property():
    rng = random.Random(777)
    pool = list("áčđŋšžâï")
    violations = 0
    for _ in range(10_000):
        ref = _random_text(rng, 12)
        hyp = _random_text(rng, 12)
        chars = frozenset(rng.sample(pool, rng.randint(1, len(pool))))
        cs = CharacterSet("t", chars)
        for counts in line_char_counts(ref, hyp, cs).values():
            ok = (
                counts.tp == min(counts.n_true, counts.n_pred)
                and counts.fn_ == max(counts.n_true - counts.n_pred, 0)
                and counts.fp == max(counts.n_pred - counts.n_true, 0)
                and counts.tp + counts.fn_ == counts.n_true
                and counts.tp + counts.fp == counts.n_pred
            )
            if not ok:
                violations += 1
        _, overall = char_f1([make_pair(ref, hyp)], cs)
        if overall is not None and not (0.0 <= overall <= 1.0):
            violations += 1
    assert violations == 0
    _done(3, "F1 formula properties, 10000 cases, 0 violations")


def test_criterion_4_alignment_consistency():
    rng = random.Random(4242)
    for _ in range(1000):
        ref = _random_text(rng)
        hyp = _random_text(rng)
        ops = align(ref, hyp)
        assert sum(op.kind is not OpKind.Match for op in ops) == edit_distance(ref, hyp)
        assert "".join(op.ref_char for op in ops if op.ref_char is not None) == ref
        assert "".join(op.hyp_char for op in ops if op.hyp_char is not None) == hyp
    pairs = [make_pair(_random_text(rng), _random_text(rng), pair_id=f"p{i}")
             for i in range(200)]
    for row in tabulate_errors(pairs, 1000):
        if len(row.segment.ref_str) == 1:
            assert row.n_m is not None and row.n_c is not None
            assert row.n_e <= row.n_m <= row.n_c
    _done(4, "alignment consistency on 1000 random pairs")


def test_criterion_5_selection_on_published_validation_scores():
    candidates = {
        "scratch+GT": MetricValues(cer=1.28, wer=4.34),
        "GT+Nor": MetricValues(cer=1.31, wer=4.35),
        "GT+Pred": MetricValues(cer=1.48, wer=4.02),
        "all-datasets": MetricValues(cer=1.07, wer=3.58),
    }
    start = time.perf_counter()
    best = select_best(candidates)
    elapsed = time.perf_counter() - start
    assert best == "all-datasets"
    assert candidates[best].mean_cer_wer == pytest.approx(2.325)
    assert elapsed < 0.001
    _done(5, f"validation-score selection exact in {elapsed * 1e6:.0f}µs")


def test_criterion_6_improvement_factors():
    comparison = Comparison(
        reports=[
            _report("Transkribus", 0.61, 3.19),
            _report("Tesseract", 0.89, 4.65),
            _report("TrOCR", 0.74, 2.96),
            _report("Baseline", 3.38, 18.71),
        ],
        baseline_name="Baseline",
    )
    factors = improvement_factors(comparison)
    lo, hi = 3.8 - 0.05, 5.6 + 0.05
    checked = [
        factors[("Transkribus", "cer")],
        factors[("Tesseract", "cer")],
        factors[("TrOCR", "cer")],
        factors[("Tesseract", "wer")],
    ]
    for factor in checked:
        assert lo <= factor <= hi
    _done(6, f"improvement factors {[round(f, 2) for f in checked]} within [{lo}, {hi}]")


def _sample_lines(n):
    words = ["boađe", "dál", "čáppa", "girji", "sámi", "giella", "gïele", "ïje",
             "åarjel", "stoerre", "guokte", "ážžut", "ŋal"]
    rng = random.Random(2024)
    return [" ".join(rng.choice(words) for _ in range(rng.randint(1, 4))) + f" {i}"
            for i in range(n)]


def _dataset_digest(directory):
    digest = hashlib.sha256()
    for path in sorted(directory.iterdir()):
        digest.update(path.name.encode())
        digest.update(path.read_bytes())
    return digest.hexdigest()


def test_criterion_7_synthetic_determinism(fonts, tmp_path):
    lines = _sample_lines(200)
    start = time.perf_counter()
    digests = []
    for which in ("first", "second"):
        out = tmp_path / which
        cfg = SynthConfig(fonts=fonts, output_dir=out, seed=99)
        generate_dataset(lines, cfg)
        digests.append(_dataset_digest(out))
    elapsed = time.perf_counter() - start
    assert digests[0] == digests[1]
    assert elapsed < 60.0
    _done(7, f"byte-identical synthetic runs over 200 lines in {elapsed:.1f}s")


def test_criterion_8_uppercase_sampling(fonts, tmp_path):
    cfg = SynthConfig(fonts=fonts, output_dir=tmp_path, uppercase_prob=0.10, seed=31337)
    lines = [f"line number {i}" for i in range(10_000)]
    planned = plan_dataset(lines, cfg)
    extras = sum(p.uppercase_twin for p in planned)
    # Binomial(10000, 0.1) central 99% interval.
    assert 922 <= extras <= 1081
    _done(8, f"uppercase twins {extras} within binomial 99% interval [922, 1081]")


def test_criterion_9_alto_fixture():
    lines = parse_alto(DATA_DIR / "sample_alto.xml")
    assert [l.text for l in lines] == ["Sámi girji", "boađe-", "čáppa", "guokte dál"]
    assert lines[0].bbox == Box(100, 200, 400, 50)
    assert lines[1].bbox == Box(100, 260, 380, 48)
    assert lines[3].bbox == Box(90, 270, 520, 46)
    assert [(l.page_id, l.line_index) for l in lines] == [
        ("P1", 0), ("P1", 1), ("P2", 0), ("P2", 1)
    ]
    with pytest.raises(AltoError, match=r"at \(\d+, \d+\)"):
        parse_alto(DATA_DIR / "bad_alto.xml")
    _done(9, "ALTO fixture parses exactly; malformed input raises positioned error")


def test_criterion_10_end_to_end(fonts, tmp_path, capsys):
    corpus = tmp_path / "corpus.txt"
    corpus.write_text("boađe dál\nčáppa girji\nsámi giella\n", encoding="utf-8")
    config = tmp_path / "synth.toml"
    config.write_text(
        "fonts = [{!r}]\noutput_dir = {!r}\nseed = 8\n".format(
            str(fonts[0]), str(tmp_path / "ds")
        ),
        encoding="utf-8",
    )
    assert run(["synth", str(corpus), "--config", str(config)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["skipped"] == "0"
    code = run(["eval", "--gt", str(tmp_path / "ds"), "--hyp", str(tmp_path / "ds"),
                "--charset", "all-sami-special", "--format", "json"])
    assert code == 0
    report = parse_report_json(capsys.readouterr().out)
    overall = report.groups["overall"]
    assert overall.cer == 0.0
    assert overall.wer == 0.0
    assert overall.f1 == 1.0
    _done(10, "synth output evaluated against itself: CER=WER=0, F1=1, exit 0")
