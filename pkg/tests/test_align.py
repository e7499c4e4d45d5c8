import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ocrline.align import (
    AlignOp,
    ErrorSegment,
    ErrorTableRow,
    OpKind,
    align,
    error_table_csv,
    error_table_markdown,
    merge_segments,
    tabulate_errors,
)
from ocrline.errors import DataError
from ocrline.metrics import edit_distance

from conftest import make_pair

short_texts = st.text(alphabet=st.sampled_from(list("abcáåčđ ï")), max_size=15)


def kinds(ops):
    return [op.kind for op in ops]


class TestAlign:
    def test_identity(self):
        ops = align("abc", "abc")
        assert kinds(ops) == [OpKind.Match] * 3

    def test_leading_delete(self):
        ops = align("ab", "b")
        assert kinds(ops) == [OpKind.Delete, OpKind.Match]
        assert ops[0].ref_char == "a"

    def test_tie_break_prefers_substitutions(self):
        ops = align("áå", "åa")
        assert kinds(ops) == [OpKind.Substitute, OpKind.Substitute]

    def test_insert_only(self):
        ops = align("", "ab")
        assert kinds(ops) == [OpKind.Insert, OpKind.Insert]
        assert "".join(op.hyp_char for op in ops) == "ab"

    @settings(max_examples=300, deadline=None)
    @given(short_texts, short_texts)
    def test_cost_equals_edit_distance(self, ref, hyp):
        ops = align(ref, hyp)
        errors = sum(op.kind is not OpKind.Match for op in ops)
        assert errors == edit_distance(ref, hyp)

    @settings(max_examples=300, deadline=None)
    @given(short_texts, short_texts)
    def test_reconstruction(self, ref, hyp):
        ops = align(ref, hyp)
        assert "".join(op.ref_char for op in ops if op.ref_char is not None) == ref
        assert "".join(op.hyp_char for op in ops if op.hyp_char is not None) == hyp

    @settings(max_examples=100, deadline=None)
    @given(short_texts, short_texts)
    def test_deterministic(self, ref, hyp):
        assert align(ref, hyp) == align(ref, hyp)

    def test_op_invariants_enforced(self):
        with pytest.raises(DataError):
            AlignOp(OpKind.Match, "a", "b")
        with pytest.raises(DataError):
            AlignOp(OpKind.Substitute, "a", "a")
        with pytest.raises(DataError):
            AlignOp(OpKind.Delete, "a", "b")
        with pytest.raises(DataError):
            AlignOp(OpKind.Insert, "a", "b")


class TestMergeSegments:
    def test_no_errors(self):
        assert merge_segments(align("a", "a")) == []

    def test_substitution_and_deletion_merge(self):
        segments = merge_segments(align("te", "s"))
        assert segments == [ErrorSegment("te", "s")]

    def test_runs_split_at_matches(self):
        ops = [
            AlignOp(OpKind.Substitute, "á", "å"),
            AlignOp(OpKind.Match, "x", "x"),
            AlignOp(OpKind.Delete, "b"),
        ]
        assert merge_segments(ops) == [ErrorSegment("á", "å"), ErrorSegment("b", "")]

    @settings(max_examples=200, deadline=None)
    @given(short_texts, short_texts)
    def test_maximality(self, ref, hyp):
        ops = align(ref, hyp)
        segments = merge_segments(ops)
        # Re-scan: the number of segments must equal the number of maximal
        # non-Match runs in the op list.
        runs = 0
        in_run = False
        for op in ops:
            if op.kind is OpKind.Match:
                in_run = False
            elif not in_run:
                runs += 1
                in_run = True
        assert len(segments) == runs


class TestTabulateErrors:
    def test_adjacent_substitutions_counted_per_character(self):
        rows = tabulate_errors([make_pair("áá", "åa")], 10)
        assert rows == [
            ErrorTableRow(ErrorSegment("á", "a"), n_e=1, n_m=2, n_c=2),
            ErrorTableRow(ErrorSegment("á", "å"), n_e=1, n_m=2, n_c=2),
        ]

    def test_identical_pairs_give_empty_table(self):
        assert tabulate_errors([make_pair("abc", "abc")], 10) == []

    def test_insertion_row_has_no_counts(self):
        rows = tabulate_errors([make_pair("ab", "alb")], 10)
        assert rows == [ErrorTableRow(ErrorSegment("", "l"), n_e=1, n_m=None, n_c=None)]

    def test_mixed_run_kept_as_multicharacter_segment(self):
        rows = tabulate_errors([make_pair("xtex", "xsx")], 10)
        assert rows == [ErrorTableRow(ErrorSegment("te", "s"), n_e=1, n_m=None, n_c=None)]

    def test_sorted_by_count_then_segment(self):
        pairs = [make_pair("áá á", "ååa å")]
        rows = tabulate_errors(pairs, 10)
        assert [r.n_e for r in rows] == sorted([r.n_e for r in rows], reverse=True)
        counts = [(-r.n_e, r.segment.ref_str, r.segment.hyp_str) for r in rows]
        assert counts == sorted(counts)

    def test_top_n_truncates(self):
        pairs = [make_pair("abcde", "vwxyz")]
        assert len(tabulate_errors(pairs, 2)) == 2

    def test_top_n_must_be_positive(self):
        with pytest.raises(DataError):
            tabulate_errors([], 0)

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.tuples(short_texts, short_texts), min_size=1, max_size=4))
    def test_count_ordering_invariant(self, texts):
        pairs = [make_pair(r, h) for r, h in texts]
        for row in tabulate_errors(pairs, 50):
            if row.n_m is not None:
                assert row.n_e <= row.n_m <= row.n_c


class TestSerialization:
    def test_csv_layout(self):
        rows = [
            ErrorTableRow(ErrorSegment("á", "å"), n_e=3, n_m=4, n_c=9),
            ErrorTableRow(ErrorSegment("", "l"), n_e=1),
        ]
        text = error_table_csv(rows)
        lines = text.splitlines()
        assert lines[0] == "ref,hyp,n_e,n_m,n_c"
        assert lines[1] == "á,å,3,4,9"
        assert lines[2] == ",l,1,,"

    def test_markdown_layout(self):
        rows = [ErrorTableRow(ErrorSegment("", "l"), n_e=7)]
        text = error_table_markdown(rows)
        assert "| `` | → | `l` | 7 | -- | -- |" in text

    def test_row_invariant_enforced(self):
        with pytest.raises(DataError):
            ErrorTableRow(ErrorSegment("á", "å"), n_e=5, n_m=3, n_c=9)

    def test_segment_must_differ(self):
        with pytest.raises(DataError):
            ErrorSegment("a", "a")
