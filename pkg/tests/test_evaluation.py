"""Entity-level F1 scoring against hand-frozen values and algebraic oracles."""

import math

import pytest
from hypothesis import given, strategies as st

from protag.errors import CoverageError, InputError
from protag.evaluation import (
    ConfusionCounts,
    compare_configs,
    confusion,
    derive_icl_pairing,
    f1_from_counts,
    macro_f1,
    micro_f1,
    render_eval_table,
    score_run,
)

from support import run_from


def f1_identity_oracle(tp: int, fp: int, fn: int) -> float:
    """F1 == 2tp / (2tp + fp + fn), with the all-zero case pinned to 1."""
    if tp + fp + fn == 0:
        return 1.0
    return 2 * tp / (2 * tp + fp + fn)


# --- confusion ---------------------------------------------------------------------


def test_confusion_hand_cases():
    assert confusion({"techcorp"}, {"techcorp", "globalsoft"}) == ConfusionCounts(1, 1, 0)
    assert confusion({"a", "b"}, {"a", "b"}) == ConfusionCounts(2, 0, 0)
    assert confusion({"techcorp"}, set(), unmatched=["Acme"]) == ConfusionCounts(0, 1, 1)
    assert confusion(set(), set()) == ConfusionCounts(0, 0, 0)


def test_confusion_tracks_tn_only_for_diagnostics():
    counts = confusion({"a"}, {"a"}, universe_size=4)
    assert counts.tn == 3
    assert f1_from_counts(counts) == f1_from_counts(ConfusionCounts(1, 0, 0))


def test_confusion_invariants_vs_set_sizes():
    gold, pred = {"a", "b", "c"}, {"b", "c", "d"}
    counts = confusion(gold, pred, unmatched=["X"])
    assert counts.tp + counts.fn == len(gold)
    assert counts.tp + counts.fp == len(pred) + 1


# --- F1 conventions ----------------------------------------------------------------


def test_micro_f1_hand_pool():
    counts = [ConfusionCounts(1, 1, 0), ConfusionCounts(1, 0, 1)]
    assert micro_f1(counts) == pytest.approx(2 / 3, abs=1e-15)


def test_macro_f1_hand_mean():
    assert macro_f1([2 / 3, 1.0]) == pytest.approx(5 / 6, abs=1e-15)


def test_degenerate_conventions():
    assert f1_from_counts(ConfusionCounts(0, 0, 0)) == 1.0
    assert f1_from_counts(ConfusionCounts(0, 0, 3)) == 0.0  # P=1, R=0
    assert f1_from_counts(ConfusionCounts(0, 3, 0)) == 0.0  # P=0, R=1
    assert f1_from_counts(ConfusionCounts(0, 2, 2)) == 0.0
    assert f1_from_counts(ConfusionCounts(5, 0, 0)) == 1.0


def test_empty_corpus_rejected():
    with pytest.raises(InputError):
        micro_f1([])
    with pytest.raises(InputError):
        macro_f1([])


@given(st.integers(0, 30), st.integers(0, 30), st.integers(0, 30))
def test_f1_matches_algebraic_identity(tp, fp, fn):
    ours = f1_from_counts(ConfusionCounts(tp, fp, fn))
    assert math.isclose(ours, f1_identity_oracle(tp, fp, fn), abs_tol=1e-12)
    assert 0.0 <= ours <= 1.0


@given(
    st.sets(st.sampled_from("abcdef"), max_size=6),
    st.sets(st.sampled_from("abcdef"), max_size=6),
    st.lists(st.just("Stray Name"), max_size=2),
)
def test_per_doc_f1_is_one_iff_exact_match(gold, pred, unmatched):
    score = f1_from_counts(confusion(gold, pred, unmatched))
    if gold == pred and not unmatched:
        assert score == 1.0
    else:
        assert score < 1.0


def test_micro_equals_macro_on_single_document():
    counts = ConfusionCounts(2, 1, 1)
    assert micro_f1([counts]) == macro_f1([f1_from_counts(counts)])


def test_micro_equals_macro_on_equal_confusion_documents():
    counts = [ConfusionCounts(3, 1, 2)] * 7
    assert abs(micro_f1(counts) - macro_f1([f1_from_counts(c) for c in counts])) < 1e-12


@given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5), st.integers(0, 5)), min_size=1, max_size=8))
def test_permutation_invariance(triples):
    counts = [ConfusionCounts(*t) for t in triples]
    f1s = [f1_from_counts(c) for c in counts]
    assert micro_f1(counts) == micro_f1(list(reversed(counts)))
    assert macro_f1(f1s) == macro_f1(list(reversed(f1s)))


@given(st.lists(st.floats(0, 1), min_size=1, max_size=10))
def test_adding_perfect_document_never_decreases_macro(f1s):
    assert macro_f1(f1s + [1.0]) >= macro_f1(f1s) - 1e-15


# --- run scoring --------------------------------------------------------------------


def test_score_run_requires_coverage_and_successful_gold():
    gold = run_from("gold", {"d1": {"a"}, "d2": set()})
    partial = run_from("m1", {"d1": {"a"}})
    with pytest.raises(CoverageError) as exc:
        score_run(partial, gold)
    assert "d2" in str(exc.value)

    failing = run_from("m2", {"d1": {"a"}}, failed=("d2",))
    with pytest.raises(CoverageError):
        score_run(failing, gold)

    broken_gold = run_from("gold2", {"d1": {"a"}}, failed=("d2",))
    with pytest.raises(InputError):
        score_run(run_from("m3", {"d1": {"a"}, "d2": set()}), broken_gold)


def test_score_run_counts_unmatched_names_as_fp():
    gold = run_from("gold", {"d1": {"a"}})
    run = run_from("m1", {"d1": {"a"}}, unmatched={"d1": ["Phantom Corp"]})
    score = score_run(run, gold)
    assert score.per_doc["d1"] == ConfusionCounts(1, 1, 0)
    assert score.micro_f1 == pytest.approx(2 / 3, abs=1e-15)


# --- comparison report ---------------------------------------------------------------


def _config(mode: str) -> dict:
    return {
        "mode": mode,
        "guidance": "with_candidates",
        "context": "full",
        "n_sentences": 0,
        "template_version": "guided-v1",
        "n_exemplars": 3 if mode == "icl" else 0,
        "temperature": 0.0,
        "max_output_tokens": 512,
        "backend": "mock:test",
    }


def _delta_fixture_runs():
    """Pooled counts frozen to micro 0.375 (base) and 0.402 (icl).

    201 shared-hit documents (tp), 670 base false positives, 598 icl false
    positives: base 2*201/(2*201+670) == 3/8, icl 402/1000 == 0.402.
    """
    gold_sel = {}
    base_sel = {}
    icl_sel = {}
    for i in range(201):
        d = f"p{i:03d}"
        gold_sel[d] = {"x"}
        base_sel[d] = {"x"}
        icl_sel[d] = {"x"}
    for i in range(670):
        d = f"q{i:03d}"
        gold_sel[d] = set()
        base_sel[d] = {"x"}
        icl_sel[d] = {"x"} if i < 598 else set()
    gold = run_from("gold", gold_sel)
    base = run_from("base", base_sel, config=_config("base"))
    icl = run_from("icl", icl_sel, config=_config("icl"))
    return gold, base, icl


def test_delta_fixture_reproduces_published_style_row():
    gold, base, icl = _delta_fixture_runs()
    report = compare_configs([base, icl], gold, {"icl": "base"})
    by_id = {r.config_id: r for r in report.rows}
    assert by_id["base"].micro_f1 == 0.375
    assert by_id["icl"].micro_f1 == pytest.approx(0.402, abs=1e-15)
    assert by_id["icl"].delta_micro is not None
    # Exactness contract: value == baseline + delta with no re-rounding.
    assert by_id["icl"].micro_f1 == by_id["base"].micro_f1 + by_id["icl"].delta_micro
    text = render_eval_table(report)
    assert "0.375" in text
    assert "0.402 (+0.027)" in text


def test_zero_delta_renders_with_explicit_plus_sign():
    gold = run_from("gold", {"d1": {"a"}})
    base = run_from("base", {"d1": {"a"}}, config=_config("base"))
    icl = run_from("icl", {"d1": {"a"}}, config=_config("icl"))
    report = compare_configs([base, icl], gold, {"icl": "base"})
    assert "(+0.000)" in render_eval_table(report)


def test_negative_delta_renders_with_minus_sign():
    gold = run_from("gold", {"d1": {"a"}, "d2": {"b"}})
    base = run_from("base", {"d1": {"a"}, "d2": {"b"}}, config=_config("base"))
    icl = run_from("icl", {"d1": {"a"}, "d2": set()}, config=_config("icl"))
    report = compare_configs([base, icl], gold, {"icl": "base"})
    row = [r for r in report.rows if r.config_id == "icl"][0]
    assert row.delta_micro is not None and row.delta_micro < 0
    assert "(-0." in render_eval_table(report)


def test_unpaired_row_has_no_deltas():
    gold = run_from("gold", {"d1": {"a"}})
    icl = run_from("icl", {"d1": {"a"}}, config=_config("icl"))
    report = compare_configs([icl], gold, {})
    assert report.rows[0].delta_micro is None
    assert "(+" not in render_eval_table(report)


def test_derive_icl_pairing_matches_on_shared_fields():
    base = run_from("base", {"d1": {"a"}}, config=_config("base"))
    icl = run_from("icl", {"d1": {"a"}}, config=_config("icl"))
    other = run_from(
        "other", {"d1": {"a"}}, config={**_config("base"), "backend": "mock:other"}
    )
    assert derive_icl_pairing([base, icl, other]) == {"icl": "base"}


def test_derive_icl_pairing_rejects_ambiguity():
    base_a = run_from("base_a", {"d1": {"a"}}, config=_config("base"))
    base_b = run_from("base_b", {"d1": {"a"}}, config=_config("base"))
    icl = run_from("icl", {"d1": {"a"}}, config=_config("icl"))
    with pytest.raises(InputError):
        derive_icl_pairing([base_a, base_b, icl])


def test_compare_configs_validates_inputs():
    gold = run_from("gold", {"d1": {"a"}})
    run = run_from("m1", {"d1": {"a"}})
    with pytest.raises(InputError):
        compare_configs([], gold)
    with pytest.raises(InputError):
        compare_configs([run, run_from("m1", {"d1": set()})], gold)
    with pytest.raises(InputError):
        compare_configs([run], gold, {"m1": "ghost"})


def test_report_metadata():
    gold, base, icl = _delta_fixture_runs()
    report = compare_configs([base, icl], gold, {"icl": "base"})
    assert report.gold_id == "gold"
    assert report.n_docs == 871
    assert report.macro_axis == "per_document"
    assert f"over {report.n_docs} documents" in render_eval_table(report)
