"""Fact sheet generation, rendering, and artifact digest tests."""

import dataclasses
import hashlib
import json

import pytest

from litscreen.corpus import Label
from litscreen.factsheet import (
    DisclosureTexts,
    EnvelopeDisclosure,
    FactSheet,
    FactsheetError,
    ModelSummary,
    PerformanceRow,
    TrainingDataComposition,
    composition_from_corpus,
    compute_digests,
    generate_factsheet,
    render_json,
    render_markdown,
    write_factsheet,
)

_EMPTY_SHA256 = "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"

_TEXTS = DisclosureTexts(
    intended_use="Pre-screening of literature abstracts for human review.",
    out_of_scope_uses="Unreviewed regulatory decisions; non-abstract inputs.",
    limitations="Trained on synthetic abstracts; recall is calibrated, not exact.",
)


@pytest.fixture(scope="module")
def sheet(small_experiment, small_corpus):
    report, bundle = small_experiment
    return generate_factsheet(bundle, report, _TEXTS, corpus=small_corpus)


class TestGenerate:
    def test_performance_rows_follow_report_targets(self, sheet, small_experiment):
        report, bundle = small_experiment
        assert [r.target_recall for r in sheet.performance] == list(report.targets)
        assert sheet.bundle_digest == bundle.digest

    def test_every_row_copies_report_aggregates_exactly(
        self, sheet, small_experiment
    ):
        report, _ = small_experiment
        for row, agg in zip(sheet.performance, report.aggregates):
            assert row.target_recall == agg.target_recall
            assert row.mean_test_fpr == agg.mean_fpr
            assert row.min_recall == agg.min_recall
            assert row.q1_recall == agg.q1_recall
            assert row.median_recall == agg.median_recall
            assert row.q3_recall == agg.q3_recall
            assert row.max_recall == agg.max_recall
            assert row.mean_recall == agg.mean_recall

    def test_composition_counts_the_corpus(self, sheet, small_corpus):
        td = sheet.training_data
        assert td.size == len(small_corpus)
        positives = sum(
            1 for item in small_corpus if item.label is Label.SUSPECT_ADVERSE
        )
        assert td.positives == positives
        assert td.negatives == len(small_corpus) - positives
        assert sum(n for _, n in td.category_counts) == len(small_corpus)
        names = [name for name, _ in td.category_counts]
        assert names == sorted(names)

    def test_envelope_disclosure_mirrors_bundle(self, sheet, small_bundle):
        env = sheet.operating_envelope
        assert env.min_tokens == small_bundle.envelope.min_tokens
        assert env.max_tokens == small_bundle.envelope.max_tokens
        assert env.languages == small_bundle.envelope.allowed_languages

    def test_without_corpus_composition_is_digest_only(self, small_experiment):
        report, bundle = small_experiment
        sheet = generate_factsheet(bundle, report, _TEXTS)
        td = sheet.training_data
        assert td.corpus_digest == bundle.training_corpus_digest
        assert (td.size, td.positives, td.negatives) == (0, 0, 0)
        assert td.category_counts == ()

    def test_mismatched_bundle_digest_refused(self, small_experiment):
        report, bundle = small_experiment
        wrong = dataclasses.replace(report, bundle_digest="0" * 64)
        with pytest.raises(FactsheetError, match="digest"):
            generate_factsheet(bundle, wrong, _TEXTS)

    def test_mismatched_corpus_digest_refused(self, small_experiment):
        report, bundle = small_experiment
        wrong = dataclasses.replace(report, corpus_digest="f" * 64)
        with pytest.raises(FactsheetError, match="corpus"):
            generate_factsheet(bundle, wrong, _TEXTS)

    def test_foreign_corpus_refused(self, small_experiment, small_corpus):
        report, bundle = small_experiment
        with pytest.raises(FactsheetError, match="corpus"):
            generate_factsheet(bundle, report, _TEXTS, corpus=small_corpus[:100])

    @pytest.mark.parametrize(
        "field", ["intended_use", "out_of_scope_uses", "limitations"]
    )
    def test_missing_section_is_named(self, small_experiment, field):
        report, bundle = small_experiment
        texts = dataclasses.replace(_TEXTS, **{field: "   "})
        with pytest.raises(FactsheetError, match=f"missing mandatory section: {field}"):
            generate_factsheet(bundle, report, texts)

    def test_report_without_aggregates_refused(self, small_experiment):
        report, bundle = small_experiment
        hollow = dataclasses.replace(report, aggregates=())
        with pytest.raises(FactsheetError, match="performance"):
            generate_factsheet(bundle, hollow, _TEXTS)

    def test_rows_out_of_target_order_refused(self, sheet):
        if len(sheet.performance) < 2:
            pytest.skip("needs two targets")
        reversed_rows = tuple(reversed(sheet.performance))
        with pytest.raises(FactsheetError, match="sorted"):
            dataclasses.replace(sheet, performance=reversed_rows)

    def test_composition_helper_matches_direct_count(self, small_corpus):
        comp = composition_from_corpus(small_corpus)
        by_source: dict[str, int] = {}
        for item in small_corpus:
            key = item.article.source or "unspecified"
            by_source[key] = by_source.get(key, 0) + 1
        assert dict(comp.category_counts) == by_source


class TestRender:
    def test_rendering_is_deterministic(self, sheet, small_experiment, small_corpus):
        report, bundle = small_experiment
        again = generate_factsheet(bundle, report, _TEXTS, corpus=small_corpus)
        assert render_markdown(sheet) == render_markdown(again)
        assert render_json(sheet) == render_json(again)

    def test_json_round_trips_through_parser(self, sheet):
        assert json.loads(render_json(sheet)) == sheet.to_dict()

    def test_markdown_contains_mandatory_headings(self, sheet):
        md = render_markdown(sheet)
        for heading in (
            "## Intended use",
            "## Out-of-scope uses",
            "## Operating envelope",
            "## Model summary",
            "## Training data",
            "## Performance",
            "## Limitations",
            "## Version",
        ):
            assert heading in md
        assert sheet.bundle_digest in md

    def test_every_table_number_appears_in_report(self, sheet, small_experiment):
        report, _ = small_experiment
        known = set()
        for agg in report.aggregates:
            known.update(
                (
                    agg.target_recall,
                    agg.mean_fpr,
                    agg.min_recall,
                    agg.q1_recall,
                    agg.median_recall,
                    agg.q3_recall,
                    agg.max_recall,
                    agg.mean_recall,
                )
            )
        md_lines = render_markdown(sheet).splitlines()
        data_rows = [
            line
            for line in md_lines
            if line.startswith("| ") and not line.startswith(("| target", "| ---"))
        ]
        assert len(data_rows) == len(report.aggregates)
        parsed = 0
        for line in data_rows:
            for cell in line.strip("|").split("|"):
                value = float(cell.strip())
                assert value in known
                parsed += 1
        assert parsed == 8 * len(report.aggregates)

    def test_write_factsheet_emits_both_files(self, sheet, tmp_path):
        json_path, md_path = write_factsheet(sheet, tmp_path)
        assert json_path.name == "factsheet.json"
        assert md_path.name == "FACTSHEET.md"
        assert json_path.read_text(encoding="utf-8") == render_json(sheet)
        assert md_path.read_text(encoding="utf-8") == render_markdown(sheet)


class TestComputeDigests:
    def test_empty_file_hashes_to_known_constant(self, tmp_path):
        path = tmp_path / "empty.bin"
        path.write_bytes(b"")
        manifest = compute_digests([path])
        assert dict(manifest.files)["empty.bin"] == _EMPTY_SHA256

    def test_order_does_not_change_combined_digest(self, tmp_path):
        a = tmp_path / "a.txt"
        b = tmp_path / "b.txt"
        a.write_text("alpha")
        b.write_text("beta")
        assert compute_digests([a, b]) == compute_digests([b, a])

    def test_single_byte_change_shows_up(self, tmp_path):
        path = tmp_path / "a.txt"
        path.write_text("alpha")
        before = compute_digests([path]).combined
        path.write_text("alphb")
        after = compute_digests([path]).combined
        assert before != after

    def test_combined_digest_matches_manual_recomputation(self, tmp_path):
        a = tmp_path / "a.txt"
        b = tmp_path / "b.txt"
        a.write_text("alpha")
        b.write_text("beta")
        manifest = compute_digests([a, b])
        pairs = sorted(
            (p.name, hashlib.sha256(p.read_bytes()).hexdigest()) for p in (a, b)
        )
        joined = "\n".join(f"{n}:{d}" for n, d in pairs).encode("utf-8")
        assert manifest.combined == hashlib.sha256(joined).hexdigest()

    def test_conflicting_duplicate_names_refused(self, tmp_path):
        d1 = tmp_path / "one"
        d2 = tmp_path / "two"
        d1.mkdir()
        d2.mkdir()
        (d1 / "same.txt").write_text("x")
        (d2 / "same.txt").write_text("y")
        with pytest.raises(FactsheetError, match="duplicate"):
            compute_digests([d1 / "same.txt", d2 / "same.txt"])

    def test_same_path_listed_twice_is_fine(self, tmp_path):
        path = tmp_path / "a.txt"
        path.write_text("alpha")
        manifest = compute_digests([path, path])
        assert len(manifest.files) == 1

    def test_missing_file_raises(self, tmp_path):
        with pytest.raises(OSError):
            compute_digests([tmp_path / "absent.bin"])


class TestSheetShape:
    def test_to_dict_exposes_version_block(self, sheet, small_bundle):
        payload = sheet.to_dict()
        assert payload["version"]["bundle_digest"] == small_bundle.digest
        assert payload["version"]["created_utc"] == small_bundle.created_utc
        assert payload["training_data"]["size"] == sheet.training_data.size

    def test_manual_sheet_respects_row_ordering(self):
        row = PerformanceRow(0.9, 0.1, 0.8, 0.85, 0.9, 0.95, 1.0, 0.9)
        sheet = FactSheet(
            intended_use="x",
            out_of_scope_uses="y",
            operating_envelope=EnvelopeDisclosure(("en",), 10, 600, (), ()),
            model_summary=ModelSummary("a", "b", "cascade"),
            training_data=TrainingDataComposition("d" * 64, 1, 1, 0, ()),
            performance=(row,),
            limitations="z",
            bundle_digest="e" * 64,
            created_utc="2024-01-01T00:00:00Z",
        )
        assert sheet.performance == (row,)
