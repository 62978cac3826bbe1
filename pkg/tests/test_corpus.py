import json
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from litscreen.corpus import (
    Article,
    CorpusError,
    DuplicateIdError,
    Label,
    LabeledArticle,
    SplitSpec,
    _largest_remainder,
    corpus_digest,
    deduplicate,
    generate_synthetic_corpus,
    ingest_articles,
    split_validation_test,
    stratified_split,
    upsample_minority,
    write_corpus_jsonl,
)
from litscreen.preprocess import extract_patient_mentions, normalize_tokenize


def _write(tmp_path, name, lines):
    path = tmp_path / name
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


class TestIngest:
    def test_jsonl_happy_path(self, tmp_path):
        path = _write(
            tmp_path,
            "c.jsonl",
            [
                json.dumps({"id": "a1", "title": "T one", "abstract": "Body.",
                            "label": "suspect_adverse", "annotator": "x"}),
                json.dumps({"id": "a2", "title": "T two", "abstract": "Body."}),
            ],
        )
        result = ingest_articles(path)
        assert [a.id for a in result.articles] == ["a1", "a2"]
        assert len(result.labeled) == 1
        assert result.labeled[0].label is Label.SUSPECT_ADVERSE
        assert result.rejects == []

    def test_rejects_carry_line_numbers(self, tmp_path):
        path = _write(
            tmp_path,
            "c.jsonl",
            [
                json.dumps({"id": "a1", "title": "T", "abstract": "B."}),
                "{broken",
                json.dumps({"id": "a3", "title": "T", "abstract": "B.",
                            "label": "maybe"}),
            ],
        )
        result = ingest_articles(path)
        assert [a.id for a in result.articles] == ["a1"]
        assert [r.line_no for r in result.rejects] == [2, 3]

    def test_duplicate_id_is_fatal(self, tmp_path):
        rec = json.dumps({"id": "dup", "title": "T", "abstract": "B."})
        path = _write(tmp_path, "c.jsonl", [rec, rec])
        with pytest.raises(DuplicateIdError):
            ingest_articles(path)

    def test_csv(self, tmp_path):
        path = tmp_path / "c.csv"
        path.write_text(
            "id,title,abstract,label\nc1,Title here,Abstract body.,not_suspect\n",
            encoding="utf-8",
        )
        result = ingest_articles(path, format="csv")
        assert result.labeled[0].label is Label.NOT_SUSPECT

    def test_unknown_format(self, tmp_path):
        with pytest.raises(CorpusError):
            ingest_articles(tmp_path / "c.xml", format="xml")

    def test_round_trip(self, tmp_path, small_corpus):
        path = tmp_path / "out.jsonl"
        write_corpus_jsonl(small_corpus, path)
        back = ingest_articles(path)
        assert [la.article for la in back.labeled] == [
            la.article for la in small_corpus
        ]
        assert [la.label for la in back.labeled] == [la.label for la in small_corpus]

    def test_digest_tracks_content_and_order(self, small_corpus):
        d1 = corpus_digest(small_corpus)
        assert d1 == corpus_digest(small_corpus)
        assert d1 != corpus_digest(list(reversed(small_corpus)))
        assert d1 != corpus_digest(small_corpus[:-1])


class TestDeduplicate:
    def test_whitespace_and_case_insensitive(self):
        a = Article("x1", "Fever After Dosing", "It resolved.")
        b = Article("x2", "fever  after dosing", "It   resolved.")
        c = Article("x3", "Different title", "It resolved.")
        kept, dropped = deduplicate([a, b, c])
        assert [k.id for k in kept] == ["x1", "x3"]
        assert dropped == [("x2", "x1")]


class TestLargestRemainder:
    @given(
        st.lists(st.integers(min_value=0, max_value=60), min_size=1, max_size=8),
        st.floats(min_value=0.05, max_value=0.95),
    )
    @settings(max_examples=150, deadline=None)
    def test_allocation_sums_and_bounds(self, sizes, fraction):
        total = int(sum(sizes) * fraction)
        quotas = [s * fraction for s in sizes]
        alloc = _largest_remainder(quotas, total, sizes)
        assert sum(alloc) == total
        assert all(0 <= a <= cap for a, cap in zip(alloc, sizes))
        # never more than one unit below/above its real quota
        assert all(abs(a - q) <= 1.0 for a, q in zip(alloc, quotas))


class TestSplits:
    def test_stratified_split_partitions(self, small_corpus):
        spec = SplitSpec(train_fraction=0.9, seed=3, stratify_by_category=True)
        splits = stratified_split(small_corpus, spec)
        ids = [la.article.id for part in
               (splits.train, splits.validation, splits.test) for la in part]
        assert sorted(ids) == sorted(la.article.id for la in small_corpus)
        assert len(ids) == len(set(ids))

    def test_stratified_split_is_deterministic(self, small_corpus):
        spec = SplitSpec(train_fraction=0.9, seed=3, stratify_by_category=True)
        a = stratified_split(small_corpus, spec)
        b = stratified_split(small_corpus, spec)
        assert [x.article.id for x in a.train] == [x.article.id for x in b.train]
        c = stratified_split(small_corpus, SplitSpec(0.9, seed=4, stratify_by_category=True))
        assert [x.article.id for x in a.train] != [x.article.id for x in c.train]

    def test_label_balance_is_preserved(self, small_corpus):
        spec = SplitSpec(train_fraction=0.9, seed=0)
        splits = stratified_split(small_corpus, spec)
        total_pos = sum(1 for la in small_corpus if la.label is Label.SUSPECT_ADVERSE)
        train_pos = sum(1 for la in splits.train if la.label is Label.SUSPECT_ADVERSE)
        assert abs(train_pos - 0.9 * total_pos) <= 1.0

    def test_validation_test_halves(self, small_corpus):
        spec = SplitSpec(train_fraction=0.9, seed=3)
        pool = stratified_split(small_corpus, spec)
        val, test = split_validation_test(
            pool.validation + pool.test, seed=11, stratify_by_category=True
        )
        assert len(val) + len(test) == len(pool.validation) + len(pool.test)
        assert len(val) <= len(test)  # validation takes the floor
        ids = sorted(x.article.id for x in val + test)
        assert ids == sorted(x.article.id for x in pool.validation + pool.test)

    def test_upsample_balances_and_keeps_originals(self, small_corpus):
        spec = SplitSpec(train_fraction=0.9, seed=3)
        train = stratified_split(small_corpus, spec).train
        balanced = upsample_minority(train, seed=5)
        counts = Counter(la.label for la in balanced)
        assert counts[Label.SUSPECT_ADVERSE] == counts[Label.NOT_SUSPECT]
        original_ids = {la.article.id for la in train}
        assert original_ids <= {la.article.id for la in balanced}
        assert upsample_minority(train, seed=5) == balanced


class TestGenerator:
    def test_size_and_rate(self):
        corpus = generate_synthetic_corpus(1000, 0.3, seed=1)
        assert len(corpus) == 1000
        pos = sum(1 for la in corpus if la.label is Label.SUSPECT_ADVERSE)
        assert pos == 300

    def test_deterministic(self):
        a = generate_synthetic_corpus(120, 0.25, seed=9)
        b = generate_synthetic_corpus(120, 0.25, seed=9)
        assert a == b
        c = generate_synthetic_corpus(120, 0.25, seed=10)
        assert a != c

    def test_ids_unique_and_tagged(self):
        corpus = generate_synthetic_corpus(200, 0.3, seed=2)
        ids = [la.article.id for la in corpus]
        assert len(set(ids)) == len(ids)
        assert all(la.article.source.startswith("synth/") for la in corpus)

    def test_every_doc_has_constant_length(self):
        corpus = generate_synthetic_corpus(300, 0.3, seed=4)
        counts = {normalize_tokenize(la.article).token_count for la in corpus}
        assert counts == {80}

    def test_case_family_carries_patient_mentions(self):
        corpus = generate_synthetic_corpus(500, 0.3, seed=6)
        for la in corpus:
            doc = normalize_tokenize(la.article)
            mentions = extract_patient_mentions(doc)
            if la.article.source == "synth/pos_direct":
                assert mentions, la.article.id
            else:
                assert not mentions, (la.article.id, la.article.source)

    def test_graded_templates_appear_on_both_sides(self):
        corpus = generate_synthetic_corpus(5000, 0.3, seed=7)
        families = Counter(
            (la.label, la.article.source.split("/")[1]) for la in corpus
        )
        for grade in range(1, 7):
            assert families[(Label.SUSPECT_ADVERSE, f"pos_signal_g{grade}")] > 0
            assert families[(Label.NOT_SUSPECT, f"neg_signal_g{grade}")] > 0

    def test_rejects_degenerate_parameters(self):
        with pytest.raises(CorpusError):
            generate_synthetic_corpus(5, 0.3, seed=0)
        with pytest.raises(CorpusError):
            generate_synthetic_corpus(100, 0.0, seed=0)
        with pytest.raises(CorpusError):
            generate_synthetic_corpus(100, 1.0, seed=0)
