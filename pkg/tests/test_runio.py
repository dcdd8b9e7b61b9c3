import pytest

from bertqe.evaluation import Qrels, make_folds
from bertqe.lexical import RankedList
from bertqe.runio import (
    format_run,
    read_folds,
    read_qrels,
    read_queries,
    read_run,
    write_folds,
    write_run,
)


def make_runs():
    return {
        "702": RankedList.from_scores("702", {"d1": 1.5, "d2": 0.25}),
        "701": RankedList.from_scores("701", {"d9": -3.125}),
    }


class TestRunFiles:
    def test_format_is_trec_six_column(self):
        text = format_run(make_runs(), tag="exp1")
        assert text.splitlines() == [
            "701 Q0 d9 1 -3.125000 exp1",
            "702 Q0 d1 1 1.500000 exp1",
            "702 Q0 d2 2 0.250000 exp1",
        ]
        assert text.endswith("\n")

    def test_empty_runs_give_empty_file(self):
        assert format_run({}) == ""

    def test_write_read_roundtrip(self, tmp_path):
        runs = make_runs()
        path = tmp_path / "out" / "test.run"
        write_run(path, runs)
        loaded = read_run(path)
        assert set(loaded) == set(runs)
        for qid in runs:
            assert loaded[qid].doc_ids == runs[qid].doc_ids
            for a, b in zip(loaded[qid].entries, runs[qid].entries):
                assert a.rank == b.rank
                assert a.score == pytest.approx(b.score, abs=1e-6)

    def test_read_rejects_wrong_field_count(self, tmp_path):
        path = tmp_path / "bad.run"
        path.write_text("701 Q0 d1 1 0.5\n", encoding="utf-8")
        with pytest.raises(ValueError, match="expected 6 fields"):
            read_run(path)

    def test_read_orders_by_rank_field(self, tmp_path):
        path = tmp_path / "shuffled.run"
        path.write_text(
            "701 Q0 d2 2 0.250000 t\n701 Q0 d1 1 1.500000 t\n", encoding="utf-8"
        )
        assert read_run(path)["701"].doc_ids == ["d1", "d2"]


class TestQueriesAndQrels:
    def test_read_queries(self, tmp_path):
        path = tmp_path / "queries.tsv"
        path.write_text("701\tvolcano eruption\n702\thard cheese\n", encoding="utf-8")
        queries = read_queries(path)
        assert [(q.query_id, q.text) for q in queries] == [
            ("701", "volcano eruption"),
            ("702", "hard cheese"),
        ]

    def test_read_queries_rejects_missing_tab(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("701 volcano\n", encoding="utf-8")
        with pytest.raises(ValueError, match="TAB"):
            read_queries(path)

    def test_read_qrels(self, tmp_path):
        path = tmp_path / "qrels.txt"
        path.write_text("701 0 d1 2\n701 0 d2 0\n702 0 d1 1\n", encoding="utf-8")
        qrels = read_qrels(path)
        assert qrels.grade("701", "d1") == 2
        assert qrels.grade("701", "d2") == 0
        assert qrels.num_relevant("702") == 1

    def test_read_qrels_rejects_bad_line(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("701 0 d1\n", encoding="utf-8")
        with pytest.raises(ValueError, match="expected 4 fields"):
            read_qrels(path)


class TestFoldFiles:
    def test_roundtrip(self, tmp_path):
        plan = make_folds([str(q) for q in range(701, 716)])
        path = tmp_path / "folds.txt"
        write_folds(path, plan)
        mapping = read_folds(path)
        for fold_index, fold in enumerate(plan.folds):
            for qid in fold:
                assert mapping[qid] == fold_index

    def test_duplicate_query_rejected(self, tmp_path):
        path = tmp_path / "dup.txt"
        path.write_text("0 701\n1 701\n", encoding="utf-8")
        with pytest.raises(ValueError, match="duplicate"):
            read_folds(path)
