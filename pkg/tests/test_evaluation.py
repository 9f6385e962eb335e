import random

import pytest

from impact_bench.corpus import Qrels, parse_qrels
from impact_bench.evaluation import (
    RunFormatError,
    mean_rr_at_10,
    read_run,
    rr_at_10,
    write_run,
)


def qrels_of(*rows):
    return parse_qrels([" ".join(map(str, row)) for row in rows])


class TestRrAt10:
    def test_first_position(self):
        qrels = qrels_of(("q1", 0, "D5", 1))
        assert rr_at_10(["D5", "D2"], qrels, "q1") == 1.0

    def test_fourth_position(self):
        qrels = qrels_of(("q1", 0, "D5", 1))
        assert rr_at_10(["a", "b", "c", "D5"], qrels, "q1") == 0.25

    def test_beyond_cutoff_scores_zero(self):
        qrels = qrels_of(("q1", 0, "D5", 1))
        ranking = [f"x{i}" for i in range(10)] + ["D5"]
        assert rr_at_10(ranking, qrels, "q1") == 0.0

    def test_grade_zero_not_relevant(self):
        qrels = qrels_of(("q1", 0, "D5", 0), ("q1", 0, "D7", 2))
        assert rr_at_10(["D5", "D7"], qrels, "q1") == 0.5

    def test_unjudged_query(self):
        assert rr_at_10(["D1"], Qrels(), "q9") == 0.0

    def test_empty_ranking(self):
        qrels = qrels_of(("q1", 0, "D5", 1))
        assert rr_at_10([], qrels, "q1") == 0.0

    def test_first_relevant_wins(self):
        qrels = qrels_of(("q1", 0, "D2", 1), ("q1", 0, "D3", 1))
        assert rr_at_10(["x", "D3", "D2"], qrels, "q1") == 0.5

    def test_brute_force_agreement(self):
        rng = random.Random(81)
        for _ in range(10000):
            docs = [f"D{i}" for i in range(rng.randint(0, 15))]
            rng.shuffle(docs)
            relevant = {d for d in docs if rng.random() < 0.2}
            qrels = Qrels()
            for d in relevant:
                qrels.set_grade("q", d, 1)
            want = 0.0
            for pos, d in enumerate(docs[:10], start=1):
                if d in relevant:
                    want = 1.0 / pos
                    break
            assert rr_at_10(docs, qrels, "q") == want


class TestMeanRr:
    def test_worked_example(self):
        # ranks 1, 2, miss, 4, 10 over five queries
        qrels = qrels_of(
            ("q1", 0, "R", 1), ("q2", 0, "R", 1), ("q3", 0, "R", 1),
            ("q4", 0, "R", 1), ("q5", 0, "R", 1),
        )
        run = {
            "q1": ["R"],
            "q2": ["x", "R"],
            "q3": ["x", "y"],
            "q4": ["a", "b", "c", "R"],
            "q5": [f"z{i}" for i in range(9)] + ["R"],
        }
        want = (1.0 + 0.5 + 0.0 + 0.25 + 0.1) / 5
        assert mean_rr_at_10(run, qrels, ["q1", "q2", "q3", "q4", "q5"]) == pytest.approx(want)
        assert want == pytest.approx(0.37)

    def test_query_missing_from_run_scores_zero(self):
        qrels = qrels_of(("q1", 0, "R", 1), ("q2", 0, "R", 1))
        run = {"q1": ["R"]}
        assert mean_rr_at_10(run, qrels, ["q1", "q2"]) == 0.5

    def test_empty_query_set_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            mean_rr_at_10({}, Qrels(), [])


class TestRunFiles:
    def test_round_trip(self, tmp_path):
        rankings = [
            ("q1", [("D3", 9.0), ("D1", 4.5), ("D8", 4.5)]),
            ("q2", [("D2", 100.0)]),
        ]
        path = tmp_path / "run.txt"
        write_run(rankings, "trial", path)
        back = read_run(path.read_text().splitlines())
        assert set(back) == {"q1", "q2"}
        assert [(e.doc_name, e.rank, e.score) for e in back["q1"]] == [
            ("D3", 1, 9.0), ("D1", 2, 4.5), ("D8", 3, 4.5)]
        assert back["q2"][0].tag == "trial"

    def test_wrong_field_count(self):
        with pytest.raises(RunFormatError, match="line 2.*6 fields"):
            read_run(["q1 Q0 D1 1 5.0 tag", "q1 Q0 D2 2 4.0"])

    def test_rank_gap(self):
        with pytest.raises(RunFormatError, match="line 2.*breaks"):
            read_run(["q1 Q0 D1 1 5.0 tag", "q1 Q0 D2 3 4.0 tag"])

    def test_rank_not_starting_at_one(self):
        with pytest.raises(RunFormatError, match="line 1"):
            read_run(["q1 Q0 D1 2 5.0 tag"])

    def test_score_increase_rejected(self):
        with pytest.raises(RunFormatError, match="line 2.*increases"):
            read_run(["q1 Q0 D1 1 5.0 tag", "q1 Q0 D2 2 6.0 tag"])

    def test_plateau_allowed(self):
        back = read_run(["q1 Q0 D1 1 5.0 tag", "q1 Q0 D2 2 5.0 tag"])
        assert len(back["q1"]) == 2

    def test_non_numeric_fields(self):
        with pytest.raises(RunFormatError, match="not an integer"):
            read_run(["q1 Q0 D1 first 5.0 tag"])
        with pytest.raises(RunFormatError, match="not a number"):
            read_run(["q1 Q0 D1 1 high tag"])

    def test_interleaved_queries_tracked_separately(self):
        back = read_run([
            "q1 Q0 D1 1 5.0 t",
            "q2 Q0 D9 1 8.0 t",
            "q1 Q0 D2 2 4.0 t",
        ])
        assert [e.doc_name for e in back["q1"]] == ["D1", "D2"]
        assert [e.doc_name for e in back["q2"]] == ["D9"]

    def test_blank_lines_ignored(self):
        assert read_run(["", "q1 Q0 D1 1 5.0 t", "  "])["q1"][0].rank == 1

    def test_run_measures_like_source_rankings(self, tmp_path):
        rng = random.Random(82)
        qrels = Qrels()
        rankings = []
        run_dict = {}
        for i in range(30):
            qid = f"q{i}"
            docs = [f"D{j}" for j in rng.sample(range(50), rng.randint(1, 20))]
            if rng.random() < 0.8:
                qrels.set_grade(qid, rng.choice(docs), 1)
            scored = [(d, float(100 - r)) for r, d in enumerate(docs)]
            rankings.append((qid, scored))
            run_dict[qid] = docs
        path = tmp_path / "run.txt"
        write_run(rankings, "x", path)
        back = read_run(path.read_text().splitlines())
        ids = [qid for qid, _ in rankings]
        from_file = {qid: [e.doc_name for e in entries] for qid, entries in back.items()}
        assert mean_rr_at_10(from_file, qrels, ids) == mean_rr_at_10(run_dict, qrels, ids)
