from edgegram.fuzz import run_bound_fuzz


def test_small_fuzz_run_clean(tmp_path):
    report = run_bound_fuzz(trials_per_family=40, seed=123, out_csv=tmp_path / "log.csv")
    assert report.violations == ()
    assert report.count("trace_unmodified") == 40
    assert report.count("lemma_rank_one") == 40
    lines = (tmp_path / "log.csv").read_text().splitlines()
    assert lines[0] == "seed,bound,lhs,rhs,slack"
    assert len(lines) == len(report.trials) + 1


def test_fuzz_is_seeded():
    a = run_bound_fuzz(trials_per_family=15, seed=5)
    b = run_bound_fuzz(trials_per_family=15, seed=5)
    assert [(t.bound, t.lhs, t.rhs) for t in a.trials] == [
        (t.bound, t.lhs, t.rhs) for t in b.trials
    ]
