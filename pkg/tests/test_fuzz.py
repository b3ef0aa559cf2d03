import pytest

from ncgpi1.fuzz import SUITES, run_suite, run_trial


@pytest.mark.parametrize("suite", SUITES)
def test_small_suites_pass(suite):
    records, summary = run_suite(suite, seed=2024, trials=6)
    assert summary["pass"], [r for r in records if not r["pass"]]
    assert [r["trial"] for r in records] == list(range(6))


def test_trial_depends_only_on_seed_and_index():
    _, _ = run_suite("pseudoinverse", 5, 4)
    records, _ = run_suite("pseudoinverse", 5, 4)
    assert run_trial("pseudoinverse", 5, 3) == records[3]
    assert run_trial("pseudoinverse", 6, 3) != records[3]


def test_worker_pool_gives_the_same_records():
    assert run_suite("torus-phases", 9, 8, jobs=2) == run_suite("torus-phases", 9, 8, jobs=1)


def test_unknown_suite():
    with pytest.raises(ValueError):
        run_suite("nope", 1, 1)
