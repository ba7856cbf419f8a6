import pytest

from fockapr.verify import DEFAULT_SIZES, SUITES, run_suite


def test_unknown_suite():
    with pytest.raises(ValueError):
        run_suite("mystery")


def test_suite_names_and_defaults():
    assert set(SUITES) == set(DEFAULT_SIZES)
    assert all(v >= 1 for v in DEFAULT_SIZES.values())


def test_duality_small_clean():
    rep = run_suite("duality", seed=11, size=8)
    assert rep.cases == 8 and rep.failures == []


def test_threeQ_small_clean():
    rep = run_suite("threeQ", seed=11, size=4)
    assert rep.cases == 4 and rep.failures == []


def test_lattice_small_clean():
    rep = run_suite("lattice", seed=11, size=4)
    assert rep.failures == []


def test_determinism_across_threads():
    a = run_suite("duality", seed=5, size=9, threads=1)
    b = run_suite("duality", seed=5, size=9, threads=3)
    assert a.to_json_text() == b.to_json_text()


def test_determinism_across_runs():
    a = run_suite("threeQ", seed=5, size=3)
    b = run_suite("threeQ", seed=5, size=3)
    assert a.to_json_text() == b.to_json_text()
    assert "wall" not in a.to_json_text()


def test_report_text_mentions_counts():
    rep = run_suite("duality", seed=11, size=2)
    txt = rep.to_text()
    assert "duality" in txt and "2 cases" in txt
