import pytest

from analysis.verify import SUITES, resolve_suites, run_suite, run_verify
from utils.errors import InvalidParameter


@pytest.mark.parametrize("name", ["orthogonality", "influence", "stability", "prop-direct", "fkg", "boost"])
def test_small_suites_pass(name):
    result = run_suite(name, n=3, trials=10, seed=1)
    assert result.passed, result.to_doc()
    assert all(total > 0 for _, total in result.counts.values())


def test_lemmas_suite_passes():
    result = run_suite("lemmas", n=3, trials=4, seed=2)
    assert result.passed, result.to_doc()
    assert "dichotomy" in result.counts
    for name in ("psi_nonconstant", "residue_nonzero", "smoothing"):
        assert result.counts[name][1] > 0
        assert result.counts[name][0] == result.counts[name][1]


def test_russo_suite_reaches_five_coordinates():
    result = run_suite("russo", n=3, trials=1)
    assert result.passed, result.to_doc()
    # OR and majority on 3, 4 and 5 coordinates
    assert result.counts["within_tolerance"] == [6, 6]


def test_examples_suite_passes():
    result = run_suite("examples", n=3, trials=1)
    assert result.passed, result.to_doc()
    assert result.counts


def test_run_verify_keeps_requested_order():
    results = run_verify(["fkg", "parseval", "fkg"], n=2, trials=5, seed=0)
    assert [r.name for r in results] == ["fkg", "parseval"]


def test_resolve_suites():
    assert resolve_suites(["all"]) == list(SUITES)
    with pytest.raises(InvalidParameter):
        resolve_suites(["nope"])


@pytest.mark.parametrize("n, trials", [(0, 5), (3, 0)])
def test_run_suite_rejects_bad_sizes(n, trials):
    with pytest.raises(InvalidParameter):
        run_suite("parseval", n=n, trials=trials)
