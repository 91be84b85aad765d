import numpy as np
import pytest

from rscap import lemmas
from rscap.errors import ConfigError
from rscap.lemmas import NOTE, REGISTRY, Condition, margin_at, verify

EXPECTED = {
    "mills_bounds", "P_monotone", "A_monotone_range", "B_continuity_endpoints", "B_monotone",
    "Bprime_matches_fd", "g_two_forms", "g_decreasing_pos", "g_neg_bound", "hankel_feasible",
    "F_region_negative", "critical_value_bound", "pi_estimate", "logtail_chernoff", "mills_sq_gap",
    "theorem2_approach",
}


def test_registry_covers_required_checks():
    assert EXPECTED <= set(REGISTRY)


@pytest.mark.parametrize("lemma_id", list(REGISTRY))
def test_each_check_passes_at_low_resolution(lemma_id):
    rep = verify(lemma_id, resolution=400)
    assert rep.passed, rep
    assert rep.note == NOTE
    assert rep.passed == (rep.worst_margin > -rep.tolerance)


@pytest.mark.parametrize("lemma_id", ["mills_bounds", "g_neg_bound", "critical_value_bound", "F_region_negative"])
def test_margin_at_reproduces_worst(lemma_id):
    rep = verify(lemma_id, resolution=400)
    again = margin_at(lemma_id, rep.condition, rep.worst_point, resolution=400)
    assert again == rep.worst_margin


def test_f_region_left_edge_margin():
    y = 0.25
    np.testing.assert_allclose(margin_at("F_region_negative", "F(1-2y, y) = -2y^2 < 0", (1 - 2 * y, y)), 2 * y * y)


def test_report_schema_order():
    d = verify("pi_estimate", 100).to_dict()
    assert list(d) == ["lemma", "passed", "worst_margin", "worst_point", "grid_spec", "tolerance", "note"]
    assert d["note"] == "numerical evidence, not proof"


def test_verify_is_deterministic():
    assert verify("F_region_negative", 1000) == verify("F_region_negative", 1000)


def test_unknown_and_bad_resolution():
    with pytest.raises(ConfigError):
        verify("no_such_lemma")
    with pytest.raises(ConfigError):
        verify("pi_estimate", resolution=99)
    with pytest.raises(ConfigError):
        margin_at("pi_estimate", "no such condition", (0.0,))


def test_violation_detected(monkeypatch):
    def broken(n, cfg):
        u = np.linspace(-1, 1, n)[:, None]
        return "u in [-1, 1]", [Condition("u >= 0", u, lambda p: p[:, 0])]

    monkeypatch.setitem(REGISTRY, "broken", lemmas.Check("broken", 1e-12, "always fails", broken))
    rep = verify("broken", 100)
    assert not rep.passed
    assert rep.worst_point == (-1.0,) and rep.worst_margin == -1.0


def test_nan_margin_counts_as_violation(monkeypatch):
    def nan_check(n, cfg):
        return "single point", [Condition("nan", np.zeros((1, 1)), lambda p: np.array([np.nan]))]

    monkeypatch.setitem(REGISTRY, "nan_check", lemmas.Check("nan_check", 1e-12, "nan", nan_check))
    assert not verify("nan_check", 100).passed
