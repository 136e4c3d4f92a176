import numpy as np
import pytest
from scipy.optimize import linprog

from qrstab import ssc
from qrstab.network import build_dhv, build_lu_kumar, build_push_started_lu_kumar
from qrstab.ssc import InequalitySystem, dhv_system, feasible, lk_system, pslk_system

FIG6 = (0.3, 0.6, 0.2, 0.5, 0.4)
FIG7 = (0.41, 0.18, 0.24, 0.35, 0.82)


def reference_feasible(system):
    """Strict feasibility of c'h < 0, h > 0 via scipy on the same normalised cone LP."""
    k = system.class_count
    if not system.inequalities:
        return True
    A = np.array([np.r_[q.coeffs, 1.0] for q in system.inequalities])
    A = np.vstack([A, np.hstack([-np.eye(k), np.ones((k, 1))])])
    res = linprog(np.r_[np.zeros(k), -1.0], A_ub=A, b_ub=np.zeros(len(A)),
                  bounds=[(0, None)] * k + [(0, 1)], method="highs")
    return -res.fun > 0.5


def by_label(system):
    return {q.label: q.coeffs for q in system.inequalities}


def test_dhv_coefficients_at_half():
    sys_ = dhv_system([0.5] * 6, 0.95)
    rows = by_label(sys_)
    assert len(rows) == 24
    assert np.allclose(rows["dhv.2"], [0, 0, 0, 0, 0, -2])
    assert np.allclose(rows["dhv.5"], [0.95 - 2, 0, 0, 0, 0, 0])
    assert sys_.alpha_threshold == 0.0


def test_dhv_threshold():
    m = (0.1, 0.9, 0.1, 0.9, 0.1, 0.9)
    assert dhv_system(m, 0.99).alpha_threshold == pytest.approx(0.8 / 0.81, rel=1e-12)


def test_dhv_cyclic_contradiction():
    # the first three rows force h6 > 8 h2, h2 > 8 h4, h4 > 8 h6
    rows = by_label(dhv_system((0.1, 0.9, 0.1, 0.9, 0.1, 0.9), 0.99))
    for label, big, small in (("dhv.2", 5, 1), ("dhv.3", 1, 3), ("dhv.4", 3, 5)):
        c = rows[label]
        assert -c[small] / c[big] == pytest.approx(8.0)


def test_pslk_condition():
    assert pslk_system(FIG6, 0.8).parameter_conditions[0].holds
    assert not pslk_system(FIG7, 0.8).parameter_conditions[0].holds
    assert pslk_system(FIG7, 0.8).parameter_conditions[0].binding


def test_pslk_conditional_row():
    # the row is only emitted when mu1 <= mu2
    assert "pslk.35" not in by_label(pslk_system(FIG6, 0.8))
    assert "pslk.35" in by_label(pslk_system((0.5, 0.3, 0.2, 0.3, 0.7), 0.8))


def test_lk_examples():
    assert feasible(lk_system((0.6, 0.4, 0.6, 0.4), 0.9)).feasible
    rep = feasible(lk_system((0.4, 0.7, 0.3, 0.6), 0.9))
    assert not rep.feasible
    assert rep.p_star == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("s", np.round(np.linspace(0.6, 1.4, 9), 10))
def test_lu_kumar_sweep(s):
    m2 = m4 = s / 2
    m = (1 - m4, m2, 1 - m2, m4)
    rep = feasible(lk_system(m, 0.9))
    assert rep.feasible == (s < 1)
    assert rep.feasible == reference_feasible(lk_system(m, 0.9))


def test_dhv_feasible_instance():
    sys_ = dhv_system([0.5] * 6, 0.95)
    rep = feasible(sys_)
    assert rep.feasible and rep.p_star == pytest.approx(1.0)
    assert rep.certified
    assert all(q.value(np.ones(6)) <= -0.05 + 1e-12 for q in sys_.inequalities)
    replay(sys_, rep)


def test_dhv_infeasible_instance():
    rep = feasible(dhv_system((0.1, 0.9, 0.1, 0.9, 0.1, 0.9), 0.99))
    assert not rep.feasible and rep.h_witness is None
    assert not rep.certified


@pytest.mark.parametrize("a, ok", [(0.3, True), (0.5, True), (0.6, True),
                                   (0.7, False), (0.8, False), (0.9, False)])
def test_dhv_boundary_family(a, ok):
    sys_ = dhv_system((1 - a, a) * 3, 0.99)
    assert feasible(sys_).feasible is ok
    assert reference_feasible(sys_) is ok


def test_empty_system():
    rep = feasible(InequalitySystem("none", 3, []))
    assert rep.feasible and rep.p_star == pytest.approx(1.0)
    assert np.allclose(rep.h_witness, 1.0)


@pytest.mark.parametrize("c", [1e-3, 1e3])
def test_scale_invariance(c):
    for sys_ in (dhv_system([0.5] * 6, 0.95), dhv_system((0.1, 0.9) * 3, 0.99),
                 pslk_system(FIG6, 0.8), lk_system((0.4, 0.7, 0.3, 0.6), 0.9)):
        assert feasible(sys_.scaled(c)).feasible == feasible(sys_).feasible


def replay(system, rep):
    h = rep.h_witness
    assert np.all(h >= 1.0 - 1e-12)
    for q in system.inequalities:
        assert q.value(h) < 0, q.label


def test_random_systems_agree_with_reference():
    rng = np.random.default_rng(12)
    for _ in range(100):
        m = rng.uniform(0.05, 1.0, 6)
        sys_ = dhv_system(m, rng.uniform(0.5, 1.0))
        rep = feasible(sys_)
        assert rep.feasible == reference_feasible(sys_)
        if rep.feasible:
            replay(sys_, rep)


def test_system_for_network():
    net = build_push_started_lu_kumar(FIG6, 0.8)
    sys_ = ssc.system_for_network("pslk", net)
    assert sys_.alpha1 == 0.8 and sys_.class_count == 5
    with pytest.raises(ValueError, match="topology"):
        ssc.system_for_network("dhv", net)
    with pytest.raises(ValueError, match="unknown"):
        ssc.system_for_network("fifo", net)
    assert ssc.system_for_network("lk", build_lu_kumar((0.6, 0.4, 0.6, 0.4), 0.9)).family == "lk"
    assert ssc.system_for_network("dhv", build_dhv([0.5] * 6, 0.9)).family == "dhv"


def test_report_dict():
    d = feasible(pslk_system(FIG7, 0.8)).to_dict()
    assert d["violated_conditions"] == ["m2m4>m3m5"]
    assert d["certified"] is False
