import numpy as np
import pytest

from qrstab import numerics, ratio
from qrstab.network import NetworkPrimitives, build_dhv, build_lu_kumar, build_push_started_lu_kumar
from qrstab.reflection import NotNeighborsError, combination_coefficient, det_sign, reflection

from helpers import corner, neighbor_pair, random_ratio

DHV = build_dhv([0.5] * 6, 0.811)

BENCHMARKS = [
    build_dhv([0.2, 0.6, 0.3, 0.8, 0.4, 0.7], 0.9),
    build_dhv([0.5] * 6, 0.811),
    build_dhv((0.1, 0.8, 0.1, 0.65, 0.1, 0.4), 0.811),
    build_push_started_lu_kumar((0.3, 0.6, 0.2, 0.5, 0.4), 0.8),
    build_push_started_lu_kumar((0.41, 0.18, 0.24, 0.35, 0.82), 0.8),
    build_lu_kumar((0.6, 0.4, 0.6, 0.4), 0.9),
    build_lu_kumar((0.4, 0.7, 0.3, 0.6), 0.9),
]


def test_dhv_high_246():
    r = reflection(DHV, corner(DHV, (4, 2, 6)))
    assert r.invertible
    assert np.allclose(r.R, [[0.5, 0.5, -0.5], [-1, 1, 0], [0, -1, 1]], atol=1e-12)
    assert np.allclose(r.theta, [-0.0945, 0, 0], atol=1e-12)
    assert r.det_R == pytest.approx(0.5)
    assert np.allclose(r.R @ r.Rinv, np.eye(3), atol=1e-12)


def test_dhv_high_246_closed_form():
    # det R = m1 m3 m5 / (m1 m3 m5 + m2 m4 m6)
    m = np.array([0.2, 0.6, 0.3, 0.8, 0.4, 0.7])
    r = reflection(build_dhv(m, 0.9), corner(build_dhv(m, 0.9), (4, 2, 6)))
    a = m[0] * m[2] * m[4]
    assert r.det_R == pytest.approx(a / (a + m[1] * m[3] * m[5]), rel=1e-12)


@pytest.mark.parametrize("m", [(0.6, 0.4, 0.6, 0.4), (0.3, 0.45, 0.55, 0.7), (0.4, 0.7, 0.3, 0.6)])
def test_lu_kumar_high_12(m):
    alpha = 0.9
    net = build_lu_kumar(m, alpha)
    r = reflection(net, corner(net, (1, 2)))
    q = m[3] / m[2]
    assert np.allclose(r.R, [[1, -q], [0, 1]], atol=1e-12)
    assert np.allclose(r.theta, (alpha - 1) * np.array([1 - q, 1]), atol=1e-12)


def test_scalar_case():
    net = NetworkPrimitives(1, (1,), [0.25], [[0.0]], [2.0])
    r = reflection(net, [4.0])
    assert r.R[0, 0] == pytest.approx(1.0)
    assert r.theta == pytest.approx([-0.5])


def test_singular_reflection_has_no_theta():
    # Lu-Kumar high-{4,2} with m2 + m4 = 1 makes CMQ Delta singular
    net = build_lu_kumar((0.5, 0.5, 0.5, 0.5), 0.9)
    r = reflection(net, corner(net, (4, 2)))
    assert not r.invertible
    assert r.R is None and r.theta is None and r.det_R is None
    assert r.det_sign == 0


def test_det_sign_dead_zone():
    assert det_sign(1e-11) == 0
    assert det_sign(-1e-11) == 0
    assert det_sign(2e-10) == 1
    assert det_sign(-3.0) == -1


@pytest.mark.parametrize("net", BENCHMARKS)
def test_reflection_invariants(net):
    rng = np.random.default_rng(4)
    for _ in range(50):
        d = random_ratio(net, rng)
        r = reflection(net, d)
        assert np.allclose(r.Rinv, np.linalg.multi_dot([net.C @ net.M, net.Q, ratio.ratio_matrix(net, d)]))
        if not r.invertible:
            continue
        assert np.allclose(r.R @ r.Rinv, np.eye(net.stations), atol=1e-8)
        assert r.det_R * r.det_Rinv == pytest.approx(1.0, rel=1e-8)
        assert np.allclose(r.theta, r.R @ (net.rho - 1), atol=1e-10)
        assert r.det_Rinv == pytest.approx(np.linalg.det(r.Rinv), rel=1e-9, abs=1e-12)


def test_combination_examples():
    d1, d2 = corner(DHV, (1, 2, 3)), corner(DHV, (4, 2, 3))
    c = combination_coefficient(DHV, d1, d2, 0.5)
    assert c.beta == pytest.approx(1 / 3)
    direct = np.linalg.inv(reflection(DHV, ratio.convex_combine(d1, d2, 0.5)).Rinv)
    assert np.allclose(c.R, direct, atol=1e-12)
    c0 = combination_coefficient(DHV, d1, d2, 0.0)
    assert c0.beta == 0.0
    assert np.allclose(c0.R, reflection(DHV, d2).R)
    same = combination_coefficient(DHV, d1, d1, 0.3)
    assert same.beta == pytest.approx(0.3)
    assert np.allclose(same.R, reflection(DHV, d1).R)


def test_combination_rejects_non_neighbors():
    with pytest.raises(NotNeighborsError):
        combination_coefficient(DHV, corner(DHV, (1, 2, 3)), corner(DHV, (4, 5, 3)), 0.5)


def test_combination_singular_endpoint():
    net = build_lu_kumar((0.5, 0.5, 0.5, 0.5), 0.9)
    with pytest.raises(numerics.SingularError):
        combination_coefficient(net, corner(net, (4, 2)), corner(net, (1, 2)), 0.5)



def test_row_proportionality():
    rng = np.random.default_rng(5)
    for net in BENCHMARKS:
        for _ in range(40):
            d1, d2, j = neighbor_pair(net, rng)
            r1, r2 = reflection(net, d1), reflection(net, d2)
            if not (r1.invertible and r2.invertible):
                continue
            assert np.allclose(r1.R[j], r2.R[j] * r2.det_Rinv / r1.det_Rinv, atol=1e-8)


def test_invertible_along_same_sign_segments():
    rng = np.random.default_rng(6)
    for net in BENCHMARKS:
        for _ in range(40):
            d1, d2, _ = neighbor_pair(net, rng)
            s1, s2 = reflection(net, d1).det_sign, reflection(net, d2).det_sign
            if s1 == 0 or s1 != s2:
                continue
            for lam in np.linspace(0, 1, 21):
                assert reflection(net, ratio.convex_combine(d1, d2, lam)).invertible
