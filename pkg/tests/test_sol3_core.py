import math

import numpy as np
import pytest

from solv import oracle as OR
from solv import sol3_core as S
from solv.errors import DomainError
from solv.numdiff import FDConfig, jacobian
from solv.sol3_core import CoordVec, FrameVec, Sol3Point

RNG = np.random.default_rng(12345)


def random_point(scale=1.0):
    return Sol3Point.of(RNG.uniform(-scale, scale, 3))


def test_point_rejects_non_finite():
    with pytest.raises(ValueError):
        Sol3Point(0.0, math.inf, 0.0)
    with pytest.raises(ValueError):
        CoordVec(math.nan, 0.0, 0.0)


def test_metric_at_examples():
    o = Sol3Point(0, 0, 0)
    assert S.metric_at(o, CoordVec(1, 0, 0), CoordVec(1, 0, 0)) == 1
    assert S.metric_at(o, CoordVec(1, 0, 0), CoordVec(0, 1, 0)) == 0
    assert S.metric_at(Sol3Point(0, 0, 1), CoordVec(1, 0, 0), CoordVec(1, 0, 0)) == pytest.approx(7.389056, abs=1e-6)


def test_metric_symmetric_bilinear():
    p = random_point()
    u, v, w = (CoordVec(*RNG.normal(size=3)) for _ in range(3))
    assert S.metric_at(p, u, v) == pytest.approx(S.metric_at(p, v, u), rel=1e-14)
    uw = CoordVec(u.dx + 2 * w.dx, u.dy + 2 * w.dy, u.dz + 2 * w.dz)
    lhs = S.metric_at(p, uw, v)
    rhs = S.metric_at(p, u, v) + 2 * S.metric_at(p, w, v)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


def test_group_law_examples():
    q = Sol3Point(0.3, -1.2, 0.7)
    assert S.group_mul(Sol3Point(0, 0, 0), q) == q
    r = S.group_mul(Sol3Point(0, 0, 1), Sol3Point(1, 0, 0))
    assert (r.x, r.y, r.z) == pytest.approx((math.exp(-1), 0, 1), abs=1e-15)


def test_group_associative_and_inverse():
    for _ in range(50):
        p, q, r = random_point(), random_point(), random_point()
        lhs = S.group_mul(S.group_mul(p, q), r).as_array()
        rhs = S.group_mul(p, S.group_mul(q, r)).as_array()
        assert np.allclose(lhs, rhs, atol=1e-12, rtol=0)
        e = S.group_mul(p, S.group_inv(p)).as_array()
        assert np.allclose(e, 0, atol=1e-12)


def test_left_translation_is_isometry():
    for _ in range(20):
        p = random_point()
        defect = S.pullback_defect(lambda q: S.group_mul(p, Sol3Point.of(q)).as_array(), random_point().as_array(), S.ambient_metric, S.ambient_metric)
        assert defect < 1e-10


def test_frame_examples():
    e1, e2, e3 = S.frame_at(Sol3Point(0, 0, 0))
    assert (e1, e2, e3) == (CoordVec(1, 0, 0), CoordVec(0, 1, 0), CoordVec(0, 0, 1))
    e1, _, _ = S.frame_at(Sol3Point(0, 0, 1))
    assert e1.dx == pytest.approx(math.exp(-1))


def test_frame_orthonormal_random():
    for _ in range(100):
        p = random_point(3.0)
        frame = S.frame_at(p)
        gram = np.array([[S.metric_at(p, u, v) for v in frame] for u in frame])
        assert np.allclose(gram, np.eye(3), atol=1e-12, rtol=0)


def test_frame_vec_norm_matches_metric():
    p = random_point()
    v = FrameVec(*RNG.normal(size=3))
    u = S.frame_to_coord(p, v)
    assert S.metric_at(p, u, u) == pytest.approx(v.c1**2 + v.c2**2 + v.c3**2, rel=1e-12)
    back = S.coord_to_frame(p, u)
    assert np.allclose(back.as_array(), v.as_array(), atol=1e-14)


def test_left_invariance_of_frame():
    """The differential of left translation by p maps the frame at q to the frame at p*q."""
    for _ in range(20):
        p, q = random_point(), random_point()
        J = jacobian(lambda x: S.group_mul(p, Sol3Point.of(x)).as_array(), q.as_array())
        pushed = [J @ np.array([e.dx, e.dy, e.dz]) for e in S.frame_at(q)]
        target = [np.array([e.dx, e.dy, e.dz]) for e in S.frame_at(S.group_mul(p, q))]
        for a, b in zip(pushed, target):
            assert np.allclose(a, b, atol=1e-10, rtol=0)


def test_connection_table_values():
    assert tuple(S.connection(1, 1).as_array()) == (0, 0, -1)
    assert tuple(S.connection(3, 3).as_array()) == (0, 0, 0)
    assert tuple(S.connection(1, 3).as_array()) == (1, 0, 0)
    assert tuple(S.connection(2, 3).as_array()) == (0, -1, 0)
    with pytest.raises(ValueError):
        S.connection(0, 1)
    with pytest.raises(ValueError):
        S.connection(1, 4)


def test_connection_metric_compatible():
    for i in range(1, 4):
        for j in range(1, 4):
            for k in range(1, 4):
                a = S.connection(i, j).as_array()[k - 1]
                b = S.connection(i, k).as_array()[j - 1]
                assert a + b == 0


def test_torsion_free_against_numeric_brackets():
    """nabla_{E_i}E_j - nabla_{E_j}E_i equals [E_i, E_j] computed from the frame fields numerically."""
    for _ in range(10):
        p = random_point()
        x = p.as_array()
        J = [jacobian(lambda q, k=k: OR.frame_field(q)[k], x) for k in range(3)]
        F = OR.frame_field(x)
        for i in range(3):
            for j in range(3):
                bracket = J[j] @ F[i] - J[i] @ F[j]
                frame = S.coord_to_frame(p, CoordVec(*bracket)).as_array()
                assert np.allclose(frame, S.lie_bracket_table(i + 1, j + 1).as_array(), atol=1e-6)


def test_translate_examples_and_identity():
    r = S.translate("T3", 1.0, Sol3Point(1, 1, 0))
    assert (r.x, r.y, r.z) == pytest.approx((math.exp(-1), math.e, 1))
    p = Sol3Point(0.2, -0.4, 0.9)
    for kind in S.TRANSLATIONS:
        assert S.translate(kind, 0.0, p) == p
    with pytest.raises(ValueError):
        S.translate("T4", 1.0, p)


@pytest.mark.parametrize("kind", S.TRANSLATIONS)
def test_translations_are_isometries(kind):
    for _ in range(100):
        c = RNG.uniform(-1.5, 1.5)
        x = random_point(2.0).as_array()
        defect = S.pullback_defect(lambda q: S.translate(kind, c, Sol3Point.of(q)).as_array(), x, S.ambient_metric, S.ambient_metric)
        assert defect < 1e-10


def test_leaf_charts():
    from solv.symtrig import to_text

    assert tuple(to_text(c) for c in S.leaf_chart("F1", 0).X) == ("0", "s", "t")
    assert tuple(to_text(c) for c in S.leaf_chart("F3", 0).X) == ("s", "t", "0")
    assert tuple(to_text(c) for c in S.leaf_chart("F2", 0.5).X) == ("s", "1/2", "t")
    with pytest.raises(ValueError):
        S.leaf_chart("F4", 0)


def test_phi_s():
    assert S.phi_s(0.5, Sol3Point(0.5, 0, 0)) == (0, 1)
    with pytest.raises(DomainError):
        S.phi_s(0.5, Sol3Point(0.6, 0, 0))
    with pytest.raises(DomainError):
        S.phi_s_inv(0.5, (1.0, 0.0))
    for _ in range(20):
        s = RNG.uniform(-2, 2)
        p = Sol3Point(s, *RNG.uniform(-2, 2, 2))
        back = S.phi_s_inv(s, S.phi_s(s, p))
        assert np.allclose(back.as_array(), p.as_array(), atol=1e-12)


def test_psi_s():
    assert S.psi_s(0.0, Sol3Point(0.3, -0.2, 0.0)) == pytest.approx((0.3, -0.2))
    assert S.psi_s(1.0, Sol3Point(1, 1, 1)) == pytest.approx((math.e, math.exp(-1)))
    with pytest.raises(DomainError):
        S.psi_s(1.0, Sol3Point(1, 1, 0.5))
    p = Sol3Point(0.4, 0.1, -0.6)
    assert np.allclose(S.psi_s_inv(-0.6, S.psi_s(-0.6, p)).as_array(), p.as_array(), atol=1e-14)


@pytest.mark.parametrize("s", [-1.0, 0.0, 0.7])
def test_model_isometries(s):
    phi = lambda uv: np.array(S.phi_s(s, Sol3Point(s, uv[0], uv[1])))
    psi = lambda uv: np.array(S.psi_s(s, Sol3Point(uv[0], uv[1], s)))
    for _ in range(10):
        uv = RNG.uniform(-1, 1, 2)
        assert S.pullback_defect(phi, uv, S.induced_leaf_metric("F1", s), S.hyperbolic_metric) < 1e-8
        assert S.pullback_defect(psi, uv, S.induced_leaf_metric("F3", s), S.euclidean_metric) < 1e-8


def test_fd_config_validation():
    with pytest.raises(ValueError):
        FDConfig(h=0.0)
    with pytest.raises(ValueError):
        FDConfig(h=0.02)
    with pytest.raises(ValueError):
        FDConfig(scheme="forward")
