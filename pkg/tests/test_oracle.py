import math

import numpy as np
import pytest

from solv import families as FAM
from solv import oracle as OR
from solv import sol3_core as S
from solv.curvature import SurfaceChart
from solv.errors import DomainError, SingularityError
from solv.numdiff import FDConfig
from solv.sol3_core import Sol3Point, leaf_chart
from solv.symtrig import to_text

RNG = np.random.default_rng(2024)


def test_christoffel_closed_form():
    for _ in range(10):
        x, y, z = RNG.uniform(-1, 1, 3)
        G = OR.christoffel_fd(Sol3Point(x, y, z))
        want = np.zeros((3, 3, 3))
        want[0, 0, 2] = want[0, 2, 0] = 1.0
        want[1, 1, 2] = want[1, 2, 1] = -1.0
        want[2, 0, 0] = -math.exp(2 * z)
        want[2, 1, 1] = math.exp(-2 * z)
        assert np.allclose(G, want, atol=1e-8)
        assert np.allclose(G, np.transpose(G, (0, 2, 1)), atol=1e-12)


def test_christoffel_metric_compatibility():
    p = Sol3Point(0.2, -0.5, 0.4)
    g = OR.metric_tensor(p)
    G = OR.christoffel_fd(p)
    lowered = np.einsum("lk,kij->lij", g, G)
    for axis in range(3):
        e = np.zeros(3)
        e[axis] = 1e-5
        dg = (OR.metric_tensor(p.as_array() + e) - OR.metric_tensor(p.as_array() - e)) / 2e-5
        # d_a g_ij = Gamma_{i a j} + Gamma_{j a i} with the lowered index first
        assert np.allclose(dg, lowered[:, axis, :] + lowered[:, axis, :].T, atol=1e-6)


def test_frame_connection_reproduces_table():
    for _ in range(5):
        p = Sol3Point(*RNG.uniform(-1, 1, 3))
        table = OR.frame_connection_fd(p)
        for i in range(3):
            for j in range(3):
                assert np.allclose(table[i, j], S.connection(i + 1, j + 1).as_array(), atol=1e-6)


def test_leaf_curvatures():
    for c in (-0.5, 0.0, 0.8):
        r = OR.curvatures_fd(leaf_chart("F3", c), 0.3, -0.2)
        assert abs(r.H) < 1e-8 and r.K_paper == pytest.approx(-1.0, abs=1e-8)
        p = OR.curvatures_fd(leaf_chart("F1", c), 0.3, -0.2)
        assert abs(p.H) < 1e-8 and abs(p.K_paper) < 1e-8


def test_tilted_plane_reference():
    r = OR.curvatures_fd(SurfaceChart(("s", "t", "s")), 0.0, 0.0)
    assert r.H == pytest.approx(-math.sqrt(2) / 8, abs=1e-8)
    assert r.K_paper == pytest.approx(-0.75, abs=1e-8)


def test_intrinsic_curvature_of_leaves():
    for s, t in [(0.1, 0.2), (-0.4, 0.7)]:
        assert OR.intrinsic_gauss_fd(leaf_chart("F1", 0.3), s, t) == pytest.approx(-1.0, abs=1e-4)
        assert OR.intrinsic_gauss_fd(leaf_chart("F2", -0.2), s, t) == pytest.approx(-1.0, abs=1e-4)
        assert OR.intrinsic_gauss_fd(leaf_chart("F3", 0.5), s, t) == pytest.approx(0.0, abs=1e-4)


def test_intrinsic_calibration_on_unit_sphere():
    sphere = SurfaceChart(("s*cos(t)", "s*sin(t)", "sqrt(1 - s^2)"), (0.1, 0.9), (0.0, 6.0))
    for s, t in [(0.3, 0.4), (0.6, 2.0), (0.5, 5.0)]:
        K = OR.intrinsic_gauss_fd(sphere, s, t, metric=OR.euclidean_metric_tensor)
        assert K == pytest.approx(1.0, abs=1e-4)


def test_gauss_equation_gap_is_sectional_curvature():
    # intrinsic minus extrinsic: -1 on the P leaves, +1 on the R leaves
    s, t = 0.2, -0.3
    P = leaf_chart("F1", 0.1)
    R = leaf_chart("F3", 0.1)
    gap_P = OR.intrinsic_gauss_fd(P, s, t) - OR.curvatures_fd(P, s, t).K_paper
    gap_R = OR.intrinsic_gauss_fd(R, s, t) - OR.curvatures_fd(R, s, t).K_paper
    assert gap_P == pytest.approx(-1.0, abs=1e-3)
    assert gap_R == pytest.approx(1.0, abs=1e-3)


def test_richardson_improves_extrinsic_curvature():
    chart = FAM.cyclic_chart(a="s/2", b="2 + s/3", r="1 + s^2/4")
    exact = 1.5458973931676142915
    plain = OR.curvatures_fd(chart, 0.2, 0.9, cfg=FDConfig(h=1e-3, extrapolation=False)).K_paper
    extrap = OR.curvatures_fd(chart, 0.2, 0.9, cfg=FDConfig(h=1e-3, extrapolation=True)).K_paper
    assert abs(extrap - exact) * 4 <= abs(plain - exact)


def test_degenerate_chart_raises():
    with pytest.raises(SingularityError):
        OR.curvatures_fd(SurfaceChart(("s*t", "s", "0")), 0.0, 0.5)


@pytest.mark.parametrize("cid", sorted(OR.ODE_CATALOGUE))
def test_ode_catalogue(cid):
    res = OR.ode_residual(OR.ODE_CATALOGUE[cid])
    assert res.symbolic_zero
    assert res.max_numeric < 1e-10


def test_negative_controls():
    res = OR.ode_residual(OR.NEGATIVE_CONTROLS["horocycle_linear"])
    assert not res.symbolic_zero
    assert res.max_numeric == pytest.approx(1.0)
    assert to_text(res.symbolic) == "-1"
    res = OR.ode_residual(OR.NEGATIVE_CONTROLS["horocycle_printed_sign"])
    assert not res.symbolic_zero and res.max_numeric > 1e-3


def test_ode_sample_outside_domain():
    with pytest.raises(DomainError):
        OR.ode_residual(OR.ODE_CATALOGUE["equidistant_b"], samples=[-3.5])
