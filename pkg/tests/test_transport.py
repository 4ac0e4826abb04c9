import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mpod_holonomy import analytic
from mpod_holonomy.errors import FrameMismatch, InvalidOrder, NotALoop, SingularSample, StepTooCoarse
from mpod_holonomy.loops import LoopSpec, materialize, plaquette_phase
from mpod_holonomy.mpod import CouplingPoint
from mpod_holonomy.paths import ControlPath
from mpod_holonomy.transport import (SubspaceSelector, connection_numeric, curvature_numeric,
                                     eigenframe, express_in_frame, holonomy_numeric, rotation_angle,
                                     unitarize)

DARK = SubspaceSelector(0, 2)


def rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


def test_selector_validation_and_labels():
    assert DARK.label() == "dark"
    assert SubspaceSelector(-1, 2).label() == "bright-1"
    with pytest.raises(InvalidOrder):
        SubspaceSelector(3, 2)


def test_unitarize_rejects_tiny_overlap():
    assert np.allclose(unitarize(np.diag([2.0, 0.5])), np.eye(2))
    with pytest.raises(StepTooCoarse):
        unitarize(np.diag([1.0, 0.01]))


@given(st.floats(0.3, 2.0), st.floats(0.3, 2.0), st.floats(0, 2 * math.pi))
@settings(max_examples=15)
def test_theta2_connection_matches_closed_form(r2, r3, th):
    pt = CouplingPoint([0.0, r2 * np.exp(1j * th), r3])
    est = connection_numeric(pt, "theta2", DARK, analytic.frame_field("dark-theta2"))
    assert rel(est.matrix, analytic.connection_theta2(r2, r3)) < 1e-6
    assert np.allclose(est.matrix.conj().T, -est.matrix, atol=1e-15)


def test_real_chart_dark_connection_and_vanishing_r3():
    pt = CouplingPoint([0.5, 1.1, 0.8])
    ff = analytic.frame_field("dark-real")
    exact = analytic.dark_connection_real(0.5, 1.1, 0.8)
    for c in ("r1", "r2"):
        assert rel(connection_numeric(pt, c, DARK, ff).matrix, exact[c]) < 1e-6
    assert np.linalg.norm(connection_numeric(pt, "r3", DARK, ff).matrix) < 1e-8


def test_fixed_frame_gives_parallel_transport_gauge():
    pt = CouplingPoint([0.5, 1.1, 0.8])
    frame, _ = eigenframe(pt, DARK)
    assert np.linalg.norm(connection_numeric(pt, "r1", DARK, frame).matrix) < 1e-8


@pytest.mark.parametrize("s", [1, -1])
def test_bright_curvature_and_antisymmetry(s):
    r = (0.4, 0.7, 1.1)
    pt = CouplingPoint(r)
    sel, ff = SubspaceSelector(s, 2), analytic.frame_field("bright-real", s)
    exact = analytic.bright_curvature_real(*r, s)
    for (mu, nu), f in exact.items():
        num = curvature_numeric(pt, mu, nu, sel, ff)
        assert rel(num, f) < 1e-6
        assert np.allclose(curvature_numeric(pt, nu, mu, sel, ff), -num, atol=1e-9)


def test_dark_curvature_single_angle_chart():
    # abelian diagonal connection: F_{r2 theta2} = d/dr2 A_theta2
    r2, r3, h = 0.9, 0.6, 1e-5
    pt = CouplingPoint([0.0, r2, r3])
    num = curvature_numeric(pt, "r2", "theta2", DARK, analytic.frame_field("dark-theta2"))
    exact = (analytic.connection_theta2(r2 + h, r3) - analytic.connection_theta2(r2 - h, r3)) / (2 * h)
    assert np.linalg.norm(num - exact) < 1e-6


def test_constant_path_is_identity():
    path = ControlPath.from_points([[0.3, 1.0, 0.7]] * 9)
    for sel in (DARK, SubspaceSelector(1, 2)):
        res = holonomy_numeric(path, sel)
        assert np.allclose(res.unitary, np.eye(res.dim), atol=1e-14)


def test_theta2_winding_equal_radii():
    res = holonomy_numeric(materialize(LoopSpec.theta_winding([0, 0.8, 0.8], arm=2, steps=10000)), DARK)
    w = express_in_frame(res, analytic.dark_states_theta2(0.8, 0.0, 0.8).vectors)
    assert np.linalg.norm(w - np.diag([1, -1, 1, -1])) < 1e-6
    assert res.unitarity_defect() < 1e-8
    assert res.error_estimate < 1e-5


def test_plaquette_bright_rotation():
    a, b, k = 1.2, 0.8, 1.0
    res = holonomy_numeric(materialize(LoopSpec.plaquette(a, b, k, steps=4096)), SubspaceSelector(1, 2))
    w = express_in_frame(res, analytic.bright_states_real(0, 0, k, 1).vectors)
    assert rotation_angle(w) == pytest.approx(plaquette_phase(a, b, k), abs=1e-6)


def test_triangle_dark_holonomy_in_real_frame():
    verts = [[0, 1, 0.8], [1, 1, 0.8], [0, 1.9, 0.8]]
    tri = materialize(LoopSpec.piecewise_linear(verts, steps=6000))
    w = express_in_frame(holonomy_numeric(tri, DARK), analytic.dark_states_real(0, 1, 0.8).vectors)
    cf = analytic.holonomy_w2_dark(analytic.phi0_line_integral(tri))
    assert np.abs(w - cf.transport).max() < 1e-6


def test_express_in_frame_identity_and_eigenphases(rng):
    res = holonomy_numeric(materialize(LoopSpec.theta_winding([0, 1.0, 0.6], arm=2, steps=256)), DARK)
    assert np.allclose(express_in_frame(res, res.frame_start), res.unitary, atol=1e-14)
    q, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    w = express_in_frame(res, res.frame_start @ q)
    assert np.allclose(np.sort(np.angle(np.linalg.eigvals(w))), res.eigenphases(), atol=1e-10)


def test_express_in_frame_rejects_foreign_frame():
    res = holonomy_numeric(materialize(LoopSpec.plaquette(1.2, 0.8, 1.0, steps=64)), SubspaceSelector(1, 2))
    with pytest.raises(FrameMismatch):
        express_in_frame(res, analytic.bright_states_real(0, 0, 1.0, -1).vectors)
    with pytest.raises(FrameMismatch):
        express_in_frame(res, np.eye(10)[:, :3])


def test_holonomy_errors():
    open_path = ControlPath.from_points([[0.1, 1, 1], [0.5, 1, 1]], closed=False)
    with pytest.raises(NotALoop):
        holonomy_numeric(open_path, DARK)
    # dark spaces at (1,0,0) and (0,0,1) share only a 3-dimensional overlap
    coarse = ControlPath.from_points([[1, 0, 0], [0, 0, 1], [1, 0, 0]])
    with pytest.raises(StepTooCoarse):
        holonomy_numeric(coarse, DARK)
    with pytest.raises(SingularSample):
        ControlPath.from_points([[1, 0, 0], [0, 0, 0], [1, 0, 0]])


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=8)
def test_random_regauging_leaves_eigenphases(seed):
    path = materialize(LoopSpec.plaquette(1.2, 0.8, 1.0, steps=128))
    for sel in (DARK, SubspaceSelector(1, 2)):
        ref = holonomy_numeric(path, sel)
        res = holonomy_numeric(path, sel, gauge_rng=np.random.default_rng(seed))
        assert np.allclose(res.eigenphases(), ref.eigenphases(), atol=1e-8)
