import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from mpod_holonomy import analytic
from mpod_holonomy.errors import NotALoop, SingularParametrization
from mpod_holonomy.loops import LoopSpec, materialize, plaquette_phase
from mpod_holonomy.mpod import CouplingPoint, build_hamiltonian
from mpod_holonomy.paths import ControlPath

radius = st.floats(0.2, 2.5)
angle = st.floats(0.0, 2 * math.pi)
sign = st.sampled_from([1, -1])
S2 = 1 / math.sqrt(2)


def state(amps):
    return analytic.tripod_basis().vector(amps)


def residual(frame: analytic.TripodFrame, energy: float) -> float:
    h = build_hamiltonian(analytic.tripod_basis(), frame.point)
    return float(np.linalg.norm(h @ frame.vectors - energy * frame.vectors))


def assert_antihermitian(a):
    assert np.allclose(a.conj().T, -a, atol=1e-14)


def test_theta2_dark_state_at_equal_radii():
    d = analytic.dark_states_theta2(1.3, 0.0, 1.3).vectors
    assert np.allclose(d[:, 1], state({"1010": S2, "1100": -S2}), atol=1e-15)


def test_real_dark_state_d4_vacuum_coefficient():
    d = analytic.dark_states_real(0.9, 0.9, 0.9).vectors
    assert d[analytic.tripod_basis().index_of("0002"), 3] == pytest.approx(-S2, abs=1e-15)


@pytest.mark.parametrize("s", [1, -1])
def test_bright_states_at_third_arm_point(s):
    b = analytic.bright_states_theta1(0.0, 0.0, 1.0, s).vectors
    assert np.allclose(b[:, 0], state({"1010": S2, "1001": s * S2}), atol=1e-15)
    assert np.allclose(b[:, 1], state({"0110": S2, "0101": s * S2}), atol=1e-15)


@given(radius, angle, radius)
def test_theta2_dark_family(r2, t2, r3):
    f = analytic.dark_states_theta2(r2, t2, r3)
    assert np.allclose(f.gram(), np.eye(4), atol=1e-12)
    assert residual(f, 0.0) < 1e-12


@given(radius, radius, radius)
def test_real_dark_family(r1, r2, r3):
    f = analytic.dark_states_real(r1, r2, r3)
    assert np.allclose(f.gram(), np.eye(4), atol=1e-12)
    assert residual(f, 0.0) < 1e-12


@given(radius, angle, radius, sign)
def test_theta1_bright_family(r1, t1, r3, s):
    f = analytic.bright_states_theta1(r1, t1, r3, s)
    assert np.allclose(f.gram(), np.eye(2), atol=1e-12)
    assert residual(f, s * f.point.energy_scale) < 1e-12


@given(radius, radius, radius, sign)
def test_real_bright_family(r1, r2, r3, s):
    f = analytic.bright_states_real(r1, r2, r3, s)
    assert np.allclose(f.gram(), np.eye(2), atol=1e-12)
    assert residual(f, s * f.point.energy_scale) < 1e-12


@given(radius, radius, sign)
def test_real_bright_reduces_to_theta1_chart(r1, r3, s):
    assert np.allclose(analytic.bright_states_real(r1, 0.0, r3, s).vectors,
                       analytic.bright_states_theta1(r1, 0.0, r3, s).vectors, atol=1e-14)


def test_theta2_connection_special_points():
    assert np.allclose(analytic.connection_theta2(0.8, 0.8), np.diag([0, 0.5j, 1j, 0.5j]))
    assert np.allclose(analytic.connection_theta2(0.0, 0.8), np.diag([0, 1j, 2j, 0]))


@given(radius, radius)
def test_theta2_connection_antihermitian(r2, r3):
    assert_antihermitian(analytic.connection_theta2(r2, r3))


def test_w1_dark_holonomy():
    assert np.allclose(analytic.holonomy_w1_dark(0, 1.0, 0.6).matrix, np.eye(4))
    assert np.allclose(analytic.holonomy_w1_dark(1, 0.7, 0.7).matrix, np.diag([1, -1, 1, -1]))
    w1 = analytic.holonomy_w1_dark(1, 1.0, 0.6).matrix
    assert np.allclose(analytic.holonomy_w1_dark(2, 1.0, 0.6).matrix, w1 @ w1)


def test_w2_dark_holonomy_values():
    assert np.allclose(analytic.holonomy_w2_dark(0.0).matrix, np.eye(4))
    expect = [[0, 0, 1, 0], [0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1]]
    assert np.allclose(analytic.holonomy_w2_dark(math.pi / 2).matrix, expect, atol=1e-15)


@given(st.floats(-10, 10))
def test_w2_dark_group_property(phi):
    w = analytic.holonomy_w2_dark(phi).matrix
    assert np.allclose(w.conj().T @ w, np.eye(4), atol=1e-12)
    assert w[3, 3] == 1
    assert np.allclose(w @ analytic.holonomy_w2_dark(-phi).matrix, np.eye(4), atol=1e-12)
    assert np.allclose(analytic.holonomy_w2_dark(phi).transport, w.conj().T)


@given(radius, radius, radius)
def test_real_dark_connection_structure(r1, r2, r3):
    a = analytic.dark_connection_real(r1, r2, r3)
    for m in a.values():
        assert_antihermitian(m)
    assert np.linalg.norm(a["r3"]) == 0


@given(radius, radius, radius, sign)
def test_real_bright_connection_is_abelian(r1, r2, r3, s):
    a = analytic.bright_connection_real(r1, r2, r3, s)
    for m in a.values():
        assert_antihermitian(m)
    assert np.linalg.norm(a["r2"]) == 0
    assert np.linalg.norm(a["r1"] @ a["r3"] - a["r3"] @ a["r1"]) < 1e-14


def test_bright_r3_component_vanishes_on_axis():
    assert np.linalg.norm(analytic.bright_connection_real(0.0, 0.7, 1.1, 1)["r3"]) == 0


def test_zeta_definition_and_fault_injection():
    r = (0.3, 1.2, 0.7)
    expect = r[1] * r[2] / ((r[1] ** 2 + r[0] ** 2) * math.sqrt(sum(x * x for x in r)))
    assert analytic.zeta(2, 1, 3, r) == pytest.approx(expect, rel=1e-15)
    clean = analytic.dark_connection_real(*r)["r1"]
    with analytic.inject_fault("zeta-order"):
        broken = analytic.dark_connection_real(*r)["r1"]
    assert np.linalg.norm(broken - clean) > 0.1
    assert np.allclose(analytic.dark_connection_real(*r)["r1"], clean)
    with pytest.raises(ValueError):
        with analytic.inject_fault("nope"):
            pass


def test_phi0_vanishes_without_area():
    only_r3 = materialize(LoopSpec.piecewise_linear([[0.0, 1.0, 0.5], [0.0, 1.0, 1.5]], steps=64))
    assert analytic.phi0_line_integral(only_r3) == pytest.approx(0.0, abs=1e-14)
    there_and_back = materialize(LoopSpec.piecewise_linear([[0.2, 1.0, 0.5], [1.0, 0.4, 0.5]], steps=64))
    assert analytic.phi0_line_integral(there_and_back) == pytest.approx(0.0, abs=1e-14)


def test_phi0_triangle_frozen_value():
    # frozen from the numerical holonomy angle of the same loop (10^4 samples)
    tri = materialize(LoopSpec.piecewise_linear([[0, 1, 0.8], [1, 1, 0.8], [0, 1.9, 0.8]], steps=64))
    assert analytic.phi0_line_integral(tri) == pytest.approx(-0.0956058803, abs=1e-9)


def test_phi1_plaquette_matches_closed_form():
    a, b, k = 1.2, 0.8, 1.0
    pl = materialize(LoopSpec.plaquette(a, b, k, steps=64))
    assert analytic.phi1_line_integral(pl) == pytest.approx(plaquette_phase(a, b, k), abs=1e-12)
    assert analytic.phi1_line_integral(pl.reversed()) == pytest.approx(-plaquette_phase(a, b, k), abs=1e-12)


def test_phi1_zero_area_gives_identity_gate():
    seg = materialize(LoopSpec.piecewise_linear([[0.2, 0.3, 1.0], [0.9, 0.7, 1.0]], steps=64))
    phi1 = analytic.phi1_line_integral(seg)
    assert phi1 == pytest.approx(0.0, abs=1e-14)
    assert np.allclose(analytic.gate_w1_bright(phi1).matrix, np.eye(2))


def test_phi1_quarter_turn_is_xh():
    xh = np.array([[1, -1], [1, 1]]) / math.sqrt(2)
    assert np.allclose(analytic.gate_w1_bright(-math.pi / 4).matrix, xh, atol=1e-15)


def test_phi2_constant_angle_loop_is_trivial():
    seg = materialize(LoopSpec.piecewise_linear([[0.5, 0.0, 1.0], [1.5, 0.0, 1.0]], steps=64))
    p2, p2t = analytic.phi2_line_integrals(seg)
    assert (p2, p2t) == pytest.approx((0.0, 0.0), abs=1e-14)
    assert np.allclose(analytic.gate_w2_bright(p2, p2t).matrix, np.eye(2))


def test_phi2_full_winding_at_equal_radii():
    loop = materialize(LoopSpec.theta_winding([0.9, 0.0, 0.9], arm=1, steps=64))
    assert analytic.phi2_line_integrals(loop) == pytest.approx((1.5 * math.pi, 0.5 * math.pi), abs=1e-10)


@given(st.floats(0.3, 2.0), st.floats(0.3, 2.0))
def test_phi2_difference_is_weighted_winding(r1, r3):
    loop = materialize(LoopSpec.theta_winding([r1, 0.0, r3], arm=1, steps=64))
    p2, p2t = analytic.phi2_line_integrals(loop)
    expect, _ = quad(lambda t: r3 ** 2 / (r1 ** 2 + r3 ** 2), 0, 2 * math.pi)
    assert p2 - p2t == pytest.approx(expect, abs=1e-9)


def test_line_integral_domain_errors():
    complex_loop = materialize(LoopSpec.theta_winding([0.0, 1.0, 0.6], arm=2, steps=64))
    with pytest.raises(SingularParametrization):
        analytic.phi0_line_integral(complex_loop)
    open_path = ControlPath.from_points([[0.1, 1, 1], [0.5, 1, 1]], closed=False)
    with pytest.raises(NotALoop):
        analytic.phi1_line_integral(open_path)


def test_frame_field_families():
    pt = CouplingPoint([0.4, 0.9, 1.1])
    assert np.allclose(analytic.frame_field("dark-real")(pt), analytic.dark_states_real(0.4, 0.9, 1.1).vectors)
    assert np.allclose(analytic.frame_field("bright-real", -1)(pt),
                       analytic.bright_states_real(0.4, 0.9, 1.1, -1).vectors)
    with pytest.raises(ValueError):
        analytic.frame_field("nope")
