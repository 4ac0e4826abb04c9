import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mpod_holonomy.errors import InvalidSpec, NoSolution
from mpod_holonomy.loops import (LoopSpec, PlaquetteSpec, SphericalArcSpec, materialize, plaquette_phase,
                                 solve_beta_for_quarter_pi, spherical_flux, spherical_phase)

pos = st.floats(0.1, 5.0)


def test_plaquette_phase_values():
    assert plaquette_phase(1.0, 1.0, 1.0) == pytest.approx(math.pi / 6, abs=1e-15)
    assert plaquette_phase(1e-12, 1.0, 1.0) == pytest.approx(0.0, abs=1e-11)
    assert plaquette_phase(1e8, 1e8, 1.0) == pytest.approx(math.pi / 2, abs=1e-7)
    assert plaquette_phase(1.2, 0.8, 1.0, orientation=-1) == -plaquette_phase(1.2, 0.8, 1.0)


def test_quarter_pi_beta():
    assert solve_beta_for_quarter_pi(math.sqrt(2), 1.0) == pytest.approx(math.sqrt(3), rel=1e-15)
    assert solve_beta_for_quarter_pi(1.0 + 1e-9, 1.0) > 1e4
    with pytest.raises(NoSolution):
        solve_beta_for_quarter_pi(0.9, 1.0)


@given(pos, pos)
def test_quarter_pi_back_substitution(alpha_over_kappa, kappa):
    alpha = kappa * (1.0 + alpha_over_kappa)
    beta = solve_beta_for_quarter_pi(alpha, kappa)
    assert plaquette_phase(alpha, beta, kappa) == pytest.approx(math.pi / 4, abs=1e-12)


def test_spherical_phase_literal_and_flux():
    dth = math.pi / (2 * math.sqrt(2) - 2)
    sp = SphericalArcSpec(0.0, math.pi / 2, 0.0, dth, 1.0)
    assert spherical_phase(sp) == pytest.approx(math.pi / 2, abs=1e-15)
    assert spherical_flux(sp) == pytest.approx(math.pi / (2 * math.sqrt(2)), abs=1e-15)
    assert spherical_phase(SphericalArcSpec(0.4, 0.4, 0.0, 1.0, 1.0)) == 0
    assert spherical_phase(SphericalArcSpec(0.0, 1.0, 0.3, 0.3, 1.0)) == 0


def test_spec_validation():
    with pytest.raises(InvalidSpec):
        PlaquetteSpec(-1.0, 1.0, 1.0)
    with pytest.raises(InvalidSpec):
        LoopSpec("circle")
    with pytest.raises(InvalidSpec):
        LoopSpec("plaquette", {"alpha": 1, "beta": 1, "kappa": 1}, orientation=2)
    with pytest.raises(InvalidSpec):
        LoopSpec("plaquette", {"alpha": 1, "beta": 1, "kappa": 1}, steps=8)
    with pytest.raises(InvalidSpec):
        LoopSpec.from_json('{"variant": "plaquette", "colour": 1}')
    with pytest.raises(InvalidSpec):
        LoopSpec.from_json("{not json")
    with pytest.raises(InvalidSpec):
        materialize(LoopSpec("plaquette", {"alpha": 1}))


def test_plaquette_sampling():
    path = materialize(LoopSpec.plaquette(1.2, 0.8, 1.0, steps=64))
    assert path.steps == 64 and path.counts == (16, 16, 16, 16)
    assert np.array_equal(path.couplings[0], path.couplings[-1])
    corners = path.couplings[::16].real
    assert np.allclose(corners, [[0, 0, 1], [1.2, 0, 1], [1.2, 0.8, 1], [0, 0.8, 1], [0, 0, 1]])


def test_theta_winding_keeps_energy_scale():
    path = materialize(LoopSpec.theta_winding([0.0, 1.0, 1.0], arm=2, steps=100))
    assert np.allclose(path.energy_scales(), math.sqrt(2), atol=1e-15)


def test_sector_loop_passes_through_centre():
    path = materialize(LoopSpec.theta_winding([1.0, 0.0, 0.6], arm=1, sector=math.pi / 2, steps=64))
    assert np.allclose(path.couplings[0], [0, 0, 0.6])
    assert np.abs(path.couplings[:, 0]).max() == pytest.approx(1.0)


def test_orientation_reverses_samples():
    spec = LoopSpec.plaquette(1.2, 0.8, 1.0, steps=64)
    fwd = materialize(spec)
    back = materialize(LoopSpec.plaquette(1.2, 0.8, 1.0, orientation=-1, steps=64))
    assert np.array_equal(back.couplings, fwd.couplings[::-1])


def test_spherical_samples_stay_on_sphere_cap():
    path = materialize(LoopSpec.spherical_arc(0.0, math.pi / 2, 0.0, 1.0, 2.0, steps=128))
    c = path.couplings.real
    assert np.allclose(c[:, 2], 2.0)
    assert np.all(np.hypot(c[:, 0], c[:, 1]) <= 2.0 + 1e-12)


specs = st.one_of(
    st.builds(LoopSpec.plaquette, pos, pos, pos, st.sampled_from([1, -1]), st.integers(16, 5000)),
    st.builds(LoopSpec.theta_winding, st.lists(pos, min_size=3, max_size=3), st.integers(1, 3),
              st.integers(-3, 3)),
    st.builds(LoopSpec.piecewise_linear,
              st.lists(st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False), min_size=3, max_size=3),
                       min_size=2, max_size=5)),
)


@given(specs)
def test_json_round_trip(spec):
    text = spec.to_json()
    back = LoopSpec.from_json(text)
    assert back == spec
    assert back.to_json() == text
    assert json.loads(text)["variant"] == spec.variant
