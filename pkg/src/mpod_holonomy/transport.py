"""Numerical adiabatic connection, curvature and holonomy.

Holonomies are discrete parallel transport: the ordered product of polar
factors of consecutive frame overlaps. The product is expressed in the raw
eigenframe at the loop start (``frame_start``), and it converges to the
path-ordered ``P exp(-oint A)``. That is the operator adiabatic evolution
applies to the frame coefficients.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
from scipy.stats import unitary_group

from .errors import DegeneracyCrossing, FrameMismatch, InvalidOrder, NotALoop, StepTooCoarse
from .fock import FockBasis, enumerate_layer
from .mpod import DEFAULT_TOL, CouplingPoint, build_hamiltonian, decompose
from .paths import ControlPath

MIN_OVERLAP = 0.1
DEFAULT_STEPS = 4096

FrameField = Callable[[CouplingPoint], np.ndarray]


@dataclass(frozen=True)
class SubspaceSelector:
    """The eigenspace at energy ``order * eps`` of the ``photon_number`` layer."""

    order: int
    photon_number: int
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if self.photon_number < 0 or abs(self.order) > self.photon_number:
            raise InvalidOrder(f"order {self.order} outside [-{self.photon_number}, {self.photon_number}]")

    def basis(self, arms: int) -> FockBasis:
        return enumerate_layer(self.photon_number, arms + 1)

    def label(self) -> str:
        return "dark" if self.order == 0 else f"bright{self.order:+d}"


def unitarize(m: np.ndarray, min_singular: float = MIN_OVERLAP) -> np.ndarray:
    """Polar (Loewdin) factor of a square overlap matrix."""
    u, s, vh = np.linalg.svd(m)
    if s.min(initial=np.inf) < min_singular:
        raise StepTooCoarse(f"overlap singular value {s.min():.3g} < {min_singular}: "
                            "subspace rotated too far between samples")
    return u @ vh


def eigenframe(point: CouplingPoint, selector: SubspaceSelector) -> tuple[np.ndarray, dict[int, int]]:
    """Raw eigensolver frame of the selected level and the full multiplicity table."""
    basis = selector.basis(point.arms)
    dec = decompose(build_hamiltonian(basis, point), point, selector.tol)
    return dec.frame(selector.order), dec.multiplicities()


def _aligned(point: CouplingPoint, selector: SubspaceSelector,
             reference: Union[FrameField, np.ndarray], expect: dict[int, int] | None):
    raw, mult = eigenframe(point, selector)
    if expect is not None and mult != expect:
        raise DegeneracyCrossing(f"multiplicities changed from {expect} to {mult} near {point}")
    ref = reference(point) if callable(reference) else reference
    return raw @ unitarize(raw.conj().T @ ref), mult


@dataclass(frozen=True)
class ConnectionEstimate:
    matrix: np.ndarray                  # anti-Hermitian part
    symmetric_residual: float           # Frobenius norm of the discarded Hermitian part


def _default_step(point: CouplingPoint, coordinate: str, scale: float) -> float:
    return scale if coordinate.startswith("theta") else scale * point.energy_scale


def connection_numeric(point: CouplingPoint, coordinate: str, selector: SubspaceSelector,
                       frame: Union[FrameField, np.ndarray], step: Optional[float] = None
                       ) -> ConnectionEstimate:
    """Central-difference A_mu = <psi_a | d_mu psi_b> in the gauge set by ``frame``.

    ``frame`` is a frame field ``point -> p x m`` (or a fixed matrix) that
    selects the gauge; at every stencil point the numerically computed
    eigenspace is aligned to it by the polar factor of the overlap. A fixed
    matrix yields the parallel-transport gauge at ``point``, where A = 0.
    Coordinates are ``r1..rM`` and ``theta1..thetaM``.
    """
    h = step if step is not None else _default_step(point, coordinate, 1e-5)
    centre, mult = _aligned(point, selector, frame, None)
    plus, _ = _aligned(point.shifted(coordinate, h), selector, frame, mult)
    minus, _ = _aligned(point.shifted(coordinate, -h), selector, frame, mult)
    a = centre.conj().T @ (plus - minus) / (2 * h)
    anti = 0.5 * (a - a.conj().T)
    return ConnectionEstimate(anti, float(np.linalg.norm(0.5 * (a + a.conj().T))))


def curvature_numeric(point: CouplingPoint, mu: str, nu: str, selector: SubspaceSelector,
                      frame: Union[FrameField, np.ndarray], step: Optional[float] = None,
                      inner_step: Optional[float] = None) -> np.ndarray:
    """F_{mu nu} = d_mu A_nu - d_nu A_mu + [A_mu, A_nu] by nested central differences.

    Inner and outer steps default to the same 1e-4 * eps; equal steps cancel
    the leading truncation error of the antisymmetric combination.
    """
    hm = step if step is not None else _default_step(point, mu, 1e-4)
    hn = step if step is not None else _default_step(point, nu, 1e-4)

    def a(pt, coord):
        h = inner_step if inner_step is not None else (hm if coord == mu else hn)
        return connection_numeric(pt, coord, selector, frame, h).matrix

    d_mu_a_nu = (a(point.shifted(mu, hm), nu) - a(point.shifted(mu, -hm), nu)) / (2 * hm)
    d_nu_a_mu = (a(point.shifted(nu, hn), mu) - a(point.shifted(nu, -hn), mu)) / (2 * hn)
    am, an = a(point, mu), a(point, nu)
    return d_mu_a_nu - d_nu_a_mu + am @ an - an @ am


@dataclass(frozen=True)
class HolonomyResult:
    unitary: np.ndarray
    frame_start: np.ndarray = field(repr=False)
    steps: int
    error_estimate: float
    selector: SubspaceSelector
    start: CouplingPoint

    @property
    def dim(self) -> int:
        return self.unitary.shape[0]

    def eigenphases(self) -> np.ndarray:
        return np.sort(np.angle(np.linalg.eigvals(self.unitary)))

    def unitarity_defect(self) -> float:
        u = self.unitary
        return float(np.linalg.norm(u.conj().T @ u - np.eye(len(u))))


def _transport(frames: list[np.ndarray]) -> np.ndarray:
    f0 = frames[0]
    u = np.eye(f0.shape[1], dtype=complex)
    prev = f0
    for g in frames[1:-1]:
        u = unitarize(g.conj().T @ prev) @ u
        prev = g
    # closing step lands on the start frame itself
    return unitarize(f0.conj().T @ prev) @ u


def holonomy_numeric(path: ControlPath, selector: SubspaceSelector, steps: Optional[int] = None,
                     gauge_rng: Optional[np.random.Generator] = None,
                     estimate_error: bool = True) -> HolonomyResult:
    """Holonomy of the selected eigenspace around a closed path.

    ``steps`` resamples the path first. ``gauge_rng`` multiplies every raw
    frame by an independent Haar-random unitary (the result must not care).
    The error estimate compares against the same product over every other
    sample.
    """
    if not path.closed:
        raise NotALoop("holonomy needs a closed path")
    if steps is not None and steps != path.steps:
        path = path.resample(steps)
    frames = []
    expect = None
    for k, pt in enumerate(path.points()):
        f, mult = eigenframe(pt, selector)
        if expect is None:
            expect = mult
        elif mult != expect:
            raise DegeneracyCrossing(f"multiplicities changed at sample {k}: {expect} -> {mult}")
        if gauge_rng is not None and f.shape[1] > 0:
            f = f @ np.atleast_2d(unitary_group.rvs(f.shape[1], random_state=gauge_rng))
        frames.append(f)
    u = _transport(frames)
    err = float("nan")
    if estimate_error and path.steps % 2 == 0 and path.steps >= 4:
        err = float(np.linalg.norm(u - _transport(frames[::2])))
    return HolonomyResult(u, frames[0], path.steps, err, selector, path.start)


def express_in_frame(result: HolonomyResult, target_frame: np.ndarray, tol: float = 1e-6) -> np.ndarray:
    """The holonomy in the coordinates of ``target_frame``: V U V^dagger, V = polar(T^dagger F0)."""
    t = np.asarray(target_frame)
    if t.shape != result.frame_start.shape:
        raise FrameMismatch(f"target frame shape {t.shape} != {result.frame_start.shape}")
    ov = t.conj().T @ result.frame_start
    s = np.linalg.svd(ov, compute_uv=False)
    if np.abs(s - 1.0).max() > tol:
        raise FrameMismatch(f"target frame does not span the start subspace "
                            f"(overlap singular values {np.round(s, 6)})")
    v = unitarize(ov)
    return v @ result.unitary @ v.conj().T


def rotation_angle(u: np.ndarray) -> float:
    """Angle phi of a 2x2 rotation [[cos, -sin], [sin, cos]]."""
    return float(np.arctan2(u[1, 0].real, u[0, 0].real))
