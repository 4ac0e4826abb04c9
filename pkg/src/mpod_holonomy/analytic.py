"""Closed forms for the two-photon tripod.

Frames are 10 x m matrices on the (N=2, 4-mode) layer, columns in the order
the families are usually written (D1..D4, B1 B2). Printed holonomies follow
the ``exp(+oint A)`` convention; :attr:`ClosedFormHolonomy.transport` is the
operator adiabatic evolution actually applies (see ``transport``).
"""
from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import NotALoop, SingularParametrization
from .fock import FockBasis, enumerate_layer
from .mpod import CouplingPoint
from .paths import ControlPath

SQRT2 = math.sqrt(2.0)

SIGMA = np.array([[0, 1, 0, 0],
                  [-1, 0, 1, 0],
                  [0, -1, 0, 0],
                  [0, 0, 0, 0]], dtype=complex)

# i|B2><B1| - i|B1><B2| in the (B1, B2) basis
SIGMA_Y = np.array([[0, -1j], [1j, 0]])

_faults: set[str] = set()


@contextlib.contextmanager
def inject_fault(name: str) -> Iterator[None]:
    """Temporarily break a closed form, for mutation testing of the verifier.

    ``"zeta-order"`` swaps the first two indices of every zeta_ijk.
    """
    if name != "zeta-order":
        raise ValueError(f"unknown fault {name!r}")
    _faults.add(name)
    try:
        yield
    finally:
        _faults.discard(name)


def tripod_basis() -> FockBasis:
    return enumerate_layer(2, 4)


def zeta(i: int, j: int, k: int, r) -> np.ndarray:
    """zeta_ijk = r_i r_k / ((r_i^2 + r_j^2) |r|), indices 1-based.

    ``r`` is a length-3 sequence or an array whose last axis has length 3.
    """
    if "zeta-order" in _faults:
        i, j = j, i
    r = np.asarray(r, dtype=float)
    ri, rj, rk = r[..., i - 1], r[..., j - 1], r[..., k - 1]
    return ri * rk / ((ri ** 2 + rj ** 2) * np.linalg.norm(r, axis=-1))


def _require(cond: bool, what: str) -> None:
    if not cond:
        raise SingularParametrization(what)


@dataclass(frozen=True)
class TripodFrame:
    family: str
    parameters: Mapping[str, float]
    vectors: np.ndarray
    sign: int = 0

    @property
    def point(self) -> CouplingPoint:
        p = self.parameters
        if self.family == "dark-theta2":
            return CouplingPoint([0.0, p["r2"] * np.exp(1j * p["theta2"]), p["r3"]])
        if self.family == "bright-theta1":
            return CouplingPoint([p["r1"] * np.exp(1j * p["theta1"]), 0.0, p["r3"]])
        return CouplingPoint([p["r1"], p["r2"], p["r3"]])

    def gram(self) -> np.ndarray:
        return self.vectors.conj().T @ self.vectors


def _frame(family, params, columns, sign=0) -> TripodFrame:
    basis = tripod_basis()
    vecs = np.column_stack([basis.vector(c) for c in columns])
    return TripodFrame(family, params, vecs, sign)


def dark_states_theta2(r2: float, theta2: float, r3: float) -> TripodFrame:
    """Dark frame for kappa = (0, r2 e^{i theta2}, r3)."""
    rho2 = r2 * r2 + r3 * r3
    _require(rho2 > 0, "rho_23 = 0: dark frame undefined")
    rho = math.sqrt(rho2)
    e = np.exp(1j * theta2)
    return _frame("dark-theta2", {"r2": r2, "theta2": theta2, "r3": r3}, [
        {"2000": 1.0},
        {"1010": r2 / rho, "1100": -r3 * e / rho},
        {"0200": r3 ** 2 * e ** 2 / rho2, "0110": -SQRT2 * r2 * r3 * e / rho2,
         "0020": r2 ** 2 / rho2},
        {"0200": r2 ** 2 * e ** 2 / (SQRT2 * rho2), "0020": r3 ** 2 / (SQRT2 * rho2),
         "0110": r2 * r3 * e / rho2, "0002": -1 / SQRT2},
    ])


def dark_states_real(r1: float, r2: float, r3: float) -> TripodFrame:
    """Dark frame for real couplings kappa = (r1, r2, r3)."""
    p2 = r1 * r1 + r2 * r2
    r_2 = p2 + r3 * r3
    _require(p2 > 0, "rho_12 = 0: real dark frame undefined")
    _require(r_2 > 0, "r = 0: real dark frame undefined")
    r = math.sqrt(r_2)
    return _frame("dark-real", {"r1": r1, "r2": r2, "r3": r3}, [
        {"2000": r2 ** 2 / p2, "1100": -SQRT2 * r1 * r2 / p2, "0200": r1 ** 2 / p2},
        {"0200": SQRT2 * r1 * r2 * r3 / (p2 * r), "2000": -SQRT2 * r1 * r2 * r3 / (p2 * r),
         "1010": r2 / r, "0110": -r1 / r, "1100": (r1 ** 2 - r2 ** 2) * r3 / (p2 * r)},
        {"2000": r3 ** 2 * r1 ** 2 / (p2 * r_2), "0200": r3 ** 2 * r2 ** 2 / (p2 * r_2),
         "1100": SQRT2 * r3 * r1 * r2 * r3 / (r_2 * p2),
         "1010": -SQRT2 * r3 * r1 / r_2, "0110": -SQRT2 * r3 * r2 / r_2,
         "0020": p2 / r_2},
        {"2000": r1 ** 2 / (SQRT2 * r_2), "0200": r2 ** 2 / (SQRT2 * r_2),
         "0020": r3 ** 2 / (SQRT2 * r_2), "1100": r1 * r2 / r_2, "1010": r1 * r3 / r_2,
         "0110": r2 * r3 / r_2, "0002": -1 / SQRT2},
    ])


def _check_sign(sign: int) -> int:
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    return sign


def bright_states_theta1(r1: float, theta1: float, r3: float, sign: int) -> TripodFrame:
    """First-order bright frame (energy sign * eps) for kappa = (r1 e^{i theta1}, 0, r3)."""
    s = _check_sign(sign)
    p2 = r1 * r1 + r3 * r3
    _require(p2 > 0, "rho_13 = 0: bright frame undefined")
    p = math.sqrt(p2)
    e = np.exp(1j * theta1)
    return _frame("bright-theta1", {"r1": r1, "theta1": theta1, "r3": r3}, [
        {"2000": r1 * r3 / p2 * e ** 2, "0020": -r1 * r3 / p2,
         "1001": s * r3 * e / (SQRT2 * p), "0011": -s * r1 / (SQRT2 * p),
         "1010": (r3 ** 2 - r1 ** 2) / (SQRT2 * p2) * e},
        {"0110": r3 / (SQRT2 * p), "1100": r1 * e / (SQRT2 * p), "0101": s / SQRT2},
    ], s)


def bright_states_real(r1: float, r2: float, r3: float, sign: int) -> TripodFrame:
    """First-order bright frame for real couplings kappa = (r1, r2, r3)."""
    s = _check_sign(sign)
    p2 = r1 * r1 + r3 * r3
    r_2 = p2 + r2 * r2
    _require(p2 > 0, "rho_13 = 0: bright frame undefined")
    p, r = math.sqrt(p2), math.sqrt(r_2)
    mix = (r1 ** 2 - r2 ** 2 + r3 ** 2) / (SQRT2 * p * r_2)
    return _frame("bright-real", {"r1": r1, "r2": r2, "r3": r3}, [
        {"2000": r1 * r3 / (r * p), "0020": -r1 * r3 / (r * p),
         "1100": r2 * r3 / (SQRT2 * r * p), "0110": -r2 * r1 / (SQRT2 * r * p),
         "1001": s * r3 / (SQRT2 * p), "0011": -s * r1 / (SQRT2 * p),
         "1010": (r3 ** 2 - r1 ** 2) / (SQRT2 * r * p)},
        {"0200": p * r2 / r_2, "0101": s * p / (SQRT2 * r),
         "2000": -r2 * r1 ** 2 / (p * r_2), "1010": -SQRT2 * r2 * r1 * r3 / (p * r_2),
         "0020": -r2 * r3 ** 2 / (p * r_2),
         "1001": -s * r2 * r1 / (SQRT2 * r * p), "0011": -s * r2 * r3 / (SQRT2 * r * p),
         "1100": mix * r1, "0110": mix * r3},
    ], s)


def frame_field(family: str, sign: int = 1) -> Callable[[CouplingPoint], np.ndarray]:
    """Gauge reference ``point -> frame`` for one closed-form family.

    Reads the family's chart off the point (phases of couplings that the
    chart treats as real are ignored; real-chart radii keep their sign).
    """
    def dark_theta2(pt):
        k = pt.couplings
        return dark_states_theta2(abs(k[1]), float(np.angle(k[1])), abs(k[2])).vectors

    def dark_real(pt):
        k = pt.couplings
        return dark_states_real(k[0].real, k[1].real, k[2].real).vectors

    def bright_theta1(pt):
        k = pt.couplings
        return bright_states_theta1(abs(k[0]), float(np.angle(k[0])), abs(k[2]), sign).vectors

    def bright_real(pt):
        k = pt.couplings
        return bright_states_real(k[0].real, k[1].real, k[2].real, sign).vectors

    fields = {"dark-theta2": dark_theta2, "dark-real": dark_real,
              "bright-theta1": bright_theta1, "bright-real": bright_real}
    try:
        return fields[family]
    except KeyError:
        raise ValueError(f"unknown frame family {family!r}") from None


# --------------------------------------------------------------------------- #
# connections and curvatures
# --------------------------------------------------------------------------- #

def connection_theta2(r2: float, r3: float) -> np.ndarray:
    """A_theta2 in the ``dark_states_theta2`` gauge; the r components vanish."""
    rho2 = r2 * r2 + r3 * r3
    _require(rho2 > 0, "rho_23 = 0")
    return 1j * np.diag([0.0, r3 ** 2 / rho2, 2 * r3 ** 2 / rho2, r2 ** 2 / rho2])


def dark_connection_real(r1: float, r2: float, r3: float) -> dict[str, np.ndarray]:
    """Real-chart dark connection in the ``dark_states_real`` gauge."""
    r = (r1, r2, r3)
    _require(r1 * r1 + r2 * r2 > 0, "rho_12 = 0")
    return {"r1": -SQRT2 * zeta(2, 1, 3, r) * SIGMA,
            "r2": SQRT2 * zeta(1, 2, 3, r) * SIGMA,
            "r3": np.zeros((4, 4), dtype=complex)}


def bright_connection_real(r1: float, r2: float, r3: float, sign: int) -> dict[str, np.ndarray]:
    """Real-chart first-order bright connection; identical for both signs."""
    _check_sign(sign)
    r = (r1, r2, r3)
    _require(r1 * r1 + r3 * r3 > 0, "rho_13 = 0")
    return {"r1": -1j * zeta(3, 1, 2, r) * SIGMA_Y,
            "r2": np.zeros((2, 2), dtype=complex),
            "r3": 1j * zeta(1, 3, 2, r) * SIGMA_Y}


def bright_curvature_real(r1: float, r2: float, r3: float, sign: int) -> dict[tuple[str, str], np.ndarray]:
    _check_sign(sign)
    r3_ = (r1 * r1 + r2 * r2 + r3 * r3) ** 1.5
    _require(r3_ > 0, "r = 0")
    return {("r1", "r2"): 1j * (r3 / r3_) * SIGMA_Y,
            ("r1", "r3"): -1j * (r2 / r3_) * SIGMA_Y,
            ("r2", "r3"): 1j * (r1 / r3_) * SIGMA_Y}


# --------------------------------------------------------------------------- #
# holonomies
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class ClosedFormHolonomy:
    kind: str
    phases: Mapping[str, float]
    matrix: np.ndarray = field(repr=False)

    @property
    def transport(self) -> np.ndarray:
        """Adiabatic transport operator, ``P exp(-oint A)``.

        Every printed family has commuting connection components, so this is
        just the adjoint of the printed ``exp(+oint A)``.
        """
        return self.matrix.conj().T


def holonomy_w1_dark(winding: int, r2: float, r3: float) -> ClosedFormHolonomy:
    mat = np.diag(np.exp(2 * np.pi * winding * np.diag(connection_theta2(r2, r3))))
    return ClosedFormHolonomy("W1-dark", {"winding": winding, "r2": r2, "r3": r3}, mat)


def holonomy_w2_dark(phi0: float) -> ClosedFormHolonomy:
    c, s = math.cos(phi0), math.sin(phi0)
    sc = SQRT2 * s * c
    mat = np.array([[c * c, sc, s * s, 0],
                    [-sc, math.cos(2 * phi0), sc, 0],
                    [s * s, -sc, c * c, 0],
                    [0, 0, 0, 1]], dtype=complex)
    return ClosedFormHolonomy("W2-dark", {"phi0": phi0}, mat)


def gate_w1_bright(phi1: float) -> ClosedFormHolonomy:
    c, s = math.cos(phi1), math.sin(phi1)
    return ClosedFormHolonomy("W1-bright", {"phi1": phi1},
                              np.array([[c, s], [-s, c]], dtype=complex))


def gate_w2_bright(phi2: float, phi2_tilde: float) -> ClosedFormHolonomy:
    return ClosedFormHolonomy("W2-bright", {"phi2": phi2, "phi2_tilde": phi2_tilde},
                              np.diag([np.exp(1j * phi2), np.exp(1j * phi2_tilde)]))


# --------------------------------------------------------------------------- #
# line integrals
# --------------------------------------------------------------------------- #

_GL_X, _GL_W = leggauss(10)


def _piece_integral(piece, form, rtol: float, max_panels: int) -> float:
    prev = None
    panels = 1
    while True:
        edges = np.linspace(0.0, 1.0, panels + 1)
        half = 0.5 * np.diff(edges)
        u = (edges[:-1, None] + half[:, None] * (_GL_X[None, :] + 1.0)).ravel()
        w = (half[:, None] * _GL_W[None, :]).ravel()
        val = float(np.dot(w, form(piece.position(u), piece.velocity(u))))
        if prev is not None and abs(val - prev) < rtol:
            return val
        if panels >= max_panels:
            return val
        prev = val
        panels *= 2


def line_integral(path: ControlPath, form: Callable[[np.ndarray, np.ndarray], np.ndarray],
                  tol: float = 1e-10, max_panels: int = 4096) -> float:
    """Integrate ``form(kappa, dkappa/du)`` along the path, piece by piece.

    Composite 10-point Gauss-Legendre with panel doubling until two
    successive estimates agree to ``tol``.
    """
    if not path.closed:
        raise NotALoop("closed-form phases need a closed path")
    curve = path.as_curve()
    return sum(_piece_integral(p, form, tol, max_panels) for p in curve.pieces)


def _real_radii(path: ControlPath) -> np.ndarray:
    c = path.couplings
    if path.arms != 3:
        raise SingularParametrization("tripod closed forms need three couplings")
    if np.abs(c.imag).max() > 1e-12:
        raise SingularParametrization("path leaves the real-coupling chart")
    return c.real


def phi0_line_integral(path: ControlPath) -> float:
    """oint zeta_123 dr2 - zeta_213 dr1 over a real-chart loop."""
    r = _real_radii(path)
    _require(np.hypot(r[:, 0], r[:, 1]).min() > 1e-12, "path touches rho_12 = 0")

    def form(k, dk):
        rr, dr = k.real, dk.real
        return zeta(1, 2, 3, rr) * dr[..., 1] - zeta(2, 1, 3, rr) * dr[..., 0]
    return line_integral(path, form)


def phi1_line_integral(path: ControlPath) -> float:
    """oint zeta_132 dr3 - zeta_312 dr1 over a real-chart loop."""
    r = _real_radii(path)
    _require(np.hypot(r[:, 0], r[:, 2]).min() > 1e-12, "path touches rho_13 = 0")

    def form(k, dk):
        rr, dr = k.real, dk.real
        return zeta(1, 3, 2, rr) * dr[..., 2] - zeta(3, 1, 2, rr) * dr[..., 0]
    return line_integral(path, form)


def phi2_line_integrals(path: ControlPath) -> tuple[float, float]:
    """(phi2, phi2_tilde) for a loop in the chart (r1 e^{i theta1}, 0, r3)."""
    c = path.couplings
    if path.arms != 3 or np.abs(c[:, 1]).max() > 1e-12 or np.abs(c[:, 2].imag).max() > 1e-12:
        raise SingularParametrization("path leaves the chart kappa = (r1 e^{i theta1}, 0, r3)")
    _require(np.hypot(np.abs(c[:, 0]), c[:, 2].real).min() > 1e-12, "path touches rho_13 = 0")

    def dtheta(k, dk):
        k1, d1 = k[..., 0], dk[..., 0]
        a2 = np.abs(k1) ** 2
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.where(a2 > 0, (np.conj(k1) * d1).imag / a2, 0.0)
        return out, a2, k[..., 2].real ** 2

    def form2(k, dk):
        dt, a2, b2 = dtheta(k, dk)
        return (a2 + 2 * b2) / (2 * (a2 + b2)) * dt

    def form2t(k, dk):
        dt, a2, b2 = dtheta(k, dk)
        return a2 / (2 * (a2 + b2)) * dt
    return line_integral(path, form2), line_integral(path, form2t)
