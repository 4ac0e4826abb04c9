"""Named loops in coupling space and their closed-form phases.

Sign convention: counterclockwise in the (r1, r2) chart gives a positive
bright rotation angle. ``orientation=-1`` reverses traversal.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import InvalidSpec, NoSolution
from .paths import ControlPath, Piece, PiecewiseCurve

VARIANTS = ("plaquette", "theta_winding", "spherical_arc", "piecewise_linear")
MIN_STEPS = 16


@dataclass(frozen=True)
class PlaquetteSpec:
    """Rectangle r1 in [0, alpha], r2 in [0, beta] at r3 = kappa."""

    alpha: float
    beta: float
    kappa: float

    def __post_init__(self):
        for name in ("alpha", "beta", "kappa"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise InvalidSpec(f"plaquette {name} must be a positive number, got {v!r}")


@dataclass(frozen=True)
class SphericalArcSpec:
    """(phi, theta) rectangle in the chart kappa * (sin phi cos theta, sin phi sin theta, 1)."""

    phi0: float
    phi1: float
    theta0: float
    theta1: float
    kappa: float

    def __post_init__(self):
        if not self.kappa > 0:
            raise InvalidSpec(f"kappa must be positive, got {self.kappa!r}")
        for v in (self.phi0, self.phi1):
            if not -1e-15 <= v <= math.pi / 2 + 1e-15:
                raise InvalidSpec(f"phi must lie in [0, pi/2], got {v!r}")


def plaquette_phase(alpha: float, beta: float, kappa: float, orientation: int = 1) -> float:
    spec = PlaquetteSpec(alpha, beta, kappa)
    _check_orientation(orientation)
    a, b, k = spec.alpha, spec.beta, spec.kappa
    return orientation * math.atan(a * b / (k * math.sqrt(a * a + b * b + k * k)))


def solve_beta_for_quarter_pi(alpha: float, kappa: float) -> float:
    """beta with plaquette_phase(alpha, beta, kappa) = pi/4."""
    if not (kappa > 0 and alpha > kappa):
        raise NoSolution(f"need alpha > kappa > 0, got alpha={alpha!r}, kappa={kappa!r}")
    return kappa * math.sqrt((alpha ** 2 + kappa ** 2) / (alpha ** 2 - kappa ** 2))


def spherical_phase(spec: SphericalArcSpec) -> float:
    """Literal closed form (sqrt(sin^2 phi1 + 1) - sqrt(sin^2 phi0 + 1)) * dtheta."""
    g = lambda p: math.sqrt(math.sin(p) ** 2 + 1.0)  # noqa: E731
    return (g(spec.phi1) - g(spec.phi0)) * (spec.theta1 - spec.theta0)


def spherical_flux(spec: SphericalArcSpec) -> float:
    """Flux of F_{r1 r2} = r3 / r^3 through the chart rectangle (the exact phase)."""
    g = lambda p: 1.0 / math.sqrt(math.sin(p) ** 2 + 1.0)  # noqa: E731
    return (g(spec.phi0) - g(spec.phi1)) * (spec.theta1 - spec.theta0)


def _check_orientation(orientation: Any) -> int:
    if orientation not in (1, -1) or isinstance(orientation, bool):
        raise InvalidSpec(f"orientation must be +1 or -1, got {orientation!r}")
    return int(orientation)


def _complex(v: Any) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise InvalidSpec(f"complex values are [re, im] pairs, got {v!r}")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    raise InvalidSpec(f"not a coupling value: {v!r}")


def _split(total: int, weights: list[float]) -> list[int]:
    """Integer counts >= 1 summing to ``total``, proportional to ``weights``."""
    w = np.asarray(weights, dtype=float)
    if w.sum() <= 0:
        w = np.ones_like(w)
    raw = total * w / w.sum()
    counts = np.maximum(1, np.floor(raw).astype(int))
    while counts.sum() < total:
        counts[int(np.argmax(raw - counts))] += 1
    while counts.sum() > total:
        k = int(np.argmax(np.where(counts > 1, counts - raw, -np.inf)))
        counts[k] -= 1
    return [int(c) for c in counts]


@dataclass(frozen=True)
class LoopSpec:
    """JSON-friendly loop description; ``materialize`` turns it into a path.

    params by variant:

    * plaquette: alpha, beta, kappa, optional start_corner in 0..3
    * theta_winding: radii (list of M), arm (1-based), windings (int), or
      ``sector`` (angle) for a spoke-arc-spoke loop through r_arm = 0
    * spherical_arc: phi0, phi1, theta0, theta1, kappa
    * piecewise_linear: vertices (list of coupling lists; entries real or [re, im])
    """

    variant: str
    params: dict = field(default_factory=dict)
    orientation: int = 1
    steps: int = 4096

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InvalidSpec(f"unknown loop variant {self.variant!r}; expected one of {VARIANTS}")
        _check_orientation(self.orientation)
        if not isinstance(self.steps, int) or isinstance(self.steps, bool) or self.steps < MIN_STEPS:
            raise InvalidSpec(f"steps must be an integer >= {MIN_STEPS}, got {self.steps!r}")
        if not isinstance(self.params, dict):
            raise InvalidSpec("params must be an object")

    @classmethod
    def plaquette(cls, alpha, beta, kappa, orientation=1, steps=8192, start_corner=0):
        params = {"alpha": alpha, "beta": beta, "kappa": kappa}
        if start_corner:
            params["start_corner"] = start_corner
        return cls("plaquette", params, orientation, steps)

    @classmethod
    def theta_winding(cls, radii, arm, windings=1, orientation=1, steps=8192, sector=None):
        params = {"radii": list(radii), "arm": arm}
        if sector is None:
            params["windings"] = windings
        else:
            params["sector"] = sector
        return cls("theta_winding", params, orientation, steps)

    @classmethod
    def spherical_arc(cls, phi0, phi1, theta0, theta1, kappa, orientation=1, steps=8192):
        return cls("spherical_arc", {"phi0": phi0, "phi1": phi1, "theta0": theta0,
                                     "theta1": theta1, "kappa": kappa}, orientation, steps)

    @classmethod
    def piecewise_linear(cls, vertices, orientation=1, steps=4096):
        verts = [[[v.real, v.imag] if isinstance(v, complex) else v for v in row] for row in vertices]
        return cls("piecewise_linear", {"vertices": verts}, orientation, steps)

    def to_dict(self) -> dict:
        return {"variant": self.variant, "params": self.params,
                "orientation": self.orientation, "steps": self.steps}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "LoopSpec":
        if not isinstance(d, dict):
            raise InvalidSpec("loop spec must be a JSON object")
        extra = set(d) - {"variant", "params", "orientation", "steps"}
        if extra:
            raise InvalidSpec(f"unknown loop spec keys {sorted(extra)}")
        try:
            return cls(d["variant"], d.get("params", {}), d.get("orientation", 1), d.get("steps", 4096))
        except KeyError:
            raise InvalidSpec("loop spec needs a 'variant'") from None

    @classmethod
    def from_json(cls, text: str) -> "LoopSpec":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise InvalidSpec(f"loop spec is not valid JSON: {exc}") from None

    def plaquette_spec(self) -> PlaquetteSpec:
        p = self.params
        try:
            return PlaquetteSpec(p["alpha"], p["beta"], p["kappa"])
        except KeyError as exc:
            raise InvalidSpec(f"plaquette needs {exc}") from None

    def spherical_spec(self) -> SphericalArcSpec:
        p = self.params
        try:
            return SphericalArcSpec(p["phi0"], p["phi1"], p["theta0"], p["theta1"], p["kappa"])
        except KeyError as exc:
            raise InvalidSpec(f"spherical_arc needs {exc}") from None


def _plaquette(spec: LoopSpec) -> tuple[PiecewiseCurve, list[int]]:
    sq = spec.plaquette_spec()
    a, b, k = sq.alpha, sq.beta, sq.kappa
    corners = [(0.0, 0.0, k), (a, 0.0, k), (a, b, k), (0.0, b, k)]
    s = int(spec.params.get("start_corner", 0))
    if s not in range(4):
        raise InvalidSpec(f"start_corner must be 0..3, got {s!r}")
    corners = corners[s:] + corners[:s]
    pieces = tuple(Piece.linear(corners[i], corners[(i + 1) % 4]) for i in range(4))
    return PiecewiseCurve(pieces, (1.0,) * 4), _split(spec.steps, [1.0] * 4)


def _theta_winding(spec: LoopSpec) -> tuple[PiecewiseCurve, list[int]]:
    p = spec.params
    try:
        radii = [float(r) for r in p["radii"]]
        arm = int(p["arm"])
    except (KeyError, TypeError, ValueError):
        raise InvalidSpec("theta_winding needs 'radii' (list) and 'arm' (1-based)") from None
    if not 1 <= arm <= len(radii):
        raise InvalidSpec(f"arm {arm} out of range 1..{len(radii)}")
    if min(radii) < 0:
        raise InvalidSpec("radii must be nonnegative")
    base = np.array(radii, dtype=complex)
    j = arm - 1
    r = radii[j]
    if "sector" in p:
        sweep = float(p["sector"])
        if r <= 0:
            raise InvalidSpec("a sector loop needs a positive radius on the winding arm")
        centre = base.copy()
        centre[j] = 0.0
        rim0 = base.copy()
        rim1 = base.copy()
        rim1[j] = r * np.exp(1j * sweep)

        def arc_pos(u, sweep=sweep):
            u = np.asarray(u)
            out = np.broadcast_to(base, u.shape + base.shape).copy()
            out[..., j] = r * np.exp(1j * sweep * u)
            return out

        def arc_vel(u, sweep=sweep):
            u = np.asarray(u)
            out = np.zeros(u.shape + base.shape, dtype=complex)
            out[..., j] = 1j * sweep * r * np.exp(1j * sweep * u)
            return out

        pieces = (Piece.linear(centre, rim0), Piece(arc_pos, arc_vel), Piece.linear(rim1, centre))
        lengths = [r, r * abs(sweep), r]
        return PiecewiseCurve(pieces, tuple(lengths)), _split(spec.steps, lengths)
    w = p.get("windings", 1)
    if not isinstance(w, int) or isinstance(w, bool):
        raise InvalidSpec(f"windings must be an integer, got {w!r}")
    turn = 2 * np.pi * w

    def pos(u):
        u = np.asarray(u)
        out = np.broadcast_to(base, u.shape + base.shape).copy()
        out[..., j] = r * np.exp(1j * turn * u)
        return out

    def vel(u):
        u = np.asarray(u)
        out = np.zeros(u.shape + base.shape, dtype=complex)
        out[..., j] = 1j * turn * r * np.exp(1j * turn * u)
        return out
    return PiecewiseCurve((Piece(pos, vel),), (1.0,)), [spec.steps]


def _spherical(spec: LoopSpec) -> tuple[PiecewiseCurve, list[int]]:
    sp = spec.spherical_spec()
    k = sp.kappa

    def edge(f0, t0, f1, t1):
        df, dt = f1 - f0, t1 - t0

        def pos(u):
            u = np.asarray(u, dtype=float)
            f, t = f0 + u * df, t0 + u * dt
            return np.stack([k * np.sin(f) * np.cos(t), k * np.sin(f) * np.sin(t),
                             np.full_like(f, k)], axis=-1).astype(complex)

        def vel(u):
            u = np.asarray(u, dtype=float)
            f, t = f0 + u * df, t0 + u * dt
            d1 = k * (np.cos(f) * np.cos(t) * df - np.sin(f) * np.sin(t) * dt)
            d2 = k * (np.cos(f) * np.sin(t) * df + np.sin(f) * np.cos(t) * dt)
            return np.stack([d1, d2, np.zeros_like(f)], axis=-1).astype(complex)
        return Piece(pos, vel)

    f0, f1, t0, t1 = sp.phi0, sp.phi1, sp.theta0, sp.theta1
    corners = [(f0, t0), (f1, t0), (f1, t1), (f0, t1)]
    pieces = tuple(edge(*corners[i], *corners[(i + 1) % 4]) for i in range(4))
    spans = [abs(f1 - f0), math.sin(f1) * abs(t1 - t0), abs(f1 - f0), math.sin(f0) * abs(t1 - t0)]
    return PiecewiseCurve(pieces, (1.0,) * 4), _split(spec.steps, spans)


def _piecewise_linear(spec: LoopSpec) -> tuple[PiecewiseCurve, list[int]]:
    try:
        verts = [[_complex(v) for v in row] for row in spec.params["vertices"]]
    except (KeyError, TypeError):
        raise InvalidSpec("piecewise_linear needs 'vertices'") from None
    if len(verts) < 2 or len({len(v) for v in verts}) != 1:
        raise InvalidSpec("need at least two vertices of equal length")
    vs = np.array(verts, dtype=complex)
    pieces = tuple(Piece.linear(vs[i], vs[(i + 1) % len(vs)]) for i in range(len(vs)))
    lengths = [float(np.linalg.norm(vs[(i + 1) % len(vs)] - vs[i])) for i in range(len(vs))]
    return PiecewiseCurve(pieces, (1.0,) * len(pieces)), _split(spec.steps, lengths)


_BUILDERS = {"plaquette": _plaquette, "theta_winding": _theta_winding,
             "spherical_arc": _spherical, "piecewise_linear": _piecewise_linear}


def materialize(spec: LoopSpec) -> ControlPath:
    curve, counts = _BUILDERS[spec.variant](spec)
    path = ControlPath.from_curve(curve, counts)
    return path.reversed() if spec.orientation == -1 else path
