"""Closed control paths in coupling space.

A :class:`ControlPath` is the sampled form used by transport and dynamics.
When it comes from a named loop it also carries the exact piecewise curve,
so it can be resampled and integrated without polyline error.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import NotALoop, SingularSample
from .mpod import CouplingPoint

Vector = np.ndarray  # complex, shape (M,)


@dataclass(frozen=True)
class Piece:
    """One smooth stretch u in [0, 1] -> kappa(u), with its derivative.

    Both callables accept a scalar or a 1-D array of ``u`` and return shape
    ``u.shape + (M,)``.
    """

    position: Callable[[float | np.ndarray], Vector]
    velocity: Callable[[float | np.ndarray], Vector]

    @classmethod
    def linear(cls, start: Sequence[complex], stop: Sequence[complex]) -> "Piece":
        a = np.asarray(start, dtype=complex)
        b = np.asarray(stop, dtype=complex)
        d = b - a
        return cls(lambda u: a + np.asarray(u)[..., None] * d,
                   lambda u: np.broadcast_to(d, np.shape(u) + d.shape))

    def reversed(self) -> "Piece":
        p, v = self.position, self.velocity
        return Piece(lambda u: p(1.0 - u), lambda u: -v(1.0 - u))


@dataclass(frozen=True)
class PiecewiseCurve:
    pieces: tuple[Piece, ...]
    weights: tuple[float, ...]  # share of the global parameter per piece

    @property
    def knots(self) -> np.ndarray:
        w = np.asarray(self.weights, dtype=float)
        return np.concatenate([[0.0], np.cumsum(w / w.sum())])

    def _locate(self, t: float) -> tuple[int, float, float]:
        knots = self.knots
        i = int(np.clip(np.searchsorted(knots, t, side="right") - 1, 0, len(self.pieces) - 1))
        span = knots[i + 1] - knots[i]
        return i, (t - knots[i]) / span, span

    def position(self, t: float) -> Vector:
        i, u, _ = self._locate(t)
        return self.pieces[i].position(u)

    def velocity(self, t: float) -> Vector:
        i, u, span = self._locate(t)
        return self.pieces[i].velocity(u) / span

    def reversed(self) -> "PiecewiseCurve":
        return PiecewiseCurve(tuple(p.reversed() for p in reversed(self.pieces)),
                              tuple(reversed(self.weights)))

    def sample(self, counts: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
        """Sample ``counts[i]`` equal parameter steps on piece ``i``; closes exactly."""
        knots = self.knots
        pts, params = [], []
        for i, (piece, n) in enumerate(zip(self.pieces, counts, strict=True)):
            for u in np.arange(n) / n:
                pts.append(piece.position(float(u)))
                params.append(knots[i] + u * (knots[i + 1] - knots[i]))
        pts.append(pts[0].copy())
        params.append(1.0)
        return np.array(pts), np.array(params)


@dataclass(frozen=True, eq=False)
class ControlPath:
    """Ordered samples kappa(t_k), t_k in [0, 1]."""

    couplings: np.ndarray
    params: np.ndarray
    closed: bool = True
    curve: Optional[PiecewiseCurve] = field(default=None, repr=False)
    counts: Optional[tuple[int, ...]] = field(default=None, repr=False)
    tol: float = 1e-8

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.couplings, dtype=complex))
        object.__setattr__(self, "couplings", c)
        object.__setattr__(self, "params", np.asarray(self.params, dtype=float))
        if len(c) < 2:
            raise NotALoop("a path needs at least two samples")
        if self.closed and not np.array_equal(c[0], c[-1]):
            raise NotALoop("closed path must end exactly where it starts")
        eps = np.sqrt((np.abs(c) ** 2).sum(axis=1))
        if eps.min() <= self.tol:
            k = int(np.argmin(eps))
            raise SingularSample(f"sample {k} has energy scale {eps[k]:g} <= {self.tol:g}")

    @classmethod
    def from_points(cls, points: Sequence[CouplingPoint | Sequence[complex]],
                    closed: bool = True) -> "ControlPath":
        rows = [p.couplings if isinstance(p, CouplingPoint) else tuple(p) for p in points]
        arr = np.array(rows, dtype=complex)
        return cls(arr, np.linspace(0.0, 1.0, len(arr)), closed)

    @classmethod
    def from_curve(cls, curve: PiecewiseCurve, counts: Sequence[int]) -> "ControlPath":
        pts, params = curve.sample(counts)
        return cls(pts, params, True, curve, tuple(int(n) for n in counts))

    @property
    def arms(self) -> int:
        return self.couplings.shape[1]

    @property
    def steps(self) -> int:
        return len(self.couplings) - 1

    @property
    def start(self) -> CouplingPoint:
        return CouplingPoint(self.couplings[0])

    def point(self, k: int) -> CouplingPoint:
        return CouplingPoint(self.couplings[k])

    def points(self) -> list[CouplingPoint]:
        return [CouplingPoint(row) for row in self.couplings]

    def energy_scales(self) -> np.ndarray:
        return np.sqrt((np.abs(self.couplings) ** 2).sum(axis=1))

    def as_curve(self) -> PiecewiseCurve:
        """Exact curve when known, else the polyline through the samples."""
        if self.curve is not None:
            return self.curve
        c = self.couplings
        return PiecewiseCurve(tuple(Piece.linear(c[k], c[k + 1]) for k in range(len(c) - 1)),
                              tuple(np.diff(self.params)))

    def resample(self, steps: int) -> "ControlPath":
        """Same curve with about ``steps`` samples, split like the original."""
        curve = self.as_curve()
        base = self.counts or tuple([1] * len(curve.pieces))
        total = sum(base)
        counts = [max(1, round(steps * n / total)) for n in base]
        return ControlPath.from_curve(curve, counts)

    def every_other(self) -> "ControlPath":
        """Coarser path from the even-indexed samples (needs an even step count)."""
        if self.steps % 2:
            raise NotALoop("every_other needs an even number of steps")
        counts = None if self.counts is None or any(n % 2 for n in self.counts) \
            else tuple(n // 2 for n in self.counts)
        return ControlPath(self.couplings[::2], self.params[::2], self.closed,
                           self.curve if counts else None, counts, self.tol)

    def reversed(self) -> "ControlPath":
        counts = tuple(reversed(self.counts)) if self.counts else None
        curve = self.curve.reversed() if self.curve is not None else None
        return ControlPath(self.couplings[::-1].copy(), 1.0 - self.params[::-1],
                           self.closed, curve, counts, self.tol)

    def repeated(self, times: int) -> "ControlPath":
        """The loop traversed ``times`` times."""
        c = np.concatenate([self.couplings[:-1]] * times + [self.couplings[-1:]])
        return ControlPath(c, np.linspace(0.0, 1.0, len(c)), self.closed, None, None, self.tol)
