"""Time-ordered propagation of the full layer Hamiltonian along a loop."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import DegeneracyCrossing, InvalidOrder, InvalidSpec, NotAdiabatic
from .fock import FockBasis, enumerate_layer, hop_matrix
from .mpod import DEFAULT_TOL, build_hamiltonian, decompose
from .paths import ControlPath
from .transport import HolonomyResult, SubspaceSelector, holonomy_numeric, unitarize

TIME_MAPS = ("linear", "smooth")
METHODS = ("magnus4", "midpoint")
LEAKAGE_BOUND = 0.1
_GAUSS_OFFSET = math.sqrt(3.0) / 6.0


@dataclass(frozen=True)
class Schedule:
    """kappa(t) for t in [0, T]: the path's curve run at the given time map.

    ``smooth`` reparametrizes every piece by u - sin(2 pi u) / (2 pi), so the
    couplings come to rest at each corner.
    """

    path: ControlPath
    total_time: float
    time_map: str = "linear"

    def __post_init__(self):
        if not self.total_time > 0:
            raise InvalidSpec(f"total time must be positive, got {self.total_time!r}")
        if self.time_map not in TIME_MAPS:
            raise InvalidSpec(f"time map must be one of {TIME_MAPS}, got {self.time_map!r}")
        if not self.path.closed:
            raise InvalidSpec("schedules run along closed paths")

    def couplings_at(self, s: np.ndarray) -> np.ndarray:
        """Couplings at normalized times ``s`` in [0, 1]; shape (len(s), M)."""
        curve = self.path.as_curve()
        knots = curve.knots
        s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
        idx = np.clip(np.searchsorted(knots, s, side="right") - 1, 0, len(curve.pieces) - 1)
        u = (s - knots[idx]) / (knots[idx + 1] - knots[idx])
        if self.time_map == "smooth":
            u = u - np.sin(2 * np.pi * u) / (2 * np.pi)
        out = np.empty((len(s), self.path.arms), dtype=complex)
        for i in np.unique(idx):
            sel = idx == i
            out[sel] = curve.pieces[i].position(u[sel])
        return out


@dataclass(frozen=True)
class PropagatorResult:
    full_unitary: np.ndarray = field(repr=False)
    blocks: dict[int, np.ndarray] = field(repr=False)
    dynamical_phases: dict[int, float]
    leakage: dict[int, float]
    frames: dict[int, np.ndarray] = field(repr=False)
    steps: int
    method: str
    schedule: Schedule = field(repr=False)

    def unitarity_defect(self) -> float:
        u = self.full_unitary
        return float(np.linalg.norm(u.conj().T @ u - np.eye(len(u))))


def _nodes(steps: int, method: str) -> tuple[np.ndarray, np.ndarray]:
    """Normalized node times and per-node quadrature weights (units of dt)."""
    mid = (np.arange(steps) + 0.5) / steps
    if method == "midpoint":
        return mid[:, None], np.array([1.0])
    off = _GAUSS_OFFSET / steps
    return np.stack([mid - off, mid + off], axis=1), np.array([0.5, 0.5])


def _expm_antihermitian(a: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(1j * a)
    return (v * np.exp(-1j * w)) @ v.conj().T


def default_steps(schedule: Schedule) -> int:
    eps_max = float(schedule.path.energy_scales().max())
    return max(1000, math.ceil(20 * schedule.total_time * eps_max))


def propagate(schedule: Schedule, basis: FockBasis, steps: Optional[int] = None,
              method: str = "magnus4", tol: float = DEFAULT_TOL) -> PropagatorResult:
    """U(T) as a time-ordered product of exact per-step exponentials.

    ``magnus4`` uses the two-point Gauss fourth-order Magnus step,
    ``midpoint`` the second-order exponential midpoint rule.
    """
    if method not in METHODS:
        raise InvalidSpec(f"method must be one of {METHODS}, got {method!r}")
    arms = schedule.path.arms
    if basis.modes != arms + 1:
        raise InvalidSpec(f"basis has {basis.modes} modes, path needs {arms + 1}")
    n = steps if steps is not None else default_steps(schedule)
    dt = schedule.total_time / n
    times, weights = _nodes(n, method)
    kap = schedule.couplings_at(times.ravel()).reshape(times.shape + (arms,))
    eps = np.sqrt((np.abs(kap) ** 2).sum(axis=-1))
    if eps.min() <= tol:
        raise DegeneracyCrossing("levels merge where the energy scale vanishes along the schedule")
    hops = [hop_matrix(basis, i, arms) for i in range(arms)]

    def ham(k):
        h = np.zeros((basis.dim, basis.dim), dtype=complex)
        for i, c in enumerate(k):
            h += np.conj(c) * hops[i] + c * hops[i].T
        return h

    u = np.eye(basis.dim, dtype=complex)
    for j in range(n):
        if method == "midpoint":
            omega = -1j * dt * ham(kap[j, 0])
        else:
            a1, a2 = -1j * ham(kap[j, 0]), -1j * ham(kap[j, 1])
            omega = 0.5 * dt * (a1 + a2) + (math.sqrt(3.0) / 12.0) * dt * dt * (a2 @ a1 - a1 @ a2)
        u = _expm_antihermitian(omega) @ u
    integral = float(dt * (eps * weights).sum())

    start = schedule.path.start
    dec = decompose(build_hamiltonian(basis, start), start, tol)
    blocks, leak, frames, phases = {}, {}, {}, {}
    for lv in dec.levels:
        f = lv.frame
        b = f.conj().T @ u @ f
        blocks[lv.order] = b
        leak[lv.order] = math.sqrt(max(0.0, lv.multiplicity - float(np.linalg.norm(b) ** 2)))
        frames[lv.order] = f
        phases[lv.order] = lv.order * integral
    return PropagatorResult(u, blocks, phases, leak, frames, n, method, schedule)


def dynamical_phase(schedule: Schedule, order: int, steps: Optional[int] = None,
                    method: str = "magnus4") -> float:
    """omega_n = n * int_0^T eps(t) dt on the propagation grid."""
    n = steps if steps is not None else default_steps(schedule)
    times, weights = _nodes(n, method)
    kap = schedule.couplings_at(times.ravel()).reshape(times.shape + (schedule.path.arms,))
    eps = np.sqrt((np.abs(kap) ** 2).sum(axis=-1))
    return order * float(schedule.total_time / n * (eps * weights).sum())


def extract_geometric_block(result: PropagatorResult, order: int,
                            bound: Optional[float] = LEAKAGE_BOUND) -> np.ndarray:
    """e^{i omega_n} times the level-n block, polar-unitarized.

    Evolution multiplies level n by e^{-i omega_n}; this undoes it. The block
    is written in the start frame ``result.frames[order]``. ``bound=None``
    skips the adiabaticity check.
    """
    if order not in result.blocks:
        raise InvalidOrder(f"no level {order} at the schedule start")
    if bound is not None and result.leakage[order] >= bound:
        raise NotAdiabatic(f"leakage {result.leakage[order]:.3g} out of level {order} "
                           f"exceeds {bound}; increase the total time")
    return unitarize(np.exp(1j * result.dynamical_phases[order]) * result.blocks[order], 0.0)


def phase_free_distance(a: np.ndarray, b: np.ndarray) -> float:
    """min over global phases c of ||c a - b||_F."""
    t = np.trace(a.conj().T @ b)
    c = t / abs(t) if abs(t) > 0 else 1.0
    return float(np.linalg.norm(c * a - b))


@dataclass(frozen=True)
class SweepRow:
    total_time: float
    leakage: float
    block_error: float
    phase_free_error: float


def _in_frame(hol: HolonomyResult, frame: np.ndarray) -> np.ndarray:
    v = unitarize(frame.conj().T @ hol.frame_start)
    return v @ hol.unitary @ v.conj().T


def sweep_levels(path: ControlPath, photon_number: int, orders: Sequence[int],
                 times: Sequence[float] = (50, 100, 200, 400), time_map: str = "smooth",
                 steps: Optional[int] = None, method: str = "magnus4",
                 references: Optional[Mapping[int, HolonomyResult]] = None) -> dict[int, list[SweepRow]]:
    """Deviation of extracted blocks from transport holonomies versus T.

    One propagation per T serves every requested level. ``times`` are in
    units of 1/eps at the path start.
    """
    sels = {n: SubspaceSelector(n, photon_number) for n in orders}
    refs = dict(references or {})
    for n, sel in sels.items():
        if n not in refs:
            refs[n] = holonomy_numeric(path, sel)
    basis = enumerate_layer(photon_number, path.arms + 1)
    eps0 = path.start.energy_scale
    rows: dict[int, list[SweepRow]] = {n: [] for n in orders}
    for t in times:
        res = propagate(Schedule(path, float(t) / eps0, time_map), basis, steps, method)
        for n in orders:
            g = extract_geometric_block(res, n, bound=None)
            w = _in_frame(refs[n], res.frames[n])
            rows[n].append(SweepRow(float(t), res.leakage[n], float(np.linalg.norm(g - w)),
                                    phase_free_distance(g, w)))
    return rows


def adiabatic_sweep(path: ControlPath, selector: SubspaceSelector,
                    times: Sequence[float] = (50, 100, 200, 400), time_map: str = "smooth",
                    steps: Optional[int] = None, method: str = "magnus4",
                    reference: Optional[HolonomyResult] = None) -> list[SweepRow]:
    refs = {selector.order: reference} if reference is not None else None
    return sweep_levels(path, selector.photon_number, [selector.order], times, time_map,
                        steps, method, refs)[selector.order]


def sweep_csv(rows: Sequence[SweepRow]) -> str:
    lines = ["T,leakage,block_error,phase_free_error"]
    lines += [f"{r.total_time!r},{r.leakage!r},{r.block_error!r},{r.phase_free_error!r}" for r in rows]
    return "\n".join(lines) + "\n"
