"""M-pod Hamiltonian on a Fock layer, its eigenspace ladder and dimension counts."""
from __future__ import annotations

import cmath
import csv
import io
import math
from dataclasses import dataclass
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .errors import ArityMismatch, DecoupledSystem, InvalidOrder, SpectralAnomaly
from .fock import FockBasis, enumerate_layer, hop_matrix, layer_size

DEFAULT_TOL = 1e-8


@dataclass(frozen=True)
class CouplingPoint:
    """Couplings kappa_i of the M outer waveguides to the central one.

    Chart coordinates are named ``r1 .. rM`` and ``theta1 .. thetaM``
    (1-based, arm ``i`` is ``couplings[i-1]``).
    """

    couplings: tuple[complex, ...]

    def __init__(self, couplings: Iterable[complex]):
        vals = tuple(complex(c) for c in couplings)
        if not vals:
            raise ArityMismatch("a coupling point needs at least one arm")
        object.__setattr__(self, "couplings", vals)

    @classmethod
    def from_polar(cls, radii: Sequence[float], angles: Sequence[float] | None = None) -> "CouplingPoint":
        if angles is None:
            angles = [0.0] * len(radii)
        return cls(r * cmath.exp(1j * t) for r, t in zip(radii, angles, strict=True))

    @property
    def arms(self) -> int:
        return len(self.couplings)

    @property
    def radii(self) -> tuple[float, ...]:
        return tuple(abs(c) for c in self.couplings)

    @property
    def angles(self) -> tuple[float, ...]:
        return tuple(cmath.phase(c) % (2 * math.pi) for c in self.couplings)

    @property
    def energy_scale(self) -> float:
        return math.sqrt(sum(abs(c) ** 2 for c in self.couplings))

    def as_array(self) -> np.ndarray:
        return np.array(self.couplings, dtype=complex)

    def shifted(self, coordinate: str, delta: float) -> "CouplingPoint":
        """Move ``delta`` along one polar chart coordinate (``"r2"``, ``"theta1"``, ...)."""
        name, arm = _parse_coordinate(coordinate, self.arms)
        vals = list(self.couplings)
        c = vals[arm]
        if name == "r":
            phase = cmath.exp(1j * cmath.phase(c)) if c != 0 else 1.0
            vals[arm] = (abs(c) + delta) * phase
        else:
            vals[arm] = c * cmath.exp(1j * delta)
        return CouplingPoint(vals)


def _parse_coordinate(coordinate: str, arms: int) -> tuple[str, int]:
    for prefix in ("theta", "r"):
        if coordinate.startswith(prefix) and coordinate[len(prefix):].isdigit():
            arm = int(coordinate[len(prefix):]) - 1
            if 0 <= arm < arms:
                return prefix, arm
    raise ArityMismatch(f"unknown chart coordinate {coordinate!r} for {arms} arms")


def build_hamiltonian(basis: FockBasis, point: CouplingPoint) -> np.ndarray:
    """Dense M-pod Hamiltonian on ``basis``.

    Arm ``i`` couples to the centre (mode ``M``) as
    ``kappa_i^* a_i a_M^dagger + kappa_i a_i^dagger a_M``.
    """
    arms = point.arms
    if basis.modes != arms + 1:
        raise ArityMismatch(f"{arms} couplings need {arms + 1} modes, basis has {basis.modes}")
    H = np.zeros((basis.dim, basis.dim), dtype=complex)
    for i, k in enumerate(point.couplings):
        if k == 0:
            continue
        H += k.conjugate() * hop_matrix(basis, i, arms)
        H += k * hop_matrix(basis, arms, i)
    return H


@dataclass(frozen=True)
class Level:
    order: int
    energy: float
    frame: np.ndarray
    multiplicity: int


@dataclass(frozen=True)
class SpectralDecomposition:
    levels: tuple[Level, ...]
    energy_scale: float
    residual: float  # max |E - n eps| / eps over all eigenvalues

    @property
    def dim(self) -> int:
        return sum(lv.multiplicity for lv in self.levels)

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(lv.order for lv in self.levels)

    def multiplicities(self) -> dict[int, int]:
        return {lv.order: lv.multiplicity for lv in self.levels}

    def level(self, order: int) -> Level:
        for lv in self.levels:
            if lv.order == order:
                return lv
        raise InvalidOrder(f"no eigenvalues at {order} * eps (orders present: {self.orders})")

    def frame(self, order: int) -> np.ndarray:
        return self.level(order).frame


def decompose(H: np.ndarray, point: CouplingPoint, tol: float = DEFAULT_TOL) -> SpectralDecomposition:
    """Bucket the spectrum of ``H`` by the nearest integer multiple of eps."""
    eps = point.energy_scale
    if eps <= tol:
        raise DecoupledSystem(f"energy scale {eps:g} is below tolerance {tol:g}")
    w, v = np.linalg.eigh(H)
    orders = np.rint(w / eps).astype(int)
    dev = np.abs(w - orders * eps) / eps
    worst = float(dev.max(initial=0.0))
    if worst > tol:
        bad = w[int(np.argmax(dev))]
        raise SpectralAnomaly(f"eigenvalue {bad:.12g} lies {worst:.3g} eps from the nearest "
                              f"multiple of eps = {eps:.12g}")
    levels = []
    for n in np.unique(orders):
        sel = orders == n
        levels.append(Level(int(n), float(n * eps), v[:, sel], int(sel.sum())))
    return SpectralDecomposition(tuple(levels), eps, worst)


def spectrum(photon_number: int, point: CouplingPoint, tol: float = DEFAULT_TOL) -> SpectralDecomposition:
    basis = enumerate_layer(photon_number, point.arms + 1)
    return decompose(build_hamiltonian(basis, point), point, tol)


def _placements(photons: int, modes: int) -> int:
    # ways to put identical photons into labelled modes; zero modes hold nothing
    if photons < 0:
        return 0
    if modes == 0:
        return 1 if photons == 0 else 0
    return comb(photons + modes - 1, modes - 1)


def dark_dimension_oracle(photon_number: int, arms: int) -> int:
    """Zero-energy multiplicity from the normal-mode picture.

    H is ``eps (n_+ - n_-)`` over a positive bright mode, a negative bright
    mode and ``arms - 1`` dark modes, so dark states are the occupations with
    ``n_+ = n_-``; the remaining photons sit in the dark modes.
    """
    return sum(_placements(photon_number - 2 * n, arms - 1)
               for n in range(photon_number // 2 + 1))


def dark_dimension_closed_form(photon_number: int, arms: int) -> int:
    """Literal two-case binomial sum for the dark dimension.

    Correct for odd N; for even N the sum starts at n = 1 and therefore misses
    the single state with every photon paired in the bright modes. Use
    :func:`dark_dimension_oracle` for the actual count.
    """
    N, M = photon_number, arms
    if N % 2 == 0:
        return sum(comb(2 * n + M - 2, 2 * n) for n in range(1, N // 2 + 1))
    return sum(comb(2 * n + 1 + M - 2, 2 * n + 1) for n in range((N - 1) // 2 + 1))


def dark_dimension_discrepancy(photon_number: int, arms: int) -> dict[str, int]:
    oracle = dark_dimension_oracle(photon_number, arms)
    literal = dark_dimension_closed_form(photon_number, arms)
    return {"photon_number": photon_number, "arms": arms, "oracle": oracle,
            "closed_form": literal, "difference": oracle - literal}


def bright_dimension(photon_number: int, arms: int, order: int) -> int:
    if not 1 <= abs(order) <= photon_number:
        raise InvalidOrder(f"bright order must satisfy 1 <= |k| <= {photon_number}, got {order}")
    return dark_dimension_oracle(photon_number - abs(order), arms)


@dataclass(frozen=True)
class DegeneracyTable:
    photon_number: int
    arms: int
    entries: dict[int, int]

    @classmethod
    def from_oracle(cls, photon_number: int, arms: int) -> "DegeneracyTable":
        entries = {}
        for n in range(-photon_number, photon_number + 1):
            entries[n] = (dark_dimension_oracle(photon_number, arms) if n == 0
                          else bright_dimension(photon_number, arms, n))
        return cls(photon_number, arms, entries)

    @classmethod
    def from_spectrum(cls, photon_number: int, arms: int,
                      decomposition: SpectralDecomposition) -> "DegeneracyTable":
        got = decomposition.multiplicities()
        return cls(photon_number, arms,
                   {n: got.get(n, 0) for n in range(-photon_number, photon_number + 1)})

    @property
    def total(self) -> int:
        return sum(self.entries.values())

    def is_symmetric(self) -> bool:
        return all(self.entries[n] == self.entries[-n] for n in self.entries)

    def is_complete(self) -> bool:
        return self.total == layer_size(self.photon_number, self.arms + 1)

    def rows(self) -> list[tuple[int, int, int, int]]:
        return [(self.photon_number, self.arms, n, d) for n, d in sorted(self.entries.items())]

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if header:
            w.writerow(["N", "M", "n", "dimension"])
        w.writerows(self.rows())
        return buf.getvalue()

    @staticmethod
    def parse_csv(text: str) -> list["DegeneracyTable"]:
        tables: dict[tuple[int, int], dict[int, int]] = {}
        for row in csv.DictReader(io.StringIO(text)):
            key = (int(row["N"]), int(row["M"]))
            tables.setdefault(key, {})[int(row["n"])] = int(row["dimension"])
        return [DegeneracyTable(N, M, e) for (N, M), e in tables.items()]
