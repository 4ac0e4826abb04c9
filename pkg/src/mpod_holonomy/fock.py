"""N-photon Fock layers over the waveguide modes and ladder-operator matrices.

Modes are indexed from 0; in an M-pod the central waveguide is mode ``M``.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from math import comb, sqrt
from typing import Iterator, Mapping, Sequence, Union

import numpy as np

from .errors import InvalidHop, InvalidLayer

OccupationVector = tuple[int, ...]
OccupationLike = Union[OccupationVector, Sequence[int], str]


def as_occupation(occ: OccupationLike) -> OccupationVector:
    """Normalise ``"1010"``, ``[1, 0, 1, 0]`` or a tuple to a tuple of ints."""
    if isinstance(occ, str):
        return tuple(int(c) for c in occ)
    return tuple(int(n) for n in occ)


def layer_size(photon_number: int, modes: int) -> int:
    return comb(photon_number + modes - 1, modes - 1)


def _descending(photons: int, modes: int) -> Iterator[OccupationVector]:
    if modes == 1:
        yield (photons,)
        return
    for n in range(photons, -1, -1):
        for rest in _descending(photons - n, modes - 1):
            yield (n,) + rest


@dataclass(frozen=True, eq=False)
class FockBasis:
    """Ordered basis of one Fock layer, in descending lexicographic order."""

    photon_number: int
    modes: int
    states: tuple[OccupationVector, ...]
    index: Mapping[OccupationVector, int] = field(repr=False)
    _hops: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return len(self.states)

    @property
    def arms(self) -> int:
        """Number of outer waveguides when read as an M-pod."""
        return self.modes - 1

    def __len__(self) -> int:
        return len(self.states)

    def index_of(self, occ: OccupationLike) -> int:
        key = as_occupation(occ)
        try:
            return self.index[key]
        except KeyError:
            raise InvalidLayer(f"{key} is not in the N={self.photon_number}, "
                               f"{self.modes}-mode layer") from None

    def vector(self, amplitudes: Union[OccupationLike, Mapping[OccupationLike, complex]]) -> np.ndarray:
        """State vector from a single occupation or an ``{occupation: amplitude}`` map."""
        v = np.zeros(self.dim, dtype=complex)
        if isinstance(amplitudes, Mapping):
            for occ, amp in amplitudes.items():
                v[self.index_of(occ)] += amp
        else:
            v[self.index_of(amplitudes)] = 1.0
        return v

    def label(self, k: int) -> str:
        return "".join(str(n) for n in self.states[k])


@functools.lru_cache(maxsize=64)
def enumerate_layer(photon_number: int, modes: int) -> FockBasis:
    """All ways to put ``photon_number`` photons into ``modes`` waveguides.

    Results are cached; a ``FockBasis`` is immutable, so sharing is safe.

    >>> [''.join(map(str, s)) for s in enumerate_layer(1, 3).states]
    ['100', '010', '001']
    """
    if modes < 2 or photon_number < 0:
        raise InvalidLayer(f"need photon_number >= 0 and modes >= 2, "
                           f"got N={photon_number}, modes={modes}")
    states = tuple(_descending(photon_number, modes))
    return FockBasis(photon_number, modes, states,
                     {s: k for k, s in enumerate(states)})


def hop_matrix(basis: FockBasis, source: int, target: int) -> np.ndarray:
    """Matrix of ``a_source a_target^dagger`` on the layer.

    Moves one photon from ``source`` to ``target`` with amplitude
    ``sqrt(n_source (n_target + 1))``. The returned array is read-only.
    """
    if source == target:
        raise InvalidHop("self-hops a_j a_j^dagger do not occur in the M-pod Hamiltonian")
    for j in (source, target):
        if not 0 <= j < basis.modes:
            raise InvalidHop(f"mode index {j} out of range for {basis.modes} modes")
    key = (source, target)
    cached = basis._hops.get(key)
    if cached is not None:
        return cached
    mat = np.zeros((basis.dim, basis.dim), dtype=complex)
    for col, occ in enumerate(basis.states):
        ns = occ[source]
        if ns == 0:
            continue
        out = list(occ)
        out[source] -= 1
        out[target] += 1
        mat[basis.index[tuple(out)], col] = sqrt(ns * (occ[target] + 1))
    mat.setflags(write=False)
    basis._hops[key] = mat
    return mat
