"""Logical qubits carried by photon positions, and gates on them.

Logical basis order is binary: index = int(bits, 2), so for two qubits
|b1 b2> sits at 2*b1 + b2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from . import analytic
from .fock import FockBasis, OccupationVector, as_occupation, enumerate_layer
from .mpod import CouplingPoint, build_hamiltonian, decompose

SQRT2 = math.sqrt(2.0)
LEAK_FLAG = 1e-8

XH = np.array([[1, -1], [1, 1]], dtype=complex) / SQRT2
IY = np.array([[0, 1], [-1, 0]], dtype=complex)


def omega_gate(omega: float) -> np.ndarray:
    """Omega(w) = |w><0| + |w_bar><1| = cos w I + i sin w X."""
    c, s = math.cos(omega), math.sin(omega)
    return np.array([[c, 1j * s], [1j * s, c]])


def phase_gate(phi2: float, phi2_tilde: float) -> np.ndarray:
    return np.diag([np.exp(1j * phi2), np.exp(1j * phi2_tilde)])


def rotation_gate(phi1: float) -> np.ndarray:
    """Columns |phi1> = cos|0> - sin|1| and |phi1_bar> = sin|0> + cos|1>."""
    c, s = math.cos(phi1), math.sin(phi1)
    return np.array([[c, s], [-s, c]], dtype=complex)


def phi_states(phi1: float) -> tuple[np.ndarray, np.ndarray]:
    r = rotation_gate(phi1)
    return r[:, 0], r[:, 1]


def omega_states(omega: float) -> tuple[np.ndarray, np.ndarray]:
    o = omega_gate(omega)
    return o[:, 0], o[:, 1]


# --------------------------------------------------------------------------- #
# encodings
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class LogicalEncoding:
    arity: int
    words: Mapping[str, OccupationVector]
    point: CouplingPoint
    code_levels: tuple[int, ...]
    basis: FockBasis = field(repr=False)

    def __post_init__(self):
        if len(set(self.words.values())) != len(self.words):
            raise ValueError("logical map is not injective")

    @property
    def labels(self) -> list[str]:
        return sorted(self.words, key=lambda b: int(b, 2))

    def vectors(self) -> np.ndarray:
        """p x 2^arity matrix of code words in logical index order."""
        return np.column_stack([self.basis.vector(self.words[b]) for b in self.labels])

    def code_frames(self) -> dict[int, np.ndarray]:
        dec = decompose(build_hamiltonian(self.basis, self.point), self.point)
        return {n: dec.frame(n) for n in self.code_levels}

    def code_projector(self) -> np.ndarray:
        f = np.hstack(list(self.code_frames().values()))
        return f @ f.conj().T

    def containment_residual(self) -> float:
        """max over words of the norm outside the code levels."""
        v = self.vectors()
        return float(np.linalg.norm(v - self.code_projector() @ v, axis=0).max())


def two_qubit_encoding(kappa: float = 1.0) -> LogicalEncoding:
    words = {"00": as_occupation("1010"), "01": as_occupation("1001"),
             "10": as_occupation("0110"), "11": as_occupation("0101")}
    return LogicalEncoding(2, words, CouplingPoint([0.0, 0.0, kappa]), (1, -1), enumerate_layer(2, 4))


def three_qubit_encoding(kappa: float = 1.0) -> LogicalEncoding:
    words = {"000": "0003", "100": "3000", "010": "0201", "001": "0021",
             "110": "1200", "101": "1020", "011": "0111", "111": "1110"}
    return LogicalEncoding(3, {b: as_occupation(o) for b, o in words.items()},
                           CouplingPoint([kappa, 0.0, 0.0]), (1, -1, 3, -3), enumerate_layer(3, 4))


# --------------------------------------------------------------------------- #
# two-qubit gates
# --------------------------------------------------------------------------- #

def bright_to_logical(kappa: float = 1.0) -> np.ndarray:
    """4x4 matrix whose columns are B1+, B2+, B1-, B2- in logical coordinates."""
    enc = two_qubit_encoding(kappa)
    logical = enc.vectors()
    bright = np.hstack([analytic.bright_states_theta1(0.0, 0.0, kappa, s).vectors for s in (1, -1)])
    return logical.conj().T @ bright


def composite_gate(w_plus: np.ndarray, w_minus: np.ndarray, omega: float) -> np.ndarray:
    """e^{i w} W+ (+) e^{-i w} W- on the code, in the logical basis."""
    g = np.zeros((4, 4), dtype=complex)
    g[:2, :2] = np.exp(1j * omega) * np.asarray(w_plus)
    g[2:, 2:] = np.exp(-1j * omega) * np.asarray(w_minus)
    c = bright_to_logical()
    return c @ g @ c.conj().T


def operator_schmidt(u: np.ndarray, dims: tuple[int, int] = (2, 2)) -> tuple[np.ndarray, np.ndarray, float]:
    """Nearest A (x) B to ``u``; A is scaled to be unitary when ``u`` is.

    Returns (A, B, ||u - A (x) B||_F).
    """
    da, db = dims
    r = np.asarray(u).reshape(da, db, da, db).transpose(0, 2, 1, 3).reshape(da * da, db * db)
    uu, s, vh = np.linalg.svd(r)
    a = math.sqrt(s[0]) * uu[:, 0].reshape(da, da)
    b = math.sqrt(s[0]) * vh[0].reshape(db, db)
    scale = math.sqrt(abs(np.linalg.det(a)) ** (2.0 / da)) if abs(np.linalg.det(a)) > 0 else 1.0
    a, b = a / scale, b * scale
    k = np.unravel_index(np.argmax(np.abs(a)), a.shape)
    ph = a[k] / abs(a[k])
    a, b = a / ph, b * ph
    return a, b, float(np.linalg.norm(u - np.kron(a, b)))


@dataclass(frozen=True)
class GateReport:
    name: str
    encoding: str
    unitary: np.ndarray
    factors: Optional[tuple[np.ndarray, np.ndarray]]
    factorization_error: float
    leakage: float
    parameters: Mapping[str, float] = field(default_factory=dict)

    def is_unitary(self, tol: float = 1e-10) -> bool:
        u = self.unitary
        return bool(np.linalg.norm(u.conj().T @ u - np.eye(len(u))) < tol)

    def table(self, labels: list[str]) -> dict[str, dict[str, complex]]:
        """input label -> {output label: amplitude} for nonzero amplitudes."""
        out = {}
        for j, lj in enumerate(labels):
            out[lj] = {li: complex(self.unitary[i, j]) for i, li in enumerate(labels)
                       if abs(self.unitary[i, j]) > 1e-14}
        return out

    def to_dict(self) -> dict:
        from .serialization import matrix_to_dict
        return {"name": self.name, "encoding": self.encoding, "parameters": dict(self.parameters),
                "unitary": matrix_to_dict(self.unitary),
                "factors": None if self.factors is None else [matrix_to_dict(f) for f in self.factors],
                "factorization_error": self.factorization_error, "leakage": self.leakage}


def gate_report(name: str, u: np.ndarray, leakage: float = 0.0, encoding: str = "two-qubit",
                parameters: Optional[Mapping[str, float]] = None, tol: float = 1e-10) -> GateReport:
    a, b, err = operator_schmidt(u)
    return GateReport(name, encoding, np.asarray(u), (a, b) if err < tol else None, err, leakage,
                      dict(parameters or {}))


def _table_matrix(first: tuple[np.ndarray, np.ndarray], second: tuple[np.ndarray, np.ndarray]) -> np.ndarray:
    cols = [np.kron(first[b1], second[b2]) for b1 in (0, 1) for b2 in (0, 1)]
    return np.column_stack(cols)


def truth_table_u1(phi1: float, omega: float) -> GateReport:
    """|b1 b2> -> (|phi1> or |phi1_bar>) (x) (|w> or |w_bar>)."""
    u = _table_matrix(phi_states(phi1), omega_states(omega))
    return gate_report("U1", u, parameters={"phi1": phi1, "omega": omega})


def truth_table_u2(phi2: float, phi2_tilde: float, omega: float) -> GateReport:
    """|b1 b2> -> e^{i phi(b1)} |b1> (x) (|w> or |w_bar>)."""
    e0 = np.array([np.exp(1j * phi2), 0])
    e1 = np.array([0, np.exp(1j * phi2_tilde)])
    u = _table_matrix((e0, e1), omega_states(omega))
    return gate_report("U2", u, parameters={"phi2": phi2, "phi2_tilde": phi2_tilde, "omega": omega})


def restrict_to_code(u_layer: np.ndarray, encoding: LogicalEncoding) -> tuple[np.ndarray, float]:
    """Code block of a full-layer unitary and the max norm leaving the code words."""
    v = encoding.vectors()
    out = u_layer @ v
    block = v.conj().T @ out
    leak = np.linalg.norm(out - v @ block, axis=0)
    return block, float(leak.max())


# --------------------------------------------------------------------------- #
# three-qubit checks
# --------------------------------------------------------------------------- #

# pairs (first, second) of code words sharing bright states, and the signed
# coefficients of each word on levels +1, -1, +3, -3 once the first word of a
# pair fixes the phase of every level it touches
PAIRS = (("000", "100"), ("010", "110"), ("001", "101"), ("011", "111"))
_A, _B, _C = 1 / (2 * SQRT2), math.sqrt(3) / (2 * SQRT2), 1 / SQRT2
EXPECTED_EXPANSION = {
    "000": {1: _B, -1: _B, 3: _A, -3: _A},
    "100": {1: -_B, -1: _B, 3: _A, -3: -_A},
    "010": {1: _C, -1: _C}, "110": {1: _C, -1: -_C},
    "001": {1: _C, -1: _C}, "101": {1: _C, -1: -_C},
    "011": {1: _C, -1: _C}, "111": {1: _C, -1: -_C},
}


@dataclass(frozen=True)
class ExpansionTable:
    coefficients: dict[str, dict[int, float]]   # aligned, signed
    residual: float                             # worst part not captured by the table
    imaginary: float                            # worst imaginary part after alignment

    def deviation(self, expected: Mapping[str, Mapping[int, float]] = EXPECTED_EXPANSION) -> float:
        worst = 0.0
        for w, row in self.coefficients.items():
            exp = expected[w]
            for n in set(row) | set(exp):
                worst = max(worst, abs(row.get(n, 0.0) - exp.get(n, 0.0)))
        return worst


def bright_expansion(encoding: Optional[LogicalEncoding] = None, drop: float = 1e-12) -> ExpansionTable:
    """Expand each code word over numerically computed bright levels.

    Within a pair, the first word's projection onto a level defines that
    level's reference vector (so its coefficient is positive); the second
    word's coefficient is its overlap with the same vector.
    """
    enc = encoding or three_qubit_encoding()
    frames = enc.code_frames()
    vec = {b: enc.basis.vector(o) for b, o in enc.words.items()}
    coeffs: dict[str, dict[int, float]] = {}
    residual = imag = 0.0
    for first, second in PAIRS:
        coeffs[first], coeffs[second] = {}, {}
        rest = {first: vec[first].copy(), second: vec[second].copy()}
        for n, f in frames.items():
            p1 = f @ (f.conj().T @ vec[first])
            norm = float(np.linalg.norm(p1))
            p2 = f @ (f.conj().T @ vec[second])
            if norm < drop:
                residual = max(residual, float(np.linalg.norm(p2)))
                continue
            ref = p1 / norm
            c2 = complex(np.vdot(ref, p2))
            coeffs[first][n] = norm
            coeffs[second][n] = c2.real
            imag = max(imag, abs(c2.imag))
            residual = max(residual, float(np.linalg.norm(p2 - c2 * ref)))
            rest[first] -= p1
            rest[second] -= p2
        residual = max(residual, *(float(np.linalg.norm(r)) for r in rest.values()))
    return ExpansionTable(coeffs, residual, imag)


def complement_states(encoding: Optional[LogicalEncoding] = None) -> np.ndarray:
    """Orthonormal basis of the code levels' span orthogonal to the code words."""
    enc = encoding or three_qubit_encoding()
    p = enc.code_projector()
    v = enc.vectors()
    q = p - v @ v.conj().T
    w, u = np.linalg.eigh(q)
    return u[:, w > 0.5]


def split_basis(encoding: Optional[LogicalEncoding] = None) -> np.ndarray:
    """p x 10: the eight code words, then |1002>, |2001>."""
    enc = encoding or three_qubit_encoding()
    extra = np.column_stack([enc.basis.vector("1002"), enc.basis.vector("2001")])
    return np.hstack([enc.vectors(), extra])


@dataclass(frozen=True)
class PreservationReport:
    leakage: float
    per_word: dict[str, float]
    flagged: bool


def code_preservation_check(u: np.ndarray, encoding: Optional[LogicalEncoding] = None,
                            flag: float = LEAK_FLAG) -> PreservationReport:
    """Leaked norm of each code word into span{|1002>, |2001>} under ``u``.

    ``u`` is 10x10 in the split basis (code words, then |1002>, |2001>) or
    a full-layer matrix.
    """
    enc = encoding or three_qubit_encoding()
    u = np.asarray(u)
    n = len(enc.words)
    if u.shape == (n + 2, n + 2):
        leak = np.linalg.norm(u[n:, :n], axis=0)
    elif u.shape == (enc.basis.dim, enc.basis.dim):
        s = split_basis(enc)
        leak = np.linalg.norm(s[:, n:].conj().T @ u @ s[:, :n], axis=0)
    else:
        raise ValueError(f"expected a {n + 2}x{n + 2} or {enc.basis.dim}x{enc.basis.dim} matrix, got {u.shape}")
    per = {b: float(leak[i]) for i, b in enumerate(enc.labels)}
    worst = float(max(per.values()))
    return PreservationReport(worst, per, worst > flag)
