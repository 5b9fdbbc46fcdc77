"""Symbolic qubit transmission and a small density-matrix engine.

Qubits travel as (basis label, payload bit) symbols; the honest receiver
measures in the matching basis, so channel effects reduce to classical
conditional distributions on the payload:

* iid flip channel: each payload flips independently with probability gamma.
* intercept-resend: with probability eta per qubit the eavesdropper measures
  in a uniformly random basis and resends her outcome. If her basis matches
  the preparation basis the payload survives; otherwise her outcome and the
  receiver's subsequent matching-basis measurement are both uniform, so the
  delivered payload is a fresh coin. The induced error rate is therefore
  eta * (1 - 1/|B|) / 2: 1/4 for two bases, 1/3 for three.

Density matrices appear only in verification utilities (trace distance and
the two-qubit Pauli twirl); eigenvalues come from cyclic Jacobi rotations,
which is ample for dimensions 2 and 4.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Union

import numpy as np

from .primitives import BasisString, BitString, RandomSource

__all__ = [
    "QubitSymbol",
    "QubitSequence",
    "ChannelKind",
    "ChannelModel",
    "transmit",
    "apply_error_pattern",
    "DensityMatrix",
    "hermitian_eigenvalues",
    "trace_distance",
    "pauli_twirl",
    "PAULIS",
    "BELL_BASIS",
]


@dataclass(frozen=True)
class QubitSymbol:
    """Single-qubit carrier: preparation basis and encoded payload bit.

    The erasure flag exists to mark the channel feature this model does not
    cover; every channel here leaves it False.
    """

    basis: int
    payload: int
    erased: bool = False


class QubitSequence:
    """Array-backed sequence of qubit symbols sharing one basis alphabet."""

    __slots__ = ("_bases", "_payloads", "alphabet_size")

    def __init__(self, bases, payloads, alphabet_size: int):
        bases = np.asarray(bases, dtype=np.uint8).copy()
        payloads = np.asarray(payloads, dtype=np.uint8).copy()
        if bases.shape != payloads.shape or bases.ndim != 1:
            raise ValueError("bases and payloads must be equal-length 1-d sequences")
        if bases.size and bases.max() >= alphabet_size:
            raise ValueError("basis labels must be below the alphabet size")
        if payloads.size and payloads.max() > 1:
            raise ValueError("payloads must be bits")
        bases.setflags(write=False)
        payloads.setflags(write=False)
        self._bases = bases
        self._payloads = payloads
        self.alphabet_size = alphabet_size

    @classmethod
    def prepare(cls, bases: BasisString, payloads: BitString) -> "QubitSequence":
        return cls(bases.symbols, payloads.bits, bases.alphabet_size)

    @classmethod
    def from_symbols(cls, symbols: Iterable[QubitSymbol], alphabet_size: int) -> "QubitSequence":
        symbols = list(symbols)
        return cls(
            [s.basis for s in symbols], [s.payload for s in symbols], alphabet_size
        )

    @property
    def bases(self) -> np.ndarray:
        return self._bases

    @property
    def payloads(self) -> np.ndarray:
        return self._payloads

    def basis_string(self) -> BasisString:
        return BasisString(self._bases, self.alphabet_size)

    def payload_bits(self) -> BitString:
        return BitString(self._payloads)

    def __len__(self) -> int:
        return len(self._bases)

    def __getitem__(self, index):
        if isinstance(index, slice):
            return QubitSequence(self._bases[index], self._payloads[index], self.alphabet_size)
        return QubitSymbol(int(self._bases[index]), int(self._payloads[index]))

    def __iter__(self):
        return (self[i] for i in range(len(self)))


class ChannelKind(Enum):
    IID_FLIP = "iid_flip"
    INTERCEPT_RESEND = "intercept_resend"


@dataclass(frozen=True)
class ChannelModel:
    """Channel configuration: payload flip rate or per-qubit attack rate.

    gamma up to 1 is accepted so that deterministic-flip checks can run;
    security budgets separately restrict gamma to [0, 1/2).
    """

    kind: ChannelKind
    gamma: float = 0.0
    eta: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must lie in [0, 1]")


def _as_sequence(qubits: Union[QubitSequence, Iterable[QubitSymbol]], alphabet_size=None):
    if isinstance(qubits, QubitSequence):
        return qubits
    symbols = list(qubits)
    if alphabet_size is None:
        alphabet_size = max((s.basis for s in symbols), default=0) + 1
        alphabet_size = 2 if alphabet_size <= 2 else 3
    return QubitSequence.from_symbols(symbols, alphabet_size)


def transmit(
    channel: ChannelModel,
    qubits: Union[QubitSequence, Iterable[QubitSymbol]],
    src: RandomSource,
) -> QubitSequence:
    """Send the qubits through the channel; length and basis labels are
    preserved, only payloads are disturbed."""
    seq = _as_sequence(qubits)
    n = len(seq)
    if channel.kind is ChannelKind.IID_FLIP:
        flips = src.bernoulli(channel.gamma, n)
        payloads = np.bitwise_xor(seq.payloads, flips.astype(np.uint8))
        return QubitSequence(seq.bases, payloads, seq.alphabet_size)

    attacked = src.bernoulli(channel.eta, n)
    eve_bases = src.integers_below(seq.alphabet_size, n)
    coins = src.bit_array(n)
    same_basis = eve_bases == seq.bases
    # Matching basis: the payload survives Eve's measure-and-resend.
    # Mismatched basis: the receiver's matching-basis outcome is uniform.
    payloads = np.where(attacked & ~same_basis, coins, seq.payloads)
    return QubitSequence(seq.bases, payloads.astype(np.uint8), seq.alphabet_size)


def apply_error_pattern(
    qubits: Union[QubitSequence, Iterable[QubitSymbol]], pattern: BitString
) -> QubitSequence:
    """Flip exactly the payload positions set in `pattern` (fault injection
    and permutation-invariance experiments)."""
    seq = _as_sequence(qubits)
    if len(pattern) != len(seq):
        raise ValueError("pattern length must match the qubit count")
    payloads = np.bitwise_xor(seq.payloads, pattern.bits)
    return QubitSequence(seq.bases, payloads, seq.alphabet_size)


_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (_I, _X, _Y, _Z)

# Columns: the four Bell states (|00>+|11>, |00>-|11>, |01>+|10>, |01>-|10>)/sqrt(2).
BELL_BASIS = np.array(
    [
        [1, 1, 0, 0],
        [0, 0, 1, 1],
        [0, 0, 1, -1],
        [1, -1, 0, 0],
    ],
    dtype=complex,
) / np.sqrt(2)

_HERMITIAN_TOL = 1e-12
_TRACE_TOL = 1e-12
_PSD_TOL = -1e-10
_JACOBI_TOL = 1e-14


def hermitian_eigenvalues(matrix: np.ndarray) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations.

    Sweeps until the off-diagonal Frobenius mass falls below 1e-14; ascending
    order.
    """
    a = np.array(matrix, dtype=complex)
    d = a.shape[0]
    for _ in range(200):
        off = np.sqrt(np.sum(np.abs(a - np.diag(np.diag(a))) ** 2))
        if off < _JACOBI_TOL:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                g = a[p, q]
                mag = abs(g)
                if mag == 0.0:
                    continue
                phase = g / mag
                theta = 0.5 * np.arctan2(2.0 * mag, (a[q, q] - a[p, p]).real)
                c, s = np.cos(theta), np.sin(theta)
                rot = np.eye(d, dtype=complex)
                rot[p, p] = c
                rot[q, q] = c
                rot[p, q] = s * phase
                rot[q, p] = -s * np.conj(phase)
                a = rot.conj().T @ a @ rot
    return np.sort(np.diag(a).real)


class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite matrix of dimension 2 or 4."""

    __slots__ = ("_entries",)

    def __init__(self, entries):
        a = np.array(entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] not in (2, 4):
            raise ValueError("density matrix must be 2x2 or 4x4")
        if np.max(np.abs(a - a.conj().T)) > _HERMITIAN_TOL:
            raise ValueError("matrix is not Hermitian within tolerance")
        if abs(np.trace(a).real - 1.0) > _TRACE_TOL or abs(np.trace(a).imag) > _TRACE_TOL:
            raise ValueError("matrix trace must equal 1 within tolerance")
        if hermitian_eigenvalues(a)[0] < _PSD_TOL:
            raise ValueError("matrix is not positive semidefinite within tolerance")
        a.setflags(write=False)
        self._entries = a

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def dim(self) -> int:
        return self._entries.shape[0]

    @classmethod
    def random(cls, src: RandomSource, dim: int) -> "DensityMatrix":
        """Haar-ish random state: normalized G G^dagger for Gaussian G."""
        re = standard_normal_from_uniform(src.floats(dim * dim)).reshape(dim, dim)
        im = standard_normal_from_uniform(src.floats(dim * dim)).reshape(dim, dim)
        g = re + 1j * im
        rho = g @ g.conj().T
        rho = rho / np.trace(rho).real
        return cls(rho)

    @classmethod
    def pure(cls, state: np.ndarray) -> "DensityMatrix":
        v = np.asarray(state, dtype=complex).reshape(-1)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    def __repr__(self) -> str:
        return f"DensityMatrix(dim={self.dim})"


def standard_normal_from_uniform(u: np.ndarray) -> np.ndarray:
    """Box-Muller on consecutive pairs; deterministic given the stream."""
    if len(u) % 2:
        u = np.append(u, 0.5)
    u1 = np.clip(u[0::2], 1e-12, 1.0)
    u2 = u[1::2]
    r = np.sqrt(-2.0 * np.log(u1))
    out = np.empty(len(u), dtype=np.float64)
    out[0::2] = r * np.cos(2 * np.pi * u2)
    out[1::2] = r * np.sin(2 * np.pi * u2)
    return out


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Half the sum of absolute eigenvalues of rho - sigma."""
    if rho.dim != sigma.dim:
        raise ValueError("dimension mismatch")
    eigs = hermitian_eigenvalues(rho.entries - sigma.entries)
    return float(0.5 * np.sum(np.abs(eigs)))


def pauli_twirl(rho_ab: DensityMatrix) -> DensityMatrix:
    """Average the two-qubit state over conjugation by the four symmetric
    Pauli pairs; the result is diagonal in the Bell basis."""
    if rho_ab.dim != 4:
        raise ValueError("the twirl acts on two-qubit (4x4) states")
    out = np.zeros((4, 4), dtype=complex)
    for sigma in PAULIS:
        op = np.kron(sigma, sigma)
        out += op @ rho_ab.entries @ op
    return DensityMatrix(out / 4.0)
