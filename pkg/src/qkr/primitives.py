"""Fixed-length strings over {0,1} and {0,1,2}, protocol parameters, and
the deterministic randomness supply.

Every classical protocol value is an immutable fixed-length string. Index 0
is the leftmost (most significant) position in all serializations. All
randomness comes from a counter-based generator (Philox) keyed by a seed and
a role label, so experiments reproduce bit-for-bit and independent protocol
roles (message padding, channel noise, eavesdropper choices, reservoir) never
share a stream.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "BitString",
    "TritString",
    "BasisString",
    "Encoding",
    "ProtocolParams",
    "RandomSource",
    "basis_to_trits",
    "random_bits",
]


def _value_array(values, modulus, what):
    if isinstance(values, np.ndarray):
        arr = values
    else:
        arr = np.array(list(values), dtype=np.int64)
    if arr.ndim != 1:
        raise ValueError(f"{what} must be one-dimensional")
    if arr.size and (int(arr.min()) < 0 or int(arr.max()) >= modulus):
        raise ValueError(f"{what} entries must be in [0, {modulus})")
    out = arr.astype(np.uint8, copy=True)
    out.setflags(write=False)
    return out


class BitString:
    """Immutable sequence over {0,1}. XOR, concatenation, slicing, hex I/O."""

    __slots__ = ("_bits",)

    def __init__(self, bits):
        self._bits = _value_array(bits, 2, "bit string")

    @classmethod
    def zeros(cls, length: int) -> "BitString":
        return cls(np.zeros(length, dtype=np.uint8))

    @classmethod
    def from_int(cls, value: int, length: int) -> "BitString":
        if value < 0 or value >> length:
            raise ValueError(f"value does not fit in {length} bits")
        return cls([(value >> (length - 1 - i)) & 1 for i in range(length)])

    @classmethod
    def from_hex(cls, text: str, length: int) -> "BitString":
        return cls.from_int(int(text, 16) if text else 0, length)

    @classmethod
    def from_text(cls, text: str) -> "BitString":
        return cls([int(c) for c in text])

    @property
    def bits(self) -> np.ndarray:
        return self._bits

    def to_int(self) -> int:
        value = 0
        for b in self._bits:
            value = (value << 1) | int(b)
        return value

    def to_hex(self) -> str:
        digits = max(1, (len(self) + 3) // 4)
        return format(self.to_int(), f"0{digits}x")

    def weight(self) -> int:
        return int(self._bits.sum())

    def __xor__(self, other: "BitString") -> "BitString":
        if not isinstance(other, BitString):
            return NotImplemented
        if len(self) != len(other):
            raise ValueError(f"xor of unequal lengths {len(self)} and {len(other)}")
        return BitString(np.bitwise_xor(self._bits, other._bits))

    def __add__(self, other: "BitString") -> "BitString":
        if not isinstance(other, BitString):
            return NotImplemented
        return BitString(np.concatenate([self._bits, other._bits]))

    def __getitem__(self, index):
        if isinstance(index, slice):
            return BitString(self._bits[index])
        return int(self._bits[index])

    def __len__(self) -> int:
        return len(self._bits)

    def __iter__(self):
        return (int(b) for b in self._bits)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BitString)
            and len(self) == len(other)
            and np.array_equal(self._bits, other._bits)
        )

    def __hash__(self) -> int:
        return hash((len(self._bits), self._bits.tobytes()))

    def __repr__(self) -> str:
        return f"BitString('{''.join(str(b) for b in self._bits)}')"


class TritString:
    """Immutable sequence over {0,1,2}; serialized as a string of digits."""

    __slots__ = ("_trits",)

    def __init__(self, trits):
        self._trits = _value_array(trits, 3, "trit string")

    @classmethod
    def from_text(cls, text: str) -> "TritString":
        return cls([int(c) for c in text])

    @property
    def trits(self) -> np.ndarray:
        return self._trits

    def to_text(self) -> str:
        return "".join(str(t) for t in self._trits)

    def __add__(self, other: "TritString") -> "TritString":
        if not isinstance(other, TritString):
            return NotImplemented
        return TritString(np.concatenate([self._trits, other._trits]))

    def __getitem__(self, index):
        if isinstance(index, slice):
            return TritString(self._trits[index])
        return int(self._trits[index])

    def __len__(self) -> int:
        return len(self._trits)

    def __iter__(self):
        return (int(t) for t in self._trits)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TritString)
            and len(self) == len(other)
            and np.array_equal(self._trits, other._trits)
        )

    def __hash__(self) -> int:
        return hash((len(self._trits), self._trits.tobytes()))

    def __repr__(self) -> str:
        return f"TritString('{self.to_text()}')"


class BasisString:
    """Sequence of qubit-basis choices over an alphabet of size 2 or 3."""

    __slots__ = ("_symbols", "_alphabet_size")

    def __init__(self, symbols, alphabet_size: int):
        if alphabet_size not in (2, 3):
            raise ValueError("alphabet_size must be 2 or 3")
        self._symbols = _value_array(symbols, alphabet_size, "basis string")
        self._alphabet_size = alphabet_size

    @classmethod
    def from_text(cls, text: str, alphabet_size: int) -> "BasisString":
        return cls([int(c) for c in text], alphabet_size)

    @property
    def symbols(self) -> np.ndarray:
        return self._symbols

    @property
    def alphabet_size(self) -> int:
        return self._alphabet_size

    def to_text(self) -> str:
        return "".join(str(s) for s in self._symbols)

    def __getitem__(self, index):
        if isinstance(index, slice):
            return BasisString(self._symbols[index], self._alphabet_size)
        return int(self._symbols[index])

    def __len__(self) -> int:
        return len(self._symbols)

    def __iter__(self):
        return (int(s) for s in self._symbols)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BasisString)
            and self._alphabet_size == other._alphabet_size
            and len(self) == len(other)
            and np.array_equal(self._symbols, other._symbols)
        )

    def __hash__(self) -> int:
        return hash((self._alphabet_size, len(self._symbols), self._symbols.tobytes()))

    def __repr__(self) -> str:
        return f"BasisString('{self.to_text()}', alphabet_size={self._alphabet_size})"


def basis_to_trits(b: BasisString) -> TritString:
    """Injective embedding of a basis string into trits.

    Two-symbol alphabets map onto trits 0/1; the three-symbol alphabet is
    the identity.
    """
    return TritString(b.symbols)


class Encoding(Enum):
    """Qubit encoding: two mutually unbiased bases (BB84) or three (6-state)."""

    BB84 = "bb84"
    SIX_STATE = "six-state"

    @property
    def alphabet_size(self) -> int:
        return 2 if self is Encoding.BB84 else 3

    @classmethod
    def parse(cls, text: str) -> "Encoding":
        for enc in cls:
            if enc.value == text:
                return enc
        raise ValueError(f"unknown encoding {text!r} (expected 'bb84' or 'six-state')")


@dataclass(frozen=True)
class ProtocolParams:
    """Sizes governing one protocol instance.

    n        qubits per round (= codeword bits)
    ell      augmented-message bits; the plaintext itself is ell - 2*tag_bits
    kappa    privacy-amplification padding bits appended before encoding
    tag_bits MAC tag length
    beta     fraction of the n positions the code is guaranteed to correct
    q_bits   bits of fresh reservoir input hashed into the basis refresh on Reject
    """

    n: int
    ell: int
    kappa: int
    tag_bits: int
    beta: float
    encoding: Encoding = Encoding.SIX_STATE
    q_bits: int = 64

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.kappa < 0:
            raise ValueError("kappa must be nonnegative")
        if self.ell + self.kappa > self.n:
            raise ValueError("ell + kappa must not exceed n")
        if self.ell <= 2 * self.tag_bits:
            raise ValueError("ell must exceed 2*tag_bits")
        if not 0.0 <= self.beta <= 0.5:
            raise ValueError("beta must lie in [0, 1/2]")
        if self.q_bits < 1:
            raise ValueError("q_bits must be at least 1")

    @property
    def mu_bits(self) -> int:
        return self.ell - 2 * self.tag_bits

    @property
    def payload_bits(self) -> int:
        return self.ell + self.kappa

    @property
    def t(self) -> int:
        return math.floor(self.n * self.beta)

    @property
    def alphabet_size(self) -> int:
        return self.encoding.alphabet_size


class RandomSource:
    """Deterministic labeled bit stream.

    Backed by the Philox counter-based generator keyed by (seed, label), so
    identical seeds reproduce identical streams and distinct labels give
    independent streams. A source is single-owner; `stream()` forks an
    independent substream under a child label.
    """

    def __init__(self, seed: int, label: str = ""):
        self.seed = int(seed)
        self.label = str(label)
        digest = hashlib.sha256(f"{self.seed:#x}|{self.label}".encode()).digest()
        self._gen = np.random.Philox(key=int.from_bytes(digest[:16], "big"))

    def stream(self, label: str) -> "RandomSource":
        child = f"{self.label}/{label}" if self.label else str(label)
        return RandomSource(self.seed, child)

    def raw_words(self, count: int) -> np.ndarray:
        if count <= 0:
            return np.empty(0, dtype=np.uint64)
        return np.atleast_1d(np.asarray(self._gen.random_raw(count), dtype=np.uint64))

    def bit_array(self, count: int) -> np.ndarray:
        if count == 0:
            return np.empty(0, dtype=np.uint8)
        words = self.raw_words((count + 63) // 64)
        bits = np.unpackbits(np.frombuffer(words.astype(">u8").tobytes(), dtype=np.uint8))
        return bits[:count]

    def bits(self, count: int) -> BitString:
        return BitString(self.bit_array(count))

    def floats(self, count: int) -> np.ndarray:
        return (self.raw_words(count) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def bernoulli(self, p: float, count: int) -> np.ndarray:
        return self.floats(count) < p

    def integers_below(self, bound: int, count: int) -> np.ndarray:
        """Uniform integers in [0, bound) by rejection on minimal bit chunks."""
        if bound < 2:
            return np.zeros(count, dtype=np.uint8)
        width = (bound - 1).bit_length()
        out = np.empty(count, dtype=np.uint8)
        filled = 0
        while filled < count:
            need = count - filled
            raw = self.bit_array(2 * need * width)
            cand = np.zeros(2 * need, dtype=np.uint8)
            for k in range(width):
                cand = (cand << 1) | raw[k::width][: 2 * need]
            accepted = cand[cand < bound][:need]
            out[filled : filled + accepted.size] = accepted
            filled += accepted.size
        return out

    def trits(self, count: int) -> TritString:
        return TritString(self.integers_below(3, count))

    def basis_string(self, alphabet_size: int, count: int) -> BasisString:
        return BasisString(self.integers_below(alphabet_size, count), alphabet_size)


def random_bits(src: RandomSource, count: int) -> BitString:
    """Draw `count` uniform bits from the source's stream."""
    if count < 0:
        raise ValueError("count must be nonnegative")
    return src.bits(count)
