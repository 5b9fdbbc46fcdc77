"""Pluggable linear error correction.

Three code kinds cover the simulation's needs:

* identity    - no redundancy, no correction; the noiseless baseline.
* repetition3 - codeword is three concatenated copies of the payload;
                decoding takes a per-position majority across the copies and
                never signals failure.
* oracle      - a bounded-distance test double. The decoder compares the
                received word against the codeword actually transmitted this
                round (registered by the simulation harness, never by a
                protocol party) and succeeds exactly when at most t positions
                differ. This realizes the idealized "corrects any pattern of
                up to t errors" abstraction that the accept-probability
                formula assumes.

All encoders are linear and systematic: the first k_in codeword bits equal
the payload.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .primitives import BitString, ProtocolParams

__all__ = ["CodeKind", "CodeSpec", "DecodeOutcome", "Code", "make_code"]


class CodeKind(Enum):
    IDENTITY = "identity"
    REPETITION3 = "repetition3"
    ORACLE = "oracle"

    @classmethod
    def parse(cls, text: str) -> "CodeKind":
        for kind in cls:
            if kind.value == text:
                return kind
        raise ValueError(f"unknown code {text!r} (expected identity, repetition3 or oracle)")


@dataclass(frozen=True)
class CodeSpec:
    k_in: int
    n_out: int
    t: int
    kind: CodeKind

    def __post_init__(self):
        if self.k_in > self.n_out:
            raise ValueError("k_in must not exceed n_out")
        if self.t > self.n_out // 2:
            raise ValueError("t must not exceed n_out/2")
        if self.kind is CodeKind.IDENTITY and (self.t != 0 or self.k_in != self.n_out):
            raise ValueError("identity code requires t=0 and k_in=n_out")
        if self.kind is CodeKind.REPETITION3 and self.n_out != 3 * self.k_in:
            raise ValueError("repetition3 requires n_out = 3*k_in")

    @classmethod
    def for_params(cls, kind: CodeKind, params: ProtocolParams) -> "CodeSpec":
        t = 0 if kind is CodeKind.IDENTITY else params.t
        return cls(k_in=params.payload_bits, n_out=params.n, t=t, kind=kind)


@dataclass(frozen=True)
class DecodeOutcome:
    """Either a recovered payload or a failure notification, never both."""

    payload: Optional[BitString]

    @property
    def ok(self) -> bool:
        return self.payload is not None

    @classmethod
    def success(cls, payload: BitString) -> "DecodeOutcome":
        return cls(payload)

    @classmethod
    def failure(cls) -> "DecodeOutcome":
        return cls(None)


class Code:
    """Encode/decode behind one CodeSpec."""

    def __init__(self, spec: CodeSpec):
        self.spec = spec

    def encode(self, payload: BitString) -> BitString:
        if len(payload) != self.spec.k_in:
            raise ValueError(f"payload must have length {self.spec.k_in}")
        return self._encode(payload)

    def decode(self, received: BitString) -> DecodeOutcome:
        if len(received) != self.spec.n_out:
            raise ValueError(f"received word must have length {self.spec.n_out}")
        return self._decode(received)

    def _encode(self, payload: BitString) -> BitString:
        raise NotImplementedError

    def _decode(self, received: BitString) -> DecodeOutcome:
        raise NotImplementedError


class IdentityCode(Code):
    def _encode(self, payload):
        return payload

    def _decode(self, received):
        return DecodeOutcome.success(received)


class Repetition3Code(Code):
    def _encode(self, payload):
        return BitString(np.tile(payload.bits, 3))

    def _decode(self, received):
        k = self.spec.k_in
        copies = received.bits.reshape(3, k)
        majority = (copies.sum(axis=0) >= 2).astype(np.uint8)
        return DecodeOutcome.success(BitString(majority))


class OracleBddCode(Code):
    """Bounded-distance decoding against the true transmitted codeword.

    `note_transmitted` is the harness side channel; the parties only ever
    call encode/decode.
    """

    def __init__(self, spec: CodeSpec):
        super().__init__(spec)
        self._transmitted: Optional[BitString] = None

    def note_transmitted(self, codeword: BitString) -> None:
        if len(codeword) != self.spec.n_out:
            raise ValueError(f"codeword must have length {self.spec.n_out}")
        self._transmitted = codeword

    def _encode(self, payload):
        # Zero padding keeps the map linear and systematic; the parity
        # content is irrelevant because decoding consults the true codeword.
        padding = np.zeros(self.spec.n_out - self.spec.k_in, dtype=np.uint8)
        return BitString(np.concatenate([payload.bits, padding]))

    def _decode(self, received):
        if self._transmitted is None:
            raise RuntimeError("oracle decoder has no transmitted codeword registered")
        distance = int(np.bitwise_xor(received.bits, self._transmitted.bits).sum())
        if distance <= self.spec.t:
            return DecodeOutcome.success(self._transmitted[: self.spec.k_in])
        return DecodeOutcome.failure()


def make_code(kind: CodeKind, params: ProtocolParams) -> Code:
    spec = CodeSpec.for_params(kind, params)
    if kind is CodeKind.IDENTITY:
        return IdentityCode(spec)
    if kind is CodeKind.REPETITION3:
        return Repetition3Code(spec)
    return OracleBddCode(spec)
