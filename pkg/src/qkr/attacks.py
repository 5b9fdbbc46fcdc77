"""Adversary experiments: intercept-resend statistics and tamper fuzzing.

The tamper fuzz measures MAC substitution resistance end to end: an
adversary flips wire bits, decoding hands the receiver a modified message,
and a false accept requires the modified message to carry a valid tag. Each
fuzz round uses fresh independent keys (the per-round forgery probability
does not depend on key evolution), which lets the whole batch run as
vectorized uint64 word arithmetic; `mac64_words` is cross-checked against
the scalar MAC in the test suite.
"""

from __future__ import annotations

import numpy as np

from .ecc import CodeKind
from .primitives import BitString, Encoding, ProtocolParams, RandomSource
from .protocol import run_session
from .qsim import ChannelKind, ChannelModel, QubitSequence, transmit

__all__ = [
    "gf64_mul_words",
    "pack_bits_to_words",
    "mac64_words",
    "fuzz_batch",
    "tamper_fuzz",
    "intercept_resend_report",
    "expected_intercept_error_rate",
]

_LOW_POLY64 = np.uint64(0x1B)
_ONE = np.uint64(1)
_ZERO = np.uint64(0)


def gf64_mul_words(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise GF(2^64) product of two uint64 arrays (shift-and-reduce)."""
    a = a.astype(np.uint64, copy=True)
    b = b.astype(np.uint64, copy=True)
    res = np.zeros_like(a)
    for _ in range(64):
        res ^= np.where((b & _ONE).astype(bool), a, _ZERO)
        b >>= _ONE
        carry = (a >> np.uint64(63)).astype(bool)
        a <<= _ONE
        a ^= np.where(carry, _LOW_POLY64, _ZERO)
    return res


def pack_bits_to_words(bits: np.ndarray) -> np.ndarray:
    """Pack rows of bits into 64-bit words, leftmost bit highest, last word
    zero-padded on the right."""
    rows, length = bits.shape
    words = (length + 63) // 64
    padded = np.zeros((rows, words * 64), dtype=np.uint8)
    padded[:, :length] = bits
    as_bytes = np.packbits(padded, axis=1).reshape(rows, words, 8).astype(np.uint64)
    shifts = np.arange(56, -1, -8, dtype=np.uint64)
    return (as_bytes << shifts).sum(axis=2, dtype=np.uint64)


def mac64_words(keys: np.ndarray, message_bits: np.ndarray) -> np.ndarray:
    """Row-wise polynomial MAC over GF(2^64): blocks plus a length block,
    evaluated by Horner's rule. Matches `hashing.mac_tag` bit for bit."""
    rows, length = message_bits.shape
    blocks = pack_bits_to_words(message_bits) if length else np.zeros((rows, 0), dtype=np.uint64)
    acc = np.full(rows, np.uint64(length), dtype=np.uint64)
    for j in range(blocks.shape[1] - 1, -1, -1):
        acc = blocks[:, j] ^ gf64_mul_words(acc, keys)
    return gf64_mul_words(acc, keys)


def _nonzero_words(src: RandomSource, count: int) -> np.ndarray:
    words = src.raw_words(count)
    return np.where(words == 0, np.uint64(0xFFFFFFFFFFFFFFFF), words)


def fuzz_batch(
    xi: np.ndarray,
    mu: np.ndarray,
    k_prime: np.ndarray,
    r: np.ndarray,
    z: np.ndarray,
    flips: np.ndarray,
) -> dict:
    """One vectorized batch of tamper rounds over the identity code.

    Rows of the inputs are independent rounds: tag key words `xi`, plaintext
    bits `mu`, next-feedback-key bits `k_prime` (64 columns), padding bits
    `r`, mask bits `z`, and the adversary's wire flips. Returns the per-row
    verdicts and change flags.
    """
    batch, mu_bits = mu.shape
    tag_bits = 64
    ell = mu_bits + 2 * tag_bits
    tagged = np.concatenate([mu, k_prime], axis=1)
    tau_words = mac64_words(xi, tagged)
    tau = np.unpackbits(tau_words.astype(">u8").view(np.uint8)).reshape(batch, tag_bits)
    codeword = np.concatenate([tagged, tau, r], axis=1)

    wire = codeword ^ z
    unmasked = (wire ^ flips) ^ z

    mu_hat = unmasked[:, :mu_bits]
    k_hat = unmasked[:, mu_bits : mu_bits + tag_bits]
    tau_hat = unmasked[:, mu_bits + tag_bits : ell]
    check = mac64_words(xi, unmasked[:, : mu_bits + tag_bits])
    omega = check == pack_bits_to_words(tau_hat)[:, 0]

    message_changed = np.any(np.concatenate([mu_hat, k_hat], axis=1) != tagged, axis=1)
    plaintext_changed = np.any(mu_hat != mu, axis=1)
    return {
        "omega": omega,
        "message_changed": message_changed,
        "plaintext_changed": plaintext_changed,
    }


def tamper_fuzz(
    rounds: int,
    seed: int,
    mu_bits: int = 16,
    kappa: int = 8,
    flip_rate: float = 0.3,
    chunk: int = 1 << 16,
) -> dict:
    """Run `rounds` independent tamper rounds at tag length 64 and count
    false accepts (tag verifies but the recovered plaintext differs).

    Each round draws fresh keys, so the batch vectorizes; the per-round
    false-accept probability is key-evolution independent.
    """
    if rounds < 1:
        raise ValueError("rounds must be positive")
    tag_bits = 64
    n = mu_bits + 2 * tag_bits + kappa
    src = RandomSource(seed).stream("tamper_fuzz")

    false_accepts = 0
    forgeries = 0
    accepts = 0
    attempts = 0
    done = 0
    while done < rounds:
        batch = min(chunk, rounds - done)
        xi = _nonzero_words(src, batch)
        mu = src.bit_array(batch * mu_bits).reshape(batch, mu_bits)
        k_prime = src.bit_array(batch * tag_bits).reshape(batch, tag_bits)
        r = src.bit_array(batch * kappa).reshape(batch, kappa)
        z = src.bit_array(batch * n).reshape(batch, n)
        flips = src.bernoulli(flip_rate, batch * n).reshape(batch, n).astype(np.uint8)

        out = fuzz_batch(xi, mu, k_prime, r, z, flips)
        false_accepts += int(np.sum(out["omega"] & out["plaintext_changed"]))
        forgeries += int(np.sum(out["omega"] & out["message_changed"]))
        accepts += int(np.sum(out["omega"]))
        attempts += int(np.sum(out["message_changed"]))
        done += batch

    return {
        "kind": "tamper_fuzz",
        "rounds": rounds,
        "tag_bits": tag_bits,
        "mu_bits": mu_bits,
        "kappa": kappa,
        "codeword_bits": n,
        "flip_rate": flip_rate,
        "forgery_attempts": attempts,
        "accepts": accepts,
        "false_accepts": false_accepts,
        "successful_forgeries": forgeries,
        "seed": seed,
    }


def expected_intercept_error_rate(eta: float, encoding: Encoding) -> float:
    """Analytic payload error rate induced by measure-and-resend at rate eta:
    the attacked qubit errs only when the adversary's basis differs (prob
    1 - 1/|B|) and the receiver's coin then lands wrong (prob 1/2)."""
    return eta * (1.0 - 1.0 / encoding.alphabet_size) / 2.0


def intercept_resend_report(
    encoding: Encoding,
    eta: float,
    num_qubits: int,
    seed: int,
    params: ProtocolParams | None = None,
    code_kind: CodeKind = CodeKind.ORACLE,
    session_rounds: int = 0,
) -> dict:
    """Measure the induced payload error rate over `num_qubits` random
    qubits, and optionally the reject rate of a session run under the same
    attack."""
    src = RandomSource(seed).stream("intercept")
    bases = src.basis_string(encoding.alphabet_size, num_qubits)
    payloads = src.bits(num_qubits)
    qubits = QubitSequence.prepare(bases, payloads)
    channel = ChannelModel(ChannelKind.INTERCEPT_RESEND, eta=eta)
    received = transmit(channel, qubits, src.stream("channel"))
    errors = int(np.sum(received.payloads != qubits.payloads))

    report = {
        "kind": "intercept_resend",
        "encoding": encoding.value,
        "eta": eta,
        "qubits": num_qubits,
        "errors": errors,
        "induced_error_rate": errors / num_qubits,
        "expected_error_rate": expected_intercept_error_rate(eta, encoding),
        "seed": seed,
    }
    if session_rounds > 0:
        if params is None:
            raise ValueError("session_rounds > 0 requires protocol params")
        session = run_session(params, channel, code_kind, session_rounds, seed)
        report["session_rounds"] = session_rounds
        report["session_reject_rate"] = 1.0 - session.summary.accept_rate
    return report
