"""Batched array conventions, seeded random streams, unit conversions and
error-rate metrics shared by all blocks.

Every block in this library operates on plain numpy arrays whose leading
axis is the Monte Carlo batch dimension, i.e. independent trials that are
simulated in parallel.  Bits are stored as ``uint8`` arrays with values in
{0, 1}; soft values are real floats, signals are complex.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Saturation magnitude for log-likelihood ratios.  The global convention is
# L = ln(Pr(b=1) / Pr(b=0)), hard decision 1 iff L > 0 (ties decide 0).
LLR_MAX = 40.0

_MASK64 = (1 << 64) - 1
# Odd multiplier (golden-ratio based) used to derive child stream ids.
_STREAM_MIX = 0x9E3779B97F4A7C15


@dataclass(frozen=True)
class RngStream:
    """Counter-based random stream identified by ``(seed, stream_id)``.

    Streams built from the same pair produce identical draw sequences on
    every platform and for any worker partitioning, which is what makes
    simulations reproducible independently of the degree of parallelism.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        key = ((self.seed & _MASK64) << 64) | (self.stream_id & _MASK64)
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, index: int) -> "RngStream":
        """Derive a decorrelated sub-stream, e.g. one per simulation block."""
        mixed = ((self.stream_id * _STREAM_MIX) + index + 1) & _MASK64
        return RngStream(self.seed, mixed)


def binary_source(shape, rng: RngStream) -> np.ndarray:
    """Draw i.i.d. uniform bits of the given shape, deterministically."""
    shape = tuple(int(s) for s in np.atleast_1d(np.asarray(shape, dtype=np.int64)))
    if len(shape) == 0:
        raise ValueError("binary_source: shape must not be empty")
    if any(s < 1 for s in shape):
        raise ValueError(f"binary_source: all dimensions must be >= 1, got {shape}")
    return rng.generator().integers(0, 2, size=shape, dtype=np.uint8)


def ebnodb2no(ebno_db: float, bits_per_symbol: int, coderate: float) -> float:
    """Convert Eb/N0 in dB to a complex noise variance N0.

    Assumes unit average symbol energy, so
    ``N0 = 1 / (10^(ebno_db/10) * coderate * bits_per_symbol)``.
    """
    if bits_per_symbol < 1:
        raise ValueError("ebnodb2no: bits_per_symbol must be >= 1")
    if not 0.0 < coderate <= 1.0:
        raise ValueError(f"ebnodb2no: coderate must be in (0, 1], got {coderate}")
    ebno = 10.0 ** (float(ebno_db) / 10.0)
    return 1.0 / (ebno * coderate * bits_per_symbol)


def _check_same_shape(b: np.ndarray, b_hat: np.ndarray, name: str) -> None:
    if b.shape != b_hat.shape:
        raise ValueError(f"{name}: shape mismatch {b.shape} vs {b_hat.shape}")


def compute_ber(b: np.ndarray, b_hat: np.ndarray) -> float:
    """Fraction of positions where the two bit arrays differ."""
    b = np.asarray(b)
    b_hat = np.asarray(b_hat)
    _check_same_shape(b, b_hat, "compute_ber")
    return float(np.mean(b != b_hat))


def compute_bler(b: np.ndarray, b_hat: np.ndarray) -> float:
    """Fraction of batch rows (axis 0) containing at least one bit error."""
    b = np.asarray(b)
    b_hat = np.asarray(b_hat)
    _check_same_shape(b, b_hat, "compute_bler")
    errors = (b != b_hat).reshape(b.shape[0], -1)
    return float(np.mean(np.any(errors, axis=1)))


def count_errors(b: np.ndarray, b_hat: np.ndarray) -> tuple[int, int]:
    """Return (bit errors, block errors) between two batched bit arrays."""
    b = np.asarray(b)
    b_hat = np.asarray(b_hat)
    _check_same_shape(b, b_hat, "count_errors")
    diff = (b != b_hat).reshape(b.shape[0], -1)
    return int(diff.sum()), int(np.any(diff, axis=1).sum())


def hard_decide(llr: np.ndarray) -> np.ndarray:
    """Hard decision under the global LLR convention: 1 iff L > 0."""
    return (np.asarray(llr) > 0).astype(np.uint8)
