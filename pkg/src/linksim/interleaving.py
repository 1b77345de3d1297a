"""Interleavers and scramblers operating on the last axis."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import RngStream


@dataclass(frozen=True)
class InterleaverSpec:
    """Bijective permutation description of a fixed length.

    ``row-column(rows, cols)`` writes row-major and reads column-major;
    ``random(seed)`` draws a seeded uniform permutation.
    """

    kind: str
    length: int
    rows: Optional[int] = None
    cols: Optional[int] = None
    seed: Optional[int] = None

    def __post_init__(self):
        if self.length < 1:
            raise ValueError("length must be >= 1")
        if self.kind == "row-column":
            if self.rows is None or self.cols is None:
                raise ValueError("row-column interleaver needs rows and cols")
            if self.rows * self.cols != self.length:
                raise ValueError(
                    f"rows*cols = {self.rows * self.cols} != length {self.length}"
                )
        elif self.kind == "random":
            if self.seed is None:
                raise ValueError("random interleaver needs a seed")
        else:
            raise ValueError(f"unknown interleaver kind {self.kind!r}")

    def permutation(self) -> np.ndarray:
        if self.kind == "row-column":
            grid = np.arange(self.length).reshape(self.rows, self.cols)
            return grid.T.reshape(-1)
        rng = RngStream(self.seed, 0).generator()
        return rng.permutation(self.length)

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "length": self.length}
        if self.kind == "row-column":
            out.update(rows=self.rows, cols=self.cols)
        else:
            out.update(seed=self.seed)
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "InterleaverSpec":
        return cls(**d)


def interleave(x: np.ndarray, spec: InterleaverSpec) -> np.ndarray:
    """Apply the permutation along the last axis."""
    x = np.asarray(x)
    if x.shape[-1] != spec.length:
        raise ValueError(f"last axis {x.shape[-1]} != interleaver length {spec.length}")
    return x[..., spec.permutation()]


def deinterleave(x: np.ndarray, spec: InterleaverSpec) -> np.ndarray:
    """Inverse of :func:`interleave`."""
    x = np.asarray(x)
    if x.shape[-1] != spec.length:
        raise ValueError(f"last axis {x.shape[-1]} != interleaver length {spec.length}")
    inverse = np.argsort(spec.permutation())
    return x[..., inverse]


def scrambling_sequence(length: int, seed: int) -> np.ndarray:
    """The seeded pseudo-random bit sequence used by the scrambler."""
    return RngStream(seed, 0).generator().integers(0, 2, size=length, dtype=np.uint8)


def scramble(x: np.ndarray, seed: int) -> np.ndarray:
    """Scramble bits (XOR) or LLRs (sign flip) with a seeded sequence.

    Self-inverse: applying it twice with the same seed is the identity, so
    :func:`descramble` is an alias.
    """
    x = np.asarray(x)
    seq = scrambling_sequence(x.shape[-1], seed)
    if np.issubdtype(x.dtype, np.integer):
        return x ^ seq
    return np.where(seq.astype(bool), -x, x)


def descramble(x: np.ndarray, seed: int) -> np.ndarray:
    return scramble(x, seed)
