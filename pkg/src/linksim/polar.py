"""Polar and Reed-Muller codes: CRC attachment, code construction,
transform encoding, and successive-cancellation (list) decoding.

Block lengths are powers of two up to 1024, natural (non-bit-reversed)
order.  Construction freezes the least reliable synthetic channels
according to the bundled length-1024 reliability sequence; Reed-Muller
codes reuse the same machinery with a row-weight information set.
"""

from __future__ import annotations

import functools
import importlib.resources
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import hard_decide

_MAX_N = 1024


@dataclass(frozen=True)
class CrcPolynomial:
    """Monic binary CRC generator polynomial, MSB-first coefficients."""

    name: str
    coefficients: tuple  # degree + 1 bits, leading and trailing conventions below

    def __post_init__(self):
        coeffs = tuple(int(c) & 1 for c in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        if len(coeffs) < 2 or coeffs[0] != 1:
            raise ValueError("polynomial must be monic of degree >= 1")

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1


def _poly_from_int(name: str, value: int, degree: int) -> CrcPolynomial:
    bits = [(value >> i) & 1 for i in range(degree, -1, -1)]
    return CrcPolynomial(name, tuple(bits))


# Generator polynomials used by 5G control/data channels.
CRC_POLYNOMIALS = {
    "crc6": _poly_from_int("crc6", 0x61, 6),        # x^6+x^5+1
    "crc11": _poly_from_int("crc11", 0xE21, 11),    # x^11+x^10+x^9+x^5+1
    "crc16": _poly_from_int("crc16", 0x11021, 16),  # CCITT x^16+x^12+x^5+1
    "crc24a": _poly_from_int("crc24a", 0x1864CFB, 24),
    "parity": CrcPolynomial("parity", (1, 1)),      # x+1, single parity bit
}


def _crc_remainder(bits: np.ndarray, poly: CrcPolynomial) -> np.ndarray:
    """Polynomial-division remainder of bits * x^degree, per batch row."""
    bits = np.atleast_2d(np.asarray(bits, dtype=np.uint8))
    deg = poly.degree
    taps = np.asarray(poly.coefficients[1:], dtype=np.uint8)  # below the lead
    rem = np.zeros((bits.shape[0], deg), dtype=np.uint8)
    for t in range(bits.shape[1]):
        feedback = rem[:, 0] ^ bits[:, t]
        rem[:, :-1] = rem[:, 1:]
        rem[:, -1] = 0
        rem ^= feedback[:, None] * taps
    return rem


def crc_attach(bits: np.ndarray, poly: CrcPolynomial) -> np.ndarray:
    """Append the CRC remainder: output rows all satisfy :func:`crc_check`."""
    bits = np.atleast_2d(np.asarray(bits, dtype=np.uint8))
    if bits.shape[1] < 1:
        raise ValueError("crc_attach: need at least one payload bit")
    return np.concatenate([bits, _crc_remainder(bits, poly)], axis=1)


def crc_check(frame: np.ndarray, poly: CrcPolynomial) -> np.ndarray:
    """Boolean per batch row: does the frame divide the generator?"""
    frame = np.atleast_2d(np.asarray(frame, dtype=np.uint8))
    payload = frame[:, : frame.shape[1] - poly.degree]
    expected = _crc_remainder(payload, poly)
    return np.all(expected == frame[:, frame.shape[1] - poly.degree:], axis=1)


@functools.lru_cache(maxsize=1)
def reliability_sequence() -> np.ndarray:
    """Bundled length-1024 index list, least reliable first."""
    text = (
        importlib.resources.files("linksim.data")
        .joinpath("polar_reliability_1024.txt")
        .read_text()
    )
    seq = np.asarray([int(t) for t in text.split()], dtype=np.int64)
    if len(seq) != _MAX_N or set(seq.tolist()) != set(range(_MAX_N)):
        raise ValueError("corrupt reliability sequence asset")
    return seq


@dataclass
class PolarCode:
    """Static polar code description: block length, frozen and info sets."""

    block_length: int
    frozen_set: np.ndarray
    crc: Optional[CrcPolynomial] = None
    info_set: np.ndarray = field(init=False)

    def __post_init__(self):
        n = self.block_length
        if n < 2 or n & (n - 1) or n > _MAX_N:
            raise ValueError(f"block length {n} must be a power of two <= {_MAX_N}")
        frozen = np.unique(np.asarray(self.frozen_set, dtype=np.int64))
        if len(frozen) and (frozen.min() < 0 or frozen.max() >= n):
            raise ValueError("frozen index out of range")
        self.frozen_set = frozen
        mask = np.ones(n, dtype=bool)
        mask[frozen] = False
        self.info_set = np.nonzero(mask)[0]

    @property
    def k(self) -> int:
        return len(self.info_set)

    @property
    def num_stages(self) -> int:
        return int(np.log2(self.block_length))


def polar5g_construct(k: int, n: int, crc: Optional[CrcPolynomial] = None) -> PolarCode:
    """Construct an (n, k) polar code from the bundled reliability order.

    This build restricts n to powers of two (no sub-block interleaving,
    puncturing, or repetition).  When a CRC is given, k counts the
    non-frozen positions, i.e. payload plus CRC bits.
    """
    if n & (n - 1) or n < 2:
        raise ValueError(f"unsupported block length n={n}: must be a power of two")
    if not 0 < k < n:
        raise ValueError(f"need 0 < k < n, got k={k}, n={n}")
    if n > _MAX_N:
        raise ValueError(f"block length {n} exceeds {_MAX_N}")
    order = reliability_sequence()
    restricted = order[order < n]
    frozen = restricted[: n - k]
    return PolarCode(block_length=n, frozen_set=frozen, crc=crc)


def rm_construct(r: int, m: int) -> PolarCode:
    """Reed-Muller RM(r, m) as a polar code: freeze rows of weight < 2^(m-r)."""
    if not 0 <= r <= m:
        raise ValueError(f"need 0 <= r <= m, got r={r}, m={m}")
    if m > 10 or m < 1:
        raise ValueError("m must be in 1..10")
    n = 1 << m
    idx = np.arange(n)
    popcount = np.array([bin(i).count("1") for i in idx])
    frozen = idx[popcount < m - r]
    return PolarCode(block_length=n, frozen_set=frozen)


def polar_transform(u: np.ndarray) -> np.ndarray:
    """Apply the butterfly transform u -> u F^{(x) n} over GF(2)."""
    u = np.atleast_2d(np.asarray(u, dtype=np.uint8))
    n = u.shape[-1]
    if n & (n - 1):
        raise ValueError("length must be a power of two")
    x = u.copy()
    h = 1
    while h < n:
        x = x.reshape(-1, n // (2 * h), 2, h)
        x[:, :, 0, :] ^= x[:, :, 1, :]
        x = x.reshape(-1, n)
        h *= 2
    return x.reshape(u.shape)


def polar_encode(info_bits: np.ndarray, code: PolarCode) -> np.ndarray:
    """Place info bits on the info set, zeros on frozen, and transform."""
    info_bits = np.atleast_2d(np.asarray(info_bits, dtype=np.uint8))
    if info_bits.shape[-1] != code.k:
        raise ValueError(f"expected {code.k} info bits, got {info_bits.shape[-1]}")
    u = np.zeros((info_bits.shape[0], code.block_length), dtype=np.uint8)
    u[:, code.info_set] = info_bits
    return polar_transform(u)


def _f_minsum(a, b):
    return np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))


def _f_exact(a, b):
    # Numerically-safe boxplus of ln(p0/p1) LLRs.
    return (
        np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
        + np.log1p(np.exp(-np.abs(a + b)))
        - np.log1p(np.exp(-np.abs(a - b)))
    )


def _sc_recurse(alpha, frozen_mask, f_func):
    """SC recursion on internal ln(p0/p1) LLRs; returns (u, beta)."""
    n = alpha.shape[-1]
    if n == 1:
        if frozen_mask[0]:
            u = np.zeros(alpha.shape[:-1] + (1,), dtype=np.uint8)
        else:
            u = (alpha < 0).astype(np.uint8)
        return u, u.copy()
    h = n // 2
    a, b = alpha[..., :h], alpha[..., h:]
    u_left, beta_left = _sc_recurse(f_func(a, b), frozen_mask[:h], f_func)
    g = b + (1.0 - 2.0 * beta_left) * a
    u_right, beta_right = _sc_recurse(g, frozen_mask[h:], f_func)
    u = np.concatenate([u_left, u_right], axis=-1)
    beta = np.concatenate([beta_left ^ beta_right, beta_right], axis=-1)
    return u, beta


def polar_sc_decode(llr: np.ndarray, code: PolarCode, exact: bool = False) -> np.ndarray:
    """Successive-cancellation decoding, [batch, N] LLRs -> [batch, k] bits.

    Uses the min-sum f update by default; ``exact=True`` switches to the
    exact boxplus.
    """
    llr = np.atleast_2d(np.asarray(llr, dtype=np.float64))
    n = code.block_length
    if llr.shape[-1] != n:
        raise ValueError(f"expected {n} LLRs, got {llr.shape[-1]}")
    frozen_mask = np.zeros(n, dtype=bool)
    frozen_mask[code.frozen_set] = True
    # Internal sign convention is ln(p0/p1).
    u, _ = _sc_recurse(-llr, frozen_mask, _f_exact if exact else _f_minsum)
    return u[:, code.info_set]


def polar_scl_decode(
    llr: np.ndarray,
    code: PolarCode,
    list_size: int = 8,
    use_crc: bool = False,
    exact: bool = False,
) -> np.ndarray:
    """Successive-cancellation list decoding with path-metric pruning.

    Returns the k bits on the information set of the selected path, CRC
    bits included when the code carries one.  With ``use_crc`` the most
    likely CRC-passing path is returned (best metric as fallback when no
    path passes).  ``list_size=1`` reduces exactly to SC decoding.
    """
    if list_size < 1:
        raise ValueError("list_size must be >= 1")
    if use_crc and code.crc is None:
        raise ValueError("use_crc requires a code constructed with a CRC")
    llr = np.atleast_2d(np.asarray(llr, dtype=np.float64))
    n = code.block_length
    if llr.shape[-1] != n:
        raise ValueError(f"expected {n} LLRs, got {llr.shape[-1]}")

    batch = llr.shape[0]
    stages = code.num_stages
    size = list_size
    f_func = _f_exact if exact else _f_minsum
    frozen_mask = np.zeros(n, dtype=bool)
    frozen_mask[code.frozen_set] = True

    # alpha[d]: LLRs of the active node at depth d, [batch, L, n >> d].
    alpha = [np.zeros((batch, size, n >> d)) for d in range(stages + 1)]
    alpha[0][:] = -llr[:, None, :]  # internal ln(p0/p1)
    # beta_store[d]: completed left-child partial sums at depth d.
    beta_store = [None] + [
        np.zeros((batch, size, n >> d), dtype=np.uint8) for d in range(1, stages + 1)
    ]
    us = np.zeros((batch, size, n), dtype=np.uint8)
    metrics = np.full((batch, size), np.inf)
    metrics[:, 0] = 0.0
    rows = np.arange(batch)[:, None]

    def push_alpha(from_depth, leaf):
        for d in range(from_depth, stages):
            a = alpha[d]
            h = a.shape[-1] // 2
            left, right = a[..., :h], a[..., h:]
            if (leaf >> (stages - d - 1)) & 1:
                alpha[d + 1] = right + (1.0 - 2.0 * beta_store[d + 1]) * left
            else:
                alpha[d + 1] = f_func(left, right)

    prev = 0
    for leaf in range(n):
        if leaf == 0:
            push_alpha(0, 0)
        else:
            changed = prev ^ leaf
            ancestor = stages - changed.bit_length()
            push_alpha(ancestor, leaf)
        prev = leaf

        a = alpha[stages][..., 0]  # [batch, L]
        if frozen_mask[leaf]:
            metrics = metrics + np.maximum(-a, 0.0)
            us[:, :, leaf] = 0
            beta_leaf = np.zeros((batch, size, 1), dtype=np.uint8)
        else:
            pen0 = np.maximum(-a, 0.0)  # decide 0 against a negative LLR
            pen1 = np.maximum(a, 0.0)
            # Candidate order (path, bit): stable sort keeps lower path
            # index on metric ties.
            cand = np.stack([metrics + pen0, metrics + pen1], axis=-1)
            cand = cand.reshape(batch, 2 * size)
            order = np.argsort(cand, axis=1, kind="stable")[:, :size]
            src = order >> 1
            bit = (order & 1).astype(np.uint8)
            metrics = np.take_along_axis(cand, order, axis=1)
            us = us[rows, src]
            us[:, :, leaf] = bit
            for d in range(1, stages + 1):
                beta_store[d] = beta_store[d][rows, src]
                alpha[d] = alpha[d][rows, src]
            beta_leaf = bit[..., None]

        # Propagate partial sums up while leaving right children.
        b_cur = beta_leaf
        depth = stages
        while depth > 0 and (leaf >> (stages - depth)) & 1:
            left = beta_store[depth]
            b_cur = np.concatenate([left ^ b_cur, b_cur], axis=-1)
            depth -= 1
        if depth > 0:
            beta_store[depth] = b_cur

    decisions = us[:, :, code.info_set]  # [batch, L, k]
    if use_crc:
        flat = decisions.reshape(batch * size, -1)
        valid = crc_check(flat, code.crc).reshape(batch, size)
        gated = np.where(valid, metrics, np.inf)
        has_valid = np.any(valid, axis=1)
        best = np.where(has_valid, np.argmin(gated, axis=1), np.argmin(metrics, axis=1))
    else:
        best = np.argmin(metrics, axis=1)
    return decisions[np.arange(batch), best]
