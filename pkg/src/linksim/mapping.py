"""Constellations, bit-to-symbol mapping and exact soft demapping.

Bit grouping is big-endian: the first bit of each group is the most
significant bit of the point label.  For QAM, even label-bit indices drive
the in-phase axis and odd indices the quadrature axis, with per-axis Gray
labeling and the all-zero label on the most positive level of each axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _gray_decode(g: np.ndarray) -> np.ndarray:
    """Inverse of the binary-reflected Gray code g = i ^ (i >> 1)."""
    i = g.copy()
    s = 1
    while s < 64:
        i ^= i >> s
        s *= 2
    return i


def _labels_to_bits(num_bits: int) -> np.ndarray:
    """Bit table of shape [2**num_bits, num_bits], MSB first."""
    labels = np.arange(2**num_bits)
    shifts = np.arange(num_bits - 1, -1, -1)
    return ((labels[:, None] >> shifts[None, :]) & 1).astype(np.uint8)


def _qam_points(num_bits: int) -> np.ndarray:
    if num_bits % 2 != 0:
        raise ValueError("qam requires an even number of bits per symbol")
    na = num_bits // 2
    bits = _labels_to_bits(num_bits)
    # Even bit positions -> I label, odd -> Q label (each MSB first).
    weights = 1 << np.arange(na - 1, -1, -1)
    lab_i = bits[:, 0::2] @ weights
    lab_q = bits[:, 1::2] @ weights
    # Per-axis Gray labels; level index 0 is the most positive amplitude.
    idx_i = _gray_decode(lab_i.astype(np.int64))
    idx_q = _gray_decode(lab_q.astype(np.int64))
    m_axis = 1 << na
    amp_i = (m_axis - 1) - 2 * idx_i
    amp_q = (m_axis - 1) - 2 * idx_q
    return amp_i.astype(np.complex128) + 1j * amp_q.astype(np.complex128)


def _psk_points(num_bits: int) -> np.ndarray:
    order = 1 << num_bits
    labels = np.arange(order)
    idx = _gray_decode(labels.astype(np.int64))
    return np.exp(2j * np.pi * idx / order)


@dataclass
class Constellation:
    """Ordered complex points indexed by an integer bit label."""

    kind: str
    num_bits_per_symbol: int
    points: np.ndarray = field(default=None)
    normalized: bool = True

    def __post_init__(self):
        m = self.num_bits_per_symbol
        if m < 1:
            raise ValueError("num_bits_per_symbol must be >= 1")
        if self.points is None:
            if self.kind == "qam":
                self.points = _qam_points(m)
            elif self.kind == "psk":
                self.points = _psk_points(m)
            else:
                raise ValueError(f"unknown constellation kind {self.kind!r}")
        else:
            self.kind = "custom" if self.kind not in ("qam", "psk") else self.kind
            self.points = np.asarray(self.points, dtype=np.complex128)
        if self.points.shape != (1 << m,):
            raise ValueError(
                f"expected {1 << m} points, got shape {self.points.shape}"
            )
        if self.normalized:
            energy = np.mean(np.abs(self.points) ** 2)
            self.points = self.points / np.sqrt(energy)
        # [2**m, m] bit table used by the demappers.
        self._bits = _labels_to_bits(m)

    @property
    def bit_table(self) -> np.ndarray:
        return self._bits


def map_bits(bits: np.ndarray, constellation: Constellation) -> np.ndarray:
    """Map consecutive m-bit groups (big-endian) to constellation points."""
    bits = np.asarray(bits)
    m = constellation.num_bits_per_symbol
    if bits.shape[-1] % m != 0:
        raise ValueError(
            f"bit count {bits.shape[-1]} not divisible by {m} bits/symbol"
        )
    groups = bits.reshape(*bits.shape[:-1], -1, m).astype(np.int64)
    weights = 1 << np.arange(m - 1, -1, -1)
    labels = groups @ weights
    return constellation.points[labels]


def _demap(y, no, constellation, prior, mode):
    y = np.asarray(y)
    no = np.asarray(no, dtype=np.float64)
    if np.any(no <= 0):
        raise ValueError("demap: noise variance must be > 0")
    m = constellation.num_bits_per_symbol
    points = constellation.points
    bits = constellation._bits.astype(np.float64)  # [2**m, m]

    # Squared-distance log metrics, one per hypothesis point.
    d2 = np.abs(y[..., None] - points) ** 2
    logits = -d2 / np.broadcast_to(no, y.shape)[..., None]

    if prior is not None:
        prior = np.asarray(prior, dtype=np.float64)
        # Accept a flat prior of shape [m] or one prior per bit position,
        # broadcastable against the output shape [..., num_symbols, m].
        if prior.shape == (m,):
            logits = logits + bits @ prior
        else:
            prior = prior.reshape(*y.shape, m)
            logits = logits + np.einsum("...m,pm->...p", prior, bits)

    mask1 = constellation._bits.T.astype(bool)  # [m, 2**m]
    l1 = np.where(mask1[(None,) * y.ndim], logits[..., None, :], -np.inf)
    l0 = np.where(~mask1[(None,) * y.ndim], logits[..., None, :], -np.inf)
    if mode == "app":
        from scipy.special import logsumexp

        llr = logsumexp(l1, axis=-1) - logsumexp(l0, axis=-1)
    else:
        llr = np.max(l1, axis=-1) - np.max(l0, axis=-1)
    # Flatten the per-symbol bit axis back into a bit stream.
    return llr.reshape(*y.shape[:-1], -1)


def demap_app(y, no, constellation: Constellation, prior=None) -> np.ndarray:
    """Exact a-posteriori LLRs ln(Pr(b=1)/Pr(b=0)) with optional priors.

    Computed with max-normalized log-sum-exp for numerical stability.  The
    output has the same layout as the mapper input: m consecutive LLRs per
    received symbol.
    """
    return _demap(y, no, constellation, prior, "app")


def demap_maxlog(y, no, constellation: Constellation, prior=None) -> np.ndarray:
    """Max-log approximation of :func:`demap_app`."""
    return _demap(y, no, constellation, prior, "maxlog")
