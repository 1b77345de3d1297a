"""LDPC codes: belief-propagation decoding variants, 5G-style quasi-cyclic
codes with rate matching, and EXIT-chart mutual information.

The decoder works on any :class:`~linksim.alist.ParityCheckMatrix` under a
flooding schedule.  The 5G-style code expands a bundled base graph by
circulant lifting; rate matching punctures the first ``2Z`` systematic
bits and reads ``n`` consecutive bits from the circular buffer
(redundancy version 0), wrapping into repetition when ``n`` exceeds the
buffer.
"""

from __future__ import annotations

import functools
import importlib.resources
from dataclasses import dataclass, field

import numpy as np

from .alist import ParityCheckMatrix
from .core import LLR_MAX, hard_decide

BP_VARIANTS = ("sum-product", "min-sum", "scaled-min-sum")

# Valid lifting sizes: a * 2^j with a in {2,...,15 odd-ish set}, capped at 384.
_LIFT_BASES = (2, 3, 5, 7, 9, 11, 13, 15)
LIFTING_SIZES = sorted(
    {a * (1 << j) for a in _LIFT_BASES for j in range(8) if a * (1 << j) <= 384}
)


class _EdgeGraph:
    """Flat edge arrays for vectorized flooding-schedule message passing."""

    def __init__(self, pcm: ParityCheckMatrix):
        var_idx = []
        chk_starts = [0]
        for variables in pcm.row_adj:
            var_idx.extend(int(v) for v in variables)
            chk_starts.append(len(var_idx))
        starts = np.asarray(chk_starts, dtype=np.int64)  # length m + 1
        self.n = pcm.n
        self.m = pcm.m
        self.var_idx = np.asarray(var_idx, dtype=np.int64)
        self.chk_starts = starts[:-1]
        self.chk_id = np.repeat(np.arange(pcm.m), np.diff(starts))
        self.num_edges = len(self.var_idx)
        # Edge order grouped by variable, for segment sums over each
        # variable's incident edges (np.add.at is far slower).
        self.var_order = np.argsort(self.var_idx, kind="stable")
        sorted_vars = self.var_idx[self.var_order]
        boundaries = np.flatnonzero(np.diff(sorted_vars)) + 1
        self.var_starts = np.concatenate([[0], boundaries])
        self.var_ids = sorted_vars[self.var_starts]


def _edge_graph(pcm: ParityCheckMatrix) -> _EdgeGraph:
    graph = getattr(pcm, "_edge_graph", None)
    if graph is None:
        graph = _EdgeGraph(pcm)
        pcm._edge_graph = graph
    return graph


def _segment_min2(mag: np.ndarray, starts: np.ndarray, chk_id: np.ndarray):
    """Per-segment (min, runner-up min, is-the-min mask) along the last axis."""
    min1 = np.minimum.reduceat(mag, starts, axis=-1)
    min1_e = min1[..., chk_id]
    at_min = mag == min1_e
    # Count of elements attaining the minimum, per segment.
    counts = np.add.reduceat(at_min.astype(np.int64), starts, axis=-1)
    masked = np.where(at_min, np.inf, mag)
    min2 = np.minimum.reduceat(masked, starts, axis=-1)
    return min1, min2, at_min, counts


_PHI_MIN = 1e-12


def _phi(x: np.ndarray) -> np.ndarray:
    # phi(x) = -log(tanh(x/2)); self-inverse on (0, inf).
    x = np.clip(x, _PHI_MIN, LLR_MAX)
    return -np.log(np.tanh(x / 2.0))


def bp_decode(
    llr: np.ndarray,
    pcm: ParityCheckMatrix,
    num_iter: int = 20,
    variant: str = "sum-product",
    scale: float = 0.75,
    early_stop: bool = True,
):
    """Flooding-schedule belief propagation on a parity-check matrix.

    Args:
        llr: channel LLRs ln(p1/p0), shape [batch, n].
        pcm: parity-check matrix.
        num_iter: number of flooding iterations (>= 1).
        variant: "sum-product", "min-sum" or "scaled-min-sum".
        scale: message scaling factor for "scaled-min-sum".
        early_stop: freeze rows as soon as their syndrome is satisfied.

    Returns:
        (llr_out, hard): total output LLRs and hard decisions, both
        [batch, n].
    """
    if variant not in BP_VARIANTS:
        raise ValueError(f"unknown BP variant {variant!r}")
    if num_iter < 1:
        raise ValueError("num_iter must be >= 1")
    llr = np.atleast_2d(np.asarray(llr))
    if llr.shape[-1] != pcm.n:
        raise ValueError(f"LLR length {llr.shape[-1]} does not match n={pcm.n}")

    g = _edge_graph(pcm)
    batch = llr.shape[0]
    # Internal sign convention ln(p0/p1) keeps the textbook check update.
    # Float32 inputs are processed in float32 (half the memory traffic).
    dtype = llr.dtype if llr.dtype in (np.float32, np.float64) else np.float64
    channel = -llr.astype(dtype)
    total = channel.copy()
    c2v = np.zeros((batch, g.num_edges), dtype=dtype)
    alpha = scale if variant == "scaled-min-sum" else 1.0

    final = total.copy()
    # Rows whose syndrome is already satisfied get frozen and dropped from
    # the working set, so converged batches cost nothing.
    active = np.arange(batch)

    for _ in range(num_iter):
        v2c = total[:, g.var_idx] - c2v

        signs = np.signbit(v2c)
        par = np.bitwise_xor.reduceat(signs, g.chk_starts, axis=-1)
        sign_excl = np.where(par[:, g.chk_id] ^ signs, -1.0, 1.0)

        mag = np.abs(v2c)
        if variant == "sum-product":
            pmag = _phi(mag)
            psum = np.add.reduceat(pmag, g.chk_starts, axis=-1)
            mag_excl = _phi(np.clip(psum[:, g.chk_id] - pmag, _PHI_MIN, None))
            c2v = sign_excl * np.clip(mag_excl, 0.0, 30.0)
        else:
            min1, min2, at_min, counts = _segment_min2(mag, g.chk_starts, g.chk_id)
            unique_min = (counts == 1)[:, g.chk_id]
            excl = np.where(at_min & unique_min, min2[:, g.chk_id], min1[:, g.chk_id])
            c2v = alpha * sign_excl * excl

        total = channel.copy()
        sums = np.add.reduceat(c2v[:, g.var_order], g.var_starts, axis=-1)
        total[:, g.var_ids] += sums
        total = np.clip(total, -LLR_MAX, LLR_MAX)

        if early_stop:
            hard_now = np.signbit(total)[:, g.var_idx]
            syn = np.bitwise_xor.reduceat(hard_now, g.chk_starts, axis=-1)
            ok = ~np.any(syn, axis=1)
            if np.any(ok):
                final[active[ok]] = total[ok]
                keep = ~ok
                active = active[keep]
                if active.size == 0:
                    break
                channel = channel[keep]
                total = total[keep]
                c2v = c2v[keep]

    if active.size:
        final[active] = total
    llr_out = -final
    return llr_out, hard_decide(llr_out)


def exit_mutual_information(llr: np.ndarray, bits: np.ndarray) -> float:
    """Sample-mean mutual information between LLRs and the true bits.

    Uses I = 1 - E[log2(1 + exp(-(2b-1) L))], clipped to [0, 1].
    """
    llr = np.asarray(llr, dtype=np.float64)
    bits = np.asarray(bits)
    if llr.size == 0:
        raise ValueError("exit_mutual_information: empty input")
    if llr.shape != bits.shape:
        raise ValueError("exit_mutual_information: shape mismatch")
    x = np.clip(-(2.0 * bits - 1.0) * llr, -LLR_MAX, LLR_MAX)
    info = 1.0 - np.mean(np.log2(1.0 + np.exp(x)))
    return float(np.clip(info, 0.0, 1.0))


def _load_base_graph(name: str):
    text = (
        importlib.resources.files("linksim.data").joinpath(name).read_text()
    )
    entries = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        r, c, s = (int(t) for t in line.split())
        entries[(r, c)] = s
    return entries


@functools.lru_cache(maxsize=None)
def _base_graph(bg: int):
    if bg == 1:
        return _load_base_graph("ldpc_bg1.txt"), 46, 68, 22
    if bg == 2:
        return _load_base_graph("ldpc_bg2.txt"), 42, 52, 10
    raise ValueError(f"unknown base graph {bg}")


@dataclass
class LdpcCode5G:
    """5G-style lifted LDPC code with rate matching.

    Selects base graph 2 for short blocks (k <= 292) and base graph 1
    otherwise, then the smallest valid lifting size Z with k_b * Z >= k.
    """

    k: int
    n: int
    base_graph: int = field(init=False)
    z: int = field(init=False)

    def __post_init__(self):
        if self.k < 1 or self.n <= self.k:
            raise ValueError(
                f"unsupported (k={self.k}, n={self.n}): need 0 < k < n"
            )
        self.base_graph = 2 if self.k <= 292 else 1
        entries, m_b, n_b, kb = _base_graph(self.base_graph)
        if self.k > kb * 384:
            raise ValueError(f"k={self.k} too large for both base graphs")
        z = next((z for z in LIFTING_SIZES if kb * z >= self.k), None)
        if z is None:
            raise ValueError(f"no lifting size supports k={self.k}")
        self.z = z
        self._entries = entries
        self._mb, self._nb, self._kb = m_b, n_b, kb
        self._build()

    def _build(self):
        z, kb = self.z, self._kb
        self.k_full = kb * z
        self.n_full = self._nb * z
        self.m_full = self._mb * z
        self.num_fillers = self.k_full - self.k
        # Filler bits occupy the tail of the systematic part.
        self.filler_idx = np.arange(self.k, self.k_full)
        keep = np.ones(self.n_full, dtype=bool)
        keep[self.filler_idx] = False
        keep[: 2 * z] = False  # punctured systematic bits, never sent
        buffer = np.nonzero(keep)[0]
        self.transmit_idx = buffer[np.arange(self.n) % len(buffer)]

        # Dense systematic block of the lifted matrix, used for encoding.
        sys_entries = [(r, c, s) for (r, c), s in self._entries.items() if c < kb]
        h_sys = np.zeros((self.m_full, self.k_full), dtype=np.uint8)
        for r, c, s in sys_entries:
            rows = r * z + np.arange(z)
            cols = c * z + (np.arange(z) + s) % z
            h_sys[rows, cols] ^= 1
        self._h_sys = h_sys
        # Core parity connections of extension rows (rows >= 4).
        self._ext_parity = [
            (r, c - kb, s % z)
            for (r, c), s in self._entries.items()
            if kb <= c < kb + 4 and r >= 4
        ]
        self._pcm = None

    @property
    def coderate(self) -> float:
        return self.k / self.n

    @property
    def pcm(self) -> ParityCheckMatrix:
        """Expanded parity-check matrix of the mother code."""
        if self._pcm is None:
            z = self.z
            col_adj = [[] for _ in range(self.n_full)]
            row_adj = [[] for _ in range(self.m_full)]
            for (r, c), s in self._entries.items():
                for i in range(z):
                    row = r * z + i
                    col = c * z + (i + s) % z
                    col_adj[col].append(row)
                    row_adj[row].append(col)
            self._pcm = ParityCheckMatrix(
                n=self.n_full, m=self.m_full,
                col_adj=[sorted(a) for a in col_adj],
                row_adj=[sorted(a) for a in row_adj],
            )
        return self._pcm

    def encode_full(self, bits: np.ndarray) -> np.ndarray:
        """Mother-code codeword [batch, n_full] before rate matching."""
        bits = np.atleast_2d(np.asarray(bits, dtype=np.uint8))
        if bits.shape[-1] != self.k:
            raise ValueError(f"expected {self.k} info bits, got {bits.shape[-1]}")
        batch = bits.shape[0]
        z = self.z
        c_sys = np.zeros((batch, self.k_full), dtype=np.uint8)
        c_sys[:, : self.k] = bits

        # Syndromes of all checks against the systematic part.
        s = (c_sys.astype(np.float32) @ self._h_sys.T.astype(np.float32)) % 2
        s = s.astype(np.uint8)
        s_blk = s.reshape(batch, self._mb, z)

        # Structured solve of the accumulate core: the sum of the four core
        # rows leaves only the shift-1 circulant acting on p1.
        ssum = s_blk[:, 0] ^ s_blk[:, 1] ^ s_blk[:, 2] ^ s_blk[:, 3]
        p1 = np.roll(ssum, 1, axis=-1)
        p2 = s_blk[:, 0] ^ ssum  # row 0: shift-1 on p1 contributes ssum
        p3 = s_blk[:, 1] ^ p1 ^ p2
        p4 = s_blk[:, 2] ^ p3
        core = [p1, p2, p3, p4]

        parity = np.zeros((batch, self.m_full), dtype=np.uint8)
        parity[:, 0 * z: 1 * z] = p1
        parity[:, 1 * z: 2 * z] = p2
        parity[:, 2 * z: 3 * z] = p3
        parity[:, 3 * z: 4 * z] = p4
        # Extension rows: p_r = s_r (+ core parity contributions).
        ext = s_blk[:, 4:].copy()
        for r, core_col, s_shift in self._ext_parity:
            ext[:, r - 4] ^= np.roll(core[core_col], -s_shift, axis=-1)
        parity[:, 4 * z:] = ext.reshape(batch, -1)

        return np.concatenate([c_sys, parity], axis=-1)

    def derate_match(self, llr: np.ndarray) -> np.ndarray:
        """Map rate-matched LLRs back onto the mother codeword positions."""
        llr = np.atleast_2d(np.asarray(llr))
        if llr.dtype not in (np.float32, np.float64):
            llr = llr.astype(np.float64)
        if llr.shape[-1] != self.n:
            raise ValueError(f"expected {self.n} LLRs, got {llr.shape[-1]}")
        mother = np.zeros((llr.shape[0], self.n_full), dtype=llr.dtype)
        np.add.at(mother, (slice(None), self.transmit_idx), llr)
        mother[:, self.filler_idx] = -LLR_MAX  # filler bits are known zeros
        return mother


def ldpc5g_encode(bits: np.ndarray, code: LdpcCode5G) -> np.ndarray:
    """Encode [batch, k] info bits into the rate-matched [batch, n] output."""
    full = code.encode_full(bits)
    return full[:, code.transmit_idx]


def ldpc5g_decode(
    llr: np.ndarray,
    code: LdpcCode5G,
    num_iter: int = 20,
    variant: str = "sum-product",
    scale: float = 0.75,
) -> np.ndarray:
    """BP-decode rate-matched LLRs and return the [batch, k] info bits."""
    mother = code.derate_match(llr)
    _, hard = bp_decode(mother, code.pcm, num_iter=num_iter, variant=variant,
                        scale=scale)
    return hard[:, : code.k]
