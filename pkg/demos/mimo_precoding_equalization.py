"""Spatially multiplexed QPSK over flat Rayleigh fading.

Compares two 2-stream receivers on a 2x2 i.i.d. channel: LMMSE
equalization at the receiver, and zero-forcing precoding at the
transmitter (which needs channel knowledge there but leaves the receiver
with parallel scalar channels). A 4x2 precoded setup shows the gain from
extra transmit antennas.
"""

import numpy as np

from linksim import (Constellation, RngStream, awgn, binary_source,
                     compute_ber, demap_app, ebnodb2no, flat_fading,
                     hard_decide, lmmse_equalize, map_bits, zf_precode)

STREAMS = 2
USES = 4000


def run(ebno_db, num_tx, mode, rng):
    const = Constellation("qam", 2)
    bits = binary_source([USES, 2 * STREAMS], rng.child(0))
    x = map_bits(bits, const)
    no = ebnodb2no(ebno_db, 2, 1.0)
    _, h = flat_fading(np.zeros((USES, num_tx), dtype=complex), None,
                       STREAMS, rng.child(1))
    if mode == "zf-precoded":
        try:
            xp, g_eff = zf_precode(x, h)
        except np.linalg.LinAlgError:
            return float("nan")
        y = awgn(np.einsum("brt,bt->br", h, xp), no, rng.child(2))
        x_hat, no_eff = y / g_eff, no / g_eff**2
    else:
        y = awgn(np.einsum("brt,bt->br", h[:, :, :STREAMS], x), no,
                 rng.child(2))
        x_hat, no_eff = lmmse_equalize(y, h[:, :, :STREAMS], no)
    llr = demap_app(x_hat, no_eff, const)
    return compute_ber(bits, hard_decide(llr))


def main():
    rng = RngStream(17, 0)
    print(f"{'Eb/N0':>6} {'2x2 LMMSE':>10} {'2x2 ZF-pre':>11} "
          f"{'4x2 ZF-pre':>11}")
    for i, ebno_db in enumerate((0.0, 5.0, 10.0, 15.0, 20.0)):
        vals = [run(ebno_db, 2, "lmmse", rng.child(10 * i)),
                run(ebno_db, 2, "zf-precoded", rng.child(10 * i + 1)),
                run(ebno_db, 4, "zf-precoded", rng.child(10 * i + 2))]
        print(f"{ebno_db:>6.1f} " + " ".join(f"{v:>10.4f}" for v in vals))


if __name__ == "__main__":
    main()
