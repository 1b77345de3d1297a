"""Tracking LDPC decoder convergence with extrinsic mutual information.

Runs belief propagation one iteration at a time on the (100, 300) code
and measures the mutual information between the running output LLRs and
the true code bits, showing the climb toward 1.0 as the decoder
converges (or the stall below threshold).
"""

import numpy as np

from linksim import (Constellation, LdpcCode5G, RngStream, awgn,
                     binary_source, bp_decode, demap_app, ebnodb2no,
                     exit_mutual_information, ldpc5g_encode, map_bits)

K, N = 100, 300
BATCH = 400


def trajectory(ebno_db, iters, rng):
    code = LdpcCode5G(K, N)
    const = Constellation("qam", 2)
    bits = binary_source([BATCH, K], rng.child(0))
    tx = ldpc5g_encode(bits, code)
    x = map_bits(tx, const)
    no = ebnodb2no(ebno_db, 2, K / N)
    y = awgn(x, no, rng.child(1))
    llr = demap_app(y, no, const)
    mother = code.derate_match(llr)
    truth = code.encode_full(bits)
    out = []
    for it in iters:
        llr_out, _ = bp_decode(mother, code.pcm, num_iter=it,
                               early_stop=False)
        out.append(exit_mutual_information(llr_out, truth))
    return out


def main():
    rng = RngStream(31, 0)
    iters = [1, 2, 4, 8, 16, 32]
    print(f"{'Eb/N0':>6} " + " ".join(f"I@{i:<4}" for i in iters))
    for idx, ebno_db in enumerate((-1.0, 1.0, 3.0)):
        vals = trajectory(ebno_db, iters, rng.child(idx))
        print(f"{ebno_db:>6.1f} " + " ".join(f"{v:.3f} " for v in vals))


if __name__ == "__main__":
    main()
