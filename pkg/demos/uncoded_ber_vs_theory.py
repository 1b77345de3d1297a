"""Uncoded BPSK/QPSK error rates over AWGN compared with theory.

BPSK and Gray-labeled QPSK both achieve the per-bit error probability
Q(sqrt(2 Eb/N0)); this script measures the simulated rates next to it.
"""

import numpy as np
from scipy.special import erfc

from linksim import (Constellation, RngStream, awgn, binary_source,
                     compute_ber, demap_app, ebnodb2no, hard_decide, map_bits)


def qfunc(x):
    return 0.5 * erfc(x / np.sqrt(2.0))


def measure(kind, m, ebno_db, num_bits, rng):
    const = Constellation(kind, m)
    bits = binary_source([1, num_bits], rng.child(0))
    x = map_bits(bits, const)
    no = ebnodb2no(ebno_db, m, 1.0)
    y = awgn(x, no, rng.child(1))
    return compute_ber(bits, hard_decide(demap_app(y, no, const)))


def main():
    rng = RngStream(2024, 0)
    num_bits = 400_000
    print(f"{'Eb/N0 (dB)':>10} {'theory':>12} {'BPSK':>12} {'QPSK':>12}")
    for i, ebno_db in enumerate(np.arange(0.0, 9.0)):
        theory = qfunc(np.sqrt(2.0 * 10 ** (ebno_db / 10.0)))
        bpsk = measure("psk", 1, ebno_db, num_bits, rng.child(2 * i))
        qpsk = measure("qam", 2, ebno_db, num_bits, rng.child(2 * i + 1))
        print(f"{ebno_db:>10.1f} {theory:>12.3e} {bpsk:>12.3e} {qpsk:>12.3e}")


if __name__ == "__main__":
    main()
