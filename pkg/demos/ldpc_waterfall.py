"""BER/BLER waterfall of the rate-1/2 QC-LDPC code with 16-QAM over AWGN.

Runs the sweep engine directly (the same thing the `linksim run` CLI
drives) and prints the per-point statistics.
"""

from linksim import SimConfig, run_sweep

CONFIG = {
    "code": {"family": "ldpc5g", "k": 500, "n": 1000,
             "decoder": {"variant": "sum-product", "num_iter": 20}},
    "modulation": {"kind": "qam", "bits_per_symbol": 4, "demapper": "maxlog"},
    "channel": {"kind": "awgn"},
    "sweep": {"ebno_db": [3.0, 4.0, 5.0, 6.0, 7.0], "batch_size": 256,
              "target_block_errors": 50, "max_batches_per_point": 4},
    "seed": 7,
    "precision": "single",
}


def main():
    cfg = SimConfig.from_dict(CONFIG)
    result = run_sweep(cfg, num_workers=4)
    print(f"{'Eb/N0':>6} {'bits':>10} {'BER':>10} {'BLER':>10} "
          f"{'batches':>8} {'stop':>14}")
    for p in result.points:
        print(f"{p.ebno_db:>6.1f} {p.bits:>10} {p.ber:>10.3e} "
              f"{p.bler:>10.3e} {p.batches:>8} {p.stop_reason:>14}")


if __name__ == "__main__":
    main()
