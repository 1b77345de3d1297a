"""OFDM over a time-variant multipath channel with pilot-based estimation.

Builds a resource grid with a pilot symbol, passes the waveform through a
three-tap fading channel in the time domain, estimates the channel from
the pilots (least squares + nearest-neighbor interpolation) and compares
QPSK symbol error rates with and without equalization.
"""

import numpy as np

from linksim import (Constellation, PilotPattern, ResourceGrid, RngStream,
                     TdlProfile, apply_time_domain, awgn, binary_source,
                     demap_app, ebnodb2no, generate_tdl_cir, hard_decide,
                     ls_estimate, map_bits, nn_interpolate, ofdm_demodulate,
                     ofdm_modulate, rg_demap, rg_map)

FFT, SYMBOLS, CP = 64, 6, 8
BATCH = 200


def main():
    rng = RngStream(5, 0)
    pattern = PilotPattern.regular(SYMBOLS, FFT, pilot_symbols=[0, 3],
                                   subcarrier_step=1, seed=1)
    grid = ResourceGrid(fft_size=FFT, num_symbols=SYMBOLS, cp_length=CP,
                        pilot_pattern=pattern)
    const = Constellation("qam", 2)
    fs = grid.bandwidth
    profile = TdlProfile(powers=[0.5, 0.3, 0.2], delays=[0.0, 2 / fs, 5 / fs],
                         doppler_hz=100.0)

    bits = binary_source([BATCH, 2 * grid.num_data_cells], rng.child(0))
    data = map_bits(bits, const)
    tx = ofdm_modulate(rg_map(data, grid), CP)
    cir = generate_tdl_cir(profile, BATCH, SYMBOLS,
                           time_step=grid.samples_per_symbol / fs,
                           sampling_rate=fs, rng=rng.child(1))

    print(f"{'Eb/N0':>6} {'raw SER':>10} {'equalized SER':>14}")
    for i, ebno_db in enumerate((5.0, 10.0, 15.0, 20.0)):
        no = ebnodb2no(ebno_db, 2, 1.0)
        y = awgn(apply_time_domain(tx, cir), no, rng.child(10 + i))
        rx = ofdm_demodulate(y, FFT, CP, SYMBOLS)
        h_p, _ = ls_estimate(rx, grid, no)
        h = nn_interpolate(h_p, grid)[:, ~pattern.mask]
        y_data, _ = rg_demap(rx, grid)

        def ser(y_eq, no_eq):
            llr = demap_app(y_eq, no_eq, const)
            wrong = hard_decide(llr).reshape(BATCH, -1, 2) != \
                bits.reshape(BATCH, -1, 2)
            return np.mean(np.any(wrong, axis=-1))

        raw = ser(y_data, no)
        eq = ser(y_data / h, no / np.abs(h) ** 2)
        print(f"{ebno_db:>6.1f} {raw:>10.4f} {eq:>14.4f}")


if __name__ == "__main__":
    main()
