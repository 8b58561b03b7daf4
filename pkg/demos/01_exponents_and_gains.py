"""Closed-form error exponents and antenna gains.

Prints the exponent of the uniform-gain scheme on a deterministic (AWGN)
channel and on a Ricean channel without transmit-side channel knowledge,
as the receiver antenna count and the channel SNR grow, together with
the matching gain expressions and the performance ceilings A, B, C.
"""

from macdet.exponents import (
    SnrPoint,
    bound_b,
    bound_c,
    e_awgn,
    e_nocsis,
    exponent_ratio_db,
    gain_awgn,
    gain_nocsis,
)


def main() -> None:
    print("exponents at gamma_s = 1, p1 = 0.5, K = 1")
    print(f"{'gamma_c':>8} {'N':>3} {'E_AWGN':>9} {'E_NoCSIS':>9} {'A':>9} {'B':>9} {'C':>9}")
    for gamma_c in (0.5, 1.0, 5.0, 20.0):
        for n in (1, 2, 10):
            pt = SnrPoint(gamma_s=1.0, gamma_c=gamma_c, p1=0.5, k_factor=1.0, num_antennas=n)
            print(
                f"{gamma_c:8.1f} {n:3d} {e_awgn(pt):9.5f} {e_nocsis(pt):9.5f}"
                f" {e_awgn(pt):9.5f} {bound_b(pt):9.5f} {bound_c(pt):9.5f}"
            )

    print()
    print("antenna gains over the single-antenna exponent (dB uses 20*log10)")
    print(f"{'N':>3} {'gain_awgn':>10} {'dB':>7} {'gain_nocsis':>12} {'dB':>7}")
    for n in (2, 3, 5, 10, 50):
        pt = SnrPoint(gamma_s=1.0, gamma_c=1.0, p1=0.5, k_factor=1.0, num_antennas=n)
        ga, gn = gain_awgn(pt), gain_nocsis(pt)
        print(
            f"{n:3d} {ga:10.4f} {exponent_ratio_db(ga):7.2f}"
            f" {gn:12.4f} {exponent_ratio_db(gn):7.2f}"
        )
    print()
    print("both gains grow with N but saturate once the channel SNR, not the")
    print("antenna count, limits the combined observation quality.")


if __name__ == "__main__":
    main()
