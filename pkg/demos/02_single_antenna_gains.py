"""Single-antenna gain design: optimal, phase-only, and uniform.

With one receive antenna the optimal gain magnitudes have a closed form.
This script measures the finite-network exponent of the three designs on
Rayleigh channel draws and shows the phase-only design approaching its
asymptotic value (pi/4) * e_awgn(1) as the network grows.
"""

import math

import numpy as np

from macdet.allocation import alpha_opt_n1, alpha_phase_only_n1, alpha_uniform, finite_exponent
from macdet.exponents import SnrPoint, e_awgn
from macdet.model import ChannelModel, NetworkParams, RandomSource, sample_channel


def params_for(num_sensors: int) -> NetworkParams:
    return NetworkParams(
        num_sensors=num_sensors,
        num_antennas=1,
        theta=1.0,
        sigma_eta_sq=1.0,
        sigma_nu_sq=1.0,
        p1=0.5,
        total_power=1.0,
    )


def main() -> None:
    src = RandomSource(2024)
    draws = 40
    target = (math.pi / 4.0) * e_awgn(
        SnrPoint(gamma_s=1.0, gamma_c=1.0, p1=0.5, num_antennas=1)
    )
    print("mean finite-network exponent over 40 Rayleigh draws (gamma_s = gamma_c = 1)")
    print(f"{'L':>6} {'optimal':>9} {'phase-only':>11} {'uniform':>9}")
    for num_sensors in (10, 100, 1000, 10000):
        params = params_for(num_sensors)
        fe = {"opt": [], "po": [], "uni": []}
        for d in range(draws):
            h = sample_channel(ChannelModel.rayleigh(), 1, num_sensors, src.substream(num_sensors, d))
            fe["opt"].append(finite_exponent(h, alpha_opt_n1(h.entries[0], params), params))
            fe["po"].append(finite_exponent(h, alpha_phase_only_n1(h.entries[0], params), params))
            fe["uni"].append(finite_exponent(h, alpha_uniform(params), params))
        print(
            f"{num_sensors:6d} {np.mean(fe['opt']):9.5f}"
            f" {np.mean(fe['po']):11.5f} {np.mean(fe['uni']):9.5f}"
        )
    print()
    print(f"phase-only limit (pi/4) * e_awgn(1) = {target:.5f}: aligning the phases")
    print("recovers most of the optimal design; ignoring the channel entirely")
    print("(uniform) leaves the incoherent sum to average itself out.")


if __name__ == "__main__":
    main()
