"""Error exponents, gain bounds, and transmit-gain design for analog
amplify-and-forward sensor fusion over fading multiple-access channels
with a multi-antenna receiver.

Submodules:

* model       network parameters, channel/noise models, seeded sampling
* numerics    Hermitian linear algebra, Q function, exponential integral
* exponents   closed-form error exponents, gains, and asymptotic bounds
* allocation  transmit-gain strategies and the finite-network exponent
* sdr         diagonally-constrained SDP relaxation (ADMM) and rounding
* detection   received-signal synthesis, LRT decisions, error probability
* cli         the `macdet` experiment runner
"""

from .model import (
    ChannelMatrix,
    ChannelModel,
    NetworkParams,
    RandomSource,
    SensingNoiseModel,
    derive_power,
    mean_abs_h,
    sample_channel,
    sample_sensing_noise,
)

__all__ = [
    "ChannelMatrix",
    "ChannelModel",
    "NetworkParams",
    "RandomSource",
    "SensingNoiseModel",
    "derive_power",
    "mean_abs_h",
    "sample_channel",
    "sample_sensing_noise",
]

__version__ = "0.1.0"
