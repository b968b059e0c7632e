"""Detection and Monte Carlo evaluation for large-scale multiuser SM-MIMO uplinks."""

from .channel import (
    ReceivedVector,
    SystemConfig,
    channel_block,
    generate_channel,
    snr_to_noise_variance,
    transmit,
)
from .signal import (
    Alphabet,
    ConfigError,
    SmSignalSet,
    bit_errors,
    build_sm_signal_set,
    demap,
    map_bits,
    qam_alphabet,
)

__version__ = "0.1.0"
