"""Recording geometry and timing constants used across the pipeline."""
from dataclasses import dataclass

FS = 256
CHANNEL_NAMES = ("Cz", "CPz", "POz", "Pz", "P1", "P2", "C3", "C4")
N_CHANNELS = len(CHANNEL_NAMES)
N_CODES = 4

SOA_MS = 250
EPOCH_MS = 800
# 250 ms * 256 Hz is exactly 64 samples
SOA_SAMPLES = SOA_MS * FS // 1000
# floor(0.8 s * 256 Hz); never longer than 800 ms
EPOCH_SAMPLES = EPOCH_MS * FS // 1000


@dataclass(frozen=True)
class ChannelLayout:
    names: tuple = CHANNEL_NAMES
    fs: int = FS

    def __post_init__(self):
        if tuple(self.names) != CHANNEL_NAMES:
            raise ValueError(f"channel layout must be {CHANNEL_NAMES}, got {self.names}")
        if self.fs != FS:
            raise ValueError(f"sampling rate must be {FS} Hz, got {self.fs}")


DEFAULT_LAYOUT = ChannelLayout()
