"""Synthetic EEG standing in for the subject and the amplifier.

Background activity is an AR(1) process per channel plus optional 50 Hz
mains pickup. Attended stimuli add a Gaussian P300 bump scaled by a
per-channel topography. All randomness comes from PCG64 streams seeded
with ``(seed, channel_index)``, so every output is a pure function of its
arguments.
"""
import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .errors import InvalidParameterError, OutOfRangeError
from .layout import (CHANNEL_NAMES, DEFAULT_LAYOUT, EPOCH_MS, EPOCH_SAMPLES,
                     FS, N_CHANNELS, ChannelLayout)

LINE_FREQ_HZ = 50.0
# Cz, CPz and Pz at full gain
DEFAULT_TOPOGRAPHY = (1.0, 1.0, 0.5, 1.0, 0.5, 0.5, 0.5, 0.5)


@dataclass(frozen=True)
class SynthConfig:
    noise_rms: float = 10.0
    ar_coeff: float = 0.95
    line_amp: float = 2.0
    p300_amp: float = 5.0
    p300_latency: float = 300.0
    p300_width: float = 50.0
    topography: tuple = DEFAULT_TOPOGRAPHY
    seed: int = 0

    def __post_init__(self):
        if self.noise_rms < 0 or self.p300_amp < 0 or self.line_amp < 0:
            raise InvalidParameterError("noise_rms, line_amp and p300_amp must be >= 0")
        if not 0 <= self.ar_coeff < 1:
            raise InvalidParameterError(f"ar_coeff must lie in [0, 1), got {self.ar_coeff}")
        if self.p300_width <= 0:
            raise InvalidParameterError("p300_width must be > 0")
        if self.p300_latency + 3 * self.p300_width > EPOCH_MS:
            raise InvalidParameterError("P300 template does not fit inside one epoch")
        topo = tuple(float(g) for g in self.topography)
        if len(topo) != N_CHANNELS or any(not 0 <= g <= 1 for g in topo):
            raise InvalidParameterError("topography needs 8 gains in [0, 1]")
        object.__setattr__(self, "topography", topo)
        object.__setattr__(self, "seed", int(self.seed))


@dataclass
class EegBlock:
    """8 x N microvolt samples whose first column sits at ``start_sample``."""
    data: np.ndarray
    start_sample: int = 0
    layout: ChannelLayout = field(default=DEFAULT_LAYOUT)

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim != 2 or data.shape[0] != N_CHANNELS:
            raise InvalidParameterError(f"EEG block must be 8 x N, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise InvalidParameterError("EEG block contains non-finite samples")
        self.data = data

    @property
    def n_samples(self):
        return self.data.shape[1]

    @property
    def stop_sample(self):
        return self.start_sample + self.n_samples


def _channel_rng(seed, channel):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed & (2**64 - 1), channel])))


def gen_background(n_samples, cfg, start_sample=0):
    """AR(1) noise with long-run RMS ``cfg.noise_rms`` plus mains hum.

    The first sample of each channel is drawn from the stationary
    distribution, so there is no start-up transient in the noise.
    ``start_sample`` only sets the phase of the 50 Hz component.
    """
    if n_samples < 0:
        raise InvalidParameterError("n_samples must be >= 0")
    a = cfg.ar_coeff
    data = np.zeros((N_CHANNELS, n_samples))
    if n_samples == 0:
        return EegBlock(data, start_sample)
    innov_scale = cfg.noise_rms * np.sqrt(1.0 - a * a)
    for ch in range(N_CHANNELS):
        z = _channel_rng(cfg.seed, ch).standard_normal(n_samples)
        w = innov_scale * z
        w[0] = cfg.noise_rms * z[0]
        data[ch] = lfilter([1.0], [1.0, -a], w)
    if cfg.line_amp:
        t = (start_sample + np.arange(n_samples)) / FS
        data += cfg.line_amp * np.sin(2 * np.pi * LINE_FREQ_HZ * t)
    return EegBlock(data, start_sample)


def p300_template(fs, amp, latency, width):
    """Gaussian bump peaking at ``latency`` ms, one epoch long.

    The waveform covers the ``floor(0.8 * fs)`` samples of an epoch.
    """
    if amp < 0:
        raise InvalidParameterError("amp must be >= 0")
    if width <= 0:
        raise InvalidParameterError(f"width must be > 0, got {width}")
    t_ms = np.arange(EPOCH_MS * fs // 1000) / fs * 1000.0
    return amp * np.exp(-((t_ms - latency) ** 2) / (2.0 * width ** 2))


def synthesize_run(events, attended, cfg, n_samples, start_sample=0):
    """Background EEG plus a P300 after every onset of ``attended``.

    Event onsets are absolute sample indices; the block spans
    ``[start_sample, start_sample + n_samples)``.
    """
    block = gen_background(n_samples, cfg, start_sample)
    template = p300_template(FS, cfg.p300_amp, cfg.p300_latency, cfg.p300_width)
    evoked = np.outer(cfg.topography, template)
    for ev in events:
        rel = ev.onset_sample - start_sample
        if rel < 0 or rel + EPOCH_SAMPLES > n_samples:
            raise OutOfRangeError(
                f"event seq={ev.seq} at sample {ev.onset_sample} overruns block "
                f"[{start_sample}, {start_sample + n_samples})")
        if ev.code == attended:
            block.data[:, rel:rel + EPOCH_SAMPLES] += evoked
    return block


def save_block_csv(block, path):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(CHANNEL_NAMES)
        w.writerows(block.data.T.tolist())
