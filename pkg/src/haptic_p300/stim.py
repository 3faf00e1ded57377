"""Oddball stimulus sequencing and the tactile burst waveform.

Stimulus onsets live on the EEG sample clock (256 Hz), so the 250 ms
onset asynchrony is exactly 64 samples. The burst itself is rendered at
its own output rate for whatever drives the exciters.
"""
import csv
import json
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .layout import N_CODES, SOA_SAMPLES

CODES = (1, 2, 3, 4)
BURST_MS = 10
BURST_FREQ_HZ = 1000


@dataclass(frozen=True)
class StimulusEvent:
    code: int
    onset_sample: int
    seq: int


@dataclass(frozen=True)
class BurstWaveform:
    out_fs: int
    samples: np.ndarray

    @property
    def duration_ms(self):
        return 1000.0 * np.count_nonzero(self.samples) / self.out_fs


def gen_sequence(n_blocks, seed, no_adjacent_repeat=True):
    """Block-randomised code sequence.

    Every consecutive group of four is a permutation of ``(1, 2, 3, 4)``,
    so each finger receives exactly ``n_blocks`` bursts. With
    ``no_adjacent_repeat`` a block whose first code would repeat the
    previous block's last code is reshuffled from the same generator.
    """
    if n_blocks < 1:
        raise InvalidParameterError(f"n_blocks must be >= 1, got {n_blocks}")
    rng = np.random.default_rng(seed)
    codes = []
    for _ in range(n_blocks):
        block = rng.permutation(CODES)
        while no_adjacent_repeat and codes and block[0] == codes[-1]:
            block = rng.permutation(CODES)
        codes.extend(int(c) for c in block)
    return codes


def schedule_events(codes, start_sample=0):
    if len(codes) == 0:
        raise InvalidParameterError("cannot schedule an empty code list")
    for c in codes:
        if c not in CODES:
            raise InvalidParameterError(f"stimulus code {c} outside 1..{N_CODES}")
    return [StimulusEvent(int(c), int(start_sample) + SOA_SAMPLES * i, i)
            for i, c in enumerate(codes)]


def burst_waveform(out_fs):
    """10 ms of a 1 kHz square wave at ``out_fs`` samples per second.

    ``out_fs`` must be a multiple of 2000 so a half cycle is an integer
    number of samples.
    """
    if out_fs < 2000 or out_fs % 2000:
        raise InvalidParameterError(f"out_fs must be a positive multiple of 2000, got {out_fs}")
    half = out_fs // (2 * BURST_FREQ_HZ)
    cycle = np.concatenate([np.ones(half), -np.ones(half)])
    n_cycles = BURST_MS * BURST_FREQ_HZ // 1000
    return BurstWaveform(out_fs, np.tile(cycle, n_cycles))


def save_sequence(codes, path):
    with open(path, "w") as f:
        json.dump([int(c) for c in codes], f)


def load_sequence(path):
    with open(path) as f:
        return [int(c) for c in json.load(f)]


def save_burst_csv(burst, path):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["sample", "value"])
        for i, v in enumerate(burst.samples):
            w.writerow([i, int(v)])
