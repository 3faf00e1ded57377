"""Causal filtering, epoching, averaging and feature decimation.

Filters are cascades of second-order sections (Butterworth high-pass and
low-pass, plus an optional 50 Hz notch) applied causally with explicit
carried state, so a stream can be processed in blocks of any size with
bit-identical results.
"""
import json
from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from .errors import (EmptySelectionError, InvalidParameterError,
                     InvalidStateError, OutOfRangeError)
from .layout import EPOCH_SAMPLES, FS, N_CHANNELS
from .synth import EegBlock

HP_ORDER = 2
LP_ORDER = 4
DEFAULT_DECIMATION = 12
N_FEATURES = N_CHANNELS * (EPOCH_SAMPLES // DEFAULT_DECIMATION)


@dataclass(frozen=True)
class FilterSpec:
    """Cascade of biquads; each row of ``sos`` is ``b0 b1 b2 1 a1 a2``."""
    sos: np.ndarray
    kind: str
    corners: tuple
    fs: float

    @property
    def n_sections(self):
        return self.sos.shape[0]

    def poles(self):
        return np.concatenate([np.roots(sec[3:]) for sec in self.sos])

    def is_stable(self):
        return bool(np.all(np.abs(self.poles()) < 1.0))

    def initial_state(self, n_channels=N_CHANNELS):
        return FilterState(np.zeros((self.n_sections, n_channels, 2)))


@dataclass(frozen=True)
class FilterState:
    zi: np.ndarray


@dataclass
class Epoch:
    code: int
    data: np.ndarray
    onset_sample: int
    is_target: bool = None

    def __post_init__(self):
        if self.code not in (1, 2, 3, 4):
            raise InvalidParameterError(f"epoch code must be 1..4, got {self.code}")
        self.data = np.asarray(self.data, dtype=float)
        if self.data.ndim != 2 or self.data.shape[0] != N_CHANNELS:
            raise InvalidParameterError(f"epoch data must be 8 x L, got {self.data.shape}")


def _check_band(fs, *freqs):
    for f in freqs:
        if not 0 < f < fs / 2:
            raise InvalidParameterError(f"corner {f} Hz outside (0, {fs / 2}) Hz")


def design_bandpass(fs=FS, f_hp=0.1, f_lp=25.0):
    """2nd-order Butterworth high-pass cascaded with a 4th-order low-pass."""
    _check_band(fs, f_hp, f_lp)
    if not f_hp < f_lp:
        raise InvalidParameterError(f"need f_hp < f_lp, got {f_hp} >= {f_lp}")
    hp = signal.butter(HP_ORDER, f_hp, btype="highpass", fs=fs, output="sos")
    lp = signal.butter(LP_ORDER, f_lp, btype="lowpass", fs=fs, output="sos")
    return FilterSpec(np.vstack([hp, lp]), "bandpass", (f_hp, f_lp), fs)


def design_notch(fs=FS, f0=50.0, q=30.0):
    """Single biquad notch with its zero pair on the unit circle at ``f0``."""
    _check_band(fs, f0)
    if q <= 0:
        raise InvalidParameterError(f"q must be > 0, got {q}")
    b, a = signal.iirnotch(f0, q, fs=fs)
    return FilterSpec(np.concatenate([b / a[0], a / a[0]])[None, :], "notch", (f0,), fs)


def cascade(*specs):
    if not specs:
        raise InvalidParameterError("nothing to cascade")
    fs = specs[0].fs
    if any(s.fs != fs for s in specs):
        raise InvalidParameterError("cannot cascade filters designed for different rates")
    return FilterSpec(np.vstack([s.sos for s in specs]),
                      "+".join(s.kind for s in specs),
                      tuple(c for s in specs for c in s.corners), fs)


def default_filter(fs=FS):
    """0.1-25 Hz band-pass followed by the 50 Hz notch."""
    return cascade(design_bandpass(fs, 0.1, 25.0), design_notch(fs, 50.0, 30.0))


def apply_filter(spec, block, state=None):
    """Filter every channel of ``block``; return the output and the new state.

    ``state=None`` starts from rest. The input state is not modified.
    """
    if state is None:
        state = spec.initial_state(block.data.shape[0])
    if state.zi.shape != (spec.n_sections, block.data.shape[0], 2):
        raise InvalidStateError(
            f"state shape {state.zi.shape} does not match {spec.n_sections} sections "
            f"x {block.data.shape[0]} channels")
    out, zf = signal.sosfilt(spec.sos, block.data, axis=1, zi=state.zi)
    return EegBlock(out, block.start_sample, block.layout), FilterState(zf)


def extract_epochs(block, events, length=EPOCH_SAMPLES):
    epochs = []
    for ev in events:
        rel = ev.onset_sample - block.start_sample
        if rel < 0 or rel + length > block.n_samples:
            raise OutOfRangeError(
                f"event seq={ev.seq} (code {ev.code}, onset {ev.onset_sample}) needs samples "
                f"[{ev.onset_sample}, {ev.onset_sample + length}) but block covers "
                f"[{block.start_sample}, {block.stop_sample})")
        epochs.append(Epoch(ev.code, block.data[:, rel:rel + length].copy(), ev.onset_sample))
    return epochs


def average_epochs(epochs, code):
    """Element-wise mean of the epochs carrying ``code``.

    The result keeps the onset of the first matching epoch.
    """
    picked = [e for e in epochs if e.code == code]
    if not picked:
        raise EmptySelectionError(f"no epoch with code {code}")
    data = np.mean([e.data for e in picked], axis=0)
    return Epoch(code, data, picked[0].onset_sample, picked[0].is_target)


def decimate_epoch(epoch, factor=DEFAULT_DECIMATION):
    """Window means of ``factor`` samples per channel, channel-major.

    Trailing samples that do not fill a whole window are dropped.
    """
    if factor <= 0:
        raise InvalidParameterError(f"decimation factor must be > 0, got {factor}")
    n_ch, n = epoch.data.shape
    n_win = n // factor
    if n_win == 0:
        raise InvalidParameterError(f"factor {factor} exceeds epoch length {n}")
    windows = epoch.data[:, :n_win * factor].reshape(n_ch, n_win, factor)
    return windows.mean(axis=2).ravel()


def save_epochs_jsonl(epochs, path):
    with open(path, "w") as f:
        for e in epochs:
            f.write(json.dumps({"code": e.code, "onset_sample": e.onset_sample,
                                "is_target": e.is_target, "data": e.data.tolist()}) + "\n")


def load_epochs_jsonl(path):
    with open(path) as f:
        return [Epoch(r["code"], np.array(r["data"]), r["onset_sample"], r["is_target"])
                for r in map(json.loads, filter(str.strip, f))]
