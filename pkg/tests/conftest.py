import numpy as np
import pytest

from haptic_p300.synth import SynthConfig


@pytest.fixture
def quiet_cfg():
    """No background, no mains: only the evoked response is left."""
    return SynthConfig(noise_rms=0.0, line_amp=0.0, seed=3)


def steady_state_amplitude(spec, freq, seconds=60.0, tail=4.0):
    """Amplitude of the filter output for a unit sinusoid, measured directly.

    Runs the filter from rest on a long sinusoid and least-squares fits a
    sine/cosine pair at ``freq`` to the last ``tail`` seconds.
    """
    from haptic_p300.dsp import apply_filter
    from haptic_p300.synth import EegBlock

    fs = spec.fs
    n = int(seconds * fs)
    t = np.arange(n) / fs
    x = np.sin(2 * np.pi * freq * t) if freq > 0 else np.ones(n)
    y, _ = apply_filter(spec, EegBlock(np.tile(x, (8, 1))))
    m = int(tail * fs)
    tt = t[-m:]
    if freq == 0:
        return float(np.abs(y.data[0, -m:]).max())
    A = np.column_stack([np.sin(2 * np.pi * freq * tt), np.cos(2 * np.pi * freq * tt)])
    coef, *_ = np.linalg.lstsq(A, y.data[0, -m:], rcond=None)
    return float(np.hypot(*coef))
