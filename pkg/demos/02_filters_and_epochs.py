"""
Conditioning: band-pass, notch, epochs, averages, features
==========================================================
"""

# %%
import numpy as np
from scipy.signal import sosfreqz

from haptic_p300 import dsp
from haptic_p300.stim import gen_sequence, schedule_events
from haptic_p300.synth import SynthConfig, synthesize_run

spec = dsp.default_filter()
print("sections:", spec.n_sections, " stable:", spec.is_stable())
for f in (0.05, 0.1, 1.0, 10.0, 25.0, 40.0, 50.0, 60.0):
    _, h = sosfreqz(spec.sos, worN=[f], fs=256)
    print(f"{f:6.2f} Hz  {20 * np.log10(abs(h[0]) + 1e-300):8.2f} dB")

# %%
# Filter in small chunks with carried state, as a streaming amplifier
# would deliver them; the result matches one-shot filtering bit for bit.
events = schedule_events(gen_sequence(6, seed=2), start_sample=256)
n = events[-1].onset_sample + 204
raw = synthesize_run(events, 2, SynthConfig(seed=7), n)
whole, _ = dsp.apply_filter(spec, raw)
state, chunks = spec.initial_state(), []
for a in range(0, n, 32):
    blk, state = dsp.apply_filter(spec, type(raw)(raw.data[:, a:a + 32], a), state)
    chunks.append(blk.data)
print("chunked == whole:", np.array_equal(np.concatenate(chunks, axis=1), whole.data))

# %%
epochs = dsp.extract_epochs(whole, events)
print(len(epochs), "epochs of shape", epochs[0].data.shape)
for code in (1, 2, 3, 4):
    avg = dsp.average_epochs(epochs, code)
    fv = dsp.decimate_epoch(avg)
    # Cz window covering ~280-330 ms
    print(f"code {code}: Cz mean around 300 ms = {fv[6]:6.2f} uV  ({fv.size} features)")
