"""
From trigger to fingertip
=========================

Each stimulus event becomes a 16-byte trigger datagram, the bridge turns
it into a 5-byte serial command, and the emulated exciter board
acknowledges and logs the burst.
"""

# %%
from haptic_p300 import wire
from haptic_p300.stim import burst_waveform, gen_sequence, schedule_events

codes = gen_sequence(2, seed=0)
events = schedule_events(codes, start_sample=0)
for ev in events[:3]:
    dgram = wire.encode_trigger(ev)
    frame = wire.bridge(dgram)
    print(ev, "\n   datagram", dgram.hex(" "), "\n   serial  ", frame.hex(" "))

# %%
acks, log = wire.deliver(events)
print("acks:", acks.hex(" "))
print("exciter channels:", [e.channel for e in log])

# %%
# What the exciter plays: ten cycles of a 1 kHz square wave.
b = burst_waveform(8000)
print(b.samples[:16], "...", b.samples.size, "samples,", b.duration_ms, "ms")

# %%
print(wire.selftest(n_events=2000))
