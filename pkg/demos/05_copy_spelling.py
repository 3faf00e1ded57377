"""
Copy spelling and bit rates across SNR
======================================

Calibrate, then spell a prescribed sequence of fingers. The sweep shows
accuracy and bit-per-run-rate against P300 amplitude and the number of
averaged blocks.
"""

# %%
from haptic_p300 import session

cfg = session.SessionConfig(targets=(1, 2, 3, 4) * 5, seed=11)
_, model = session.run_calibration(cfg)
report = session.run_copy_spelling(cfg, model)
print(report.to_csv())
print(f"accuracy {report.accuracy:.2f}, {report.bits_per_selection:.3f} bit/selection, "
      f"{report.bprr_bits_per_min:.2f} bit/min")

# %%
rows = session.simulate(cfg, p300_amps=(0.0, 2.0, 5.0, 10.0), n_avgs=(5, 8))
print(" amp  n_avg  acc   bit/min")
for r in rows:
    print(f"{r['p300_amp']:4.0f}  {r['n_avg']:5d}  {r['accuracy']:.2f}  {r['bprr']:6.2f}")
