"""
Stepwise regression on calibration epochs
=========================================
"""

# %%
import numpy as np

from haptic_p300 import classify, session

cfg = session.SessionConfig(seed=3)
data = session.collect_calibration(cfg)
print("training set:", data.features.shape, " targets:", int((data.labels > 0).sum()))

# %%
model = classify.train_swlda(data)
for action, j, p in model.meta["history"][:10]:
    ch, win = divmod(j, 17)
    print(f"{action:6s} feature {j:3d} (channel {ch}, {win * 12 / 256 * 1000:5.0f} ms)  p={p:.2e}")
print("...", len(model.selected), "features kept")

# %%
lda = classify.train_lda(data)
for name, m in (("SWLDA", model), ("LDA", lda)):
    print(name, "re-spells its own calibration selections at",
          session.training_selection_accuracy(data, m))
