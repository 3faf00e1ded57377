"""
Published bit rates from accuracy and averaging depth
=====================================================

With four fingers, 250 ms between bursts and n_avg blocks per
selection, a selection takes n_avg seconds. Feeding each subject's
accuracy through the selection-information formula reproduces the
reported bit rates.
"""

# %%
from haptic_p300 import session

print("subj  acc   n_avg  t_sel   bprr   published")
for r in session.table1_rows():
    print(f"#{r['subject']}   {r['accuracy']:.2f}  {r['n_avg']:5d}  {r['selection_time_s']:4.1f} s"
          f"  {r['bprr']:6.2f}  {r['published']:6.2f}")
