"""
Scalability along the number of sequences
=========================================

Fit time, score time, peak memory and AP for a distance-based detector and
t-STIDE as the training set grows. The pairwise matrix makes kNN quadratic
in the number of sequences.
"""

from seqnovelty.bench import BenchAxis, format_table, run_axis
from seqnovelty.detectors import DetectorSpec

axis = BenchAxis("samples", [100, 200, 400], {"seq_len": 20, "sigma": 10})
records = run_axis(axis, [DetectorSpec("knn-lev"), DetectorSpec("t-stide")],
                   timeout_s=60, seed=0)
print(format_table(records))

knn = [r for r in records if r.algorithm == "knn-lev"]
for a, b in zip(knn, knn[1:]):
    print(f"knn-lev fit time x{b.fit_time_s / a.fit_time_s:.1f} "
          f"from N={a.value:g} to N={b.value:g}")
