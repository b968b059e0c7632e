"""
Operation counts against loading factor
=======================================

Mean arithmetic-operation counts per detection for the SM detectors at
N=128 and 9 dB, for K = 8 ... 32 users.
"""

from smmimo.sim import DetectorSpec, SystemSpec, TrialPlan, run_complexity_sweep

dets = tuple(DetectorSpec.make(d) for d in ("mmse", "mpd", "lsd", "hybrid"))
plan = TrialPlan(SystemSpec("sm", 4, 4, dets), K=0, N=128, snr_db=(9.0,),
                 alpha=(0.0625, 0.125, 0.1875, 0.25))
reports = run_complexity_sweep(plan, trials=8)

print("alpha    " + "".join(f"{r.detector:>12s}" for r in reports))
for j, a in enumerate(reports[0].alpha):
    print(f"{a:<8g} " + "".join(f"{r.mean_ops[j]:12.3g}" for r in reports))
mpd = next(r for r in reports if r.detector == "mpd")
print("mean MPD iterations:", [round(t, 1) for t in mpd.mean_iters])
