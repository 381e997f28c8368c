import sys
import numpy as np

from specsep.chirpsep import ChirpSepConfig, SnippetPlan, build_diagram, \
    estimate_components, evaluate
from specsep.datasets import pulse_train_example
from specsep.synth import NoiseSpec, add_noise, sample_chirps

train = pulse_train_example()
rate, T = 25e9, 1e-4
cfg = ChirpSepConfig(snippet_count=250, min_separation=1e7, grid_size=655360,
                     percentile=99.9)
plan = SnippetPlan.regular(rate, T, cfg.half_width, cfg.snippet_count,
                           grid_size=cfg.grid_size)
clean = sample_chirps(train, rate, T)
centers = plan.centers
spacing = plan.spacing

for snr in (10.0, -30.0):
    noisy = add_noise(clean, NoiseSpec(snr_db=snr, seed=2026), trial=0)
    diagram = build_diagram(noisy, plan, cfg.min_separation,
                            percentile=cfg.percentile)
    ests = estimate_components(diagram, cfg.receiver_band, cfg.min_separation,
                               params=cfg.cluster_params(),
                               min_duration=cfg.duration_floor)
    rep = evaluate(train, ests, plan, cfg.min_separation)
    usable = [e for e in ests if e.status != "rejected"]
    print(f"SNR {snr:+.0f}: rmse {rep.rmse:.6f}")
    total_sq = 0.0
    for ci_, burst, ei, dev in rep.matches:
        if ei < 0:
            print(f"  j{ci_+1}#{burst} MISS")
            continue
        comp = train.components[ci_]
        est = usable[ei]
        starts = dict((nn, s) for nn, s, _ in comp.bursts())
        s = starts[burst]
        e = s + comp.duration
        lo, hi = max(s, est.start_time), min(e, est.end_time)
        ks = np.flatnonzero((centers >= lo) & (centers <= hi))
        k_of = np.round((est.points[:, 0] - centers[0]) / spacing).astype(int)
        sq = 0.0
        worst = (0.0, -1)
        used = 0
        for k in ks:
            vals = est.points[k_of == k, 1]
            if vals.size == 0:
                continue
            used += 1
            target = float(comp.inst_freq(centers[k], burst))
            nearest = vals[np.argmin(np.abs(vals - target))]
            r2 = ((target - nearest) / target) ** 2
            sq += r2
            if r2 > worst[0]:
                worst = (r2, k)
        total_sq += sq
        print(f"  j{ci_+1}#{burst} sq={sq:.3e} ({100*sq/ (rep.rmse**2*250):5.1f}%) "
              f"cov {used}/{ks.size} worst r={np.sqrt(worst[0]):.2e}@snip{worst[1]}")
    print(f"  total sq {total_sq:.4e} -> rmse {np.sqrt(total_sq/250):.6f}")
