import numpy as np
from specsep.chirpsep import ChirpSepConfig, SnippetPlan, build_diagram, \
    estimate_components, evaluate
from specsep.datasets import pulse_train_example
from specsep.synth import NoiseSpec, add_noise, sample_chirps

train = pulse_train_example()
rate, T = 0.5e9, 1e-4
cfg = ChirpSepConfig(snippet_count=1250)
plan = SnippetPlan.regular(rate, T, cfg.half_width, cfg.snippet_count)
clean = sample_chirps(train, rate, T)
noisy = add_noise(clean, NoiseSpec(snr_db=-10.0, seed=2026), trial=2)
diagram = build_diagram(noisy, plan, cfg.min_separation, percentile=cfg.percentile)
ests = estimate_components(diagram, cfg.receiver_band, cfg.min_separation,
                           params=cfg.cluster_params(),
                           min_duration=cfg.duration_floor)
kept = [e for e in ests if e.status != "rejected"]
print(f"{len(kept)} kept of {len(ests)}")
for i, e in enumerate(kept):
    print(f"  est{i}: t [{e.start_time*1e5:.2f},{e.end_time*1e5:.2f}]e-5 "
          f"f0 {e.start_freq:.4e} slope {e.slope:+.3e} npts {e.points.shape[0]} {e.status}")
eta = cfg.min_separation
for ci, comp in enumerate(train.components):
    for b, t0, t1 in comp.bursts():
        hit = None
        for i, e in enumerate(kept):
            lo, hi = max(t0, e.start_time), min(t1, e.end_time)
            if hi - lo < 0.5 * (t1 - t0):
                continue
            cents = plan.centers[(plan.centers >= lo) & (plan.centers <= hi)]
            if cents.size == 0:
                continue
            dev = float(np.mean(np.abs(comp.inst_freq(cents, b) - e.freq_at(cents))))
            if dev <= eta:
                hit = (i, dev)
                break
        tru_slope = 2 * comp.bandwidth / comp.duration
        if hit:
            print(f"j{ci+1}#{b} [{t0*1e5:.2f},{t1*1e5:.2f}] slope {tru_slope:+.2e}"
                  f" -> est{hit[0]} dev {hit[1]:.3e}")
        else:
            print(f"j{ci+1}#{b} [{t0*1e5:.2f},{t1*1e5:.2f}] slope {tru_slope:+.2e}"
                  f" -> MISS")

# where did pre-crossing j3 points go?
comp3 = train.components[2]
print("\nnon-kept estimates overlapping j3 pre-crossing band:")
for i, e in enumerate(ests):
    if e.status != "rejected" or e.points.shape[0] < 6:
        continue
    t = e.points[:, 0]
    if t.min() > 2.4e-5 or t.max() < 1.0e-5:
        continue
    y = e.points[:, 1]
    cents = t[(t >= 1.0e-5) & (t <= 2.4e-5)]
    if cents.size == 0:
        continue
    dev = float(np.mean(np.abs(comp3.inst_freq(cents, 0)
                               - np.interp(cents, t, y))))
    print(f"  rej{i}: t [{t.min()*1e5:.2f},{t.max()*1e5:.2f}] npts {t.size} "
          f"mean|y-j3| {dev:.3e}")

# diagram coverage of the true j3 line, pre-crossing
tt = diagram.times
yy = diagram.freqs
print("\ndiagram points within 2e6 of true j3 IF, per 0.2e-5 bin:")
for lo in np.arange(1.0e-5, 2.6e-5, 0.2e-5):
    sel = (tt >= lo) & (tt < lo + 0.2e-5)
    tr = comp3.inst_freq(tt[sel], 0)
    close = np.abs(yy[sel] - tr) < 2e6
    print(f"  [{lo*1e5:.1f},{(lo+0.2e-5)*1e5:.1f}]e-5: {int(close.sum())}")
