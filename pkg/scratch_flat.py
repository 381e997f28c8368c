import time
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

def line_rmse(train, ests, plan, eta):
    """exptrmse with the fitted line as the per-snippet IF estimate."""
    kept = [e for e in ests if e.status != "rejected"]
    sq = 0.0
    npairs = 0
    for comp in train.components:
        for b, t0, t1 in comp.bursts():
            # match: same rule as evaluate()
            best, bdev = None, None
            for e in kept:
                lo, hi = max(t0, e.start_time), min(t1, e.end_time)
                if hi - lo < 0.5 * (t1 - t0):
                    continue
                cents = plan.centers[(plan.centers >= lo) & (plan.centers <= hi)]
                if cents.size == 0:
                    continue
                dev = np.mean(np.abs(comp.inst_freq(cents, b)
                                     - e.freq_at(cents)))
                if dev <= eta and (bdev is None or dev < bdev):
                    best, bdev = e, dev
            if best is None:
                continue
            lo, hi = max(t0, best.start_time), min(t1, best.end_time)
            cents = plan.centers[(plan.centers >= lo) & (plan.centers <= hi)]
            tru = comp.inst_freq(cents, b)
            sq += float(np.sum(((tru - best.freq_at(cents)) / tru) ** 2))
            npairs += cents.size
    return np.sqrt(sq / plan.count), npairs

for snr in (10.0, -30.0):
    noisy = add_noise(clean, NoiseSpec(snr_db=snr, seed=2026), trial=0)
    diagram = build_diagram(noisy, plan, cfg.min_separation,
                            percentile=cfg.percentile)
    ests = estimate_components(diagram, cfg.receiver_band, cfg.min_separation,
                               params=cfg.cluster_params(),
                               min_duration=cfg.duration_floor)
    rep = evaluate(train, ests, plan, cfg.min_separation)
    lr, npairs = line_rmse(train, ests, plan, cfg.min_separation)
    print(f"SNR {snr:+.0f}: detected {rep.detected}/{rep.total} "
          f"member-rmse {rep.rmse:.6f}  line-rmse {lr:.6f} ({npairs} pairs)")
