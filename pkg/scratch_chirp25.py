import sys
import time
import numpy as np

from specsep.chirpsep import ChirpSepConfig, SnippetPlan, build_diagram, \
    estimate_components, evaluate
from specsep.datasets import pulse_train_example
from specsep.synth import NoiseSpec, add_noise, sample_chirps

pct = float(sys.argv[1]) if len(sys.argv) > 1 else 99.9
snrs = [float(s) for s in sys.argv[2:]] or [10.0, -30.0]

train = pulse_train_example()
rate = 25e9
T = 1e-4
cfg = ChirpSepConfig(snippet_count=250, min_separation=1e7, grid_size=655360,
                     percentile=pct)
plan = SnippetPlan.regular(rate, T, cfg.half_width, cfg.snippet_count,
                           grid_size=cfg.grid_size)
print("degree", plan.degree, "grid", plan.kernel_config().grid_size)

t0 = time.perf_counter()
clean = sample_chirps(train, rate, T)
print(f"synth {time.perf_counter()-t0:.1f}s ({clean.values.size} samples)")

for snr in snrs:
    noisy = add_noise(clean, NoiseSpec(snr_db=snr, seed=2026), trial=0)
    t0 = time.perf_counter()
    diagram = build_diagram(noisy, plan, cfg.min_separation, percentile=cfg.percentile)
    t1 = time.perf_counter()
    ests = estimate_components(diagram, cfg.receiver_band, cfg.min_separation,
                               params=cfg.cluster_params(),
                               min_duration=cfg.duration_floor)
    t2 = time.perf_counter()
    rep = evaluate(train, ests, plan, cfg.min_separation)
    kept = [e for e in ests if e.status != "rejected"]
    print(f"SNR {snr:+.0f}: diag {t1-t0:.1f}s ({diagram.size} pts) "
          f"est {t2-t1:.1f}s ({len(kept)} kept) "
          f"detected {rep.detected}/{rep.total} rmse {rep.rmse:.6f}")
    for e in kept:
        per_pt = e.rmse * np.sqrt(cfg.snippet_count / e.points.shape[0])
        print(f"    om={e.start_freq:.4e} slope={e.slope:+.3e} gam={e.start_time:.3e} "
              f"d={e.duration:.3e} perpt={per_pt:.2e} npts={e.points.shape[0]} {e.status}")
    comps = train.components
    for ci, burst, ei, dev in rep.matches:
        c = comps[ci]
        starts = dict((n, s) for n, s, _ in c.bursts())
        s = starts[burst]
        tag = "MISS" if ei < 0 else f"est{ei} dev={dev:.3e}"
        print(f"    burst j{ci+1}#{burst} om={c.omega:.4e} "
              f"slope={2*c.bandwidth/c.duration:+.3e} "
              f"[{s:.3e},{s+c.duration:.3e}] -> {tag}")
