import time
import numpy as np

from specsep.chirpsep import (ChirpSepConfig, SnippetPlan, build_diagram,
                              dbscan, estimate_components, evaluate)
from specsep.datasets import pulse_train_example
from specsep.synth import NoiseSpec, add_noise, sample_chirps

train = pulse_train_example()
rate = 0.5e9
T = 1e-4
cfg = ChirpSepConfig()

t0 = time.perf_counter()
clean = sample_chirps(train, rate, T)
noisy = add_noise(clean, NoiseSpec(snr_db=-10.0, seed=2026), trial=0)
print(f"synth: {time.perf_counter()-t0:.2f}s  ({noisy.values.size} samples)")

plan = SnippetPlan.regular(rate, T, cfg.half_width, cfg.snippet_count)
t0 = time.perf_counter()
diagram = build_diagram(noisy, plan, cfg.min_separation, percentile=cfg.percentile)
t1 = time.perf_counter()
print(f"build_diagram: {t1-t0:.2f}s  pts={diagram.size}")

t0 = time.perf_counter()
ests = estimate_components(diagram, cfg.receiver_band, cfg.min_separation,
                           params=cfg.cluster_params(),
                           min_duration=cfg.duration_floor)
t1 = time.perf_counter()
kept = [e for e in ests if e.status != "rejected"]
print(f"estimate_components: {t1-t0:.2f}s  estimates={len(ests)} kept={len(kept)}")
for e in kept:
    print(f"  {e.status:18s} om={e.start_freq:.4e} slope={e.slope:+.3e} "
          f"B={e.bandwidth:+.3e} gam={e.start_time:.3e} d={e.duration:.3e} "
          f"rmse={e.rmse:.3e} npts={e.points.shape[0]}")

rep = evaluate(train, ests, plan, cfg.min_separation)
print(f"detected {rep.detected}/{rep.total}  rel IF rmse={rep.rmse:.6f}")
for m in rep.matches:
    if m[2] < 0:
        print("   comp", m[0], "burst", m[1], "MISS")
