import sys
import numpy as np

from specsep.chirpsep import ChirpSepConfig, SnippetPlan, build_diagram, \
    estimate_components, evaluate
from specsep.datasets import pulse_train_example
from specsep.synth import NoiseSpec, add_noise, sample_chirps

count = int(sys.argv[1]) if len(sys.argv) > 1 else 1250
trial = int(sys.argv[2]) if len(sys.argv) > 2 else 1

train = pulse_train_example()
rate = 0.5e9
T = 1e-4
cfg = ChirpSepConfig(snippet_count=count)
clean = sample_chirps(train, rate, T)
noisy = add_noise(clean, NoiseSpec(snr_db=-10.0, seed=2026), trial=trial)
plan = SnippetPlan.regular(rate, T, cfg.half_width, cfg.snippet_count)
diagram = build_diagram(noisy, plan, cfg.min_separation, percentile=cfg.percentile)
ests = estimate_components(diagram, cfg.receiver_band, cfg.min_separation,
                           params=cfg.cluster_params(),
                           min_duration=cfg.duration_floor)
rep = evaluate(train, ests, plan, cfg.min_separation)
print(f"detected {rep.detected}/{rep.total} rmse {rep.rmse:.6f}")
for m in rep.matches:
    comp = train.components[m[0]]
    s = comp.burst_start(m[1])
    tag = f"-> est {m[2]} dev {m[3]:.3e}" if m[2] >= 0 else "MISS"
    print(f"  comp {m[0]} burst {m[1]} [{s:.2e},{s+comp.duration:.2e}] "
          f"om={comp.inst_freq(s, m[1]):.4e} slope={2*comp.bandwidth/comp.duration:+.3e} {tag}")
print("\nkept estimates:")
for i, e in enumerate(ests):
    if e.status != "rejected":
        print(f"  est {i}: {e.status:18s} om={e.start_freq:.4e} slope={e.slope:+.3e} "
              f"gam={e.start_time:.3e} end={e.end_time:.3e} rmse={e.rmse:.3e} "
              f"npts={e.points.shape[0]}")
print("\nrejected near misses (duration floor):")
for i, e in enumerate(ests):
    if e.status == "rejected" and e.duration > 0.6 * cfg.duration_floor:
        print(f"  est {i}: om={e.start_freq:.4e} slope={e.slope:+.3e} "
              f"gam={e.start_time:.3e} d={e.duration:.3e} npts={e.points.shape[0]}")
