import sys
import time
import numpy as np

from specsep.chirpsep import ChirpSepConfig, SnippetPlan, build_diagram, \
    estimate_components, evaluate
from specsep.datasets import pulse_train_example
from specsep.synth import NoiseSpec, add_noise, sample_chirps

count = int(sys.argv[1]) if len(sys.argv) > 1 else 1250
trials = int(sys.argv[2]) if len(sys.argv) > 2 else 3

train = pulse_train_example()
rate = 0.5e9
T = 1e-4
cfg = ChirpSepConfig(snippet_count=count)
clean = sample_chirps(train, rate, T)

t_all = time.perf_counter()
rmses, dets = [], []
for trial in range(trials):
    noisy = add_noise(clean, NoiseSpec(snr_db=-10.0, seed=2026), trial=trial)
    plan = SnippetPlan.regular(rate, T, cfg.half_width, cfg.snippet_count)
    t0 = time.perf_counter()
    diagram = build_diagram(noisy, plan, cfg.min_separation, percentile=cfg.percentile)
    t1 = time.perf_counter()
    ests = estimate_components(diagram, cfg.receiver_band, cfg.min_separation,
                               params=cfg.cluster_params(),
                               min_duration=cfg.duration_floor)
    t2 = time.perf_counter()
    rep = evaluate(train, ests, plan, cfg.min_separation)
    kept = sum(1 for e in ests if e.status != "rejected")
    print(f"trial {trial}: diag {t1-t0:.2f}s ({diagram.size} pts)  "
          f"est {t2-t1:.2f}s ({kept} kept)  detected {rep.detected}/{rep.total}  "
          f"rmse {rep.rmse:.6f}")
    rmses.append(rep.rmse)
    dets.append(rep.detected)
dt = time.perf_counter() - t_all
print(f"\nD={count}: {trials} trials in {dt:.1f}s ({dt/trials:.2f}s/trial)  "
      f"min detected {min(dets)}  mean rmse {np.mean(rmses):.6f}  max {np.max(rmses):.6f}")
