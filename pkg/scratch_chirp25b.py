import numpy as np

from specsep.chirpsep import ChirpSepConfig, SnippetPlan, build_diagram, \
    estimate_components
from specsep.datasets import pulse_train_example
from specsep.synth import NoiseSpec, add_noise, sample_chirps

train = pulse_train_example()
rate = 25e9
T = 1e-4
cfg = ChirpSepConfig(snippet_count=250, min_separation=1e7, grid_size=655360,
                     percentile=99.9)
plan = SnippetPlan.regular(rate, T, cfg.half_width, cfg.snippet_count,
                           grid_size=cfg.grid_size)
clean = sample_chirps(train, rate, T)
noisy = add_noise(clean, NoiseSpec(snr_db=10.0, seed=2026), trial=0)
diagram = build_diagram(noisy, plan, cfg.min_separation, percentile=cfg.percentile)

j4 = train.components[3]
sel = (diagram.times >= 1.5e-5) & (diagram.times <= 3.4e-5)
t, y, w = diagram.times[sel], diagram.freqs[sel], diagram.weights[sel]
line = j4.inst_freq(t, 0)
near = np.abs(y - line) < 5e6
print(f"diagram pts within 5e6 of j4 line on [1.5e-5,3.4e-5]: {near.sum()} "
      f"over {np.unique(t[near]).size} distinct snippets "
      f"(window holds {np.unique(t).size} snippets)")
missing = sorted(set(np.round(np.unique(t) / plan.spacing).astype(int)) -
                 set(np.round(np.unique(t[near]) / plan.spacing).astype(int)))
print("snippets lacking a j4-line point:", missing[:40])

ests = estimate_components(diagram, cfg.receiver_band, cfg.min_separation,
                           params=cfg.cluster_params(),
                           min_duration=cfg.duration_floor)
print("\nestimates overlapping the j4 head region:")
for i, e in enumerate(ests):
    if e.end_time >= 1.5e-5 and e.start_time <= 3.4e-5 \
            and 1.4e9 < e.start_freq < 1.65e9:
        print(f"  est {i}: {e.status:18s} om={e.start_freq:.4e} "
              f"slope={e.slope:+.3e} gam={e.start_time:.3e} d={e.duration:.3e} "
              f"npts={e.points.shape[0]}")
