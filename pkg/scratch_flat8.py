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

means = {}
for snr in (10.0, -30.0):
    rs, ds = [], []
    for trial in range(8):
        noisy = add_noise(clean, NoiseSpec(snr_db=snr, seed=2026), trial=trial)
        diagram = build_diagram(noisy, plan, cfg.min_separation,
                                percentile=cfg.percentile)
        ests = estimate_components(diagram, cfg.receiver_band,
                                   cfg.min_separation,
                                   params=cfg.cluster_params(),
                                   min_duration=cfg.duration_floor)
        rep = evaluate(train, ests, plan, cfg.min_separation)
        rs.append(rep.rmse)
        ds.append(rep.detected)
    means[snr] = float(np.mean(rs))
    print(f"SNR {snr:+.0f}: detected min {min(ds)}/12  rmse mean "
          f"{np.mean(rs):.6f} std {np.std(rs):.6f} "
          f"[{np.min(rs):.6f}, {np.max(rs):.6f}]")
print(f"ratio of means: {means[-30.0]/means[10.0]:.3f}")
