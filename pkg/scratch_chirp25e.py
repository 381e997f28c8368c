import sys
import numpy as np

from specsep.chirpsep import ChirpSepConfig, SnippetPlan, build_diagram, \
    dbscan, estimate_components
from specsep.datasets import pulse_train_example
from specsep.synth import NoiseSpec, add_noise, sample_chirps

snr = float(sys.argv[1]) if len(sys.argv) > 1 else 10.0

train = pulse_train_example()
rate = 25e9
T = 1e-4
cfg = ChirpSepConfig(snippet_count=250, min_separation=1e7, grid_size=655360,
                     percentile=99.9)
plan = SnippetPlan.regular(rate, T, cfg.half_width, cfg.snippet_count,
                           grid_size=cfg.grid_size)
clean = sample_chirps(train, rate, T)
noisy = add_noise(clean, NoiseSpec(snr_db=snr, seed=2026), trial=0)
diagram = build_diagram(noisy, plan, cfg.min_separation, percentile=cfg.percentile)
params = cfg.cluster_params()
if params is None:
    from specsep.chirpsep import ClusterParams
print("points", diagram.size)

# mirror estimate_components' two passes
times, freqs = diagram.times, diagram.freqs
span = times.max()
std = np.column_stack([times / span, freqs / cfg.receiver_band])
n = diagram.size
band_mn = max(4, 250 // 2)
clus_mn = max(4, 250 // 100)
print("band_min_neighbors", band_mn, "cluster_min_neighbors", clus_mn)
lab1 = dbscan(std, 1.0, band_mn)
keep = lab1 == np.argmax(np.bincount(lab1[lab1 > 0])) if (lab1 > 0).any() else None
print("pass1 kept", int(keep.sum()), "of", n)
sub = std[keep]
t_k, f_k = times[keep], freqs[keep]
lab2 = dbscan(sub, 1e7 / cfg.receiver_band, clus_mn)
print("pass2 clusters", lab2.max(), "noise pts", int((lab2 == -1).sum()))

# clusters intersecting the j2#3 window
c = train.components[1]
sl = 2 * c.bandwidth / c.duration
for n_, s, e in c.bursts():
    if abs(s - 5.5e-5) > 1e-9:
        continue
    line = c.omega + sl * (t_k - s)
    on_line = (t_k >= s - 1e-9) & (t_k <= e + 1e-9) & (np.abs(f_k - line) <= 5e6)
    labs = np.unique(lab2[on_line])
    print(f"j2#{n_} points fall in clusters {labs.tolist()}")
    for L in labs:
        m = lab2 == L
        print(f"  cluster {L}: {int(m.sum())} pts t=[{t_k[m].min():.3e},"
              f"{t_k[m].max():.3e}] f=[{f_k[m].min():.4e},{f_k[m].max():.4e}]")
