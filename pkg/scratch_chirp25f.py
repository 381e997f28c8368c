import sys
import numpy as np

from specsep.chirpsep import ChirpSepConfig, SnippetPlan, build_diagram, \
    dbscan, _make_estimate, _fit_fails, _fit_line, refine_crossover
from specsep.datasets import pulse_train_example
from specsep.synth import NoiseSpec, add_noise, sample_chirps

snr = float(sys.argv[1]) if len(sys.argv) > 1 else -30.0

train = pulse_train_example()
rate, T = 25e9, 1e-4
cfg = ChirpSepConfig(snippet_count=250, min_separation=1e7, grid_size=655360,
                     percentile=99.9)
plan = SnippetPlan.regular(rate, T, cfg.half_width, cfg.snippet_count,
                           grid_size=cfg.grid_size)
clean = sample_chirps(train, rate, T)
noisy = add_noise(clean, NoiseSpec(snr_db=snr, seed=2026), trial=0)
diagram = build_diagram(noisy, plan, cfg.min_separation, percentile=cfg.percentile)
times, freqs, wts = diagram.times, diagram.freqs, diagram.weights
span = times.max()
std = np.column_stack([times / span, freqs / cfg.receiver_band])
lab1 = dbscan(std, 1.0, max(4, 125))
keep = lab1 == np.argmax(np.bincount(lab1[lab1 > 0]))
sub, t_k, f_k, w_k = std[keep], times[keep], freqs[keep], wts[keep]
params = cfg.cluster_params()
lab2 = dbscan(sub, params.radius, params.min_neighbors)

# find the cluster holding most of the j4 line
c = train.components[3]
sl = 2 * c.bandwidth / c.duration
line = c.omega + sl * (t_k - 1.5e-5)
on4 = (t_k >= 1.5e-5) & (t_k <= 8.5e-5) & (np.abs(f_k - line) <= 5e6)
labs, counts = np.unique(lab2[on4][lab2[on4] > 0], return_counts=True)
L = labs[np.argmax(counts)]
m = lab2 == L
print(f"j4 cluster {L}: {int(m.sum())} pts "
      f"t=[{t_k[m].min():.3e},{t_k[m].max():.3e}] "
      f"f=[{f_k[m].min():.4e},{f_k[m].max():.4e}]")
tt, yy, ww = t_k[m], f_k[m], w_k[m]
est = _make_estimate(tt, yy, ww, "clean", diagram.count, cfg.min_separation)
print(f"whole fit slope={est.slope:+.4e} fails={_fit_fails(est, cfg.min_separation, diagram.count)}")

# replicate refine_crossover internals to expose the fragments
from specsep.chirpsep import _fit_fails as ff, merge_crossover_lines
pts = est.points
t2, y2, w2 = pts[:, 0], pts[:, 1], pts[:, 2]
t0, t1 = float(t2.min()), float(t2.max())
edges = np.linspace(t0, t1, params.partitions + 1)
bins = np.clip(np.searchsorted(edges, t2, side="right") - 1, 0,
               params.partitions - 1)
segments = []
for mm in range(params.partitions):
    sel = bins == mm
    if sel.sum() < 2:
        continue
    tm, ym, wm = t2[sel], y2[sel], w2[sel]
    sd = np.column_stack([tm / span, ym / cfg.receiver_band])
    labels = dbscan(sd, params.radius, params.min_neighbors)
    for lab in range(1, labels.max(initial=0) + 1):
        inner = labels == lab
        ti, yi, wi = tm[inner], ym[inner], wm[inner]
        if np.unique(ti).size < 2:
            continue
        seg = _make_estimate(ti, yi, wi, "crossover_refined",
                             diagram.count, cfg.min_separation)
        bad = ff(seg, cfg.min_separation, diagram.count)
        print(f"  slice{mm} lab{lab} slope={seg.slope:+.4e} "
              f"gam={seg.start_time:.3e} d={seg.duration:.3e} "
              f"npts={seg.points.shape[0]} fails={bad}")
        if not bad:
            segments.append(seg)
threshold = max(0.10 * float(y2.max() - y2.min()), 0.5 * cfg.min_separation)
print("merge threshold", threshold)
refined = merge_crossover_lines(segments, threshold, diagram.count)
for r in refined:
    err = r.slope - sl
    print(f"  merged slope={r.slope:+.4e} (err {err:+.2e}) gam={r.start_time:.3e} "
          f"d={r.duration:.3e} npts={r.points.shape[0]} {r.status}")
