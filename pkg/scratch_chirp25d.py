import sys
import numpy as np

from specsep.chirpsep import ChirpSepConfig, SnippetPlan, build_diagram, \
    estimate_components, evaluate
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

t = diagram.times
f = diagram.freqs


def line_cov(name, om, slope, t0, t1, tol=5e6):
    sel = (t >= t0 - 1e-9) & (t <= t1 + 1e-9)
    line = om + slope * (t - t0)
    hit = sel & (np.abs(f - line) <= tol)
    centers = plan.centers
    csel = (centers >= t0 - 1e-9) & (centers <= t1 + 1e-9)
    nsnip = int(csel.sum())
    snips = np.unique(np.round((t[hit] - centers[0]) / plan.spacing).astype(int))
    missing = [i for i in np.nonzero(csel)[0] if i not in set(snips)]
    print(f"{name}: {hit.sum()} pts over {snips.size}/{nsnip} snippets; "
          f"missing snippets {missing}")


for ci, c in enumerate(train.components):
    sl = 2 * c.bandwidth / c.duration
    for n, s, e in c.bursts():
        line_cov(f"j{ci+1}#{n}", c.omega, sl, s, e)
