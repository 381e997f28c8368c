import numpy as np

from specsep.chirpsep import SnippetPlan, sso_snippet
from specsep.datasets import pulse_train_example
from specsep.filters import KernelConfig
from specsep.synth import NoiseSpec, SampleSeries, add_noise, sample_chirps
from specsep.unirec import auto_threshold, spectrum

train = pulse_train_example()
rate = 25e9
T = 1e-4
plan = SnippetPlan.regular(rate, T, 2e-6, 250, grid_size=655360)
clean = sample_chirps(train, rate, T)
noisy = add_noise(clean, NoiseSpec(snr_db=10.0, seed=2026), trial=0)

for tk in (1.8e-5, 2.3e-5):
    n = plan.degree
    c = int(round(tk * rate))
    idx = c + (n - 1) - np.arange(2 * n - 1)
    moments = noisy.values[idx]
    snip = SampleSeries(values=moments, kind="moments", n=n)
    ps = spectrum(snip, plan.kernel_config())
    mag = ps.magnitude
    tau = auto_threshold(ps, 99.9)
    print(f"\nt_k={tk:.2e}  tau={tau:.4e}  max={mag.max():.4e}")
    for j, comp in enumerate(train.components):
        for bn, s, e in comp.bursts():
            if s <= tk <= e:
                f = float(comp.inst_freq(tk, bn))
                x = (f / rate + np.pi) % (2 * np.pi) - np.pi
                cell = int(round((x + np.pi) / ps.config.grid_step)) % mag.size
                lo = max(0, cell - 40)
                window = mag[lo:cell + 40]
                print(f"  j{j+1} IF={f:.4e} cell={cell} |sigma| near peak="
                      f"{window.max():.4e} at tau{'+' if window.max() >= tau else '-'}")
    peaks = sso_snippet(noisy, tk, plan, 1e7, percentile=99.9)
    tops = sorted(peaks, key=lambda p: -p[1])[:8]
    print("  top peaks:", [(f"{f:.4e}", f"{w:.3f}") for f, w in tops])
