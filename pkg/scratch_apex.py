import numpy as np
from specsep.datasets import pulse_train_example
from specsep.synth import SampleSeries, NoiseSpec, sample_chirps, add_noise
from specsep.filters import KernelConfig
from specsep.unirec import spectrum, parabolic_offset
from specsep.chirpsep import SnippetPlan, _snippet_moments

rate, T = 25e9, 1e-4
n, G = 50000, 655360
train = pulse_train_example()
plan = SnippetPlan.regular(rate, T, 2e-6, 250, grid_size=G)
cfg = KernelConfig(n=n, grid_size=G)
step = 2 * np.pi / G
half = G // 2
clean = sample_chirps(train, rate, T)

windows = {  # component idx -> (interior window, burst idx)
    0: (1.3e-5, 3.7e-5, 0),
    1: (2.8e-5, 3.2e-5, 1),
    2: (1.3e-5, 2.0e-5, 0),   # before the crossing
    3: (3.0e-5, 8.2e-5, 0),   # after the crossing
    4: (3.3e-5, 7.7e-5, 0),
    5: (1.8e-5, 4.2e-5, 0),
}

for snr in (10.0, -30.0):
    noisy = add_noise(clean, NoiseSpec(snr_db=snr, seed=2026), trial=0)
    print(f"SNR {snr:+.0f}")
    for ci_, (lo, hi, b) in windows.items():
        comp = train.components[ci_]
        devs = []
        for tc in plan.centers:
            if not (lo <= tc <= hi):
                continue
            x_true = comp.inst_freq(tc, b) / rate
            p_true = x_true / step
            center = int(round(tc * rate))
            moments, _ = _snippet_moments(noisy.values, center, n)
            ms = SampleSeries(values=moments, n=n, kind="moments")
            ps = spectrum(ms, cfg)
            mag = ps.magnitude
            c0 = (int(round(p_true)) + half) % G
            w = mag[(c0 + np.arange(-14, 15)) % G]
            ci = (c0 + int(np.argmax(w)) - 14) % G
            cell_err = (ci - half - p_true + G / 2) % G - G / 2
            devs.append(cell_err + parabolic_offset(
                mag[(ci - 1) % G], mag[ci], mag[(ci + 1) % G]))
        a = np.array(devs)
        sl = 2 * comp.bandwidth / comp.duration
        print(f"  j{ci_+1} slope {sl:+.2e} ({a.size:3d} snips) "
              f"mean {a.mean():+.3f} std {a.std():.3f} "
              f"rms {np.sqrt(np.mean(a*a)):.3f} cells")
