"""Synthetic signal generation: exponential sums, chirp pulse trains, noise.

Moment series follow the convention

    mu(l) = sum_k A_k exp(-i <offset, w_k>) exp(-i l <step, w_k>),

sampled for l = -(n-1) .. n-1, so peaks of the downstream spectrum land at
the projections <step, w_k> themselves.  Chirp trains are sampled in time at
a fixed rate.  Noise is complex Gaussian scaled so the requested SNR holds
exactly on the sampled record:

    snr_db = 20 log10(||signal||_2 / ||noise||_2).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

__all__ = [
    "ExponentialModel",
    "ChirpComponent",
    "ChirpTrain",
    "NoiseSpec",
    "SampleSeries",
    "sample_exponential",
    "sample_chirps",
    "add_noise",
    "measured_snr_db",
    "model_to_json",
    "model_from_json",
    "train_to_json",
    "train_from_json",
    "write_samples_csv",
    "read_samples_csv",
]


@dataclass(frozen=True)
class ExponentialModel:
    """K-term exponential sum: amplitudes A_k and frequency vectors w_k."""

    amplitudes: np.ndarray
    freqs: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        freqs = np.atleast_2d(np.asarray(self.freqs, dtype=float))
        if freqs.shape[0] != amps.shape[0]:
            # allow (K,) frequency input for 1D models
            if freqs.shape == (1, amps.shape[0]):
                freqs = freqs.T
            else:
                raise ValueError("amplitudes and freqs disagree on K")
        if amps.size == 0:
            raise ValueError("model needs at least one component")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "freqs", freqs)

    @property
    def k(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def dim(self) -> int:
        return self.freqs.shape[1]


@dataclass(frozen=True)
class ChirpComponent:
    """One pulsed chirp: bursts n = 0..pulses-1 active on
    [t0 + n*pri, t0 + n*pri + duration] with phase
    omega*(t - g) + (bandwidth/duration)*(t - g)^2, g = t0 + n*pri.

    Instantaneous frequency is omega + (2*bandwidth/duration)*(t - g), so a
    burst sweeps omega .. omega + 2*bandwidth (bandwidth may be negative).
    """

    omega: float
    bandwidth: float
    duration: float
    t0: float
    pri: float
    pulses: int
    amplitude: float = 1.0

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        if self.pulses < 1:
            raise ValueError("pulses must be >= 1")
        if self.pulses > 1 and self.pri < self.duration:
            raise ValueError("pri must be >= duration when pulses > 1")
        if self.t0 < 0:
            raise ValueError("t0 must be >= 0")

    def burst_start(self, n: int) -> float:
        return self.t0 + n * self.pri

    def bursts(self):
        for n in range(self.pulses):
            s = self.burst_start(n)
            yield n, s, s + self.duration

    def inst_freq(self, t, n: int):
        g = self.burst_start(n)
        return self.omega + (2.0 * self.bandwidth / self.duration) * (np.asarray(t) - g)


@dataclass(frozen=True)
class ChirpTrain:
    components: tuple

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if not self.components:
            raise ValueError("train needs at least one component")

    def total_bursts(self) -> int:
        return sum(c.pulses for c in self.components)

    def bursts(self):
        """Yield (component index, burst index, start, end)."""
        for j, c in enumerate(self.components):
            for n, s, e in c.bursts():
                yield j, n, s, e

    def span(self) -> float:
        return max(e for _, _, _, e in self.bursts())


@dataclass(frozen=True)
class NoiseSpec:
    """snr_db may be math.inf, which leaves the series untouched."""

    snr_db: float
    seed: int = 0
    distribution: str = "gaussian"

    def __post_init__(self):
        if self.distribution != "gaussian":
            raise ValueError("only gaussian noise is supported")


@dataclass(frozen=True)
class SampleSeries:
    """Sampled data plus the index convention needed to interpret it.

    kind="moments": values[j] = mu(j - (n-1)), j = 0..2n-2.
    kind="time":    values[j] = F(j / rate).
    clean_norm is the L2 norm of the noiseless record (for SNR bookkeeping).
    """

    values: np.ndarray
    kind: str
    n: int = 0
    rate: float = 0.0
    clean_norm: float = 0.0
    snr_db: float = math.inf

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        object.__setattr__(self, "values", v)
        if self.kind == "moments":
            if self.n < 1 or v.size != 2 * self.n - 1:
                raise ValueError("moment series must hold 2n-1 values")
        elif self.kind == "time":
            if self.rate <= 0:
                raise ValueError("time series needs a positive rate")
        else:
            raise ValueError(f"unknown series kind {self.kind!r}")

    @property
    def indices(self) -> np.ndarray:
        if self.kind == "moments":
            return np.arange(-(self.n - 1), self.n)
        return np.arange(self.values.size)

    def times(self) -> np.ndarray:
        if self.kind != "time":
            raise ValueError("not a time series")
        return np.arange(self.values.size) / self.rate


def sample_exponential(model: ExponentialModel, step, offset, n: int) -> SampleSeries:
    """Moment series mu(l) = sum A_k e^{-i<offset,w_k>} e^{-i l <step,w_k>}."""
    if n < 1:
        raise ValueError("n must be >= 1")
    step = np.atleast_1d(np.asarray(step, dtype=float))
    offset = np.atleast_1d(np.asarray(offset, dtype=float))
    if step.shape != (model.dim,) or offset.shape != (model.dim,):
        raise ValueError("step/offset dimension does not match the model")
    ell = np.arange(-(n - 1), n)
    proj_step = model.freqs @ step
    proj_off = model.freqs @ offset
    coeff = model.amplitudes * np.exp(-1j * proj_off)
    vals = np.exp(-1j * np.outer(ell, proj_step)) @ coeff
    return SampleSeries(values=vals, kind="moments", n=n,
                        clean_norm=float(np.linalg.norm(vals)))


def sample_chirps(train: ChirpTrain, rate: float, duration: float) -> SampleSeries:
    """Complex baseband record of the pulse train at times 0, 1/rate, ..."""
    if rate <= 0 or duration <= 0:
        raise ValueError("rate and duration must be positive")
    count = int(math.floor(duration * rate)) + 1
    t = np.arange(count) / rate
    vals = np.zeros(count, dtype=complex)
    for comp in train.components:
        slope = comp.bandwidth / comp.duration
        for _, start, end in comp.bursts():
            lo = int(math.ceil(start * rate - 1e-9))
            hi = int(math.floor(end * rate + 1e-9))
            if hi < 0 or lo >= count:
                continue
            lo, hi = max(lo, 0), min(hi, count - 1)
            u = t[lo:hi + 1] - start
            vals[lo:hi + 1] += comp.amplitude * np.exp(1j * (comp.omega * u + slope * u * u))
    return SampleSeries(values=vals, kind="time", rate=rate,
                        clean_norm=float(np.linalg.norm(vals)))


def _noise_rng(spec: NoiseSpec, trial: int) -> np.random.Generator:
    # counter-based stream: one Philox generator per (seed, trial)
    ss = np.random.SeedSequence(entropy=spec.seed, spawn_key=(trial,))
    return np.random.Generator(np.random.Philox(ss))


def add_noise(series: SampleSeries, spec: NoiseSpec, trial: int = 0) -> SampleSeries:
    """Add complex Gaussian noise scaled for an exact record-level SNR."""
    if math.isinf(spec.snr_db):
        return series
    signal_norm = float(np.linalg.norm(series.values))
    if signal_norm == 0.0:
        raise ValueError("SNR is undefined for an identically zero signal")
    rng = _noise_rng(spec, trial)
    raw = rng.normal(size=series.values.size) + 1j * rng.normal(size=series.values.size)
    scale = signal_norm / (10.0 ** (spec.snr_db / 20.0) * np.linalg.norm(raw))
    noisy = series.values + scale * raw
    return replace(series, values=noisy, clean_norm=signal_norm, snr_db=spec.snr_db)


def measured_snr_db(clean: np.ndarray, noisy: np.ndarray) -> float:
    resid = np.asarray(noisy) - np.asarray(clean)
    return 20.0 * math.log10(np.linalg.norm(clean) / np.linalg.norm(resid))


# ---------------------------------------------------------------------------
# ground-truth and sample file formats

def model_to_json(model: ExponentialModel) -> dict:
    return {
        "dim": model.dim,
        "components": [
            {"amplitude_re": float(a.real), "amplitude_im": float(a.imag),
             "freq": [float(x) for x in w]}
            for a, w in zip(model.amplitudes, model.freqs)
        ],
    }


def model_from_json(obj: dict) -> ExponentialModel:
    comps = obj["components"]
    amps = np.array([c["amplitude_re"] + 1j * c.get("amplitude_im", 0.0) for c in comps])
    freqs = np.array([c["freq"] for c in comps], dtype=float)
    return ExponentialModel(amplitudes=amps, freqs=freqs)


def train_to_json(train: ChirpTrain) -> dict:
    return {
        "components": [
            {"omega": c.omega, "bandwidth": c.bandwidth, "duration": c.duration,
             "t0": c.t0, "pri": c.pri, "pulses": c.pulses}
            for c in train.components
        ],
    }


def train_from_json(obj: dict) -> ChirpTrain:
    comps = [ChirpComponent(omega=c["omega"], bandwidth=c["bandwidth"],
                            duration=c["duration"], t0=c["t0"], pri=c["pri"],
                            pulses=int(c["pulses"]),
                            amplitude=float(c.get("amplitude", 1.0)))
             for c in obj["components"]]
    return ChirpTrain(components=tuple(comps))


def write_samples_csv(path, series: SampleSeries) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "re", "im"])
        for idx, val in zip(series.indices, series.values):
            w.writerow([int(idx), repr(float(val.real)), repr(float(val.imag))])


def read_samples_csv(path, kind: str = "moments", rate: float = 0.0) -> SampleSeries:
    idx, re, im = [], [], []
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd)
        if [h.strip() for h in header] != ["index", "re", "im"]:
            raise ValueError("sample CSV must have header index,re,im")
        for row in rd:
            idx.append(int(row[0]))
            re.append(float(row[1]))
            im.append(float(row[2]))
    vals = np.array(re) + 1j * np.array(im)
    if kind == "moments":
        n = (len(vals) + 1) // 2
        if idx[0] != -(n - 1):
            raise ValueError("moment CSV must start at index -(n-1)")
        return SampleSeries(values=vals, kind="moments", n=n,
                            clean_norm=float(np.linalg.norm(vals)))
    return SampleSeries(values=vals, kind="time", rate=rate,
                        clean_norm=float(np.linalg.norm(vals)))


def load_model_file(path) -> ExponentialModel:
    return model_from_json(json.loads(Path(path).read_text()))


def load_train_file(path) -> ChirpTrain:
    return train_from_json(json.loads(Path(path).read_text()))
