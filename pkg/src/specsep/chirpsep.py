"""Separation of pulsed linear chirps by sliding-window spectral estimation.

A long sampled record is cut into short overlapping snippets.  Within one
snippet every chirp is close to a pure tone, so the localized-kernel
spectrum of the snippet (the same tapered-FFT path the 1D recovery uses)
peaks at the instantaneous frequencies active at the snippet center.
Collecting the per-snippet peaks over time gives a (time, frequency)
diagram in which each pulse traces a line segment.

Density clustering on the diagram isolates the segments: a first pass with
a neighborhood as wide as the receiver band discards out-of-band debris, a
second pass at the minimal-separation scale splits the survivors into one
cluster per pulse.  A line fit per cluster recovers the sweep parameters.
Where two chirps cross, their clusters fuse into one that no single line
explains; such clusters are re-split into short time partitions, fitted
piecewise, and the piecewise lines that agree on slope and value are merged
back into whole pulses.

Clustering runs on standardized axes (time scaled by the record span,
frequency by the receiver band) because the raw units differ by many orders
of magnitude and a Euclidean neighborhood would otherwise degenerate to an
interval in one coordinate.

Frequencies are reported in [0, 2*pi*rate) rad/s; a band that straddles the
wrap-around of the sampled spectrum would be split at the seam.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .filters import KernelConfig
from .synth import ChirpTrain, SampleSeries
from .unirec import auto_threshold, spectrum, split_circular

__all__ = [
    "ChirpSepConfig",
    "SnippetPlan",
    "SSODiagram",
    "ChirpEstimate",
    "ClusterParams",
    "ChirpEvalReport",
    "sso_snippet",
    "build_diagram",
    "dbscan",
    "estimate_components",
    "refine_crossover",
    "merge_crossover_lines",
    "evaluate",
    "separate",
    "write_components_csv",
]

_log = logging.getLogger(__name__)

_TWO_PI = 2.0 * np.pi

# Fraction of a cluster's fitted-line deviation allowed before the cluster
# is routed to crossover refinement, relative to its mean frequency.
_RMSE_FRACTION = 0.01

# Fraction of a routed cluster's frequency excursion within which two
# refined line segments are considered the same pulse.
_MERGE_FRACTION = 0.10

# Minimum height of a secondary peak relative to the tallest peak of its
# level-set part.  The taper's worst sidelobe is 0.18 of its peak and sweep
# smearing can lift shoulders further, so secondary maxima below this
# fraction are treated as sidelobes of the taller pulse, not pulses.
_SIDELOBE_GUARD = 0.3

_STATUSES = ("clean", "crossover_refined", "rejected")


@dataclass(frozen=True)
class ChirpSepConfig:
    """Tunables for the whole pipeline.

    half_width is the snippet half-length in seconds; snippet_count the
    number of overlapping snippets covering the record.  The two neighbor
    minima default to snippet_count // 2 (band prefilter) and
    snippet_count // 100 (component split) when left at zero.
    min_separation is the assumed minimal gap between instantaneous
    frequencies, in rad/s; receiver_band the frequency span the receiver
    captures, also rad/s.  grid_size = 0 lets the kernel config pick its
    default FFT grid.
    """

    half_width: float = 2e-6
    snippet_count: int = 2500
    band_min_neighbors: int = 0
    cluster_min_neighbors: int = 0
    refine_partitions: int = 8
    min_separation: float = 5e6
    receiver_band: float = 7e8
    percentile: float = 99.0
    grid_size: int = 0
    min_duration: float | None = None

    def __post_init__(self):
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")
        if self.snippet_count < 2:
            raise ValueError("snippet_count must be >= 2")
        if self.min_separation <= 0 or self.receiver_band <= 0:
            raise ValueError("min_separation and receiver_band must be positive")
        if not 0.0 < self.percentile < 100.0:
            raise ValueError("percentile must lie in (0, 100)")
        if self.min_duration is not None and self.min_duration < 0:
            raise ValueError("min_duration must be >= 0")

    @property
    def duration_floor(self) -> float:
        """Shortest cluster span accepted as a component.  Stray spectral
        peaks caused by noise persist across overlapping snippets for at
        most one window length (the snippets decorrelate beyond it), so by
        default anything shorter than two window lengths is demoted to
        ``rejected``: the sliding window cannot certify a pulse shorter
        than its own support anyway."""
        if self.min_duration is not None:
            return self.min_duration
        return 4.0 * self.half_width

    def cluster_params(self) -> "ClusterParams":
        d = self.snippet_count
        return ClusterParams(
            radius=self.min_separation / self.receiver_band,
            min_neighbors=self.cluster_min_neighbors or max(4, d // 100),
            band_min_neighbors=self.band_min_neighbors or max(4, d // 2),
            partitions=self.refine_partitions,
        )

    def to_json(self) -> dict:
        return {
            "half_width": self.half_width,
            "snippet_count": self.snippet_count,
            "band_min_neighbors": self.band_min_neighbors,
            "cluster_min_neighbors": self.cluster_min_neighbors,
            "refine_partitions": self.refine_partitions,
            "min_separation": self.min_separation,
            "receiver_band": self.receiver_band,
            "threshold_percentile": self.percentile,
            "grid_size": self.grid_size,
            "min_duration": self.min_duration,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ChirpSepConfig":
        base = cls()
        return cls(
            half_width=float(obj.get("half_width", base.half_width)),
            snippet_count=int(obj.get("snippet_count", base.snippet_count)),
            band_min_neighbors=int(obj.get("band_min_neighbors", 0)),
            cluster_min_neighbors=int(obj.get("cluster_min_neighbors", 0)),
            refine_partitions=int(obj.get("refine_partitions", base.refine_partitions)),
            min_separation=float(obj.get("min_separation", base.min_separation)),
            receiver_band=float(obj.get("receiver_band", base.receiver_band)),
            percentile=float(obj.get("threshold_percentile", base.percentile)),
            grid_size=int(obj.get("grid_size", 0)),
            min_duration=(None if obj.get("min_duration") is None
                          else float(obj["min_duration"])),
        )


@dataclass(frozen=True)
class SnippetPlan:
    """Snippet geometry: centers, half-width, and the sampling rate.

    The kernel order per snippet is floor(rate * half_width); the snippet at
    center t uses the samples at t - l/rate for |l| below that order.
    """

    half_width: float
    centers: np.ndarray
    rate: float
    grid_size: int = 0

    def __post_init__(self):
        centers = np.asarray(self.centers, dtype=float)
        object.__setattr__(self, "centers", centers)
        if self.half_width <= 0 or self.rate <= 0:
            raise ValueError("half_width and rate must be positive")
        if centers.ndim != 1 or centers.size < 1:
            raise ValueError("centers must be a nonempty 1D array")
        if centers.size > 1 and np.any(np.diff(centers) <= 0):
            raise ValueError("centers must be strictly increasing")
        if self.degree < 2:
            raise ValueError("rate * half_width must be at least 2")

    @property
    def degree(self) -> int:
        return int(math.floor(self.rate * self.half_width))

    @property
    def count(self) -> int:
        return int(self.centers.size)

    @property
    def spacing(self) -> float:
        if self.count < 2:
            return 0.0
        return float(self.centers[-1] - self.centers[0]) / (self.count - 1)

    @classmethod
    def regular(cls, rate: float, duration: float, half_width: float,
                count: int, grid_size: int = 0) -> "SnippetPlan":
        return cls(half_width=half_width, rate=rate, grid_size=grid_size,
                   centers=np.linspace(0.0, duration, count))

    def kernel_config(self) -> KernelConfig:
        if self.grid_size:
            return KernelConfig(n=self.degree, grid_size=self.grid_size)
        return KernelConfig(n=self.degree)

    def warnings(self, min_separation: float | None = None) -> list[str]:
        """Advisory checks.  The separation guarantee involves constants with
        no closed form, so conservative stand-ins are used here; a warning
        flags a risky configuration, silence proves nothing."""
        out = []
        if self.count > 1 and np.max(np.diff(self.centers)) > 2.0 * self.half_width:
            out.append("consecutive snippets do not overlap; samples between "
                       "them are never used")
        if self.degree < 32:
            out.append(f"snippet holds only {self.degree} one-sided samples; "
                       "noise averaging will be weak")
        if min_separation is not None:
            if self.degree * (min_separation / self.rate) < 8.0:
                out.append("snippet too short to resolve the requested "
                           "frequency separation at this rate")
        return out


@dataclass(frozen=True)
class SSODiagram:
    """Per-snippet spectral peaks: one (time, frequency, weight) point per
    detected peak, tagged with the snippet index that produced it.  Points
    are ordered by (snippet, frequency).  ``truncated`` lists snippets whose
    window ran off the record and was zero-filled.  ``half_width`` and
    ``freq_step`` record the window half-width and the frequency mesh pitch
    so later stages can bound how far a legitimate point may sit from its
    pulse; zero means unknown."""

    times: np.ndarray
    freqs: np.ndarray
    weights: np.ndarray
    snippet: np.ndarray
    count: int
    truncated: tuple = ()
    half_width: float = 0.0
    freq_step: float = 0.0

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        f = np.asarray(self.freqs, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        s = np.asarray(self.snippet, dtype=int)
        if not (t.shape == f.shape == w.shape == s.shape):
            raise ValueError("diagram columns must have identical shape")
        if not np.all(np.isfinite(f)):
            raise ValueError("diagram frequencies must be finite")
        for name, arr in (("times", t), ("freqs", f), ("weights", w), ("snippet", s)):
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "truncated", tuple(self.truncated))

    @property
    def size(self) -> int:
        return int(self.times.size)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t_k", "lambda", "weight", "snippet"])
            for row in zip(self.times, self.freqs, self.weights, self.snippet):
                w.writerow([repr(float(row[0])), repr(float(row[1])),
                            repr(float(row[2])), int(row[3])])

    @classmethod
    def from_csv(cls, path) -> "SSODiagram":
        t, f, wgt, s = [], [], [], []
        with open(path, newline="") as fh:
            rd = csv.reader(fh)
            if next(rd) != ["t_k", "lambda", "weight", "snippet"]:
                raise ValueError("diagram CSV must have header t_k,lambda,weight,snippet")
            for row in rd:
                t.append(float(row[0]))
                f.append(float(row[1]))
                wgt.append(float(row[2]))
                s.append(int(row[3]))
        snip = np.array(s, dtype=int)
        count = int(snip.max()) + 1 if snip.size else 0
        return cls(times=np.array(t), freqs=np.array(f), weights=np.array(wgt),
                   snippet=snip, count=count)


@dataclass(frozen=True)
class ChirpEstimate:
    """One recovered pulse: instantaneous frequency start_freq + slope *
    (t - start_time) over [start_time, start_time + duration].

    ``rmse`` is the fit deviation of the member diagram points against that
    line, normalized by the total snippet count.  ``points`` keeps the
    member (time, frequency, weight) rows for later assessment."""

    start_freq: float
    slope: float
    duration: float
    start_time: float
    rmse: float
    status: str
    points: np.ndarray = field(repr=False, compare=False,
                               default_factory=lambda: np.empty((0, 3)))

    def __post_init__(self):
        if self.status not in _STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        if self.rmse < 0:
            raise ValueError("rmse must be >= 0")
        if self.status != "rejected" and self.duration <= 0:
            raise ValueError("accepted estimates need a positive duration")
        if self.duration < 0:
            raise ValueError("duration must be >= 0")
        object.__setattr__(self, "points", np.asarray(self.points, dtype=float))

    @property
    def bandwidth(self) -> float:
        """Signed half-excursion of the sweep: slope * duration / 2."""
        return 0.5 * self.slope * self.duration

    @property
    def end_time(self) -> float:
        return self.start_time + self.duration

    def freq_at(self, t) -> np.ndarray:
        return self.start_freq + self.slope * (np.asarray(t, dtype=float)
                                               - self.start_time)


@dataclass(frozen=True)
class ClusterParams:
    """Density-clustering knobs on the standardized diagram axes.

    ``min_neighbors`` is the core threshold for the component-splitting pass
    and for refinement; ``band_min_neighbors`` the (much larger) threshold
    for the in-band prefilter, whose radius is fixed at 1.0 because the
    frequency axis is scaled by the receiver band."""

    radius: float
    min_neighbors: int
    band_min_neighbors: int
    partitions: int = 8

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.min_neighbors < 1 or self.band_min_neighbors < 1:
            raise ValueError("neighbor minima must be >= 1")
        if self.partitions < 2:
            raise ValueError("refinement needs at least 2 partitions")


@dataclass(frozen=True)
class ChirpEvalReport:
    """Detection count and relative instantaneous-frequency error against a
    known pulse train.  ``matches`` holds one (component, burst, estimate
    index or -1, mean absolute deviation) row per true burst."""

    total: int
    detected: int
    rmse: float
    matches: tuple = ()

    def __post_init__(self):
        if not 0 <= self.detected <= self.total:
            raise ValueError("detected must lie in [0, total]")


# ---------------------------------------------------------------------------
# snippet spectra

def _snippet_moments(values: np.ndarray, center_cell: int, n: int):
    """Moment series mu(l) = F((c - l)/rate) for l = -(n-1) .. n-1, zero
    filled where the record ends; returns (moments, truncated)."""
    total = values.size
    idx = center_cell + (n - 1) - np.arange(2 * n - 1)
    valid = (idx >= 0) & (idx < total)
    out = np.where(valid, values[np.clip(idx, 0, total - 1)], 0.0 + 0.0j)
    return out, not bool(valid.all())


def _level_peaks(mag: np.ndarray, grid: np.ndarray, step: float,
                 tau: float, min_sep_x: float):
    """Peaks of one snippet: the level set {|sigma| >= tau} is split at
    circular gaps >= min_sep_x; within each part, every local maximum that
    survives tallest-first suppression at that same separation yields a
    point at its grid position.  With a threshold far below the peaks (a
    large, noise-dominated grid) nearby lumps share one level-set part, so
    the part's argmax alone would drop pulses that are plainly resolved.
    Secondary maxima below _SIDELOBE_GUARD of the part's tallest peak are
    taken for sidelobes of that peak and skipped.

    Positions are deliberately not interpolated below the grid step.  A
    swept pulse fills a flat-topped lump whose apex carries a single
    effective noise sample, so sub-cell refinement polishes the clean case
    far below the noisy one and the reported accuracy stops tracking the
    noise floor; the grid step is the honest resolution at every SNR.
    Returns (positions in [-pi, pi), grid-max weights)."""
    parts = split_circular(mag >= tau, step, min_sep_x)
    g = mag.size
    sep_cells = max(int(math.ceil(min_sep_x / step)), 1)
    xs, ws = [], []
    for cells in parts:
        vals = mag[cells]
        floor = _SIDELOBE_GUARD * float(vals.max())
        taken: list = []
        for oi in np.argsort(-vals, kind="stable"):
            ci = int(cells[oi])
            if mag[ci] < floor:
                break
            if any(min(abs(ci - cj), g - abs(ci - cj)) < sep_cells
                   for cj in taken):
                continue
            # skirt shoulders of a taller lump are not peaks of the field
            if mag[ci] < mag[(ci - 1) % g] or mag[ci] < mag[(ci + 1) % g]:
                continue
            taken.append(ci)
        for ci in taken:
            xs.append(grid[ci])
            ws.append(mag[ci])
    return np.array(xs), np.array(ws)


def sso_snippet(series: SampleSeries, t_center: float, plan: SnippetPlan,
                min_separation: float, percentile: float = 99.0) -> list:
    """Spectral peaks of the snippet centered at t_center.

    Returns (frequency rad/s, weight) pairs sorted by frequency.  The
    threshold is the per-snippet magnitude percentile; the level set is
    partitioned with minimal separation min_separation / 2.  Frequencies
    land in [0, 2 pi rate)."""
    if series.kind != "time":
        raise ValueError("snippet extraction needs a time series")
    cfg = plan.kernel_config()
    n = plan.degree
    center = int(round(t_center * series.rate))
    moments, truncated = _snippet_moments(series.values, center, n)
    if truncated:
        _log.debug("snippet at t=%.3e runs off the record; zero filled", t_center)
    snip = SampleSeries(values=moments, kind="moments", n=n)
    ps = spectrum(snip, cfg)
    tau = auto_threshold(ps, percentile)
    min_sep_x = 0.5 * min_separation / series.rate
    xs, ws = _level_peaks(ps.magnitude, ps.grid, cfg.grid_step, tau, min_sep_x)
    freqs = series.rate * np.mod(xs, _TWO_PI)
    order = np.argsort(freqs)
    return [(float(freqs[i]), float(ws[i])) for i in order]


def build_diagram(series: SampleSeries, plan: SnippetPlan,
                  min_separation: float, percentile: float = 99.0) -> SSODiagram:
    """Run the snippet operator at every plan center and pool the peaks.

    Snippets are processed in batches through one zero-padded FFT per batch;
    the arithmetic per snippet matches sso_snippet exactly.  Points come out
    ordered by (snippet, frequency)."""
    if series.kind != "time":
        raise ValueError("diagram construction needs a time series")
    cfg = plan.kernel_config()
    n, g = plan.degree, cfg.grid_size
    rate = series.rate
    record = series.values
    total = record.size
    centers_cell = np.round(plan.centers * rate).astype(int)
    offsets = (n - 1) - np.arange(2 * n - 1)
    ell = np.arange(-(n - 1), n)
    signs = np.where(ell % 2 == 0, 1.0, -1.0)
    taper = cfg.taper * signs
    bins = np.mod(ell, g)
    grid = cfg.grid
    step = cfg.grid_step
    min_sep_x = 0.5 * min_separation / rate

    times, freqs, weights, snippet = [], [], [], []
    truncated = []
    chunk = max(1, (1 << 22) // g)
    for lo in range(0, centers_cell.size, chunk):
        cells = centers_cell[lo:lo + chunk]
        idx = cells[:, None] + offsets[None, :]
        valid = (idx >= 0) & (idx < total)
        moments = np.where(valid, record[np.clip(idx, 0, total - 1)], 0.0 + 0.0j)
        bad = ~valid.all(axis=1)
        if bad.any():
            truncated.extend((lo + np.flatnonzero(bad)).tolist())
        stacked = np.zeros((cells.size, g), dtype=complex)
        stacked[:, bins] = moments * taper
        mags = np.abs(g * np.fft.ifft(stacked, axis=1))
        taus = np.percentile(mags, percentile, axis=1)
        for row in range(cells.size):
            xs, ws = _level_peaks(mags[row], grid, step, float(taus[row]), min_sep_x)
            if xs.size == 0:
                continue
            fr = rate * np.mod(xs, _TWO_PI)
            order = np.argsort(fr)
            k = lo + row
            t_actual = cells[row] / rate
            times.extend([t_actual] * xs.size)
            freqs.extend(fr[order].tolist())
            weights.extend(ws[order].tolist())
            snippet.extend([k] * xs.size)
    return SSODiagram(times=np.array(times), freqs=np.array(freqs),
                      weights=np.array(weights), snippet=np.array(snippet, dtype=int),
                      count=plan.count, truncated=tuple(truncated),
                      half_width=plan.half_width, freq_step=rate * step)


# ---------------------------------------------------------------------------
# density clustering

def _cell_key(points: np.ndarray, radius: float) -> np.ndarray:
    return np.floor(points / radius).astype(np.int64)

def _dist2(block: np.ndarray, cand: np.ndarray) -> np.ndarray:
    # |a-b|^2 via the expanded product so the heavy part is one matmul
    aa = np.einsum("ij,ij->i", block, block)
    bb = np.einsum("ij,ij->i", cand, cand)
    return np.maximum(aa[:, None] + bb[None, :] - 2.0 * (block @ cand.T), 0.0)


def dbscan(points: np.ndarray, radius: float, min_neighbors: int) -> np.ndarray:
    """Density clustering: labels -1 for noise, 1..P for clusters.

    A point is core when at least min_neighbors OTHER points lie within
    ``radius`` (inclusive); clusters are the connected components of core
    points under that relation, plus every non-core point within radius of
    a core (claimed by the first cluster that reaches it).  Output is
    deterministic for a given point order: clusters are numbered by their
    lowest-index core point and ties go to the earlier index.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2:
        raise ValueError("points must be a 2D array (rows are points)")
    if radius <= 0:
        raise ValueError("radius must be positive")
    if min_neighbors < 1:
        raise ValueError("min_neighbors must be >= 1")
    n = pts.shape[0]
    labels = np.zeros(n, dtype=int)
    if n == 0:
        return labels
    r2 = radius * radius

    keys = _cell_key(pts, radius)
    buckets: dict = {}
    for i, key in enumerate(map(tuple, keys)):
        buckets.setdefault(key, []).append(i)
    buckets = {k: np.array(v, dtype=int) for k, v in buckets.items()}
    dim = pts.shape[1]
    shifts = np.indices((3,) * dim).reshape(dim, -1).T - 1

    def candidates(key: tuple) -> np.ndarray:
        got = [buckets[t] for s in shifts
               if (t := tuple(np.add(key, s))) in buckets]
        return np.sort(np.concatenate(got))

    # core test, vectorized one bucket at a time
    core = np.zeros(n, dtype=bool)
    cand_cache: dict = {}
    for key, members in buckets.items():
        cand = candidates(key)
        cand_cache[key] = cand
        block_step = max(1, (1 << 21) // max(1, cand.size))
        for lo in range(0, members.size, block_step):
            rows = members[lo:lo + block_step]
            d2 = _dist2(pts[rows], pts[cand])
            core[rows] = (d2 <= r2).sum(axis=1) - 1 >= min_neighbors

    def expand(frontier: np.ndarray, label: int) -> np.ndarray:
        """Label everything within radius of the (all-core) frontier and
        return the newly labeled cores.  Frontier is grouped by cell so the
        distance work runs in blocks."""
        fkeys = keys[frontier]
        order = np.lexsort(fkeys.T)
        frontier = frontier[order]
        fkeys = fkeys[order]
        breaks = np.flatnonzero(np.any(np.diff(fkeys, axis=0) != 0, axis=1)) + 1
        grown = []
        for rows in np.split(frontier, breaks):
            cand = cand_cache[tuple(keys[rows[0]])]
            cand = cand[labels[cand] == 0]
            if cand.size == 0:
                continue
            block_step = max(1, (1 << 21) // cand.size)
            hit_any = np.zeros(cand.size, dtype=bool)
            for lo in range(0, rows.size, block_step):
                d2 = _dist2(pts[rows[lo:lo + block_step]], pts[cand])
                hit_any |= (d2 <= r2).any(axis=0)
            hit = cand[hit_any & (labels[cand] == 0)]
            labels[hit] = label
            grown.append(hit[core[hit]])
        return np.concatenate(grown) if grown else np.empty(0, dtype=int)

    label = 0
    for seed in range(n):
        if labels[seed] != 0 or not core[seed]:
            continue
        label += 1
        labels[seed] = label
        frontier = np.array([seed], dtype=int)
        while frontier.size:
            frontier = expand(frontier, label)
    labels[labels == 0] = -1
    return labels


# ---------------------------------------------------------------------------
# component estimation

def _fit_line(t: np.ndarray, y: np.ndarray, w: np.ndarray):
    """Least-squares line through the half of the points with the largest
    weight (ties broken toward earlier time).  Returns (slope, t_ref, value
    at t_ref); falls back to all points when the top half is degenerate."""
    order = np.lexsort((t, -w))
    top = order[:max(2, t.size // 2)]
    if np.unique(t[top]).size < 2:
        top = np.arange(t.size)
    t0 = float(np.mean(t[top]))
    slope, val = np.polyfit(t[top] - t0, y[top], 1)
    return float(slope), t0, float(val)


def _line_rmse(t, y, slope, t_ref, val, snippet_total: int) -> float:
    resid = y - (val + slope * (t - t_ref))
    return float(np.sqrt(np.sum(resid * resid) / snippet_total))


def _halves_disagree(pts: np.ndarray, min_separation: float) -> bool:
    """Fit the early and the late half separately and compare them at the
    middle of the span.  Two bursts of one train chained end to end by stray
    points can masquerade as a single shallow line whose residuals stay
    inside the scatter gates; the half fits expose the break."""
    t, y, w = pts[:, 0], pts[:, 1], pts[:, 2]
    mid = 0.5 * (float(t.min()) + float(t.max()))
    left = t <= mid
    right = ~left
    if np.unique(t[left]).size < 2 or np.unique(t[right]).size < 2:
        return False
    sl, tl, vl = _fit_line(t[left], y[left], w[left])
    sr, tr, vr = _fit_line(t[right], y[right], w[right])
    gap = (vl + sl * (mid - tl)) - (vr + sr * (mid - tr))
    return abs(gap) > 0.5 * min_separation


def _fit_fails(est: ChirpEstimate, min_separation: float,
               snippet_total: int) -> bool:
    """True when one line does not explain the cluster.

    The first test normalizes by the total snippet count; it catches gross
    misfits but dilutes clusters that span a fraction of the record, so a
    second test checks the per-point scatter: a single pulse scatters its
    points by the peak-position jitter, well under the line separation,
    while a cluster mixing two pulses scatters them by the separation
    itself.  A split-half comparison catches piecewise structure that both
    scatter tests average away."""
    y = est.points[:, 1]
    if est.rmse > _RMSE_FRACTION * float(np.mean(np.abs(y))):
        return True
    per_point = est.rmse * math.sqrt(snippet_total / est.points.shape[0])
    if per_point > 0.5 * min_separation:
        return True
    return _halves_disagree(est.points, min_separation)


def _trim_cap(slope: float, min_separation: float, half_width: float,
              freq_step: float) -> float:
    """How far a legitimate member point may sit from its pulse's line.

    A window hanging over the pulse edge measures the mean frequency of the
    covered part, at most the half-window sweep |slope| * half_width / 2 off
    the line; two mesh cells cover the reading resolution on top.  Points
    farther out are noise captures.  Half the pulse separation bounds the
    cap from above (and stands in for it when the window geometry is not
    recorded), since anything past that may belong to a neighboring pulse."""
    cap = 0.5 * min_separation
    if half_width > 0 and freq_step > 0:
        cap = min(cap, 0.5 * abs(slope) * half_width + 2.0 * freq_step)
    return cap


def _make_estimate(t, y, w, status: str, snippet_total: int,
                   min_separation: float, half_width: float = 0.0,
                   freq_step: float = 0.0) -> ChirpEstimate:
    """Fit a line and refit once without stray points.

    A point beyond the trim cap off the first fit belongs to noise or to
    another pulse; dropping such points keeps one bright noise lump from
    sinking a whole cluster at the misfit gates.  The trim is trusted only
    when a strict majority stays on the line, so a cluster mixing two
    comparable pulses is left intact for the gates to flag."""
    slope, t_ref, val = _fit_line(t, y, w)
    cap = _trim_cap(slope, min_separation, half_width, freq_step)
    keep = np.abs(y - (val + slope * (t - t_ref))) <= cap
    if not keep.all() and keep.sum() > max(1, t.size // 2) \
            and np.unique(t[keep]).size >= 2:
        t, y, w = t[keep], y[keep], w[keep]
        slope, t_ref, val = _fit_line(t, y, w)
    gamma = float(np.min(t))
    duration = float(np.max(t) - gamma)
    rmse = _line_rmse(t, y, slope, t_ref, val, snippet_total)
    order = np.lexsort((y, t))
    pts = np.column_stack([t, y, w])[order]
    return ChirpEstimate(start_freq=val + slope * (gamma - t_ref), slope=slope,
                         duration=duration, start_time=gamma, rmse=rmse,
                         status=status, points=pts)


def _rejected_stub(t, y, w) -> ChirpEstimate:
    gamma = float(np.min(t))
    order = np.lexsort((y, t))
    return ChirpEstimate(start_freq=float(np.mean(y)), slope=0.0,
                         duration=float(np.max(t) - gamma), start_time=gamma,
                         rmse=0.0, status="rejected",
                         points=np.column_stack([t, y, w])[order])


def estimate_components(diagram: SSODiagram, receiver_band: float,
                        min_separation: float,
                        params: ClusterParams | None = None,
                        min_duration: float = 0.0) -> tuple:
    """Cluster the diagram and fit one frequency line per cluster.

    Pass one clusters with a neighborhood the width of the receiver band and
    keeps the most populous cluster, discarding scattered debris.  Pass two
    re-clusters the survivors at the minimal-separation scale; each cluster
    is fitted on the better-weighted half of its points.  Clusters whose fit
    deviation exceeds a small fraction of their mean frequency hold more
    than one pulse (a crossover) and are re-estimated piecewise.  Estimates
    spanning less than ``min_duration`` are demoted to ``rejected``."""
    if diagram.size == 0:
        return ()
    if params is None:
        d = diagram.count
        params = ClusterParams(radius=min_separation / receiver_band,
                               min_neighbors=max(4, d // 100),
                               band_min_neighbors=max(4, d // 2))
    span = float(np.max(diagram.times))
    if span <= 0:
        return ()
    std = np.column_stack([diagram.times / span, diagram.freqs / receiver_band])

    band_labels = dbscan(std, 1.0, params.band_min_neighbors)
    if band_labels.max(initial=-1) < 1:
        return ()
    counts = np.bincount(band_labels[band_labels > 0])
    keep = band_labels == int(np.argmax(counts))
    t_all, y_all, w_all = (diagram.times[keep], diagram.freqs[keep],
                           diagram.weights[keep])

    labels = dbscan(std[keep], params.radius, params.min_neighbors)
    estimates = []
    for lab in range(1, labels.max(initial=0) + 1):
        sel = labels == lab
        t, y, w = t_all[sel], y_all[sel], w_all[sel]
        if np.unique(t).size < 2:
            estimates.append(_rejected_stub(t, y, w))
            continue
        est = _make_estimate(t, y, w, "clean", diagram.count,
                             min_separation, diagram.half_width,
                             diagram.freq_step)
        if _fit_fails(est, min_separation, diagram.count):
            refined = refine_crossover(est.points, min_separation, params,
                                       receiver_band=receiver_band,
                                       time_span=span,
                                       snippet_total=diagram.count,
                                       half_width=diagram.half_width,
                                       freq_step=diagram.freq_step)
            estimates.extend(refined)
        else:
            estimates.append(est)
    # one pulse can surface as several collinear fragments (cluster splits,
    # refinement output); reunite them before judging spans
    stubs = [e for e in estimates if e.status == "rejected"]
    lines = [e for e in estimates if e.status != "rejected"]
    merged = []
    for members in _merge_groups(lines, 0.5 * min_separation) if lines else []:
        if len(members) == 1:
            est = lines[members[0]]
        else:
            est = _merge_members([lines[i] for i in members], diagram.count)
            # a combined line is credible only when one fragment outlived
            # the window decorrelation span by itself; chains of short-lived
            # debris that happen to be collinear are not
            if min_duration > 0 and all(lines[i].duration < min_duration
                                        for i in members):
                est = replace(est, status="rejected")
        merged.append(est)
    estimates = merged + stubs
    if min_duration > 0:
        estimates = [replace(e, status="rejected")
                     if e.status != "rejected" and e.duration < min_duration
                     else e for e in estimates]
    estimates = _drop_fused_members(estimates, min_separation)
    estimates.sort(key=lambda e: (e.start_time, e.start_freq))
    return tuple(estimates)


def _drop_fused_members(estimates: list, min_separation: float) -> list:
    """Strip member points from stretches where two estimated lines run
    within the minimal separation of each other.

    There the spectrum shows one fused lump, so a per-snippet member
    measures the fusion, not either pulse.  The fitted line parameters,
    which bridge such stretches from both sides, are kept as they are."""
    lines = [e for e in estimates if e.status != "rejected"]
    masks = [np.ones(e.points.shape[0], dtype=bool) for e in lines]
    for i in range(len(lines)):
        for j in range(i + 1, len(lines)):
            a, b = lines[i], lines[j]
            lo = max(a.start_time, b.start_time)
            hi = min(a.end_time, b.end_time)
            if hi <= lo:
                continue
            gap0 = a.freq_at(lo) - b.freq_at(lo)
            rate = a.slope - b.slope
            for e, mask in ((a, masks[i]), (b, masks[j])):
                t = e.points[:, 0]
                close = np.abs(gap0 + rate * (t - lo)) < min_separation
                mask &= ~((t >= lo) & (t <= hi) & close)
    out = []
    k = 0
    for e in estimates:
        if e.status == "rejected":
            out.append(e)
            continue
        mask = masks[k]
        k += 1
        if mask.all():
            out.append(e)
        elif int(mask.sum()) >= 2:
            out.append(replace(e, points=e.points[mask]))
        else:
            out.append(replace(e, status="rejected"))
    return out


def refine_crossover(cluster_points: np.ndarray, min_separation: float,
                     params: ClusterParams, *, receiver_band: float,
                     time_span: float, snippet_total: int,
                     half_width: float = 0.0, freq_step: float = 0.0) -> list:
    """Piecewise re-estimation of a cluster that one line cannot explain.

    The cluster's time span is cut into ``params.partitions`` equal slices;
    each slice is re-clustered at the minimal-separation scale and fitted as
    in the main pass.  A slice whose fit still fails the deviation test is
    re-sliced once at the finer scale before giving up: near a crossing the
    clusterer chains both pulses together well outside the truly fused
    stretch, and one level of recursion recovers the separated approaches.
    Finally the surviving segments that agree on slope and midpoint values
    are merged back into whole pulses."""
    return _refine(np.asarray(cluster_points, dtype=float), min_separation,
                   params, receiver_band, time_span, snippet_total,
                   half_width, freq_step, depth=1)


def _refine(pts: np.ndarray, min_separation: float, params: ClusterParams,
            receiver_band: float, time_span: float, snippet_total: int,
            half_width: float, freq_step: float, depth: int) -> list:
    t, y, w = pts[:, 0], pts[:, 1], pts[:, 2]
    t0, t1 = float(np.min(t)), float(np.max(t))
    if t1 <= t0:
        return []
    edges = np.linspace(t0, t1, params.partitions + 1)
    bins = np.clip(np.searchsorted(edges, t, side="right") - 1, 0,
                   params.partitions - 1)
    segments = []
    dropped = 0
    for m in range(params.partitions):
        sel = bins == m
        if sel.sum() < 2:
            continue
        tm, ym, wm = t[sel], y[sel], w[sel]
        std = np.column_stack([tm / time_span, ym / receiver_band])
        labels = dbscan(std, params.radius, params.min_neighbors)
        for lab in range(1, labels.max(initial=0) + 1):
            inner = labels == lab
            ti, yi, wi = tm[inner], ym[inner], wm[inner]
            if np.unique(ti).size < 2:
                dropped += 1
                continue
            seg = _make_estimate(ti, yi, wi, "crossover_refined",
                                 snippet_total, min_separation,
                                 half_width, freq_step)
            if _fit_fails(seg, min_separation, snippet_total):
                if depth > 0 and np.unique(ti).size >= 4:
                    segments.extend(_refine(
                        np.column_stack([ti, yi, wi]), min_separation,
                        params, receiver_band, time_span, snippet_total,
                        half_width, freq_step, depth - 1))
                else:
                    # still mixes pulses at the finest scale (it straddles
                    # the crossing); the signal there stays undetected
                    dropped += 1
                continue
            segments.append(seg)
    if not segments:
        _log.debug("crossover refinement dropped all %d partitions; "
                   "this part of the signal stays undetected", params.partitions)
        return []
    threshold = max(_MERGE_FRACTION * float(np.max(y) - np.min(y)),
                    0.5 * min_separation)
    merged = merge_crossover_lines(segments, threshold, snippet_total)
    if dropped:
        _log.debug("crossover refinement dropped %d subclusters", dropped)
    return list(merged)


def _agreement_matrix(segs, threshold: float) -> np.ndarray:
    """agree[i, j]: lines i and j predict the same frequency within
    ``threshold`` at both midpoints, and their slope difference stays within
    it over the joint span."""
    slope = np.array([s.slope for s in segs])
    start = np.array([s.start_time for s in segs])
    end = np.array([s.end_time for s in segs])
    anchor = np.array([s.start_freq for s in segs])
    mid = start + 0.5 * (end - start)
    # value[i, j] = line i evaluated at line j's midpoint
    value = anchor[:, None] + slope[:, None] * (mid[None, :] - start[:, None])
    own = np.diagonal(value)
    at_mid = np.abs(value - own[None, :]) <= threshold
    span = np.maximum(end[:, None], end[None, :]) - np.minimum(start[:, None],
                                                               start[None, :])
    slopes_ok = np.abs(slope[:, None] - slope[None, :]) * span <= threshold
    return at_mid & at_mid.T & slopes_ok


def _merge_groups(segs, threshold: float) -> list:
    """Group lines around point-count anchors: lists of indices.

    The largest ungrouped segment anchors a group and absorbs every segment
    that agrees with it directly.  Transitive chaining is deliberately
    avoided: a run of small pairwise drifts (a crossover arc cut into near
    collinear pieces) would otherwise fuse lines that disagree outright."""
    agree = _agreement_matrix(segs, threshold)
    npts = np.array([s.points.shape[0] for s in segs])
    taken = np.zeros(len(segs), dtype=bool)
    groups = []
    for a in np.argsort(-npts, kind="stable"):
        if taken[a]:
            continue
        members = [int(i) for i in np.nonzero(agree[a])[0] if not taken[i]]
        for i in members:
            taken[i] = True
        groups.append(members)
    return groups


def _merge_members(group, snippet_total: int) -> ChirpEstimate:
    """One estimate out of several collinear ones, refitted on the pooled
    points.  The refit matters: averaging the members' slopes would keep the
    scatter of their short time baselines, while the pooled fit spans the
    whole pulse."""
    pts = np.concatenate([g.points for g in group])
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]
    t, y, w = pts[:, 0], pts[:, 1], pts[:, 2]
    slope, t_ref, val = _fit_line(t, y, w)
    gamma = float(np.min(t))
    rmse = _line_rmse(t, y, slope, t_ref, val, snippet_total)
    return ChirpEstimate(start_freq=val + slope * (gamma - t_ref), slope=slope,
                         duration=float(np.max(t)) - gamma, start_time=gamma,
                         rmse=rmse, status="crossover_refined", points=pts)


def merge_crossover_lines(segments, threshold: float,
                          snippet_total: int) -> tuple:
    """Merge line segments that describe the same pulse.

    Two segments merge when their predicted frequencies agree within
    ``threshold`` at both midpoints and their slopes, extrapolated over the
    joint span, do too.  Groups form around the largest segments rather than
    transitively; each group is refitted on its pooled points.  Segments
    that merge with nothing pass through as they are."""
    segs = list(segments)
    if not segs:
        return ()
    out = []
    for members in _merge_groups(segs, threshold):
        if len(members) == 1:
            out.append(segs[members[0]])
        else:
            out.append(_merge_members([segs[i] for i in members],
                                      snippet_total))
    out.sort(key=lambda e: (e.start_time, e.start_freq))
    return tuple(out)


# ---------------------------------------------------------------------------
# assessment against a known train

def evaluate(truth: ChirpTrain, estimates, plan: SnippetPlan,
             min_separation: float = 5e6) -> ChirpEvalReport:
    """Score estimates against the generating pulse train.

    A true burst counts as detected when some non-rejected estimate covers
    at least half of its span and predicts its instantaneous frequency
    within min_separation on average over the covered snippet centers.  The
    error is the relative deviation of the matched estimates' raw diagram
    points from the true instantaneous frequency, summed over snippets and
    normalized by the snippet count, so undetected stretches contribute
    nothing rather than an arbitrary penalty."""
    centers = plan.centers
    spacing = plan.spacing or 1.0
    usable = [e for e in estimates if e.status != "rejected"]

    # diagram rows of each estimate, grouped by snippet index
    by_snippet = []
    for est in usable:
        k = np.round((est.points[:, 0] - centers[0]) / spacing).astype(int)
        table: dict = {}
        for row, kk in enumerate(k):
            table.setdefault(int(kk), []).append(est.points[row, 1])
        by_snippet.append(table)

    matches = []
    detected = 0
    sq_sum = 0.0
    for comp_idx, comp in enumerate(truth.components):
        for burst, start, end in comp.bursts():
            dur = end - start
            best = (-1, math.inf)
            for ei, est in enumerate(usable):
                lo, hi = max(start, est.start_time), min(end, est.end_time)
                if hi - lo < 0.5 * dur:
                    continue
                inside = centers[(centers >= lo) & (centers <= hi)]
                if inside.size == 0:
                    continue
                dev = float(np.mean(np.abs(comp.inst_freq(inside, burst)
                                           - est.freq_at(inside))))
                if dev <= min_separation and dev < best[1]:
                    best = (ei, dev)
            matches.append((comp_idx, burst, best[0], best[1]))
            if best[0] < 0:
                continue
            detected += 1
            table = by_snippet[best[0]]
            lo, hi = max(start, usable[best[0]].start_time), min(end, usable[best[0]].end_time)
            ks = np.flatnonzero((centers >= lo) & (centers <= hi))
            for k in ks:
                vals = table.get(int(k))
                if not vals:
                    continue
                target = float(comp.inst_freq(centers[k], burst))
                nearest = min(vals, key=lambda v: abs(v - target))
                sq_sum += ((target - nearest) / target) ** 2
    total = truth.total_bursts()
    rmse = math.sqrt(sq_sum / plan.count) if detected else math.nan
    return ChirpEvalReport(total=total, detected=detected, rmse=rmse,
                           matches=tuple(matches))


# ---------------------------------------------------------------------------
# end-to-end driver and file output

def separate(series: SampleSeries, config: ChirpSepConfig,
             duration: float | None = None):
    """Record in, (plan, diagram, estimates) out, using config throughout."""
    if series.kind != "time":
        raise ValueError("separation needs a time series")
    if duration is None:
        duration = (series.values.size - 1) / series.rate
    plan = SnippetPlan.regular(series.rate, duration, config.half_width,
                               config.snippet_count, grid_size=config.grid_size)
    for note in plan.warnings(config.min_separation):
        _log.warning("%s", note)
    diagram = build_diagram(series, plan, config.min_separation,
                            percentile=config.percentile)
    estimates = estimate_components(diagram, config.receiver_band,
                                    config.min_separation,
                                    params=config.cluster_params(),
                                    min_duration=config.duration_floor)
    return plan, diagram, estimates


def write_components_csv(path, estimates) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["p", "omega", "B", "d", "gamma", "rmse", "status"])
        for i, est in enumerate(estimates, start=1):
            w.writerow([i, repr(est.start_freq), repr(est.bandwidth),
                        repr(est.duration), repr(est.start_time),
                        repr(est.rmse), est.status])
