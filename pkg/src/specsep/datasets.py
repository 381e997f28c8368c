"""Canonical test scenes.

The univariate three-tone model and the 12-point planar scene are fixed
published configurations; the 3D clouds are seeded stand-ins generated under
explicit projection-separation constraints so that every sampling direction
sees resolvable peaks (except the dense cloud, which deliberately contains
unresolvable clusters to exercise partial-recovery reporting).
"""

from __future__ import annotations

import numpy as np

from .multirec import ProjectionBasis
from .synth import ChirpComponent, ChirpTrain, ExponentialModel

__all__ = [
    "three_tone_model",
    "twelve_point_scene",
    "plane_basis",
    "space_basis",
    "cloud_scene",
    "dense_cloud_scene",
    "pulse_train_example",
    "tight_pulse_train",
]

_TWO_PI = 2.0 * np.pi


def three_tone_model() -> ExponentialModel:
    """Two tones 0.005 apart plus a far low-amplitude one."""
    return ExponentialModel(amplitudes=np.array([5.0, 30.0, 20.0]),
                            freqs=np.array([-1.0, 2.0, 2.005]))


_TWELVE_POINTS = np.array([
    [-1.2566, 0.6283],
    [-0.7540, 0.3142],
    [-0.2513, 1.2566],
    [-0.2513, 0.6283],
    [-0.2513, 0.0],
    [0.0, -0.6283],
    [0.0, -1.2566],
    [0.2513, 1.2566],
    [0.2513, 0.6283],
    [0.2513, 0.0],
    [0.7540, 0.3142],
    [1.2566, 0.6283],
])


def twelve_point_scene() -> ExponentialModel:
    return ExponentialModel(amplitudes=np.full(12, 50.0),
                            freqs=_TWELVE_POINTS.copy())


def plane_basis() -> ProjectionBasis:
    return ProjectionBasis(np.array([[1.38, 4.14], [-7.56, 5.67]]))


def space_basis() -> ProjectionBasis:
    return ProjectionBasis(np.array([
        [-0.73, -0.16, -0.66],
        [0.11, -0.98, 0.11],
        [-2.10, 1.20, 3.29],
    ]))


def _min_circular_gap(vals: np.ndarray) -> float:
    v = np.sort(vals % _TWO_PI)
    gaps = np.diff(v, append=v[0] + _TWO_PI)
    return float(gaps.min())


def _projection_gaps(points: np.ndarray, basis: ProjectionBasis) -> float:
    return min(_min_circular_gap(points @ basis.deltas[d])
               for d in range(basis.q))


def cloud_scene(k: int = 29, seed: int = 314159, min_gap: float = 0.1,
                basis: ProjectionBasis | None = None) -> ExponentialModel:
    """k points drawn inside [-0.9pi, 0.9pi]^3, accepted one by one so every
    direction's projections stay min_gap apart (circularly)."""
    if basis is None:
        basis = space_basis()
    rng = np.random.default_rng(seed)
    pts = np.empty((0, basis.q))
    while pts.shape[0] < k:
        cand = rng.uniform(-0.9 * np.pi, 0.9 * np.pi, size=basis.q)
        trial = np.vstack([pts, cand])
        if trial.shape[0] == 1 or _projection_gaps(trial, basis) >= min_gap:
            pts = trial
    return ExponentialModel(amplitudes=np.ones(k), freqs=pts)


def dense_cloud_scene(k: int = 100, seed: int = 271828,
                      clusters: int = 20, spread: float = 0.04) -> ExponentialModel:
    """Clustered cloud with no separation guarantee: nearby points merge
    under the kernel, so only a fraction is recoverable by design."""
    rng = np.random.default_rng(seed)
    centers = rng.uniform(-0.8 * np.pi, 0.8 * np.pi, size=(clusters, 3))
    pts = centers[rng.integers(0, clusters, size=k)]
    pts = pts + rng.normal(scale=spread, size=pts.shape)
    pts = np.clip(pts, -0.9 * np.pi, 0.9 * np.pi)
    return ExponentialModel(amplitudes=np.ones(k), freqs=pts)


def pulse_train_example() -> ChirpTrain:
    """Six emitters, twelve bursts total, on a 1e-4 s window."""
    rows = [
        (1.08e9, 1.5e7, 3.0e-5, 1.0e-5, 5.0e-5, 2),
        (1.36e9, 5.0e6, 1.0e-5, 1.0e-5, 1.5e-5, 5),
        (1.54e9, -2.0e7, 3.0e-5, 1.0e-5, 0.0, 1),
        (1.51e9, 5.0e7, 7.0e-5, 1.5e-5, 0.0, 1),
        (1.48e9, -1.5e7, 5.0e-5, 3.0e-5, 0.0, 1),
        (1.04e9, -1.5e7, 3.0e-5, 1.5e-5, 4.0e-5, 2),
    ]
    comps = tuple(ChirpComponent(omega=w, bandwidth=b, duration=d, t0=t0,
                                 pri=pri, pulses=m)
                  for w, b, d, t0, pri, m in rows)
    return ChirpTrain(components=comps)


def tight_pulse_train() -> ChirpTrain:
    """Two long overlapping chirps whose frequency tracks stay close,
    stressing the cluster-splitting logic."""
    comps = (
        ChirpComponent(omega=1.20e9, bandwidth=2.0e7, duration=8.0e-5,
                       t0=1.0e-5, pri=0.0, pulses=1),
        ChirpComponent(omega=1.26e9, bandwidth=-2.0e7, duration=8.0e-5,
                       t0=1.0e-5, pri=0.0, pulses=1),
    )
    return ChirpTrain(components=comps)
