"""Multidimensional point recovery from one-dimensional projections.

Each direction d contributes a moment series sampled along a basis vector:

    mu_d(l) = sum_k A_k exp(-i <offset_d, w_k>) exp(-i l <Delta_d, w_k>),

so the univariate pipeline read on series d yields the projections
<Delta_d, w_k> mod 2pi (peak positions, accurate) together with complex peak
heights A_k exp(-i <offset_d, w_k>) whose phases encode a *different*
direction's projection, only approximately (the kernel perturbs amplitudes
far more than positions).  Cross-direction registration therefore matches
each direction's accurate positions against the reference direction's
phases, pairing greedily by smallest circular discrepancy.

The registered projection vector determines w only modulo the dual lattice
2pi Delta^{-T} Z^q; all candidates inside the search domain are decoded and
the smallest-shift one is reported, with the rest kept as aliases so that
an assessment can credit a hit on any lattice representative.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .filters import KernelConfig
from .synth import ExponentialModel, NoiseSpec, SampleSeries, add_noise, sample_exponential
from .unirec import PeakSet, recover, recover_pursuit

__all__ = [
    "ProjectionBasis",
    "RegisteredPoint",
    "MatchReport",
    "projection_schedule",
    "project_series",
    "register",
    "decode_projections",
    "recover_points",
    "assess",
]

_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class ProjectionBasis:
    """Rows are the sampling directions Delta_1..Delta_q."""

    deltas: np.ndarray
    max_condition: float = 1e6

    def __post_init__(self):
        d = np.atleast_2d(np.asarray(self.deltas, dtype=float))
        if d.shape[0] != d.shape[1]:
            raise ValueError("need exactly q directions of dimension q")
        cond = np.linalg.cond(d)
        if not np.isfinite(cond) or cond > self.max_condition:
            raise ValueError(f"basis condition number {cond:.3g} too large")
        object.__setattr__(self, "deltas", d)
        object.__setattr__(self, "condition", float(cond))

    @property
    def q(self) -> int:
        return self.deltas.shape[0]

    @property
    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.deltas)


@dataclass(frozen=True)
class RegisteredPoint:
    projections: np.ndarray   # <Delta_d, w> mod 2pi, accurate, length q
    amplitude: complex
    w_hat: np.ndarray | None  # smallest-shift decode, None if out of domain
    aliases: np.ndarray       # all in-domain decodes, shape (m, q)


@dataclass(frozen=True)
class MatchReport:
    radius: float
    total: int
    recovered: int
    rmse: float
    distances: np.ndarray     # per matched truth point

    def __post_init__(self):
        if self.recovered > self.total:
            raise ValueError("recovered exceeds total")


def projection_schedule(basis: ProjectionBasis) -> list:
    """(step, offset) per direction.  Direction 1 steps along Delta_1 with a
    Delta_2 offset; every other direction steps along its own Delta_d with a
    Delta_1 offset, so its peak phases can be registered against direction
    1's accurate positions."""
    if basis.q < 2:
        raise ValueError("projection recovery needs q >= 2")
    out = [(basis.deltas[0], basis.deltas[1])]
    for d in range(1, basis.q):
        out.append((basis.deltas[d], basis.deltas[0]))
    return out


def project_series(model: ExponentialModel, basis: ProjectionBasis, n: int,
                   noise: NoiseSpec | None = None, trial: int = 0) -> list:
    if model.dim != basis.q:
        raise ValueError("model dimension does not match the basis")
    out = []
    for step, offset in projection_schedule(basis):
        s = sample_exponential(model, step=step, offset=offset, n=n)
        if noise is not None:
            s = add_noise(s, noise, trial=trial)
        out.append(s)
    return out


def _circ_dist(a, b) -> np.ndarray:
    d = np.abs(np.asarray(a)[:, None] - np.asarray(b)[None, :]) % _TWO_PI
    return np.minimum(d, _TWO_PI - d)


def _greedy_pairs(cost: np.ndarray) -> list:
    """Repeatedly take the globally smallest entry; ties break toward the
    lowest flat index so results never depend on dict ordering."""
    c = cost.copy()
    pairs = []
    count = min(c.shape)
    for _ in range(count):
        flat = int(np.argmin(c))
        i, j = np.unravel_index(flat, c.shape)
        pairs.append((int(i), int(j)))
        c[i, :] = np.inf
        c[:, j] = np.inf
    return pairs


def register(peaksets: list, basis: ProjectionBasis) -> list:
    """Associate per-direction peaks into points.

    Direction d >= 2 carries phases ~ -<Delta_1, w>, compared against the
    reference positions; for d = 2 the reference's own phases point back,
    so both discrepancies are summed.  Reference peaks that fail to find a
    partner in every direction are dropped.
    """
    if len(peaksets) != basis.q:
        raise ValueError("need one PeakSet per direction")
    ref = peaksets[0]
    if ref.k == 0:
        return []
    maps = []   # per direction d>=2: ref index -> peak index
    for d in range(1, basis.q):
        ps = peaksets[d]
        if ps.k == 0:
            return []
        cost = _circ_dist((-ps.phases) % _TWO_PI, ref.lambdas)
        if d == 1:
            cost = cost + _circ_dist(ps.lambdas, (-ref.phases) % _TWO_PI)
        pairs = _greedy_pairs(cost)
        maps.append(dict((i_ref, j) for j, i_ref in pairs))
    points = []
    for i in range(ref.k):
        if not all(i in mp for mp in maps):
            continue
        proj = np.empty(basis.q)
        proj[0] = ref.lambdas[i]
        for d in range(1, basis.q):
            proj[d] = peaksets[d].lambdas[maps[d - 1][i]]
        # direction 1 was offset by Delta_2, so its height is
        # A e^{-i <Delta_2, w>}; the registered projection undoes that.
        amp = complex(ref.values[i] * np.exp(1j * proj[1]))
        w_hat, aliases = decode_projections(proj, basis)
        points.append(RegisteredPoint(projections=proj, amplitude=amp,
                                      w_hat=w_hat, aliases=aliases))
    return points


def decode_projections(proj: np.ndarray, basis: ProjectionBasis,
                       bound: float = np.pi) -> tuple:
    """All w with Delta w = proj (mod 2pi) and |w|_inf <= bound, smallest
    lattice shift first."""
    proj = np.asarray(proj, dtype=float)
    q = basis.q
    kmax = np.floor((np.sum(np.abs(basis.deltas), axis=1) * bound / np.pi + 1.0) / 2.0)
    axes = [np.arange(-int(k), int(k) + 1) for k in kmax]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, q)
    order = np.lexsort(tuple(mesh[:, d] for d in range(q - 1, -1, -1)))
    mesh = mesh[order[np.argsort(np.linalg.norm(mesh[order], axis=1), kind="stable")]]
    cands = (basis.inverse @ (proj[None, :] + _TWO_PI * mesh).T).T
    inside = np.all(np.abs(cands) <= bound + 1e-9, axis=1)
    aliases = cands[inside]
    if aliases.shape[0] == 0:
        return None, aliases
    return aliases[0].copy(), aliases


def recover_points(series_list: list, basis: ProjectionBasis,
                   config: KernelConfig, eta: float,
                   tau: float | None = None, percentile: float = 99.0,
                   expect_k: int | None = None, screen: bool = True) -> list:
    """Per-direction recovery followed by registration.  With expect_k and
    screen, each direction runs the least-squares screened detector (the
    phase of a screened amplitude is also the registration key, so the
    tighter the amplitudes, the fewer cross-direction mismatches)."""
    if expect_k is not None and screen:
        peaksets = [recover_pursuit(s, config, eta=eta, k=expect_k,
                                    percentile=percentile)
                    for s in series_list]
    else:
        peaksets = [recover(s, config, eta=eta, tau=tau,
                            percentile=percentile, expect_k=expect_k)
                    for s in series_list]
    return register(peaksets, basis)


def assess(points: list, truth: np.ndarray, radius: float) -> MatchReport:
    """Greedy smallest-distance matching of truths to estimates, where an
    estimate's distance to a truth is the best over its aliases; each
    estimate is spent once.  RMSE is over the matched pairs."""
    truth = np.atleast_2d(np.asarray(truth, dtype=float))
    total = truth.shape[0]
    usable = [p for p in points if p.aliases.shape[0] > 0]
    if not usable or total == 0:
        return MatchReport(radius=radius, total=total, recovered=0,
                           rmse=float("nan"), distances=np.empty(0))
    cost = np.full((total, len(usable)), np.inf)
    for j, p in enumerate(usable):
        d = np.linalg.norm(truth[:, None, :] - p.aliases[None, :, :], axis=2)
        cost[:, j] = d.min(axis=1)
    dists = []
    for i, j in _greedy_pairs(cost):
        if cost[i, j] <= radius:
            dists.append(cost[i, j])
    dists = np.asarray(sorted(dists))
    recovered = dists.size
    rmse = float(np.sqrt(np.mean(dists ** 2))) if recovered else float("nan")
    return MatchReport(radius=radius, total=total, recovered=recovered,
                       rmse=rmse, distances=dists)
