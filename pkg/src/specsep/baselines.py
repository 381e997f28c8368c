"""Classical subspace and linear-prediction estimators used for comparison.

All three operate on the same moment series as the kernel pipeline.  The
data are re-indexed to j = 0..N-1 internally; since mu(l) = sum A_k z_k^l
with z_k = e^{-i lambda_k}, shifting the index only rotates the per-term
weights and leaves the nodes alone.  Frequencies are reported as
lambda = arg(conj(z)), and amplitudes always come from one final
least-squares solve against the unit-circle Vandermonde at the original
indices, so the three methods differ only in how they locate the nodes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .filters import _next_pow2
from .synth import SampleSeries
from .unirec import parabolic_offset

__all__ = ["BaselineEstimate", "prony", "music", "esprit"]


@dataclass(frozen=True)
class BaselineEstimate:
    method: str
    freqs: np.ndarray        # ascending, in [-pi, pi)
    amplitudes: np.ndarray   # complex, aligned with freqs
    nodes: np.ndarray        # conj of the model roots, arg(node) = freq
    singular_values: np.ndarray | None = None

    @property
    def k(self) -> int:
        return self.freqs.size


def _series_values(series: SampleSeries) -> tuple:
    if series.kind != "moments":
        raise ValueError("baseline estimators need a moment series")
    return series.values, series.indices


def _hankel_rows(n_samples: int, k: int, rows: int | None) -> int:
    if rows is None:
        rows = n_samples // 3
    return int(np.clip(rows, k + 1, n_samples - k + 1))


def _fit_amplitudes(values: np.ndarray, indices: np.ndarray,
                    freqs: np.ndarray) -> np.ndarray:
    # V[j, k] = e^{-i freq_k * index_j}; one shared solve for every method
    v = np.exp(-1j * np.outer(indices, freqs))
    amps, *_ = np.linalg.lstsq(v, values, rcond=None)
    return amps


def _finish(method: str, nodes: np.ndarray, values: np.ndarray,
            indices: np.ndarray, sv=None) -> BaselineEstimate:
    freqs = np.angle(nodes)
    order = np.argsort(freqs)
    freqs = freqs[order]
    nodes = nodes[order]
    amps = _fit_amplitudes(values, indices, freqs)
    return BaselineEstimate(method=method, freqs=freqs, amplitudes=amps,
                            nodes=nodes, singular_values=sv)


def prony(series: SampleSeries, k: int) -> BaselineEstimate:
    """Least-squares linear prediction: fit the order-k recurrence
    y[j+k] = -sum_m c_m y[j+k-m], take the roots of the predictor."""
    values, indices = _series_values(series)
    n_samples = values.size
    if n_samples < 2 * k:
        raise ValueError("need at least 2k samples for order k")
    cols = np.stack([values[k - m:n_samples - m] for m in range(1, k + 1)], axis=1)
    rhs = -values[k:]
    coeffs, *_ = np.linalg.lstsq(cols, rhs, rcond=None)
    roots = np.roots(np.concatenate([[1.0], coeffs]))
    return _finish("prony", np.conj(roots), values, indices)


def _gram_left_vectors(values: np.ndarray, rows: int) -> tuple:
    """Left singular vectors and singular values of the Hankel matrix via
    its (much smaller) Gram matrix."""
    h = scipy.linalg.hankel(values[:rows], values[rows - 1:])
    gram = h @ h.conj().T
    w, u = scipy.linalg.eigh(gram)
    w = np.clip(w[::-1], 0.0, None)
    return u[:, ::-1], np.sqrt(w)


def music(series: SampleSeries, k: int, rows: int | None = None,
          grid_size: int = 0, refine: bool = True) -> BaselineEstimate:
    """Subspace pseudospectrum scan.  The noise-space power is computed
    through the signal space, ||P_noise e||^2 = L - ||U_sig^H e||^2, so only
    k correlations per grid point are needed instead of L - k."""
    values, indices = _series_values(series)
    n_samples = values.size
    rows_ = _hankel_rows(n_samples, k, rows)
    u, sv = _gram_left_vectors(values, rows_)
    u_sig = u[:, :k]
    if grid_size == 0:
        grid_size = _next_pow2(8 * (n_samples + 1))
    # <u, e(x_j)> on x_j = -pi + 2 pi j / G for all signal columns at once
    signs = np.where(np.arange(rows_) % 2 == 0, 1.0, -1.0)
    padded = np.zeros((grid_size, k), dtype=complex)
    padded[:rows_] = np.conj(u_sig) * signs[:, None]
    corr = np.fft.fft(padded, axis=0)
    noise_power = np.maximum(rows_ - np.sum(np.abs(corr) ** 2, axis=1), 1e-30)
    pseudo = 1.0 / noise_power
    # tallest k circular local maxima of the pseudospectrum
    up = pseudo > np.roll(pseudo, 1)
    down = pseudo >= np.roll(pseudo, -1)
    local = np.flatnonzero(up & down)
    if local.size < k:
        local = np.argsort(pseudo)[-k:]
    top = local[np.argsort(pseudo[local])[-k:]]
    step = 2.0 * np.pi / grid_size
    freqs = []
    for cell in top:
        off = 0.0
        if refine:
            off = parabolic_offset(pseudo[(cell - 1) % grid_size], pseudo[cell],
                                   pseudo[(cell + 1) % grid_size])
        freqs.append(-np.pi + cell * step + off * step)
    freqs = (np.asarray(freqs) + np.pi) % (2.0 * np.pi) - np.pi
    return _finish("music", np.exp(1j * freqs), values, indices, sv=sv)


def esprit(series: SampleSeries, k: int | None = None, rows: int | None = None,
           rank_tol: float = 1e-2) -> BaselineEstimate:
    """Rotational invariance: eigenvalues of the shift operator mapped
    through the signal subspace.  With k=None the rank is taken as the
    number of singular values >= rank_tol * largest."""
    values, indices = _series_values(series)
    n_samples = values.size
    k_guess = k if k is not None else max(1, min(n_samples // 3 - 1, 64))
    rows_ = _hankel_rows(n_samples, k_guess, rows)
    u, sv = _gram_left_vectors(values, rows_)
    if k is None:
        k = max(1, int(np.sum(sv >= rank_tol * sv[0])))
    u_sig = u[:, :k]
    shift, *_ = np.linalg.lstsq(u_sig[:-1], u_sig[1:], rcond=None)
    roots = np.linalg.eigvals(shift)
    return _finish("esprit", np.conj(roots), values, indices, sv=sv)
