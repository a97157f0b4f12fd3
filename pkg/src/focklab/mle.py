"""Maximum-likelihood density-matrix reconstruction from binned quadratures.

The estimator iterates the diluted expectation-maximization update

    rho <- N [ (1-d) I + d R(rho) ] rho [ (1-d) I + d R(rho) ]

with ``R(rho) = sum_j (f_j / p_j) Pi_j`` over histogram bins, where ``f_j``
are relative frequencies, ``p_j = Tr(rho Pi_j)`` (clamped at a probability
floor) and ``Pi_j`` the projector onto quadrature outcomes integrated over
the bin. Dilution ``d <= 0.5`` keeps the log-likelihood nondecreasing.

``HomodyneTomography`` wraps the same pipeline behind the sklearn
estimator API so it composes with the wider ecosystem.
"""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .exceptions import NumericalError
from .homodyne import QuadratureDataset, hermite_functions
from .validation import check_density_matrix

GL_ORDER = 20
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(GL_ORDER)


@dataclass
class QuadratureHistogram:
    """Counts over a (phase bin, value bin) grid.

    ``counts`` has shape ``(P, B)``; ``value_edges`` (length ``B+1``) are
    strictly increasing and bins are half-open ``[lo, hi)``.
    """

    counts: np.ndarray
    value_edges: np.ndarray
    phase_centers: np.ndarray

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        self.value_edges = np.asarray(self.value_edges, dtype=float)
        self.phase_centers = np.asarray(self.phase_centers, dtype=float)
        if self.counts.ndim != 2:
            raise ValueError("counts must be a 2-D (phase, value) array")
        if np.any(self.counts < 0):
            raise ValueError("counts must be nonnegative")
        if self.counts.sum() < 1:
            raise ValueError("histogram must contain at least one count")
        if self.value_edges.size != self.counts.shape[1] + 1:
            raise ValueError("need value_bins + 1 edges")
        if np.any(np.diff(self.value_edges) <= 0):
            raise ValueError("value edges must be strictly increasing")
        if self.phase_centers.size != self.counts.shape[0]:
            raise ValueError("need one phase center per phase bin")

    @property
    def phase_bins(self):
        return self.counts.shape[0]

    @property
    def value_bins(self):
        return self.counts.shape[1]

    @property
    def total(self):
        return int(self.counts.sum())


def bin_dataset(dataset, phase_bins=100, value_bins=256):
    """Histogram a dataset on a fixed ``[0, 2*pi)`` phase grid.

    Value edges span the sample range so every record lands in a bin;
    assignment is half-open ``[lo, hi)``.
    """
    if not isinstance(dataset, QuadratureDataset):
        raise TypeError("dataset must be a QuadratureDataset")
    v = dataset.values
    lo, hi = float(v.min()), float(v.max())
    if hi <= lo:
        lo, hi = lo - 0.5, hi + 0.5
    span = hi - lo
    edges = np.linspace(lo, hi + 1e-9 * span, value_bins + 1)
    b_idx = np.clip(np.searchsorted(edges, v, side="right") - 1, 0, value_bins - 1)
    p_idx = np.clip((dataset.phases * phase_bins / (2.0 * np.pi)).astype(np.int64),
                    0, phase_bins - 1)
    counts = np.bincount(p_idx * value_bins + b_idx,
                         minlength=phase_bins * value_bins).reshape(phase_bins, value_bins)
    centers = (np.arange(phase_bins) + 0.5) * 2.0 * np.pi / phase_bins
    return QuadratureHistogram(counts, edges, centers)


def _panel_estimate(lo, hi, panels, dim):
    """Composite Gauss-Legendre estimate of ``int psi_m psi_n`` over ``[lo, hi]``."""
    starts = lo + (hi - lo) * np.arange(panels) / panels
    half = 0.5 * (hi - lo) / panels
    x = (starts[:, None] + half * (_GL_NODES + 1.0)[None, :]).ravel()
    w = np.tile(half * _GL_WEIGHTS, panels)
    psi = hermite_functions(dim, x)
    return (psi * w) @ psi.T


def bin_overlap_integrals(edges, dim, tol=1e-12, max_doublings=10):
    """``G[b, m, n] = int_bin psi_m psi_n dx`` by adaptive panel doubling.

    Each bin's composite Gauss-Legendre estimate is refined until two
    successive refinements agree entrywise to ``tol``; raises
    :class:`NumericalError` on non-convergence.
    """
    edges = np.asarray(edges, dtype=float)
    out = np.empty((edges.size - 1, dim, dim))
    for b in range(edges.size - 1):
        lo, hi = edges[b], edges[b + 1]
        prev = _panel_estimate(lo, hi, 1, dim)
        panels = 2
        for _ in range(max_doublings):
            est = _panel_estimate(lo, hi, panels, dim)
            if np.max(np.abs(est - prev)) <= tol:
                break
            prev, panels = est, panels * 2
        else:
            raise NumericalError(
                f"bin [{lo:g}, {hi:g}] quadrature did not converge to {tol:g}")
        out[b] = est
    return out


def _phase_matrices(phase_centers, dim):
    """``E[p, m, n] = e^{i (m - n) theta_p}``, from ``<n|x,theta> = e^{i n theta} psi_n``."""
    n = np.arange(dim)
    row = np.exp(1j * np.outer(phase_centers, n))
    return row[:, :, None] * row.conj()[:, None, :]


def povm_element(theta, x_lo, x_hi, dim):
    """Quadrature-bin POVM element in the Fock basis.

    ``Pi_{mn} = e^{i(m-n) theta} int_{x_lo}^{x_hi} psi_m(x) psi_n(x) dx``,
    the phase convention that makes ``Tr(rho Pi)`` the integral of
    :func:`focklab.homodyne.quadrature_pdf` over the bin. Hermitian and
    positive semidefinite; elements over a partition of the real line sum
    to the identity.
    """
    if not x_lo < x_hi:
        raise ValueError("need x_lo < x_hi")
    g = bin_overlap_integrals(np.array([x_lo, x_hi]), dim)[0]
    return _phase_matrices(np.atleast_1d(float(theta)), dim)[0] * g


def _point_overlap_integrals(edges, dim):
    """Fast path: midpoint rule, ``G[b] ~ width * psi(center) psi(center)^T``."""
    edges = np.asarray(edges, dtype=float)
    centers = 0.5 * (edges[1:] + edges[:-1])
    widths = np.diff(edges)
    psi = hermite_functions(dim, centers)
    return np.einsum("b,mb,nb->bmn", widths, psi, psi)


@dataclass
class ReconstructionResult:
    """Reconstructed state plus convergence diagnostics."""

    rho: np.ndarray
    iterations: int
    final_log_likelihood: float
    converged: bool

    def diagnostics(self):
        return {"iterations": int(self.iterations),
                "final_log_likelihood": float(self.final_log_likelihood),
                "converged": bool(self.converged)}


def _bin_probabilities(rho, phase_mats, g_flat):
    """``p[p, b] = Tr(rho Pi^{(p,b)})`` for all bins at once."""
    dim = rho.shape[0]
    a = (phase_mats * rho.T[None, :, :]).reshape(phase_mats.shape[0], dim * dim)
    return a.real @ g_flat.T


def log_likelihood(rho, hist, prob_floor=1e-12, point_povm=False):
    """``sum_j counts_j * ln(max(p_j, prob_floor))`` over histogram bins."""
    rho = check_density_matrix(rho)
    dim = rho.shape[0]
    integrals = (_point_overlap_integrals if point_povm else bin_overlap_integrals)(
        hist.value_edges, dim)
    phase_mats = _phase_matrices(hist.phase_centers, dim)
    probs = _bin_probabilities(rho, phase_mats, integrals.reshape(-1, dim * dim))
    return float(np.sum(hist.counts * np.log(np.maximum(probs, prob_floor))))


def r_operator(rho, hist, prob_floor=1e-12, point_povm=False):
    """``R(rho) = sum_j (f_j / p_j) Pi_j`` with relative frequencies ``f_j``.

    At the maximum-likelihood state ``R(rho) rho = rho``; for data drawn
    from ``rho`` itself, ``R`` tends to the identity as counts grow.
    """
    rho = np.asarray(rho, dtype=np.complex128)
    dim = rho.shape[0]
    integrals = (_point_overlap_integrals if point_povm else bin_overlap_integrals)(
        hist.value_edges, dim)
    phase_mats = _phase_matrices(hist.phase_centers, dim)
    g_flat = integrals.reshape(-1, dim * dim)
    probs = _bin_probabilities(rho, phase_mats, g_flat)
    freqs = hist.counts / hist.total
    ratios = freqs / np.maximum(probs, prob_floor)
    m = (ratios @ g_flat).reshape(phase_mats.shape[0], dim, dim)
    return np.einsum("pmn,pmn->mn", phase_mats, m)


def reconstruct(hist, dim=16, max_iters=2000, rel_ll_tol=1e-10, prob_floor=1e-12,
                dilution=0.5, point_povm=False, callback=None):
    """Iterate the diluted update from the maximally mixed state.

    Stops when the relative log-likelihood improvement drops below
    ``rel_ll_tol`` or after ``max_iters`` updates. ``callback(it, rho, ll)``
    is invoked once per iterate before the update, which tests use to
    audit per-iteration invariants.
    """
    if not isinstance(hist, QuadratureHistogram):
        raise TypeError("hist must be a QuadratureHistogram")
    if dim < 2:
        raise ValueError("dim must be >= 2")
    if not 0.0 < dilution <= 1.0:
        raise ValueError("dilution must be in (0, 1]")
    if rel_ll_tol <= 0 or prob_floor <= 0:
        raise ValueError("rel_ll_tol and prob_floor must be > 0")

    integrals = (_point_overlap_integrals if point_povm else bin_overlap_integrals)(
        hist.value_edges, dim)
    g_flat = integrals.reshape(-1, dim * dim)
    phase_mats = _phase_matrices(hist.phase_centers, dim)
    freqs = hist.counts / hist.total
    eye = np.eye(dim, dtype=np.complex128)

    rho = eye.copy() / dim
    ll_prev = None
    ll = -np.inf
    converged = False
    iterations = 0
    for it in range(max_iters + 1):
        probs = _bin_probabilities(rho, phase_mats, g_flat)
        ll = float(np.sum(hist.counts * np.log(np.maximum(probs, prob_floor))))
        if not np.isfinite(ll):
            raise NumericalError(f"non-finite log-likelihood at iteration {it}")
        if callback is not None:
            callback(it, rho, ll)
        if ll_prev is not None and ll - ll_prev < rel_ll_tol * abs(ll_prev):
            converged = True
            break
        if it == max_iters:
            break
        ll_prev = ll
        ratios = freqs / np.maximum(probs, prob_floor)
        m = (ratios @ g_flat).reshape(phase_mats.shape[0], dim, dim)
        r = np.einsum("pmn,pmn->mn", phase_mats, m)
        update = (1.0 - dilution) * eye + dilution * r
        rho = update @ rho @ update.conj().T
        rho = 0.5 * (rho + rho.conj().T)
        rho /= rho.trace().real
        iterations = it + 1
    return ReconstructionResult(rho, iterations, ll, converged)


class HomodyneTomography(BaseEstimator):
    """Homodyne tomography as an sklearn-style estimator.

    ``fit`` accepts either a :class:`QuadratureDataset` or an array of
    shape ``(n_samples, 2)`` with columns ``(phase_rad, value)``, bins it
    and runs the maximum-likelihood reconstruction.

    Attributes set by ``fit``: ``density_matrix_``, ``n_iter_``,
    ``log_likelihood_``, ``converged_``, ``histogram_``, ``result_``.
    """

    def __init__(self, dim=16, phase_bins=100, value_bins=256, max_iters=2000,
                 rel_ll_tol=1e-10, prob_floor=1e-12, dilution=0.5, point_povm=False):
        self.dim = dim
        self.phase_bins = phase_bins
        self.value_bins = value_bins
        self.max_iters = max_iters
        self.rel_ll_tol = rel_ll_tol
        self.prob_floor = prob_floor
        self.dilution = dilution
        self.point_povm = point_povm

    def _as_dataset(self, X):
        if isinstance(X, QuadratureDataset):
            return X
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != 2:
            raise ValueError("X must be a (n_samples, 2) array of (phase, value)")
        return QuadratureDataset(X[:, 0], X[:, 1])

    def fit(self, X, y=None):
        dataset = self._as_dataset(X)
        self.histogram_ = bin_dataset(dataset, self.phase_bins, self.value_bins)
        result = reconstruct(self.histogram_, dim=self.dim, max_iters=self.max_iters,
                             rel_ll_tol=self.rel_ll_tol, prob_floor=self.prob_floor,
                             dilution=self.dilution, point_povm=self.point_povm)
        self.result_ = result
        self.density_matrix_ = result.rho
        self.n_iter_ = result.iterations
        self.log_likelihood_ = result.final_log_likelihood
        self.converged_ = result.converged
        return self

    def score(self, X, y=None):
        """Mean per-sample log density of ``X`` under the fitted state."""
        dataset = self._as_dataset(X)
        rho = self.density_matrix_
        psi = hermite_functions(rho.shape[0], dataset.values)
        u = psi * np.exp(1j * np.outer(np.arange(rho.shape[0]), dataset.phases))
        pdf = np.einsum("mi,mn,ni->i", u.conj(), rho, u).real
        return float(np.mean(np.log(np.maximum(pdf, self.prob_floor))))
