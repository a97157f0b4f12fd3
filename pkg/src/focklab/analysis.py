"""Derived quantities: noise curves, squeezing metrics, Wigner functions,
fidelity, transmission sweeps and the classical polarization model."""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from . import channel, fock
from .homodyne import QuadratureDataset
from .validation import check_density_matrix, check_same_dim


@dataclass
class NoiseCurve:
    """Quadrature variance versus phase, with dB relative to shot noise."""

    thetas: np.ndarray
    variance: np.ndarray
    db: np.ndarray

    def __post_init__(self):
        self.thetas = np.asarray(self.thetas, dtype=float)
        self.variance = np.asarray(self.variance, dtype=float)
        self.db = np.asarray(self.db, dtype=float)
        if not self.thetas.shape == self.variance.shape == self.db.shape:
            raise ValueError("thetas, variance and db must have equal length")
        if np.any(self.variance <= 0):
            raise ValueError("variances must be > 0")

    def to_dict(self):
        return {"thetas": self.thetas.tolist(), "variance": self.variance.tolist(),
                "db": self.db.tolist()}


def noise_curve_from_state(rho, n_points=360):
    """Model curve ``V(theta)`` over one full phase turn, by direct expectation."""
    rho = check_density_matrix(rho)
    thetas = np.linspace(0.0, 2.0 * np.pi, n_points, endpoint=False)
    var = np.array([fock.variance(rho, t) for t in thetas])
    return NoiseCurve(thetas, var, fock.variance_to_db(var))


def noise_curve_from_data(dataset, n_phase_bins=50, min_records=100):
    """Per-phase-bin sample variance of a dataset, calibrated by its metadata."""
    if not isinstance(dataset, QuadratureDataset):
        raise TypeError("dataset must be a QuadratureDataset")
    idx = np.clip((dataset.phases * n_phase_bins / (2.0 * np.pi)).astype(np.int64),
                  0, n_phase_bins - 1)
    counts = np.bincount(idx, minlength=n_phase_bins)
    if counts.min() < min_records:
        lacking = int(np.argmin(counts))
        raise ValueError(
            f"phase bin {lacking} holds {counts[lacking]} records, need >= {min_records}")
    sums = np.bincount(idx, weights=dataset.values, minlength=n_phase_bins)
    sq_sums = np.bincount(idx, weights=dataset.values ** 2, minlength=n_phase_bins)
    var = (sq_sums - sums ** 2 / counts) / (counts - 1)
    centers = (np.arange(n_phase_bins) + 0.5) * 2.0 * np.pi / n_phase_bins
    calibration = dataset.meta.get("vacuum_variance", fock.VACUUM_VARIANCE)
    return NoiseCurve(centers, var, 10.0 * np.log10(var / calibration))


def squeezing_metrics(rho):
    """Variance extrema, dB values, purity and mean photon number of a state."""
    rho = check_density_matrix(rho)
    v_min, v_max, theta_min = fock.variance_extrema(rho)
    return {
        "v_min": v_min,
        "v_max": v_max,
        "theta_min": theta_min,
        "db_min": float(fock.variance_to_db(v_min)),
        "db_max": float(fock.variance_to_db(v_max)),
        "purity": fock.purity(rho),
        "mean_n": fock.mean_photon_number(rho),
    }


@dataclass
class WignerGrid:
    """Wigner quasi-probability on a rectangular (x, p) grid.

    ``values[i, j] = W(x_axis[i], p_axis[j])``; the Riemann sum times the
    cell area is 1 for a grid that covers the state.
    """

    x_axis: np.ndarray
    p_axis: np.ndarray
    values: np.ndarray

    def integral(self):
        dx = self.x_axis[1] - self.x_axis[0]
        dp = self.p_axis[1] - self.p_axis[0]
        return float(self.values.sum() * dx * dp)

    def marginal_x(self):
        """Integrate over p; recovers the theta=0 quadrature density."""
        dp = self.p_axis[1] - self.p_axis[0]
        return np.trapezoid(self.values, dx=dp, axis=1)

    def marginal_p(self):
        """Integrate over x; recovers the theta=pi/2 quadrature density."""
        dx = self.x_axis[1] - self.x_axis[0]
        return np.trapezoid(self.values, dx=dx, axis=0)

    def to_dict(self):
        return {"x_axis": self.x_axis.tolist(), "p_axis": self.p_axis.tolist(),
                "values": self.values.tolist()}


def _wigner_working_dim(dim, populations, alpha_max):
    """Working dimension keeping displaced support below the truncation edge."""
    tail = 1.0 - np.cumsum(populations)
    n_eff = int(np.searchsorted(-tail, -1e-12)) + 1
    reach = (np.sqrt(n_eff) + alpha_max) ** 2
    return max(2 * dim, int(np.ceil(reach + 8.0 * np.sqrt(reach) + 10.0)))


def wigner(rho, extent=5.0, points=201, x_axis=None, p_axis=None,
           working_dim=None, chunk=512):
    """Wigner function via the displaced-parity expectation.

    ``W(x, p) = Tr[rho D(alpha) P D(alpha)^dag] / pi`` with
    ``alpha = (x + i p)/sqrt(2)`` and parity ``P``. The displacement is the
    exact matrix exponential on an enlarged working space so displaced
    states stay below the truncation edge; the grid should cover at least
    4 standard deviations of both quadratures.
    """
    rho = check_density_matrix(rho)
    dim = rho.shape[0]
    if x_axis is None:
        x_axis = np.linspace(-extent, extent, points)
    if p_axis is None:
        p_axis = np.linspace(-extent, extent, points)
    x_axis = np.asarray(x_axis, dtype=float)
    p_axis = np.asarray(p_axis, dtype=float)

    xg, pg = np.meshgrid(x_axis, p_axis, indexing="ij")
    alpha = ((xg + 1j * pg) / np.sqrt(2.0)).ravel()
    radius = np.abs(alpha)
    angle = np.angle(alpha)

    if working_dim is None:
        populations = np.abs(np.diag(rho).real)
        working_dim = _wigner_working_dim(dim, populations, float(radius.max()))
    if working_dim < dim:
        raise ValueError("working_dim must be >= the state dimension")

    # rank decomposition of the state, padded into the working space
    evals, evecs = np.linalg.eigh(rho)
    keep = evals > 1e-14
    weights = evals[keep]
    vecs = np.zeros((working_dim, int(keep.sum())), dtype=np.complex128)
    vecs[:dim] = evecs[:, keep] * np.sqrt(weights)

    a = fock.annihilation(working_dim)
    p_op = (a - a.conj().T) / (1j * np.sqrt(2.0))
    lam, u = np.linalg.eigh(p_op)
    parity = np.where(np.arange(working_dim) % 2 == 0, 1.0, -1.0)
    levels = np.arange(working_dim)

    w = np.empty(alpha.size, dtype=float)
    for lo in range(0, alpha.size, chunk):
        hi = min(lo + chunk, alpha.size)
        rot = np.exp(-1j * np.outer(angle[lo:hi], levels))  # [C, D]
        y = rot[:, :, None] * vecs[None, :, :]              # [C, D, J]
        t = u.conj().T @ y
        t *= np.exp(1j * np.sqrt(2.0) * radius[lo:hi, None] * lam[None, :])[:, :, None]
        z = u @ t
        w[lo:hi] = np.einsum("n,cnj->c", parity, np.abs(z) ** 2) / np.pi
    return WignerGrid(x_axis, p_axis, w.reshape(x_axis.size, p_axis.size))


def fidelity(rho_a, rho_b):
    """Root fidelity ``Tr sqrt(sqrt(rho_a) rho_b sqrt(rho_a))``.

    Symmetric in its arguments, 1 iff the states coincide, 0 for
    orthogonal supports.
    """
    rho_a = check_density_matrix(rho_a, name="rho_a")
    rho_b = check_density_matrix(rho_b, name="rho_b")
    check_same_dim(rho_a, rho_b)
    evals, evecs = np.linalg.eigh(rho_a)
    sqrt_a = (evecs * np.sqrt(np.clip(evals, 0.0, None))) @ evecs.conj().T
    inner = sqrt_a @ rho_b @ sqrt_a
    inner = 0.5 * (inner + inner.conj().T)
    root = float(np.sum(np.sqrt(np.clip(np.linalg.eigvalsh(inner), 0.0, None))))
    return min(max(root, 0.0), 1.0)


@dataclass
class EtaSweepResult:
    """Fidelity against a target state across a transmission grid."""

    etas: np.ndarray
    fidelities: np.ndarray
    best_eta: float
    best_fidelity: float

    def to_dict(self):
        return {"etas": self.etas.tolist(), "fidelities": self.fidelities.tolist(),
                "best_eta": float(self.best_eta), "best_fidelity": float(self.best_fidelity)}


def align_squeezing_axis(rho, rho_target):
    """Rotate ``rho`` so its minimal-variance axis matches the target's."""
    offset = fock.variance_extrema(rho_target)[2] - fock.variance_extrema(rho)[2]
    return fock.phase_rotate(rho, offset)


def eta_sweep(rho_in, rho_target, etas=None, grid_step=0.001, align_phase=True):
    """Fidelity of ``loss(rho_in, eta)`` against ``rho_target`` over a grid.

    Returns the full curve and its maximum; ties resolve to the smallest
    transmission. ``align_phase`` first rotates the input so the squeezing
    axes coincide, since a measured phase origin is arbitrary.
    """
    rho_in = check_density_matrix(rho_in, name="rho_in")
    rho_target = check_density_matrix(rho_target, name="rho_target")
    check_same_dim(rho_in, rho_target, "rho_in", "rho_target")
    if etas is None:
        n_steps = int(round(1.0 / grid_step))
        etas = np.linspace(0.0, 1.0, n_steps + 1)
    etas = np.asarray(etas, dtype=float)
    if np.any((etas < 0) | (etas > 1)):
        raise ValueError("etas must lie in [0, 1]")
    if align_phase:
        rho_in = align_squeezing_axis(rho_in, rho_target)
    fids = np.array([fidelity(channel.apply_loss(rho_in, eta), rho_target)
                     for eta in etas])
    best = int(np.argmax(fids))
    return EtaSweepResult(etas, fids, float(etas[best]), float(fids[best]))


class LossChannelFit(BaseEstimator):
    """Fit the transmission of a pure-loss channel between two states.

    sklearn-style estimator: ``fit(rho_in, rho_target)`` sweeps the
    transmission grid and exposes ``best_eta_``, ``best_fidelity_``,
    ``etas_`` and ``fidelities_``.
    """

    def __init__(self, grid_step=0.001, align_phase=True):
        self.grid_step = grid_step
        self.align_phase = align_phase

    def fit(self, X, y):
        sweep = eta_sweep(X, y, grid_step=self.grid_step, align_phase=self.align_phase)
        self.sweep_ = sweep
        self.etas_ = sweep.etas
        self.fidelities_ = sweep.fidelities
        self.best_eta_ = sweep.best_eta
        self.best_fidelity_ = sweep.best_fidelity
        return self

    def predict(self, X):
        """Output state of the fitted channel for a new input."""
        return channel.apply_loss(X, self.best_eta_)


def polarization_transmission(alpha, t_tm, t_bg=0.0):
    """Classical transmission versus input polarization angle.

    ``T(alpha) = t_tm cos^2(alpha) + t_bg sin^2(alpha)`` with the angle
    measured from the transverse-magnetic axis.
    """
    if not 0.0 <= t_bg <= t_tm <= 1.0:
        raise ValueError("need 0 <= t_bg <= t_tm <= 1")
    alpha = np.asarray(alpha, dtype=float)
    result = t_tm * np.cos(alpha) ** 2 + t_bg * np.sin(alpha) ** 2
    return float(result) if result.ndim == 0 else result
