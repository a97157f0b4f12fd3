"""Truncated Fock-basis operators, state constructors and expectation values.

Conventions used throughout the package:

* quadratures satisfy ``[x, p] = i``, so the vacuum variance is 1/2 and
  noise powers in dB are ``10*log10(V / 0.5)``;
* ``x_theta = (a e^{-i theta} + a^dag e^{i theta}) / sqrt(2)``;
* the squeezing axis angle ``theta0`` is where the variance is minimal,
  ``V(theta0) = v_min``.

States are plain complex ndarrays. Constructors build at a working
dimension of ``2*dim``, truncate to ``dim`` and renormalize; if the norm
lost to truncation exceeds ``TRUNCATION_TOL`` a ``TruncationWarning`` is
emitted.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .exceptions import HeisenbergViolationError, TruncationWarning
from .validation import check_density_matrix, check_dim, check_same_dim

VACUUM_VARIANCE = 0.5
TRUNCATION_TOL = 1e-6


def annihilation(dim):
    """Annihilation operator ``a`` with ``<n-1|a|n> = sqrt(n)``."""
    dim = check_dim(dim)
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(np.complex128)


def creation(dim):
    """Creation operator, adjoint of :func:`annihilation`."""
    return annihilation(dim).conj().T


def number_operator(dim):
    """Photon-number operator ``a^dag a``."""
    dim = check_dim(dim)
    return np.diag(np.arange(dim, dtype=np.complex128))


def quadrature_operator(theta, dim):
    """Quadrature ``x_theta = (a e^{-i theta} + a^dag e^{i theta}) / sqrt(2)``.

    ``theta = 0`` gives x, ``theta = pi/2`` gives p; the vacuum variance of
    the result is 1/2.
    """
    a = annihilation(dim)
    return (a * np.exp(-1j * theta) + a.conj().T * np.exp(1j * theta)) / np.sqrt(2.0)


def fock_state(n, dim):
    """Unit vector for the number state ``|n>``."""
    dim = check_dim(dim)
    if not 0 <= n < dim:
        raise ValueError(f"fock level {n} outside 0..{dim - 1}")
    psi = np.zeros(dim, dtype=np.complex128)
    psi[n] = 1.0
    return psi


def vacuum(dim):
    """Vacuum density matrix ``|0><0|``."""
    dim = check_dim(dim)
    rho = np.zeros((dim, dim), dtype=np.complex128)
    rho[0, 0] = 1.0
    return rho


def thermal_state(nbar, dim):
    """Thermal density matrix with mean photon number ``nbar``."""
    dim = check_dim(dim)
    if nbar < 0:
        raise ValueError("nbar must be >= 0")
    if nbar == 0:
        return vacuum(dim)
    n = np.arange(dim)
    p = np.exp(n * np.log(nbar) - (n + 1) * np.log(1.0 + nbar))
    return np.diag(p / p.sum()).astype(np.complex128)


def db_to_variance(db):
    """Variance in shot-noise units from a noise power in dB."""
    return VACUUM_VARIANCE * 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def variance_to_db(variance):
    """Noise power in dB relative to the vacuum variance 1/2."""
    return 10.0 * np.log10(np.asarray(variance, dtype=float) / VACUUM_VARIANCE)


@dataclass(frozen=True)
class SqueezedStateParams:
    """Second-moment description of a (possibly mixed) squeezed state.

    ``v_min``/``v_max`` are the extremal quadrature variances in shot-noise
    units (vacuum = 1/2) and ``theta0`` the angle of the squeezed axis.
    """

    v_min: float
    v_max: float
    theta0: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.v_min <= self.v_max:
            raise ValueError(f"need 0 < v_min <= v_max, got {self.v_min}, {self.v_max}")
        if self.v_min * self.v_max < 0.25 - 1e-12:
            raise HeisenbergViolationError(
                f"v_min*v_max = {self.v_min * self.v_max:.6g} < 1/4")

    @classmethod
    def from_db(cls, db_min, db_max, theta0=0.0):
        return cls(float(db_to_variance(db_min)), float(db_to_variance(db_max)), theta0)

    @property
    def nbar(self):
        """Mean photon number of the underlying thermal state."""
        return float(np.sqrt(self.v_min * self.v_max)) - 0.5

    @property
    def r(self):
        """Squeezing parameter, ``e^{4r} = v_max / v_min``."""
        return 0.25 * float(np.log(self.v_max / self.v_min))


def _truncate_and_renormalize(rho_work, dim, what):
    """Keep the leading ``dim`` block, warn if the norm lost exceeds tolerance."""
    kept = float(np.trace(rho_work[:dim, :dim]).real)
    deficit = 1.0 - kept
    if deficit > TRUNCATION_TOL:
        warnings.warn(
            f"{what}: truncation deficit {deficit:.3e} exceeds {TRUNCATION_TOL:g}; "
            "increase dim", TruncationWarning, stacklevel=3)
    rho = np.array(rho_work[:dim, :dim]) / kept
    return 0.5 * (rho + rho.conj().T)


def squeezed_vacuum_pure(r, theta0=0.0, dim=16):
    """Pure squeezed vacuum built from closed-form even-photon amplitudes.

    ``c_{2n} = (-e^{2i theta0} tanh r)^n sqrt((2n)!) / (2^n n!) / sqrt(cosh r)``,
    constructed at working dimension ``2*dim``, truncated and renormalized.
    For ``theta0 = 0`` the variance at ``theta = 0`` is ``e^{-2r}/2``.
    """
    dim = check_dim(dim, minimum=2)
    if r < 0:
        raise ValueError("squeezing parameter r must be >= 0")
    work = 2 * dim
    c = np.zeros(work, dtype=np.complex128)
    c[0] = 1.0 / np.sqrt(np.cosh(r))
    step = -np.exp(2j * theta0) * np.tanh(r)
    for k in range(work // 2 - 1):
        # c_{2(k+1)} / c_{2k} = step * sqrt((2k+1)(2k+2)) / (2(k+1))
        c[2 * k + 2] = c[2 * k] * step * np.sqrt((2 * k + 1) * (2 * k + 2)) / (2 * (k + 1))
    c /= np.linalg.norm(c)
    return _truncate_and_renormalize(np.outer(c, c.conj()), dim, "squeezed_vacuum_pure")


def squeezed_thermal(params, dim=16):
    """Squeezed thermal state with prescribed variance extrema.

    A thermal state with ``(2*nbar + 1)/2 = sqrt(v_min*v_max)`` is squeezed
    by ``r = log(v_max/v_min)/4`` and rotated so the minimal variance sits
    at ``theta0``. Built at working dimension ``2*dim`` then truncated.
    """
    if not isinstance(params, SqueezedStateParams):
        raise TypeError("params must be a SqueezedStateParams")
    dim = check_dim(dim, minimum=2)
    work = 2 * dim
    a = annihilation(work)
    generator = 0.5 * params.r * (a @ a - a.conj().T @ a.conj().T)
    squeezer = scipy.linalg.expm(generator.real)
    rho_w = thermal_state(params.nbar, work).real
    rho_w = squeezer @ rho_w @ squeezer.T
    rho_w = rho_w / np.trace(rho_w)
    rho_w = phase_rotate(rho_w, params.theta0)
    return _truncate_and_renormalize(rho_w, dim, "squeezed_thermal")


def phase_rotate(rho, phi):
    """Rotate in phase space: ``rho -> e^{i phi n} rho e^{-i phi n}``.

    Shifts the variance curve, ``V'(theta) = V(theta - phi)``; photon-number
    populations are unchanged.
    """
    rho = np.asarray(rho, dtype=np.complex128)
    phases = np.exp(1j * phi * np.arange(rho.shape[0]))
    return rho * np.outer(phases, phases.conj())


def expectation(rho, op):
    """``Tr(rho @ op)`` as a complex scalar."""
    rho = np.asarray(rho, dtype=np.complex128)
    op = np.asarray(op, dtype=np.complex128)
    check_same_dim(rho, op, "rho", "op")
    return complex(np.einsum("nm,mn->", rho, op))


def variance(rho, theta):
    """Quadrature variance ``<x_theta^2> - <x_theta>^2`` by direct expectation.

    ``x_theta^2`` is expanded with ``a a^dag + a^dag a = 2 n + 1`` before
    restriction to the truncated space, so states embedded below the
    truncation edge get their exact second moment (squaring the truncated
    quadrature matrix instead would lose ``(dim/2) rho[-1, -1]``).
    """
    rho = np.asarray(rho, dtype=np.complex128)
    dim = rho.shape[0]
    a_op = annihilation(dim)
    x = quadrature_operator(theta, dim)
    mean = expectation(rho, x).real
    second = (expectation(rho, a_op @ a_op) * np.exp(-2j * theta)).real \
        + expectation(rho, number_operator(dim)).real + 0.5
    return second - mean ** 2


def quadrature_moments(rho):
    """Coefficients of the variance sinusoid ``V(theta) = a + Re(B e^{-2i theta})``.

    Returns ``(a, B)`` with ``a = <n> + 1/2 - |<a>|^2`` and
    ``B = <a^2> - <a>^2``; variance extrema follow as ``a -/+ |B|``.
    """
    rho = np.asarray(rho, dtype=np.complex128)
    dim = rho.shape[0]
    a_op = annihilation(dim)
    mean_a = expectation(rho, a_op)
    mean_n = expectation(rho, number_operator(dim)).real
    mean_aa = expectation(rho, a_op @ a_op)
    return mean_n + 0.5 - abs(mean_a) ** 2, mean_aa - mean_a ** 2


def variance_extrema(rho):
    """Closed-form ``(v_min, v_max, theta_min)`` from second moments.

    ``theta_min`` is reported in ``[0, pi)``; for an isotropic state it is 0.
    """
    offset, b = quadrature_moments(rho)
    v_min = offset - abs(b)
    v_max = offset + abs(b)
    theta_min = ((np.angle(b) + np.pi) / 2.0) % np.pi if abs(b) > 0 else 0.0
    return float(v_min), float(v_max), float(theta_min)


def purity(rho):
    """``Tr(rho^2)``."""
    rho = np.asarray(rho, dtype=np.complex128)
    return float(np.einsum("nm,mn->", rho, rho).real)


def mean_photon_number(rho):
    rho = np.asarray(rho, dtype=np.complex128)
    return expectation(rho, number_operator(rho.shape[0])).real


def validate_state(rho, name="rho"):
    """Re-export of :func:`focklab.validation.check_density_matrix`."""
    return check_density_matrix(rho, name=name)
