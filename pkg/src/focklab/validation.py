"""Input validation helpers for density matrices and state vectors.

All public entry points of the package funnel array-likes through these
checks, mirroring the sklearn ``check_array`` convention. Tolerances follow
the package-wide contracts: Hermiticity to 1e-12, unit trace to 1e-9 and
positive semidefiniteness to -1e-10.
"""

import numpy as np

HERMITICITY_ATOL = 1e-12
TRACE_ATOL = 1e-9
PSD_ATOL = 1e-10


def as_complex_matrix(m, name="matrix"):
    """Coerce to a square complex ndarray without validating physics."""
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {m.shape}")
    if m.shape[0] < 1:
        raise ValueError(f"{name} must have dimension >= 1")
    return m


def check_density_matrix(rho, name="rho", herm_atol=HERMITICITY_ATOL,
                         trace_atol=TRACE_ATOL, psd_atol=PSD_ATOL):
    """Validate a density matrix and return it as a complex ndarray.

    Checks Hermiticity, unit trace and positive semidefiniteness at the
    package tolerances. Raises ``ValueError`` describing the first failed
    invariant.
    """
    rho = as_complex_matrix(rho, name=name)
    herm_err = np.max(np.abs(rho - rho.conj().T))
    if herm_err > herm_atol:
        raise ValueError(f"{name} is not Hermitian: max deviation {herm_err:.3e}")
    trace_err = abs(rho.trace() - 1.0)
    if trace_err > trace_atol:
        raise ValueError(f"{name} trace deviates from 1 by {trace_err:.3e}")
    min_eig = float(np.linalg.eigvalsh(rho)[0])
    if min_eig < -psd_atol:
        raise ValueError(f"{name} is not positive semidefinite: min eigenvalue {min_eig:.3e}")
    return rho


def check_state_vector(psi, name="psi", norm_atol=TRACE_ATOL):
    """Validate a normalized state vector and return it as a complex ndarray."""
    psi = np.asarray(psi, dtype=np.complex128)
    if psi.ndim != 1 or psi.shape[0] < 1:
        raise ValueError(f"{name} must be a nonempty vector, got shape {psi.shape}")
    norm_err = abs(np.vdot(psi, psi).real - 1.0)
    if norm_err > norm_atol:
        raise ValueError(f"{name} squared norm deviates from 1 by {norm_err:.3e}")
    return psi


def check_same_dim(a, b, name_a="rho_a", name_b="rho_b"):
    if a.shape != b.shape:
        raise ValueError(
            f"dimension mismatch: {name_a} has shape {a.shape}, {name_b} has shape {b.shape}")


def check_dim(dim, minimum=1):
    dim = int(dim)
    if dim < minimum:
        raise ValueError(f"invalid dimension {dim}: must be >= {minimum}")
    return dim
