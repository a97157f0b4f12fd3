"""Beam-splitter loss channel: two-mode unitary, partial trace, Kraus form.

``eta`` is the power transmission, so the amplitude transmission of the
beam splitter is ``cos(mixing_angle/2) = sqrt(eta)`` and mean photon
numbers scale by ``eta``. With a vacuum ancilla the output is independent
of the beam-splitter phase ``phi``.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .fock import vacuum
from .validation import check_density_matrix, check_dim

# dim_a * dim_b above this raises instead of allocating the two-mode space
DEFAULT_DIM_BUDGET = 4096


@dataclass(frozen=True)
class LossChannelSpec:
    """Power transmission ``eta``, beam-splitter phase ``phi``, ancilla size."""

    eta: float
    phi: float = 0.0
    ancilla_dim: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must be in [0, 1], got {self.eta}")
        if self.ancilla_dim is not None and self.ancilla_dim < 1:
            raise ValueError("ancilla_dim must be a positive integer")


def _two_mode_index(n_a, n_b, dim_b):
    return n_a * dim_b + n_b


def beam_splitter_unitary(spec, dim_a, dim_b):
    """Two-mode beam-splitter unitary on the ``dim_a * dim_b`` product space.

    Exponential of ``(angle/2) * (a^dag b e^{i phi} - a b^dag e^{-i phi})``
    with ``cos(angle/2) = sqrt(eta)``. Photon-number conserving, so it is
    assembled block-by-block in the total photon number.
    """
    dim_a = check_dim(dim_a)
    dim_b = check_dim(dim_b)
    angle = 2.0 * np.arccos(np.sqrt(spec.eta))
    u = np.zeros((dim_a * dim_b, dim_a * dim_b), dtype=np.complex128)
    phase = np.exp(1j * spec.phi)
    for total in range(dim_a + dim_b - 1):
        lo = max(0, total - (dim_b - 1))
        hi = min(total, dim_a - 1)
        n_a = np.arange(lo, hi + 1)
        size = n_a.size
        # generator restricted to the block, tridiagonal:
        # <n_a+1, n_b-1| a^dag b |n_a, n_b> = sqrt((n_a+1) n_b)
        gen = np.zeros((size, size), dtype=np.complex128)
        for k in range(size - 1):
            amp = np.sqrt((n_a[k] + 1.0) * (total - n_a[k]))
            gen[k + 1, k] = 0.5 * angle * phase * amp
            gen[k, k + 1] = -0.5 * angle * np.conj(phase) * amp
        block = scipy.linalg.expm(gen)
        idx = _two_mode_index(n_a, total - n_a, dim_b)
        u[np.ix_(idx, idx)] = block
    return u


def partial_trace(rho_ab, dim_a, dim_b, keep=0):
    """Trace out one mode of a two-mode density matrix.

    ``keep=0`` returns the reduced state of mode a, ``keep=1`` of mode b.
    """
    rho_ab = np.asarray(rho_ab, dtype=np.complex128)
    if rho_ab.shape != (dim_a * dim_b, dim_a * dim_b):
        raise ValueError(
            f"two-mode matrix shape {rho_ab.shape} does not match dims {(dim_a, dim_b)}")
    four = rho_ab.reshape(dim_a, dim_b, dim_a, dim_b)
    if keep == 0:
        return np.einsum("ibjb->ij", four)
    if keep == 1:
        return np.einsum("aiaj->ij", four)
    raise ValueError(f"keep must be 0 or 1, got {keep}")


def apply_loss_unitary(rho, spec, dim_budget=DEFAULT_DIM_BUDGET):
    """Loss channel via the two-mode route: tensor with a vacuum ancilla,
    conjugate by the beam-splitter unitary, trace out the ancilla."""
    rho = check_density_matrix(rho)
    dim = rho.shape[0]
    dim_b = spec.ancilla_dim if spec.ancilla_dim is not None else dim
    if dim_b < dim:
        raise ValueError(f"ancilla_dim {dim_b} must be >= system dim {dim}")
    if dim * dim_b > dim_budget:
        raise ValueError(
            f"two-mode dimension {dim * dim_b} exceeds budget {dim_budget}")
    u = beam_splitter_unitary(spec, dim, dim_b)
    joint = np.kron(rho, vacuum(dim_b))
    out = partial_trace(u @ joint @ u.conj().T, dim, dim_b, keep=0)
    return 0.5 * (out + out.conj().T)


def loss_kraus_operators(eta, dim):
    """Kraus operators of the pure-loss channel, ``K_k ~ a^k``.

    ``<n-k| K_k |n> = sqrt(C(n,k) eta^{n-k} (1-eta)^k)``; the index cutoff
    at ``dim-1`` makes the set exactly trace-preserving on the truncated
    space.
    """
    dim = check_dim(dim)
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must be in [0, 1], got {eta}")
    # log-binomial for stability at larger dim
    log_fact = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1, dim))))) if dim > 1 else np.zeros(1)
    ops = []
    for k in range(dim):
        ns = np.arange(k, dim)
        if eta == 0.0:
            amp = np.where(ns == k, 1.0, 0.0)
        elif eta == 1.0:
            amp = np.where(ns >= 0, 1.0, 0.0) if k == 0 else np.zeros(ns.size)
        else:
            log_binom = log_fact[ns] - log_fact[k] - log_fact[ns - k]
            amp = np.exp(0.5 * (log_binom + (ns - k) * np.log(eta) + k * np.log1p(-eta)))
        op = np.zeros((dim, dim), dtype=np.complex128)
        op[ns - k, ns] = amp
        ops.append(op)
    return ops


def apply_loss_kraus(rho, eta):
    """Pure-loss channel in single-mode Kraus form; equals the two-mode route."""
    rho = check_density_matrix(rho)
    dim = rho.shape[0]
    out = np.zeros_like(rho)
    for op in loss_kraus_operators(eta, dim):
        out += op @ rho @ op.conj().T
    return 0.5 * (out + out.conj().T)


def apply_loss(rho, eta, phi=0.0):
    """Convenience wrapper: pure loss with power transmission ``eta``.

    Uses the Kraus route; :func:`apply_loss_unitary` is the equivalent
    two-mode reference path.
    """
    return apply_loss_kraus(rho, LossChannelSpec(eta, phi).eta)
