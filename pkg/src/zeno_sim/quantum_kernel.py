"""
Density matrices and the single/two-qubit channels used by the protocols.

Conventions
-----------
* Qubit basis order is ``(|1>, |-1>)``: the sigma_z eigenvalue +1 is index 0.
* Two-qubit states are ordered (nuclear, electron) with index order
  ``(1,1), (1,-1), (-1,1), (-1,-1)``.
* ``rotation_y(theta)`` conjugates by ``exp(-i theta sigma_y / 2)``, so
  ``rotation_y(pi/2)`` takes ``|1><1|`` to ``|+><+|``.

Density matrices and pure states are plain complex ndarrays; use
:func:`check_density_matrix` / :func:`check_pure_state` to validate them.
"""

from __future__ import annotations

from functools import reduce

import numpy as np

from .errors import DomainError

ATOL = 1e-12

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


# -- states -----------------------------------------------------------------

def basis_state(s):
    if s not in (1, -1):
        raise DomainError(f"basis label must be +1 or -1, got {s!r}")
    return np.array([1, 0], dtype=complex) if s == 1 else np.array([0, 1], dtype=complex)


def plus_state():
    return np.array([1, 1], dtype=complex) / np.sqrt(2)


def minus_state():
    return np.array([1, -1], dtype=complex) / np.sqrt(2)


def projector(psi):
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def check_pure_state(psi, atol=ATOL):
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1 or psi.shape[0] not in (2, 4):
        raise DomainError(f"pure state must be a vector of length 2 or 4, got shape {psi.shape}")
    if abs(np.linalg.norm(psi) - 1.0) > atol:
        raise DomainError("pure state is not normalized")
    return psi


def check_density_matrix(rho, atol=ATOL):
    """Validate Hermiticity, unit trace and positivity; return rho as complex array."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape not in ((2, 2), (4, 4)):
        raise DomainError(f"density matrix must be 2x2 or 4x4, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > atol:
        raise DomainError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > atol:
        raise DomainError("density matrix does not have unit trace")
    if np.linalg.eigvalsh(rho).min() < -atol:
        raise DomainError("density matrix is not positive semidefinite")
    return rho


def fidelity(rho, psi):
    """Overlap <psi|rho|psi> of a density matrix with a pure reference state."""
    rho = np.asarray(rho, dtype=complex)
    psi = np.asarray(psi, dtype=complex)
    if rho.shape != (psi.shape[0], psi.shape[0]):
        raise DomainError(f"dimension mismatch: rho {rho.shape} vs psi {psi.shape}")
    value = psi.conj() @ rho @ psi
    if abs(value.imag) > ATOL:
        raise DomainError(f"fidelity has imaginary part {value.imag:.3e}; rho is not Hermitian")
    f = value.real
    if f < -ATOL or f > 1 + ATOL:
        raise DomainError(f"fidelity {f!r} outside [0, 1]")
    return float(min(max(f, 0.0), 1.0))


def bloch_vector(rho):
    rho = np.asarray(rho, dtype=complex)
    return np.array([np.trace(rho @ p).real for p in (SIGMA_X, SIGMA_Y, SIGMA_Z)])


def random_density_matrix(dim, rng, rank=None):
    """Ginibre-distributed density matrix (test helper)."""
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


# -- channels ---------------------------------------------------------------

class QuantumChannel:
    """CPTP map given by its operator-sum (Kraus) elements.

    Channels compose with ``@`` in the usual operator order:
    ``(a @ b)(rho) == a(b(rho))``.
    """

    def __init__(self, kraus, name=""):
        kraus = [np.asarray(k, dtype=complex) for k in kraus]
        dims = {k.shape for k in kraus}
        if len(dims) != 1 or kraus[0].shape[0] != kraus[0].shape[1]:
            raise DomainError("Kraus operators must be square and of equal size")
        self.kraus = tuple(kraus)
        self.dim = kraus[0].shape[0]
        self.name = name

    def __call__(self, rho):
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (self.dim, self.dim):
            raise DomainError(f"channel of dim {self.dim} applied to shape {rho.shape}")
        return sum(k @ rho @ k.conj().T for k in self.kraus)

    def __matmul__(self, other):
        if not isinstance(other, QuantumChannel):
            return NotImplemented
        if other.dim != self.dim:
            raise DomainError("cannot compose channels of different dimension")
        kraus = [a @ b for a in self.kraus for b in other.kraus]
        return QuantumChannel(kraus, name=f"{self.name}*{other.name}")

    def __repr__(self):
        return f"QuantumChannel(name={self.name!r}, dim={self.dim}, rank={len(self.kraus)})"

    def is_trace_preserving(self, atol=ATOL):
        total = sum(k.conj().T @ k for k in self.kraus)
        return bool(np.allclose(total, np.eye(self.dim), atol=atol, rtol=0))


def compose(*channels):
    """Composition applying the *last* argument first."""
    return reduce(lambda a, b: a @ b, channels)


def identity_channel(dim=2):
    return QuantumChannel([np.eye(dim)], name="id")


def unitary_channel(u, name="U"):
    return QuantumChannel([u], name=name)


def dephasing_channel(exponent):
    """Pure dephasing: z-basis coherences are multiplied by ``exp(-exponent)``."""
    if not (exponent >= 0):
        raise DomainError(f"dephasing exponent must be non-negative, got {exponent!r}")
    c = np.exp(-exponent)
    return QuantumChannel(
        [np.sqrt((1 + c) / 2) * I2, np.sqrt((1 - c) / 2) * SIGMA_Z], name="dephase"
    )


def rotation_y_unitary(theta):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rotation_y(theta):
    return unitary_channel(rotation_y_unitary(theta), name="Ry")


def nsm_z():
    """Non-selective sigma_z measurement (von Neumann mixture in the z basis)."""
    return QuantumChannel([projector(basis_state(1)), projector(basis_state(-1))], name="nsm_z")


def nsm_x():
    """Non-selective sigma_x measurement built as Ry(-pi/2) . nsm_z . Ry(pi/2)."""
    ch = compose(rotation_y(-np.pi / 2), nsm_z(), rotation_y(np.pi / 2))
    ch.name = "nsm_x"
    return ch


def nsm_x_projective():
    return QuantumChannel([projector(plus_state()), projector(minus_state())], name="nsm_x_proj")


def cnot_nuclear_control():
    """CNOT flipping the electron iff the nuclear spin is |1>."""
    u = np.zeros((4, 4), dtype=complex)
    u[1, 0] = u[0, 1] = u[2, 2] = u[3, 3] = 1
    return unitary_channel(u, name="cnot")


def electron_dephase(p):
    """Scale every entry off-diagonal in the electron index by ``p``."""
    if not (0 <= p <= 1):
        raise DomainError(f"residual coherence p must lie in [0, 1], got {p!r}")
    ze = np.kron(I2, SIGMA_Z)
    return QuantumChannel(
        [np.sqrt((1 + p) / 2) * np.eye(4), np.sqrt((1 - p) / 2) * ze], name="e_dephase"
    )


def partial_trace_electron(rho):
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise DomainError(f"expected a 4x4 two-qubit matrix, got shape {rho.shape}")
    return np.einsum("ijkj->ik", rho.reshape(2, 2, 2, 2))


def electron_mediated_nsm(rho, p=0.0):
    """Nuclear sigma_z measurement via CNOT, electron dephasing, CNOT.

    The electron ancilla starts in ``|-1>``. Nuclear coherences come out
    scaled by ``p``; ``p = 0`` reproduces :func:`nsm_z` exactly.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise DomainError(f"expected a qubit density matrix, got shape {rho.shape}")
    anc = projector(basis_state(-1))
    cnot = cnot_nuclear_control()
    seq = compose(cnot, electron_dephase(p), cnot)
    return partial_trace_electron(seq(np.kron(rho, anc)))


def electron_mediated_nsm_channel(p=0.0):
    """Channel form of :func:`electron_mediated_nsm` acting on the nuclear qubit."""
    anc = basis_state(-1)
    cnot_u = cnot_nuclear_control().kraus[0]
    kraus = []
    for k in electron_dephase(p).kraus:
        full = cnot_u @ k @ cnot_u
        for e in (basis_state(1), basis_state(-1)):
            # <e|_electron FULL |anc>_electron as a 2x2 nuclear operator
            kraus.append(np.kron(I2, e.conj()[None, :]) @ full @ np.kron(I2, anc[:, None]))
    return QuantumChannel(kraus, name=f"nsm_e(p={p})")
