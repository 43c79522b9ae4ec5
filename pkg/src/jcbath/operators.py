"""Dense complex operator algebra for small qubit x resonator spaces.

Everything is plain numpy complex128. Operators carry their subsystem
dimensions so tensor-layout mistakes fail loudly instead of silently
producing transposed blocks.

Basis ordering convention, fixed package-wide:

    composite index of |q, n>  =  q * fock_dim + n,   q in {e: 0, g: 1}

so sigma_z = diag(+1, -1) acts on (|e>, |g>) and the excited-state block
of a composite operator is the upper-left fock_dim x fock_dim block.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERM_TOL = 1e-10  # relative Frobenius tolerance for Hermiticity checks


@dataclass(frozen=True)
class Operator:
    """A square complex matrix tagged with its subsystem dimensions.

    dims is a tuple of subsystem sizes whose product equals the matrix
    side, e.g. (2, 15) for qubit x resonator or (2,) for a bare qubit.
    """

    mat: np.ndarray
    dims: tuple

    def __post_init__(self):
        m = np.asarray(self.mat, dtype=complex)
        object.__setattr__(self, "mat", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator matrix must be square, got {m.shape}")
        side = int(np.prod(self.dims))
        if side != m.shape[0]:
            raise ValueError(
                f"dims {self.dims} imply side {side}, matrix side is {m.shape[0]}")
        if not np.all(np.isfinite(m)):
            raise ValueError("operator entries must be finite")

    @property
    def side(self) -> int:
        return self.mat.shape[0]


def kron(a: Operator, b: Operator) -> Operator:
    """Tensor product; dims concatenate, so kron(qubit_op, fock_op) follows
    the package basis ordering."""
    return Operator(np.kron(a.mat, b.mat), a.dims + b.dims)


def identity(n: int, dims=None) -> Operator:
    return Operator(np.eye(n, dtype=complex), dims if dims is not None else (n,))


def annihilation(n: int) -> Operator:
    """Truncated bosonic annihilation operator, a[m-1, m] = sqrt(m)."""
    if n < 2:
        raise ValueError(f"annihilation needs dimension >= 2, got {n}")
    return Operator(np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1), (n,))


def dagger(a: Operator) -> Operator:
    return Operator(a.mat.conj().T, a.dims)


_PAULI = {
    "z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
    "plus": np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex),   # |e><g|
    "minus": np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex),  # |g><e|
    "x": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
}


def pauli(which: str) -> Operator:
    """2x2 qubit operators in the (|e>, |g>) ordering."""
    try:
        return Operator(_PAULI[which].copy(), (2,))
    except KeyError:
        raise ValueError(f"unknown pauli label {which!r}") from None


def herm_eig(h) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian operator.

    Returns (eigenvalues ascending, eigenvector columns). Rejects input
    that is not Hermitian within HERM_TOL relative Frobenius norm; the
    tolerance is relative so rescaling the Hamiltonian does not change
    the verdict.
    """
    m = h.mat if isinstance(h, Operator) else np.asarray(h, dtype=complex)
    scale = np.linalg.norm(m)
    if scale > 0 and np.linalg.norm(m - m.conj().T) > HERM_TOL * scale:
        raise ValueError("herm_eig requires a Hermitian matrix")
    w, v = np.linalg.eigh(m)
    return w, v


def expect(op: Operator, rho: np.ndarray) -> complex:
    """Tr(op rho). rho may be a bare ndarray or an Operator."""
    r = rho.mat if isinstance(rho, Operator) else np.asarray(rho, dtype=complex)
    if r.shape != op.mat.shape:
        raise ValueError(
            f"dimension mismatch: operator {op.mat.shape}, state {r.shape}")
    return complex(np.trace(op.mat @ r))


def proj_excited(dims: tuple) -> Operator:
    """Projector |e><e| (x) identity on the remaining factors."""
    p = Operator(np.diag([1.0, 0.0]).astype(complex), (2,))
    if len(dims) == 1:
        return p
    rest = int(np.prod(dims[1:]))
    return Operator(np.kron(p.mat, np.eye(rest, dtype=complex)), dims)
