"""Dense complex linear algebra kernel.

All operators are plain ``numpy.ndarray`` with dtype complex128 and row-major
semantics.  Multi-system kets use the big-endian convention: in a product
A (x) B the first factor is the most significant index, matching ``numpy.kron``.

Tolerances follow double-precision headroom at desk scale (N up to a few
hundred): 1e-10 relative for decomposition residuals, 1e-12 for exact
algebraic identities on small matrices.
"""

from __future__ import annotations

import itertools
import math
from typing import NamedTuple, Sequence

import numpy as np

from .errors import InputError, NumericError, ResourceLimitError

HERMITIAN_RTOL = 1e-10
UNITARY_RTOL = 1e-10

# Permutation operators on ell copies of an N-level system are dense; cap the
# total dimension N**ell so symmetrizer construction stays in memory.
SYMMETRIZER_MAX_DIM = 2 ** 20
SYMMETRIZER_MAX_ORDER = 4


class HermitianEigen(NamedTuple):
    """Eigendecomposition of a Hermitian matrix.

    ``eigenvalues`` are real and ascending; the columns of ``eigenvectors``
    are the corresponding orthonormal eigenvectors.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_complex_matrix(a: np.ndarray) -> np.ndarray:
    """Validate and return ``a`` as a finite 2-D complex128 array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise InputError(f"expected a 2-D matrix, got ndim={m.ndim}")
    if not (np.all(np.isfinite(m.real)) and np.all(np.isfinite(m.imag))):
        raise InputError("matrix contains NaN or Inf entries")
    return m


def require_square(a: np.ndarray) -> np.ndarray:
    m = as_complex_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise InputError(f"expected a square matrix, got shape {m.shape}")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return as_complex_matrix(a).conj().T


def trace(a: np.ndarray) -> complex:
    """Trace of a square matrix."""
    return complex(np.trace(require_square(a)))


def frobenius_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Frobenius norm of ``a - b``."""
    ma, mb = as_complex_matrix(a), as_complex_matrix(b)
    if ma.shape != mb.shape:
        raise InputError(f"shape mismatch: {ma.shape} vs {mb.shape}")
    return float(np.linalg.norm(ma - mb))


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Complex matrix product with an explicit dimension check."""
    ma, mb = as_complex_matrix(a), as_complex_matrix(b)
    if ma.shape[1] != mb.shape[0]:
        raise InputError(
            f"inner dimensions do not match: {ma.shape} x {mb.shape}"
        )
    return ma @ mb


def hermiticity_defect(a: np.ndarray) -> float:
    m = require_square(a)
    return float(np.linalg.norm(m - m.conj().T))


def is_hermitian(a: np.ndarray, rtol: float = HERMITIAN_RTOL) -> bool:
    m = require_square(a)
    return hermiticity_defect(m) <= rtol * max(1.0, float(np.linalg.norm(m)))


def unitarity_defect(u: np.ndarray) -> float:
    """Frobenius norm of U^dag U - I."""
    m = require_square(u)
    return float(np.linalg.norm(m.conj().T @ m - np.eye(m.shape[0])))


def is_unitary(u: np.ndarray, rtol: float = UNITARY_RTOL) -> bool:
    m = require_square(u)
    return unitarity_defect(m) <= rtol * math.sqrt(m.shape[0])


def hermitian_eigen(h: np.ndarray) -> HermitianEigen:
    """Eigendecompose a Hermitian matrix.

    Uses the orthogonal-similarity solver from LAPACK (via ``numpy.linalg.eigh``),
    which is unconditionally stable for the desk-scale dimensions handled here.

    Raises
    ------
    InputError
        If ``h`` is not Hermitian within the relative tolerance.
    NumericError
        If the iterative solver fails to converge.
    """
    m = require_square(h)
    defect = hermiticity_defect(m)
    limit = HERMITIAN_RTOL * max(1.0, float(np.linalg.norm(m)))
    if defect > limit:
        raise InputError(
            f"matrix is not Hermitian: defect {defect:.3e} exceeds {limit:.3e}"
        )
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise NumericError(
            f"eigensolver failed to converge on a {m.shape[0]}x{m.shape[0]} "
            f"matrix (hermiticity defect {defect:.3e}): {exc}"
        ) from exc
    return HermitianEigen(eigenvalues=w, eigenvectors=v)


def expm_i_hermitian(h: np.ndarray, t: float) -> np.ndarray:
    """exp(-i t H) for Hermitian H, via eigendecomposition.

    Exact up to eigensolver accuracy, so the result is unitary to within
    the decomposition tolerance.  t = 0 returns the identity exactly, so a
    zero-strength perturbation leaves a map bit-identical.
    """
    m = require_square(h)
    if t == 0.0:
        if not is_hermitian(m):
            raise InputError("matrix is not Hermitian within tolerance")
        return np.eye(m.shape[0], dtype=np.complex128)
    w, v = hermitian_eigen(m)
    return (v * np.exp(-1j * float(t) * w)) @ v.conj().T


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product, first factor most significant."""
    return np.kron(as_complex_matrix(a), as_complex_matrix(b))


def kron_all(ops: Sequence[np.ndarray]) -> np.ndarray:
    """Kronecker product of a sequence of matrices, left to right."""
    if len(ops) == 0:
        raise InputError("kron_all requires at least one matrix")
    out = as_complex_matrix(ops[0])
    for op in ops[1:]:
        out = np.kron(out, as_complex_matrix(op))
    return out


def _validate_permutation(perm: Sequence[int]) -> tuple[int, ...]:
    p = tuple(int(x) for x in perm)
    if len(p) < 1 or sorted(p) != list(range(len(p))):
        raise InputError(f"{perm!r} is not a permutation of 0..{len(p) - 1}")
    return p


def permutation_operator(n_dim: int, perm: Sequence[int]) -> np.ndarray:
    """Operator permuting the factors of an ell-fold tensor product.

    ``perm[k] = s`` moves the system in slot ``k`` to slot ``s``, so on basis
    kets the operator maps |i_0 ... i_{ell-1}> to the ket whose slot ``s``
    carries ``i_{perm^-1(s)}``.  Composition is respected:
    ``permutation_operator(sigma o tau) = permutation_operator(sigma) @
    permutation_operator(tau)``.
    """
    if n_dim < 1:
        raise InputError(f"n_dim must be >= 1, got {n_dim}")
    p = _validate_permutation(perm)
    ell = len(p)
    dim = n_dim ** ell
    if dim > SYMMETRIZER_MAX_DIM:
        raise ResourceLimitError(
            f"permutation operator dimension {n_dim}^{ell} exceeds "
            f"{SYMMETRIZER_MAX_DIM}"
        )
    cols = np.arange(dim)
    digits = np.empty((ell, dim), dtype=np.int64)
    rem = cols.copy()
    for slot in range(ell - 1, -1, -1):
        digits[slot] = rem % n_dim
        rem //= n_dim
    rows = np.zeros(dim, dtype=np.int64)
    for slot in range(ell):
        rows += digits[slot] * n_dim ** (ell - 1 - p[slot])
    op = np.zeros((dim, dim), dtype=np.complex128)
    op[rows, cols] = 1.0
    return op


def symmetric_projector(n_dim: int, ell: int) -> np.ndarray:
    """Projector onto the symmetric subspace of ``ell`` N-level systems.

    Built as the average of all ``ell!`` permutation operators.  Idempotent
    and Hermitian to 1e-10; its trace equals binomial(N + ell - 1, ell).
    """
    if not 1 <= ell <= SYMMETRIZER_MAX_ORDER:
        raise InputError(
            f"ell must be between 1 and {SYMMETRIZER_MAX_ORDER}, got {ell}"
        )
    acc = None
    for perm in itertools.permutations(range(ell)):
        op = permutation_operator(n_dim, perm)
        acc = op if acc is None else acc + op
    return acc / math.factorial(ell)


def symmetric_subspace_dim(n_dim: int, ell: int) -> int:
    """Dimension of the symmetric subspace, binomial(N + ell - 1, ell)."""
    return math.comb(n_dim + ell - 1, ell)
