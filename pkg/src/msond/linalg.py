"""Small dense complex linear algebra helpers.

Isotropically random unitary matrices, orthonormal subspace splitting,
signal-space projections, and guarded small-matrix inversion. Everything
takes an explicit numpy Generator so callers own their randomness.
"""

import numpy as np

from .errors import InvalidDimensionError, SingularMatrixError

#: Maximum condition number accepted by :func:`invert_small`.
MAX_CONDITION = 1e12


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    """Draw i.i.d. circularly-symmetric complex Gaussians with E|x|^2 = 1."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Draw a dim x dim unitary matrix from the isotropic (Haar) distribution.

    QR of a complex Ginibre matrix with the diagonal of R phase-normalized;
    the phase fix is what makes the result exactly Haar rather than merely
    unitary.
    """
    if dim < 1:
        raise InvalidDimensionError(f"unitary dimension must be >= 1, got {dim}")
    z = complex_gaussian(rng, (dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    q = q * (d / np.abs(d))
    return q


def split_spaces(m: int, s: int, rng: np.random.Generator):
    """Split an isotropically random orthonormal basis of C^m into (Q, U).

    Q gets m - s columns (the announced interference space) and U the
    remaining s columns (the signal space, U = null(Q)). For s = m, Q has
    zero columns and U is a full random unitary.

    Returns:
        (Q, U): arrays of shape (m, m - s) and (m, s) whose stacked columns
        form an orthonormal basis of C^m.
    """
    if s < 1 or s > m:
        raise InvalidDimensionError(f"need 1 <= s <= m, got s={s}, m={m}")
    basis = random_unitary(m, rng)
    return basis[:, : m - s], basis[:, m - s :]


def project_signal(u: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Project h onto the signal space: returns U^H h (length s).

    The squared norm of the result is the interference leakage a relay
    generates into the receiver that announced null(U) as its interference
    space.
    """
    u = np.asarray(u)
    h = np.asarray(h)
    if u.ndim != 2 or h.shape != (u.shape[0],):
        raise InvalidDimensionError(
            f"incompatible shapes: U is {u.shape}, h is {h.shape}"
        )
    return u.conj().T @ h


def invert_small(a: np.ndarray) -> np.ndarray:
    """Invert a small square complex matrix, guarding against near-singularity."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidDimensionError(f"expected a square matrix, got shape {a.shape}")
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise SingularMatrixError(f"condition number {cond:.3g} exceeds {MAX_CONDITION:.0e}")
    return np.linalg.inv(a)
