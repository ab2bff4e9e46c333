"""Dense complex-matrix kernel used by every other module.

Conventions fixed here and inherited everywhere else:

* matrices are 2-D ``numpy`` arrays of ``complex128`` in row-major order;
* Kronecker products follow the row-major block convention of ``numpy.kron``
  (the left factor's indices are the major ones);
* composite spaces are laid out left ⊗ right and the partial trace is only
  ever taken over the *right* factor;
* tolerances are absolute and entrywise (also applied to eigenvalues), a
  single ``atol`` with default ``1e-9``.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Any

import numpy as np

from .errors import InvariantViolation

DEFAULT_ATOL = 1e-9


def coerce_matrix(m: Any) -> np.ndarray:
    """Cheap coercion to a 2-D complex array (no finiteness check).

    Accepts anything ``numpy`` can convert plus the wrapper types of this
    package (objects exposing a ``matrix`` attribute).
    """
    m = getattr(m, "matrix", m)
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2:
        raise InvariantViolation("matrix", "two-dimensional", f"got ndim={arr.ndim}")
    return arr


def as_complex_matrix(m: Any) -> np.ndarray:
    """Coerce ``m`` to a finite 2-D complex array (construction boundary)."""
    arr = coerce_matrix(m)
    if not np.all(np.isfinite(arr)):
        raise InvariantViolation("matrix", "finite entries")
    return arr


def frozen_copy(m: np.ndarray) -> np.ndarray:
    """Return a C-contiguous read-only copy, for immutable value types."""
    out = np.array(m, dtype=complex, order="C")
    out.setflags(write=False)
    return out


def require_square(m: np.ndarray, kind: str = "matrix") -> int:
    if m.shape[0] != m.shape[1]:
        raise InvariantViolation(kind, "square", f"shape {m.shape}")
    return m.shape[0]


def adjoint(m: Any) -> np.ndarray:
    """Conjugate transpose. An exact involution: ``adjoint(adjoint(m)) == m``."""
    return coerce_matrix(m).conj().T


def kron(a: Any, b: Any) -> np.ndarray:
    """Kronecker product, left factor major (row-major block convention)."""
    return np.kron(coerce_matrix(a), coerce_matrix(b))


def partial_trace_right(m: Any, dim_left: int, dim_right: int) -> np.ndarray:
    """Trace out the right tensor factor of a square matrix on left ⊗ right.

    ``m`` must be ``(dim_left * dim_right)`` square; the result is
    ``dim_left`` square with entries ``out[i, j] = sum_k m[(i, k), (j, k)]``.
    The map is linear and preserves the trace.
    """
    m = coerce_matrix(m)
    d = dim_left * dim_right
    if m.shape != (d, d):
        raise InvariantViolation(
            "partial trace", "dimension product", f"expected shape {(d, d)}, got {m.shape}"
        )
    return np.einsum("ikjk->ij", m.reshape(dim_left, dim_right, dim_left, dim_right))


def hermitian_part(m: Any) -> np.ndarray:
    """The symmetrization ``(m + m†)/2``."""
    m = coerce_matrix(m)
    return (m + m.conj().T) / 2.0


def is_hermitian(m: Any, atol: float = DEFAULT_ATOL) -> bool:
    """True iff ``max |m - m†| <= atol`` entrywise."""
    m = coerce_matrix(m)
    if m.shape[0] != m.shape[1]:
        return False
    return float(np.max(np.abs(m - m.conj().T))) <= atol


def is_psd(m: Any, atol: float = DEFAULT_ATOL) -> bool:
    """True iff ``m`` is Hermitian within ``atol`` and its spectrum is ≥ -atol.

    The eigenvalue test runs on the symmetrized ``(m + m†)/2`` so rounding
    asymmetry cannot flip the verdict on exact inputs.
    """
    m = coerce_matrix(m)
    if not is_hermitian(m, atol):
        return False
    evals = np.linalg.eigvalsh((m + m.conj().T) / 2.0)
    return float(evals.min()) >= -atol


def is_effect_matrix(m: Any, atol: float = DEFAULT_ATOL) -> bool:
    """True iff ``0 <= m <= I`` within ``atol`` (both ``m`` and ``I - m`` PSD).

    For a Hermitian matrix the two positivity conditions reduce to the
    spectrum lying in ``[-atol, 1 + atol]``, which needs one
    eigendecomposition.
    """
    m = coerce_matrix(m)
    if not is_hermitian(m, atol):
        return False
    evals = np.linalg.eigvalsh((m + m.conj().T) / 2.0)
    return float(evals.min()) >= -atol and float(evals.max()) <= 1.0 + atol


def max_abs_diff(a: Any, b: Any) -> float:
    """Largest entrywise absolute deviation between two matrices."""
    return float(np.max(np.abs(coerce_matrix(a) - coerce_matrix(b))))


@lru_cache(maxsize=None)
def hermitized_matrix_units(dim: int) -> tuple[np.ndarray, ...]:
    """A Hermitian basis of ``dim**2`` matrices built from matrix units.

    Diagonal units stay as-is; each off-diagonal pair contributes the
    symmetric and antisymmetric Hermitian combinations. Linear maps that
    agree on this basis agree everywhere. Cached per dimension; the arrays
    are read-only.
    """
    basis: list[np.ndarray] = []
    for i in range(dim):
        for j in range(dim):
            e = np.zeros((dim, dim), dtype=complex)
            if i == j:
                e[i, i] = 1.0
            elif i < j:
                e[i, j] = 1.0
                e[j, i] = 1.0
            else:
                e[i, j] = 1.0j
                e[j, i] = -1.0j
            e.setflags(write=False)
            basis.append(e)
    return tuple(basis)


def clipped_eigh(m: Any, atol: float = DEFAULT_ATOL, kind: str = "operator"):
    """Hermitian eigendecomposition with tiny negative eigenvalues clipped to 0.

    Eigenvalues in ``[-atol, 0)`` are rounding noise on PSD inputs and are
    set to zero; anything below ``-atol`` raises.
    """
    evals, evecs = np.linalg.eigh(hermitian_part(m))
    if float(evals.min()) < -atol:
        raise InvariantViolation(kind, "positive", f"eigenvalue {evals.min():.3e}")
    return np.clip(evals, 0.0, None), evecs
