"""Dense complex linear-algebra kernel and tolerance policy.

Every comparison in the package is relative to an operator norm, with an
absolute floor of ``ABS_FLOOR`` for (near-)zero norms.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import InvalidInput

ABS_FLOOR = 1e-12


@dataclass(frozen=True)
class Tolerances:
    eq_tol: float = 1e-9
    spec_tol: float = 1e-8

    def __post_init__(self):
        if not 0 < self.eq_tol < 1:
            raise InvalidInput(f"eq_tol must lie in (0, 1), got {self.eq_tol}")
        if not 0 < self.spec_tol < 1:
            raise InvalidInput(f"spec_tol must lie in (0, 1), got {self.spec_tol}")


DEFAULT_TOL = Tolerances()


class EigSystem(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray


class Cluster(NamedTuple):
    value: float
    indices: tuple


def opnorm(a) -> float:
    """Spectral norm of a matrix (2-norm of a vector)."""
    a = np.asarray(a)
    if a.ndim == 1:
        return float(np.linalg.norm(a))
    return float(np.linalg.norm(a, 2))


def relres(err: float, scale: float) -> float:
    """Relative residual; falls back to the absolute error for tiny scales."""
    return err / scale if scale > ABS_FLOOR else err


def as_square(a, name="matrix") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInput(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInput(f"{name} has non-finite entries")
    return a


def hermiticity_residual(a) -> float:
    a = np.asarray(a)
    return relres(opnorm(a - a.conj().T), opnorm(a))


def group_eigenvalues(values, spec_tol: float = DEFAULT_TOL.spec_tol) -> list[Cluster]:
    """Split an ascending list into clusters of (numerically) equal values.

    Consecutive values share a cluster when their gap is at most
    ``spec_tol * max(|values|)`` (absolute floor ``ABS_FLOOR``). The
    representative of a cluster is its arithmetic mean.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return []
    if np.any(np.diff(values) < 0):
        raise InvalidInput("values must be sorted ascending")
    thresh = max(spec_tol * float(np.max(np.abs(values))), ABS_FLOOR)
    clusters = []
    start = 0
    for i in range(1, values.size + 1):
        if i == values.size or values[i] - values[i - 1] > thresh:
            idx = tuple(range(start, i))
            clusters.append(Cluster(float(np.mean(values[start:i])), idx))
            start = i
    return clusters


def cluster_basis(vectors: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis of the span of ``vectors``' columns.

    The projector onto the span is factorized by QR with column pivoting, so
    the result depends only on the subspace, not on the input basis.
    """
    k = vectors.shape[1]
    if k == 1:
        # same subspace-only rule, cheaply: largest entry made real positive
        v = vectors[:, 0]
        p = int(np.argmax(np.abs(v)))
        return (v * (np.conj(v[p]) / abs(v[p])) / np.linalg.norm(v))[:, None]
    proj = vectors @ vectors.conj().T
    q, _, _ = scipy.linalg.qr(proj, pivoting=True)
    return q[:, :k]


def herm_eig(a, tol: Tolerances = DEFAULT_TOL) -> EigSystem:
    """Eigen-decomposition of a Hermitian matrix with ascending eigenvalues.

    Eigenvectors of each eigenvalue cluster (``group_eigenvalues`` at
    ``tol.spec_tol``) are re-orthonormalized by :func:`cluster_basis`, which
    makes the output reproducible for degenerate spectra. A cluster whose
    spread is resolvable relative to its own magnitude (small eigenvalues of
    a wide spectrum can merge under the global threshold) keeps the raw
    eigenvectors, so every column stays paired with its own eigenvalue.
    """
    a = as_square(a)
    if hermiticity_residual(a) > tol.eq_tol:
        raise InvalidInput("matrix is not Hermitian within eq_tol")
    a = (a + a.conj().T) / 2
    values, vectors = np.linalg.eigh(a)
    out = vectors.copy()
    for cl in group_eigenvalues(values, tol.spec_tol):
        idx = list(cl.indices)
        vals = values[idx]
        if vals[-1] - vals[0] <= max(tol.spec_tol * float(np.max(np.abs(vals))), ABS_FLOOR):
            out[:, idx] = cluster_basis(vectors[:, idx])
    return EigSystem(values, out)


def eig_clusters(a, tol: Tolerances = DEFAULT_TOL):
    """Clustered spectrum: list of ``(value, basis)`` with orthonormal eigenbases."""
    es = herm_eig(a, tol)
    return [(cl.value, es.vectors[:, list(cl.indices)])
            for cl in group_eigenvalues(es.values, tol.spec_tol)]


def herm_func(a, func, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Apply a scalar ``func`` to a Hermitian matrix by spectral calculus.

    Each eigenvalue is mapped individually; inside a degenerate cluster this
    agrees with mapping the cluster value on its eigenprojection.
    """
    es = herm_eig(a, tol)
    fv = np.array([func(v) for v in es.values])
    return (es.vectors * fv) @ es.vectors.conj().T


def left_polar(t):
    """Left polar decomposition ``t = p @ w`` with ``p = (t t^H)^{1/2}``.

    ``w`` is unitary in every case; for singular ``t`` the kernel is matched to
    the cokernel through the singular vectors returned by the SVD.
    """
    t = as_square(t)
    u, s, vh = np.linalg.svd(t)
    p = (u * s) @ u.conj().T
    return p, u @ vh


def _leading_phase(a: np.ndarray) -> complex:
    flat = a.reshape(-1)
    big = np.max(np.abs(flat))
    if big == 0:
        return 1.0
    k = int(np.argmax(np.abs(flat) > 1e-8 * big))
    return flat[k] / abs(flat[k])


def nearest_kron_rank1(s, n: int):
    """Closest ``kron(b.T, a)`` to an ``n^2 x n^2`` matrix ``s``.

    Under column-stacking vectorization ``kron(b.T, a)`` is the matrix of
    ``X -> a @ X @ b``. Uses the Van Loan-Pitsianis rearrangement and its
    leading singular pair. ``a`` has unit Frobenius norm and a real positive
    leading entry; ``residual`` is the relative Frobenius error of the
    rank-1 approximation of the rearranged matrix.
    """
    s = np.asarray(s, dtype=complex)
    if s.shape != (n * n, n * n):
        raise InvalidInput(f"expected shape {(n * n, n * n)}, got {s.shape}")
    # s[i1*n+i2, j1*n+j2] = bt[i1, j1] * a[i2, j2]
    r = s.reshape(n, n, n, n).transpose(0, 2, 1, 3).reshape(n * n, n * n)
    u, sig, vh = np.linalg.svd(r)
    total = float(np.sqrt(np.sum(sig ** 2)))
    residual = float(np.sqrt(np.sum(sig[1:] ** 2))) / total if total > 0 else 0.0
    a = vh[0].reshape(n, n)
    bt = sig[0] * u[:, 0].reshape(n, n)
    ph = _leading_phase(a)
    a = a / ph
    bt = bt * ph
    return a, bt.T, residual
