"""The type I_N factor in standard form.

The Hilbert space is the space of ``n x n`` complex matrices with inner
product ``<x, y> = Trace(x^H y) / n``; the algebra acts by left
multiplication, its commutant by right multiplication, the identity matrix is
the trace vector and ``x -> x^H`` is the trace conjugation.

Superoperators are ``n^2 x n^2`` matrices acting on ``vec(x)``, where ``vec``
stacks the columns of ``x`` top to bottom (Fortran order). With this
convention ``X -> A @ X @ B`` has matrix ``kron(B.T, A)``.

Vectors and algebra elements are plain ``n x n`` ndarrays; linear
superoperators are plain ``n^2 x n^2`` ndarrays. Antilinear maps are wrapped
in :class:`AntilinearOp` so that composition keeps track of the complex
conjugation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import InvalidInput
from .matkit import DEFAULT_TOL, Tolerances, opnorm, relres


def vec(x: np.ndarray) -> np.ndarray:
    return np.asarray(x).reshape(-1, order="F")


def unvec(v: np.ndarray, n: int) -> np.ndarray:
    return np.asarray(v).reshape(n, n, order="F")


def matrix_unit(n: int, p: int, q: int) -> np.ndarray:
    e = np.zeros((n, n), dtype=complex)
    e[p, q] = 1.0
    return e


@dataclass(frozen=True)
class FactorModel:
    n: int
    tol: Tolerances = field(default=DEFAULT_TOL)

    @property
    def dim(self) -> int:
        return self.n * self.n

    @property
    def trace_vector(self) -> np.ndarray:
        return np.eye(self.n, dtype=complex)

    def trace(self, a) -> complex:
        """Normalized trace, ``tr(I) = 1``."""
        return complex(np.trace(np.asarray(a))) / self.n

    def inner(self, x, y) -> complex:
        return complex(np.vdot(np.asarray(x), np.asarray(y))) / self.n

    def norm(self, x) -> float:
        return float(np.linalg.norm(np.asarray(x))) / np.sqrt(self.n)

    def check_vector(self, x, name="vector") -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        if x.shape != (self.n, self.n):
            raise InvalidInput(f"{name} must have shape {(self.n, self.n)}, got {x.shape}")
        if not np.all(np.isfinite(x)):
            raise InvalidInput(f"{name} has non-finite entries")
        return x

    def check_superop(self, s, name="superoperator") -> np.ndarray:
        s = np.asarray(s, dtype=complex)
        if s.shape != (self.dim, self.dim):
            raise InvalidInput(f"{name} must have shape {(self.dim, self.dim)}, got {s.shape}")
        return s


def make_model(n: int, tol: Tolerances = DEFAULT_TOL) -> FactorModel:
    if int(n) != n or n < 1:
        raise InvalidInput(f"matrix dimension must be a positive integer, got {n}")
    return FactorModel(int(n), tol)


class AntilinearOp:
    """Antilinear map ``v -> cmat @ conj(v)`` on vectorized matrices.

    Composition with ``@``: antilinear after antilinear is linear (an
    ndarray), every other combination with an antilinear factor is
    antilinear.
    """

    __array_ufunc__ = None  # make ndarray @ AntilinearOp defer to __rmatmul__

    def __init__(self, cmat):
        self.cmat = np.asarray(cmat, dtype=complex)

    @property
    def n(self) -> int:
        return int(round(np.sqrt(self.cmat.shape[0])))

    def __matmul__(self, other):
        if isinstance(other, AntilinearOp):
            return self.cmat @ other.cmat.conj()
        other = np.asarray(other)
        if other.ndim == 1:
            return self.cmat @ other.conj()
        return AntilinearOp(self.cmat @ other.conj())

    def __rmatmul__(self, other):
        return AntilinearOp(np.asarray(other) @ self.cmat)

    def __call__(self, x):
        """Apply to an ``n x n`` matrix (returns a matrix) or a flat vector."""
        x = np.asarray(x)
        if x.ndim == 2:
            return unvec(self @ vec(x), x.shape[0])
        return self @ x

    def adjoint(self) -> "AntilinearOp":
        """Antilinear adjoint: ``<x, A y> = conj(<A^* x, y>)``."""
        return AntilinearOp(self.cmat.T)

    def conjugation_residual(self) -> float:
        """Deviation from being a conjugation (antiunitary involution)."""
        eye = np.eye(self.cmat.shape[0])
        invol = opnorm(self.cmat @ self.cmat.conj() - eye)
        unit = opnorm(self.cmat.conj().T @ self.cmat - eye)
        return max(invol, unit)

    def __repr__(self):
        return f"AntilinearOp(n={self.n})"


def commutation_matrix(n: int) -> np.ndarray:
    """Permutation ``P`` with ``P @ vec(x) = vec(x.T)``."""
    idx = np.arange(n * n).reshape(n, n, order="F")
    perm = idx.T.reshape(-1, order="F")
    return np.eye(n * n)[perm]


def trace_conjugation(model: FactorModel) -> AntilinearOp:
    """``J(x) = x^H``: fixes the trace vector and maps ``L_A`` onto ``R_{A^H}``."""
    return AntilinearOp(commutation_matrix(model.n).astype(complex))


def left_superop(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInput(f"algebra element must be square, got shape {a.shape}")
    return np.kron(np.eye(a.shape[0]), a)


def right_superop(b) -> np.ndarray:
    b = np.asarray(b, dtype=complex)
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise InvalidInput(f"commutant element must be square, got shape {b.shape}")
    return np.kron(b.T, np.eye(b.shape[0]))


def sandwich_superop(a, b) -> np.ndarray:
    """Matrix of ``X -> a @ X @ b``."""
    return np.kron(np.asarray(b, dtype=complex).T, np.asarray(a, dtype=complex))


def left_algebra_distance(x: np.ndarray, n: int) -> float:
    """Relative Frobenius distance of a superoperator from ``{left_superop(A)}``.

    The left multiplications are exactly the commutant of the right
    multiplications, so this measures the failure of ``x`` to commute with
    every ``right_superop(E_rs)``: each such commutator is bounded by twice
    the returned distance times ``||x||``.
    """
    x4 = np.asarray(x).reshape(n, n, n, n)
    a = np.einsum("iaib->ab", x4) / n
    diff = x4 - np.einsum("ij,ab->iajb", np.eye(n), a)
    return relres(float(np.linalg.norm(diff)), float(np.linalg.norm(x4)))


class Subspace(NamedTuple):
    basis: np.ndarray
    dim: int


def _orth(columns: np.ndarray, thresh: float) -> Subspace:
    u, s, _ = np.linalg.svd(columns, full_matrices=False)
    r = int(np.sum(s > thresh))
    return Subspace(u[:, :r], r)


def rank_threshold(model: FactorModel, u) -> float:
    """Singular-value cliff shared by cyclicity decisions: ``N^2 * eq_tol * ||u||``."""
    return model.n ** 2 * model.tol.eq_tol * model.norm(u)


def cyclic_subspace(model: FactorModel, side: str, u) -> Subspace:
    """Orthonormal basis (columns, vectorized) of ``[M0 u]`` or ``[M0' u]``.

    Spans the ``N^2`` vectors ``E_pq @ u`` (left) or ``u @ E_pq`` (right).
    """
    if side not in ("left", "right"):
        raise InvalidInput(f"side must be 'left' or 'right', got {side!r}")
    u = model.check_vector(u)
    n = model.n
    cols = []
    for p in range(n):
        for q in range(n):
            e = matrix_unit(n, p, q)
            cols.append(vec(e @ u) if side == "left" else vec(u @ e))
    return _orth(np.stack(cols, axis=1), rank_threshold(model, u))


def span_subspace(columns: np.ndarray, thresh: float) -> Subspace:
    return _orth(np.asarray(columns), thresh)


def projector(basis: np.ndarray) -> np.ndarray:
    return basis @ basis.conj().T
