"""Dictionary between vectors ``u`` and the algebra elements ``T_u`` with ``T_u u_tr = u``.

In standard form ``T_u`` is left multiplication by the matrix ``u`` itself, so
``u`` is cyclic iff ``T_u`` is injective iff ``u`` is an invertible matrix,
and the same holds for separating.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidInput
from .matkit import eig_clusters, hermiticity_residual, opnorm, relres
from .standard_form import FactorModel, cyclic_subspace, rank_threshold


class OperatorVector(NamedTuple):
    u: np.ndarray
    hs_norm2: float


@dataclass(frozen=True)
class VectorReport:
    cyclic: bool
    separating: bool
    sigma_min: float
    threshold: float
    cyclic_dims: tuple
    borderline: bool
    oracle_agrees: bool

    def to_dict(self):
        return {
            "cyclic": self.cyclic,
            "separating": self.separating,
            "sigma_min": self.sigma_min,
            "threshold": self.threshold,
            "cyclic_dims": list(self.cyclic_dims),
            "borderline": self.borderline,
            "oracle_agrees": self.oracle_agrees,
        }


def operator_of_vector(model: FactorModel, u) -> np.ndarray:
    """The unique ``T`` in the algebra with ``T @ u_tr = u``."""
    u = model.check_vector(u)
    t = u.copy()
    # Uniqueness: any S with S @ I = u is S = u entrywise.
    assert np.array_equal(t @ model.trace_vector, u)
    return t


def vector_of_operator(model: FactorModel, t) -> OperatorVector:
    """``u = T u_tr`` together with ``tr(T^H T)``, checked against ``tr(T T^H)``."""
    t = model.check_vector(t, "operator")
    u = t @ model.trace_vector
    left = model.trace(t.conj().T @ t).real
    right = model.trace(t @ t.conj().T).real
    if abs(left - right) > model.tol.eq_tol * max(left, 1.0):
        raise ArithmeticError(f"trace property violated: {left} vs {right}")
    return OperatorVector(u, left)


def classify_vector(model: FactorModel, u) -> VectorReport:
    """Cyclic/separating verdicts from the smallest singular value of ``u``.

    The verdicts are cross-checked against the dimensions of ``[M0 u]`` and
    ``[M0' u]`` computed by brute-force spans.
    """
    u = model.check_vector(u)
    dim = model.dim
    sigma_min = float(np.linalg.svd(u, compute_uv=False)[-1])
    thresh = rank_threshold(model, u)
    invertible = bool(sigma_min > thresh)
    left = cyclic_subspace(model, "left", u).dim
    right = cyclic_subspace(model, "right", u).dim
    agrees = (invertible == (left == dim)) and (invertible == (right == dim))
    borderline = bool(thresh / 10 <= sigma_min <= thresh * 10)
    return VectorReport(invertible, invertible, sigma_min, float(thresh),
                        (int(left), int(right)), borderline, bool(agrees))


def is_cyclic_separating(model: FactorModel, u) -> bool:
    """Fast verdict without the span oracle."""
    u = model.check_vector(u)
    return float(np.linalg.svd(u, compute_uv=False)[-1]) > rank_threshold(model, u)


def trace_of_positive(model: FactorModel, a) -> float:
    """Trace of a positive element as the spectral sum ``sum_i lambda_i ||E_i u_tr||^2``."""
    a = model.check_vector(a, "operator")
    tol = model.tol
    scale = opnorm(a)
    if hermiticity_residual(a) > tol.eq_tol:
        raise InvalidInput("operator is not self-adjoint")
    clusters = eig_clusters(a, tol)
    if clusters and clusters[0][0] < -tol.eq_tol * max(scale, 1.0):
        raise InvalidInput(f"operator is not positive: eigenvalue {clusters[0][0]}")
    u_tr = model.trace_vector
    total = 0.0
    for value, basis in clusters:
        proj = basis @ basis.conj().T
        # E_i acts on u_tr by left multiplication with the eigenprojection.
        total += value * model.norm(proj @ u_tr) ** 2
    direct = model.trace(a).real
    if relres(abs(total - direct), max(abs(direct), 1.0)) > tol.eq_tol:
        raise ArithmeticError(f"spectral trace {total} disagrees with {direct}")
    return float(total)
