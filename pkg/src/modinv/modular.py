"""Modular objects of a cyclic and separating vector.

For ``u = H V`` (left polar form, ``H = (u u^H)^{1/2}``) the modular conjugation
is ``J0 = V J V^*`` and the modular operator is ``Delta = J0 H0^{-1} J0 H0``
with ``H0 = H^2``. In matrix terms ``J0(X) = V X^H V`` and
``Delta(X) = (u u^H) X (u^H u)^{-1}``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import InvalidInput, NotAModularShape, NotInvertible, PreconditionFailed
from .matkit import (
    DEFAULT_TOL,
    Tolerances,
    eig_clusters,
    herm_eig,
    herm_func,
    hermiticity_residual,
    left_polar,
    nearest_kron_rank1,
    opnorm,
    relres,
)
from .standard_form import (
    AntilinearOp,
    FactorModel,
    left_superop,
    sandwich_superop,
    trace_conjugation,
    vec,
)
from .vector_correspondence import is_cyclic_separating


@dataclass(frozen=True)
class ModularObjects:
    delta: np.ndarray
    j0: AntilinearOp
    h0: np.ndarray
    v: np.ndarray


class DeltaFactors(NamedTuple):
    h: np.ndarray
    h_prime: np.ndarray
    residual: float


def _require_cs(model: FactorModel, u) -> np.ndarray:
    u = model.check_vector(u)
    if not is_cyclic_separating(model, u):
        raise NotInvertible("vector is not cyclic and separating (singular matrix)")
    return u


def _hermitize(a: np.ndarray) -> np.ndarray:
    return (a + a.conj().T) / 2


def polar_conjugation(model: FactorModel, v) -> AntilinearOp:
    """``V J V^*`` for a unitary ``V`` in the algebra."""
    lv = left_superop(v)
    return lv @ trace_conjugation(model) @ lv.conj().T


def modular_from_vector(model: FactorModel, u) -> ModularObjects:
    u = _require_cs(model, u)
    h, v = left_polar(u)
    h0 = _hermitize(h @ h)
    j0 = polar_conjugation(model, v)
    delta = left_superop(h0) @ (j0 @ left_superop(np.linalg.inv(h0)) @ j0)
    direct = sandwich_superop(u @ u.conj().T, np.linalg.inv(u.conj().T @ u))
    dev = relres(opnorm(delta - direct), opnorm(direct))
    if dev > model.tol.eq_tol:
        raise ArithmeticError(f"modular operator forms disagree (relative deviation {dev:.3e})")
    return ModularObjects(_hermitize(delta), j0, h0, v)


def _real_rep_antilinear(c: np.ndarray) -> np.ndarray:
    p, q = c.real, c.imag
    return np.block([[p, q], [q, -p]])


def tomita_oracle(model: FactorModel, u):
    """Modular objects from the polar decomposition of ``S: A u -> A^H u``.

    ``S(Y) = (u^H)^{-1} Y^H u`` is antilinear; it is carried to its real
    ``2N^2``-dimensional representation, where ``S = J0 Delta^{1/2}`` is an
    ordinary real polar decomposition.
    """
    u = _require_cs(model, u)
    d = model.dim
    s = left_superop(np.linalg.inv(u.conj().T)) @ sandwich_superop(np.eye(model.n), u) \
        @ trace_conjugation(model)
    sr = _real_rep_antilinear(s.cmat)
    ur, _ = scipy.linalg.polar(sr, side="right")
    dr = sr.T @ sr
    delta = dr[:d, :d] + 1j * dr[d:, :d]
    j0 = AntilinearOp(ur[:d, :d] + 1j * ur[d:, :d])
    return _hermitize(delta), j0


def factorize_delta(model: FactorModel, delta) -> DeltaFactors:
    """Split ``delta = L_h R_h'`` with ``tr(h) = 1``.

    The split is unique up to ``(c h, h'/c)``; the normalization fixes ``c``.
    """
    delta = model.check_superop(delta)
    a, b, residual = nearest_kron_rank1(delta, model.n)
    if residual > model.tol.eq_tol:
        raise NotAModularShape(f"not a left/right product (residual {residual:.3e})")
    tr_a = model.trace(a)
    if abs(tr_a) <= model.tol.eq_tol * np.linalg.norm(a):
        raise NotAModularShape("left factor has vanishing trace")
    return DeltaFactors(a / tr_a, b * tr_a, residual)


def kreal_conjugation(delta, tol: Tolerances = DEFAULT_TOL) -> AntilinearOp:
    """Conjugation ``K`` with ``K delta K = delta``: complex conjugation of eigen-coordinates."""
    delta = np.asarray(delta, dtype=complex)
    if hermiticity_residual(delta) > tol.eq_tol:
        raise InvalidInput("operator is not self-adjoint")
    q = herm_eig(delta, tol).vectors
    return AntilinearOp(q @ q.T)


def fixed_real_basis(conj: AntilinearOp, basis: np.ndarray) -> np.ndarray:
    """Orthonormal basis of ``{x in span(basis): conj(x) = x}``.

    ``span(basis)`` must be invariant under the conjugation; the fixed vectors
    then form a real form of it, so the result has as many columns as
    ``basis`` and is orthonormal over the complex numbers as well.
    """
    k = basis.shape[1]
    if k == 0:
        return basis
    jb = conj.cmat @ basis.conj()
    cands = np.concatenate([basis + jb, 1j * (basis - jb)], axis=1)
    stacked = np.concatenate([cands.real, cands.imag], axis=0)
    uu, _, _ = np.linalg.svd(stacked, full_matrices=False)
    m = basis.shape[0]
    out = uu[:m, :k] + 1j * uu[m:, :k]
    return out


def _split_spectrum(delta, tol: Tolerances):
    """Clusters of ``delta`` grouped as below 1, at 1 and above 1."""
    low, one, high = [], [], []
    for value, basis in eig_clusters(delta, tol):
        if abs(value - 1.0) <= tol.spec_tol:
            one.append((value, basis))
        elif value > 1.0:
            high.append((value, basis))
        else:
            low.append((value, basis))
    return low, one, high


def _as_vec(x) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    return vec(x) if x.ndim == 2 else x


def modular_pair_residual(delta, j: AntilinearOp) -> float:
    """``||(j delta j) delta - I|| / (||j delta j|| ||delta||)``."""
    delta = np.asarray(delta)
    jdj = j @ delta @ j
    err = opnorm(jdj @ delta - np.eye(delta.shape[0]))
    return relres(err, opnorm(jdj) * opnorm(delta))


def build_invariant_conjugation(delta, j: AntilinearOp, v1, v2,
                                tol: Tolerances = DEFAULT_TOL) -> AntilinearOp:
    """Conjugation ``I`` commuting with ``delta`` and ``j`` and fixing ``v1, v2``.

    Requires ``j delta j = delta^{-1}`` and ``delta v_i = j v_i = v_i``.
    On the eigenvalue-1 space ``I`` is ``j``; above 1 it conjugates the
    coordinates of an eigenbasis ``{u_k}`` and below 1 those of ``{j u_k}``.
    """
    delta = np.asarray(delta, dtype=complex)
    v1, v2 = _as_vec(v1), _as_vec(v2)
    hyp = {"modular_pair": modular_pair_residual(delta, j)}
    for name, v in (("v1", v1), ("v2", v2)):
        nv = float(np.linalg.norm(v))
        hyp[f"delta_fixes_{name}"] = relres(float(np.linalg.norm(delta @ v - v)), nv)
        hyp[f"j_fixes_{name}"] = relres(float(np.linalg.norm(j @ v - v)), nv)
    bad = {k: r for k, r in hyp.items() if r > tol.eq_tol}
    if bad:
        raise PreconditionFailed(f"hypotheses violated: {sorted(bad)}", hyp)

    _, one, high = _split_spectrum(delta, tol)
    d = delta.shape[0]
    cmat = np.zeros((d, d), dtype=complex)
    if one:
        b0 = np.concatenate([b for _, b in one], axis=1)
        p0 = b0 @ b0.conj().T
        cmat += j.cmat @ p0.conj()
    if high:
        b1 = np.concatenate([b for _, b in high], axis=1)
        bm = j.cmat @ b1.conj()
        b = np.concatenate([b1, bm], axis=1)
        cmat += b @ b.T
    return AntilinearOp(cmat)


def invariant_conjugation_residuals(delta, j: AntilinearOp, i_op: AntilinearOp, v1, v2) -> dict:
    delta = np.asarray(delta)
    v1, v2 = _as_vec(v1), _as_vec(v2)
    return {
        "i_delta_i": relres(opnorm((i_op @ delta @ i_op) - delta), opnorm(delta)),
        "i_j_i": opnorm((i_op @ j @ i_op).cmat - j.cmat),
        "involution": i_op.conjugation_residual(),
        "fixes_v1": relres(float(np.linalg.norm(i_op @ v1 - v1)), float(np.linalg.norm(v1))),
        "fixes_v2": relres(float(np.linalg.norm(i_op @ v2 - v2)), float(np.linalg.norm(v2))),
    }


def modular_group(delta, t: float, tol: Tolerances = DEFAULT_TOL,
                  j: AntilinearOp | None = None) -> np.ndarray:
    """``delta^{it}`` by spectral calculus on the clustered spectrum.

    With the conjugation ``j`` (``j delta j = delta^{-1}``) only the part
    above 1 is taken from the eigensystem and the part below 1 is its mirror
    ``j (.) j``. Eigenvalues far below 1 carry relative errors of order
    ``eps * cond(delta)`` while those above 1 do not, so the mirrored form
    stays accurate for badly conditioned vectors.
    """
    if j is None:
        return herm_func(delta, lambda lam: np.exp(1j * t * np.log(lam)), tol)
    es = herm_eig(delta, tol)
    up = es.values > 1 + tol.spec_tol
    w = es.vectors[:, up]
    plus = (w * np.exp(1j * t * np.log(es.values[up]))) @ w.conj().T
    proj = w @ w.conj().T
    c = j.cmat

    def mirror(x):
        # the linear map j x j
        return c @ x.conj() @ c.conj()

    return plus + mirror(plus) + (np.eye(delta.shape[0]) - proj - mirror(proj))


def algebra_invariance_residual(model: FactorModel, delta, t: float,
                                j: AntilinearOp | None = None) -> float:
    """Largest distance of ``delta^{it} L_{E_pq} delta^{-it}`` from the left algebra.

    Being a left multiplication is equivalent to commuting with every
    ``right_superop(E_rs)``.
    """
    n = model.n
    d = modular_group(delta, t, model.tol, j)
    d3 = d.reshape(n * n, n, n)
    # x[p, q] = d @ kron(I, E_pq) @ d^H
    x = np.einsum("xcp,ycq->pqxy", d3, d3.conj())
    x6 = x.reshape(n, n, n, n, n, n)
    a = np.einsum("pqiaib->pqab", x6) / n
    diff = x6 - np.einsum("ij,pqab->pqiajb", np.eye(n), a)
    num = np.sqrt(np.sum(np.abs(diff) ** 2, axis=(2, 3, 4, 5)))
    den = np.sqrt(np.sum(np.abs(x6) ** 2, axis=(2, 3, 4, 5)))
    return float(np.max(num / den))


def check_modular_identities(model: FactorModel, mo: ModularObjects, u,
                             times=(1.0, np.sqrt(2.0))) -> dict:
    """Residuals of the Tomita identities for ``(delta, j0)`` at the vector ``u``."""
    u = model.check_vector(u)
    vu = vec(u)
    nu = float(np.linalg.norm(vu))
    res = {
        "j_delta_j_delta": modular_pair_residual(mo.delta, mo.j0),
        "delta_fixes_u": relres(float(np.linalg.norm(mo.delta @ vu - vu)), nu),
        "j_fixes_u": relres(float(np.linalg.norm(mo.j0 @ vu - vu)), nu),
        "j_conjugation": mo.j0.conjugation_residual(),
    }
    for t in times:
        res[f"algebra_invariance_t={t:.6g}"] = algebra_invariance_residual(model, mo.delta, t, mo.j0)
    return res
