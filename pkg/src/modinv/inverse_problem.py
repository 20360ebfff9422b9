"""Solutions of the inverse problem for a type I_N factor in standard form.

A solution is a factor ``U M0 U^*`` (``U`` unitary on the matrix Hilbert space)
having ``(Delta0, J0)`` as modular objects at ``u0``. Equivalently the vector
``u = U^* u0`` has modular objects ``(U^* Delta0 U, J0)`` for ``M0`` and ``U``
commutes with ``J0``. Every solution is determined (up to equivalence) by the
spectral data of ``H = u u^*``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional

import numpy as np

from .errors import (
    ConstructionFailed,
    InvalidInput,
    NotAModularShape,
    NotIntertwinable,
    NotInvertible,
)
from .matkit import (
    Tolerances,
    cluster_basis,
    herm_eig,
    herm_func,
    left_polar,
    opnorm,
    relres,
)
from .modular import (
    ModularObjects,
    _split_spectrum,
    build_invariant_conjugation,
    factorize_delta,
    fixed_real_basis,
    invariant_conjugation_residuals,
    modular_from_vector,
    modular_pair_residual,
)
from .spectral_classes import (
    SpectralData,
    FactorType,
    cluster_values,
    compatible_with,
    data_equivalent,
    induced_delta_spectrum,
    normalize_data,
    require_valid,
)
from .standard_form import (
    AntilinearOp,
    FactorModel,
    left_superop,
    right_superop,
    unvec,
    vec,
)
from .vector_correspondence import classify_vector


RESIDUAL_NAMES = ("algebra_conj", "cyclic_sep", "modular_match", "j_commute", "vector_sign")


@dataclass
class SolutionCertificate:
    u_solution: np.ndarray
    unitary: np.ndarray
    data: Optional[SpectralData]
    residuals: dict
    sign: int
    tol: Tolerances
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r <= self.tol.eq_tol for r in self.residuals.values())


class ProjectionFamily(NamedTuple):
    projections: list
    traces: list


class NF1Membership(NamedTuple):
    member: bool
    witness: Optional[np.ndarray]
    data: Optional[SpectralData]
    reference: SpectralData


class SecondClass(NamedTuple):
    u1: np.ndarray
    u1_unitary: np.ndarray
    residuals: dict
    solution: SolutionCertificate
    nf1: NF1Membership

    @property
    def passed(self) -> bool:
        tol = self.solution.tol.eq_tol
        return self.solution.passed and all(r <= tol for r in self.residuals.values())


class Equivalence(NamedTuple):
    equivalent: bool
    witness: Optional[np.ndarray]
    residuals: dict


def _positive_data(model: FactorModel, h):
    """Normalized spectral data of a positive invertible ``h`` and its scale."""
    es = herm_eig(h, model.tol)
    if es.values[0] <= 0:
        raise NotInvertible(f"operator is not positive definite (eigenvalue {es.values[0]:.3e})")
    pairs = [(val, Fraction(len(idx), model.n))
             for val, idx in cluster_values(list(es.values), model.tol.spec_tol)]
    return normalize_data(SpectralData(tuple(pairs), FactorType.type_i(model.n)))


def _eigen_blocks(model: FactorModel, h):
    """``[(value, orthonormal basis)]`` of ``h`` with descending values, relative clustering."""
    es = herm_eig(h, model.tol)
    blocks = []
    for val, idx in cluster_values(list(es.values), model.tol.spec_tol):
        blocks.append((val, cluster_basis(es.vectors[:, idx])))
    return blocks[::-1]


def spectral_data_of_vector(model: FactorModel, u) -> SpectralData:
    """Spectral data of ``u u^*``, normalized to unit trace."""
    return spectral_data_with_scale(model, u)[0]


def spectral_data_with_scale(model: FactorModel, u):
    """``(data, c)`` where the data of ``u u^*`` was multiplied by ``c`` to reach unit trace."""
    u = model.check_vector(u)
    if not classify_vector(model, u).cyclic:
        raise NotInvertible("vector is not cyclic and separating")
    return _positive_data(model, u @ u.conj().T)


def projections_with_traces(model: FactorModel, m_list) -> ProjectionFamily:
    """Diagonal projections on consecutive index blocks of sizes ``N m_k``."""
    n = model.n
    sizes = []
    for m in m_list:
        m = Fraction(m) if not isinstance(m, float) else Fraction(m).limit_denominator(n)
        l = m * n
        if l.denominator != 1 or l < 1:
            raise InvalidInput(f"trace {m} is not of the form l/{n} with l >= 1")
        sizes.append(int(l))
    if sum(sizes) != n:
        raise InvalidInput(f"block sizes {sizes} do not add up to {n}")
    projs, start = [], 0
    for s in sizes:
        e = np.zeros((n, n), dtype=complex)
        e[start:start + s, start:start + s] = np.eye(s)
        projs.append(e)
        start += s
    return ProjectionFamily(projs, [Fraction(s, n) for s in sizes])


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def build_H_from_data(model: FactorModel, d: SpectralData, rotation=None) -> np.ndarray:
    """``H = sum mu_k E_k`` with unit trace; ``rotation`` conjugates it by a unitary."""
    if d.ftype != FactorType.type_i(model.n):
        raise InvalidInput(f"data of type {d.ftype} does not fit the model I_{model.n}")
    require_valid(d, model.tol, normalized=False)
    d, _ = normalize_data(d)
    fam = projections_with_traces(model, d.ms)
    h = sum(mu * e for mu, e in zip(d.mus, fam.projections))
    if rotation is not None:
        w = np.asarray(rotation, dtype=complex)
        h = w @ h @ w.conj().T
        h = (h + h.conj().T) / 2
    return h


def _paired_spaces(delta, j: AntilinearOp, tol: Tolerances):
    _, one, high = _split_spectrum(delta, tol)
    d = np.asarray(delta).shape[0]
    b0 = np.concatenate([b for _, b in one], axis=1) if one else np.zeros((d, 0), complex)
    return fixed_real_basis(j, b0), high


def _mirror(w_high: np.ndarray, j: AntilinearOp) -> np.ndarray:
    """Complete an operator on the spectrum above 1 by ``j w j`` below 1."""
    return w_high + (j @ w_high @ j)


def jcompatible_intertwiner(model: FactorModel, delta_a, delta_b, j0: AntilinearOp) -> np.ndarray:
    """Unitary ``W`` with ``W delta_a W^* = delta_b`` and ``W j0 = j0 W``.

    Eigenspaces above 1 are matched by arbitrary orthonormal bases, those
    below 1 are their ``j0`` images, and on the eigenvalue-1 space the
    ``j0``-real bases are matched.
    """
    tol = model.tol
    delta_a = model.check_superop(delta_a, "delta_a")
    delta_b = model.check_superop(delta_b, "delta_b")
    for name, dl in (("delta_a", delta_a), ("delta_b", delta_b)):
        if modular_pair_residual(dl, j0) > tol.eq_tol:
            raise InvalidInput(f"{name} is not inverted by j0")
    ra, high_a = _paired_spaces(delta_a, j0, tol)
    rb, high_b = _paired_spaces(delta_b, j0, tol)
    if ra.shape[1] != rb.shape[1] or len(high_a) != len(high_b):
        raise NotIntertwinable("clustered spectra differ")
    w = rb @ ra.conj().T
    w_high = np.zeros_like(w)
    for (la, ba), (lb, bb) in zip(high_a, high_b):
        if abs(la - lb) > tol.spec_tol * max(la, lb) or ba.shape[1] != bb.shape[1]:
            raise NotIntertwinable(
                f"eigenvalue {la:.12g} (dim {ba.shape[1]}) vs {lb:.12g} (dim {bb.shape[1]})")
        w_high += bb @ ba.conj().T
    return w + _mirror(w_high, j0)


def plane_rotation(a, b):
    """Unitary with real coefficients in ``span(a, b)`` mapping ``a/|a|`` to ``b/|b|``.

    Returns ``(Q, sign)``; for antiparallel vectors ``Q = I`` and ``sign = -1``.
    ``a`` and ``b`` must have a real inner product.
    """
    a = np.asarray(a, dtype=complex).reshape(-1)
    b = np.asarray(b, dtype=complex).reshape(-1)
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    c = float(np.vdot(a, b).real)
    w = b - c * a
    s = float(np.linalg.norm(w))
    eye = np.eye(a.size, dtype=complex)
    if s <= 1e-14:
        return eye, (1 if c > 0 else -1)
    w = w / s
    q = eye + (c - 1) * (np.outer(a, a.conj()) + np.outer(w, w.conj())) \
        + s * (np.outer(w, a.conj()) - np.outer(a, w.conj()))
    return q, 1


def _generators(n: int):
    """Two matrices generating the full matrix algebra: distinct diagonal and cyclic shift."""
    diag = np.diag(np.arange(1, n + 1)).astype(complex)
    shift = np.roll(np.eye(n, dtype=complex), 1, axis=0)
    return diag, shift


def _algebra_conj_residual(model: FactorModel, u_op: np.ndarray) -> float:
    d = model.dim
    unit = opnorm(u_op.conj().T @ u_op - np.eye(d))
    worst = unit
    gens = _generators(model.n)
    for a in gens:
        la = u_op @ left_superop(a) @ u_op.conj().T
        for b in gens:
            rb = u_op @ right_superop(b) @ u_op.conj().T
            comm = la @ rb - rb @ la
            worst = max(worst, relres(opnorm(comm), opnorm(la) * opnorm(rb)))
    return worst


def verify_solution(model: FactorModel, u0, unitary, expected=None,
                    reference: Optional[ModularObjects] = None) -> SolutionCertificate:
    """Certificate for ``U M0 U^*`` being a solution for ``(Delta0, J0, u0)``.

    Residuals: ``algebra_conj`` (unitarity of ``U`` and commutation of the
    conjugated algebra with the conjugated commutant), ``cyclic_sep`` (0 or 1
    from :func:`classify_vector`), ``modular_match`` (modular objects of
    ``U^* u0`` against ``(U^* Delta0 U, J0)``), ``j_commute`` and
    ``vector_sign`` (distance of ``U^* u0`` from ``+-expected``, 0 when no
    expected vector is given).
    """
    tol = model.tol
    u0 = model.check_vector(u0, "u0")
    u_op = model.check_superop(unitary, "unitary")
    mo0 = reference or modular_from_vector(model, u0)
    cmat = mo0.j0.cmat
    u = unvec(u_op.conj().T @ vec(u0), model.n)
    res = {"algebra_conj": _algebra_conj_residual(model, u_op)}
    res["j_commute"] = relres(opnorm(u_op @ cmat - cmat @ u_op.conj()), opnorm(u_op))
    report = classify_vector(model, u)
    res["cyclic_sep"] = 0.0 if (report.cyclic and report.separating) else 1.0
    details = {"sigma_min": report.sigma_min, "rank_threshold": report.threshold}
    pulled = u_op.conj().T @ mo0.delta @ u_op
    pulled = (pulled + pulled.conj().T) / 2
    data = None
    if report.cyclic:
        try:
            mo = modular_from_vector(model, u)
            res["modular_match"] = max(relres(opnorm(mo.delta - pulled), opnorm(pulled)),
                                       opnorm(mo.j0.cmat - cmat))
        except ArithmeticError as exc:
            res["modular_match"] = 1.0
            details["modular_error"] = str(exc)
        try:
            fac = factorize_delta(model, pulled)
            data, _ = _positive_data(model, fac.h)
            details["factor_residual"] = fac.residual
        except (NotAModularShape, NotInvertible) as exc:
            details["factor_error"] = str(exc)
    else:
        res["modular_match"] = 1.0
    sign = 1
    if expected is not None:
        e = vec(model.check_vector(expected, "expected"))
        plus = np.linalg.norm(vec(u) - e)
        minus = np.linalg.norm(vec(u) + e)
        sign = 1 if plus <= minus else -1
        res["vector_sign"] = relres(float(min(plus, minus)), float(np.linalg.norm(e)))
    else:
        res["vector_sign"] = 0.0
    res = {k: float(res[k]) for k in RESIDUAL_NAMES}
    return SolutionCertificate(u, u_op, data, res, sign, tol, details)


def build_solution(model: FactorModel, u0, d: SpectralData, seed=None) -> SolutionCertificate:
    """Solution whose generating operator has spectral data ``d``.

    ``seed`` (optional) rotates the eigenprojections of ``H`` by a random
    unitary of the algebra; all seeds give equivalent solutions.
    """
    tol = model.tol
    u0 = model.check_vector(u0, "u0")
    mo0 = modular_from_vector(model, u0)
    data0 = spectral_data_of_vector(model, u0)
    require_valid(d, tol, normalized=False)
    if d.ftype != FactorType.type_i(model.n):
        raise InvalidInput(f"data of type {d.ftype} does not fit the model I_{model.n}")
    if not compatible_with(d, induced_delta_spectrum(data0, tol), tol):
        raise InvalidInput("data is not compatible with the modular spectrum of u0")
    rot = None if seed is None else random_unitary(model.n, np.random.default_rng(seed))
    h = build_H_from_data(model, d, rot)
    _, v = left_polar(u0)
    u = herm_func(h, np.sqrt, tol) @ v
    u = u * (model.norm(u0) / model.norm(u))
    mo = modular_from_vector(model, u)
    w = jcompatible_intertwiner(model, mo.delta, mo0.delta, mo0.j0)
    q, _ = plane_rotation(w @ vec(u), vec(u0))
    cert = verify_solution(model, u0, q @ w, expected=u, reference=mo0)
    if not cert.passed:
        raise ConstructionFailed("built solution does not verify", cert.residuals)
    return cert


def _matched_unitary(blocks_from, blocks_to) -> np.ndarray:
    """Unitary sending the eigenbasis of each block of ``blocks_from`` to its partner."""
    return sum(bt @ bf.conj().T for (_, bf), (_, bt) in zip(blocks_from, blocks_to))


def _generator_of(model: FactorModel, u_op: np.ndarray, delta0) -> Optional[np.ndarray]:
    pulled = u_op.conj().T @ delta0 @ u_op
    pulled = (pulled + pulled.conj().T) / 2
    try:
        return factorize_delta(model, pulled).h
    except NotAModularShape:
        return None


def nf1_membership(model: FactorModel, u0, unitary) -> NF1Membership:
    """Whether the solution is equivalent to ``M0`` itself.

    The generating operator is recovered from ``U^* Delta0 U``; membership
    holds iff its data matches that of ``u0 u0^*``. The witness is a unitary
    ``W`` of the algebra with ``W H W^* = c H0``.
    """
    u0 = model.check_vector(u0, "u0")
    mo0 = modular_from_vector(model, u0)
    ref = _positive_data(model, mo0.h0)[0]
    h = _generator_of(model, model.check_superop(unitary), mo0.delta)
    if h is None:
        return NF1Membership(False, None, None, ref)
    data = _positive_data(model, h)[0]
    if not data_equivalent(data, ref, model.tol):
        return NF1Membership(False, None, data, ref)
    w = _matched_unitary(_eigen_blocks(model, h), _eigen_blocks(model, mo0.h0))
    return NF1Membership(True, w, data, ref)


def build_second_class(model: FactorModel, u0) -> SecondClass:
    """Dual vector ``u1``, the unitary ``U1 = I J0`` and the dual solution.

    ``u1`` is ``H0^{-1/2} V`` rescaled to the norm of ``u0``, so that its
    modular operator is ``Delta0^{-1}``. ``I`` is the conjugation commuting
    with ``Delta0`` and ``J0`` and fixing ``u0, u1``. The solution is
    ``K U1`` where ``K`` rotates ``u1`` onto ``u0``.
    """
    tol = model.tol
    u0 = model.check_vector(u0, "u0")
    mo0 = modular_from_vector(model, u0)
    d = model.dim
    u1 = herm_func(mo0.h0, lambda x: x ** -0.5, tol) @ mo0.v
    u1 = u1 * (model.norm(u0) / model.norm(u1))
    mo1 = modular_from_vector(model, u1)
    inv0 = np.linalg.inv(mo0.delta)
    i_op = build_invariant_conjugation(mo0.delta, mo0.j0, u0, u1, tol)
    u1_op = i_op @ mo0.j0
    cmat = mo0.j0.cmat
    res = {
        "dual_modular_operator": relres(opnorm(mo1.delta - inv0), opnorm(inv0)),
        "dual_modular_conjugation": opnorm(mo1.j0.cmat - cmat),
        "unitarity": opnorm(u1_op.conj().T @ u1_op - np.eye(d)),
        "inverts_delta": relres(opnorm(u1_op.conj().T @ mo0.delta @ u1_op - inv0), opnorm(inv0)),
        "j_commute": opnorm(u1_op @ cmat - cmat @ u1_op.conj()),
        "fixes_u0": relres(float(np.linalg.norm(u1_op @ vec(u0) - vec(u0))),
                           float(np.linalg.norm(u0))),
        "fixes_u1": relres(float(np.linalg.norm(u1_op @ vec(u1) - vec(u1))),
                           float(np.linalg.norm(u1))),
    }
    res.update({f"conjugation_{k}": v for k, v in
                invariant_conjugation_residuals(mo0.delta, mo0.j0, i_op, u0, u1).items()})
    k, _ = plane_rotation(vec(u1), vec(u0))
    cert = verify_solution(model, u0, k @ u1_op, expected=u1, reference=mo0)
    return SecondClass(u1, u1_op, res, cert, nf1_membership(model, u0, cert.unitary))


def random_nf1_unitary(model: FactorModel, u0, rng: np.random.Generator, sign: int = 1) -> np.ndarray:
    """Random unitary commuting with ``Delta0`` and ``J0`` with ``U u0 = sign * u0``."""
    if sign not in (1, -1):
        raise InvalidInput("sign must be +1 or -1")
    mo0 = modular_from_vector(model, u0)
    r0, high = _paired_spaces(mo0.delta, mo0.j0, model.tol)
    w_high = sum((b @ random_unitary(b.shape[1], rng) @ b.conj().T for _, b in high),
                 np.zeros((model.dim, model.dim), complex))
    # real orthogonal map on the J0-real eigenvalue-1 coordinates, fixing u0's coordinates
    x = (r0.conj().T @ vec(u0)).real
    k = x.size
    frame, _ = np.linalg.qr(np.column_stack([x, rng.standard_normal((k, k - 1))]))
    inner, _ = np.linalg.qr(rng.standard_normal((k - 1, k - 1))) if k > 1 else (np.zeros((0, 0)), None)
    core = np.zeros((k, k))
    core[0, 0] = sign
    core[1:, 1:] = inner
    orth = frame @ core @ frame.T
    return r0 @ orth @ r0.conj().T + _mirror(w_high, mo0.j0)


def solutions_equivalent(model: FactorModel, u0, ua, ub) -> Equivalence:
    """Equivalence of two solutions by comparing their spectral data.

    For equivalent solutions a witness ``V = Ua X Ub^*`` is constructed, with
    ``X(Y) = W Y V0^* W^* V0`` built from a unitary ``W`` matching the
    eigenspaces of the two generating operators (``V0`` the common polar
    unitary). The witness is returned only if it commutes with ``Delta0`` and
    ``J0`` and fixes ``u0`` up to sign within tolerance.
    """
    tol = model.tol
    u0 = model.check_vector(u0, "u0")
    mo0 = modular_from_vector(model, u0)
    ua = model.check_superop(ua, "ua")
    ub = model.check_superop(ub, "ub")
    ha = _generator_of(model, ua, mo0.delta)
    hb = _generator_of(model, ub, mo0.delta)
    if ha is None or hb is None:
        raise InvalidInput("a unitary does not pull the modular operator back to a modular shape")
    da, db = _positive_data(model, ha)[0], _positive_data(model, hb)[0]
    if not data_equivalent(da, db, tol):
        return Equivalence(False, None, {})
    va = unvec(ua.conj().T @ vec(u0), model.n)
    vb = unvec(ub.conj().T @ vec(u0), model.n)
    _, pa = left_polar(va)
    # W hb W^* = ha, matching eigenspaces in descending order
    w = _matched_unitary(_eigen_blocks(model, vb @ vb.conj().T),
                         _eigen_blocks(model, va @ va.conj().T))
    x = left_superop(w) @ right_superop(pa.conj().T @ w.conj().T @ pa)
    wit = ua @ x @ ub.conj().T
    vu0 = vec(u0)
    image = wit @ vu0
    nu = float(np.linalg.norm(vu0))
    cmat = mo0.j0.cmat
    res = {
        "unitarity": opnorm(wit.conj().T @ wit - np.eye(model.dim)),
        "delta_commute": relres(opnorm(wit @ mo0.delta - mo0.delta @ wit), opnorm(mo0.delta)),
        "j_commute": opnorm(wit @ cmat - cmat @ wit.conj()),
        "fixes_u0": min(float(np.linalg.norm(image - vu0)), float(np.linalg.norm(image + vu0))) / nu,
    }
    ok = all(r <= tol.eq_tol for r in res.values())
    return Equivalence(True, wit if ok else None, res)
