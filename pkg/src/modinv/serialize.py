"""JSON encodings of vectors, superoperators, spectral data and certificates.

Complex numbers are ``[re, im]`` pairs, matrices are row-major nested lists.
Superoperators act on column-stacked vectors. Floats are written with
Python's shortest round-trip representation, so decoding is exact.
"""
from __future__ import annotations

import json
from fractions import Fraction

import numpy as np

from .errors import InvalidInput
from .inverse_problem import Equivalence, NF1Membership, SecondClass, SolutionCertificate
from .matkit import Tolerances
from .spectral_classes import INFINITE, DeltaSpectrum, FactorType, SpectralData
from .standard_form import AntilinearOp


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _cplx(z) -> list:
    return [float(z.real), float(z.imag)]


def matrix_to_json(a) -> list:
    a = np.asarray(a, dtype=complex)
    return [[_cplx(z) for z in row] for row in a]


def matrix_from_json(obj, shape=None) -> np.ndarray:
    try:
        arr = np.asarray(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidInput(f"malformed matrix: {exc}") from None
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise InvalidInput(f"matrix must be nested rows of [re, im] pairs, got shape {arr.shape}")
    out = arr[..., 0] + 1j * arr[..., 1]
    if shape is not None and out.shape != shape:
        raise InvalidInput(f"expected a {shape} matrix, got {out.shape}")
    return out


def _get(obj, key):
    if not isinstance(obj, dict) or key not in obj:
        raise InvalidInput(f"missing field {key!r}")
    return obj[key]


def _dim(obj) -> int:
    n = _get(obj, "n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise InvalidInput(f"field 'n' must be a positive integer, got {n!r}")
    return n


def hvector_to_json(u) -> dict:
    u = np.asarray(u)
    return {"n": int(u.shape[0]), "mat": matrix_to_json(u)}


def hvector_from_json(obj) -> np.ndarray:
    n = _dim(obj)
    return matrix_from_json(_get(obj, "mat"), (n, n))


def superop_to_json(s) -> dict:
    s = np.asarray(s)
    n = int(round(np.sqrt(s.shape[0])))
    return {"n": n, "smat": matrix_to_json(s)}


def superop_from_json(obj) -> np.ndarray:
    n = _dim(obj)
    return matrix_from_json(_get(obj, "smat"), (n * n, n * n))


def antilinear_to_json(op: AntilinearOp) -> dict:
    return {"n": op.n, "cmat": matrix_to_json(op.cmat)}


def antilinear_from_json(obj) -> AntilinearOp:
    n = _dim(obj)
    return AntilinearOp(matrix_from_json(_get(obj, "cmat"), (n * n, n * n)))


def ftype_to_json(ft: FactorType) -> dict:
    return {"ftype": ft.kind, "n": ft.n} if ft.finite_type_i else {"ftype": ft.kind}


def ftype_from_json(obj) -> FactorType:
    kind = _get(obj, "ftype")
    if kind == "I_N":
        return FactorType.type_i(_dim(obj))
    return FactorType(kind)


def _m_to_json(m, ft: FactorType):
    if isinstance(m, Fraction):
        if ft.finite_type_i:
            return f"{m.numerator * (ft.n // m.denominator)}/{ft.n}" \
                if ft.n % m.denominator == 0 else str(m)
        return str(m)
    return float(m)


def _num_from_json(x, what):
    if isinstance(x, bool):
        raise InvalidInput(f"{what} must be a number, got {x!r}")
    if isinstance(x, str):
        try:
            return Fraction(x)
        except (ValueError, ZeroDivisionError):
            raise InvalidInput(f"{what} {x!r} is not a fraction") from None
    if isinstance(x, (int, float)):
        return x
    raise InvalidInput(f"{what} must be a number or fraction string, got {x!r}")


def data_to_json(d: SpectralData) -> dict:
    out = ftype_to_json(d.ftype)
    out["pairs"] = [{"mu": float(mu), "m": _m_to_json(m, d.ftype)} for mu, m in d.pairs]
    return out


def data_from_json(obj) -> SpectralData:
    ft = ftype_from_json(obj)
    pairs = _get(obj, "pairs")
    if not isinstance(pairs, list):
        raise InvalidInput("'pairs' must be a list")
    out = []
    for p in pairs:
        mu = _num_from_json(_get(p, "mu"), "mu")
        out.append((float(mu), _num_from_json(_get(p, "m"), "m")))
    return SpectralData(tuple(out), ft)


def spectrum_to_json(s: DeltaSpectrum) -> dict:
    out = ftype_to_json(s.ftype) if s.ftype is not None else {}
    pairs = []
    for lam, n in s.pairs:
        if n == INFINITE:
            nj = INFINITE
        elif isinstance(n, Fraction):
            nj = str(n)
        else:
            nj = float(n)
        pairs.append({"lambda": float(lam), "n": nj})
    out["pairs"] = pairs
    return out


def spectrum_from_json(obj) -> DeltaSpectrum:
    ft = ftype_from_json(obj) if isinstance(obj, dict) and "ftype" in obj else None
    pairs = _get(obj, "pairs")
    if not isinstance(pairs, list):
        raise InvalidInput("'pairs' must be a list")
    out = []
    for p in pairs:
        lam = float(_num_from_json(_get(p, "lambda"), "lambda"))
        n = _get(p, "n")
        out.append((lam, n if n == INFINITE else _num_from_json(n, "n")))
    return DeltaSpectrum(tuple(out), ft)


def tol_to_json(tol: Tolerances) -> dict:
    return {"eq_tol": tol.eq_tol, "spec_tol": tol.spec_tol}


def certificate_to_json(cert: SolutionCertificate) -> dict:
    return {
        "verdict": "PASS" if cert.passed else "FAIL",
        "residuals": dict(cert.residuals),
        "vector_sign": cert.sign,
        "tolerances": tol_to_json(cert.tol),
        "data": data_to_json(cert.data) if cert.data is not None else None,
        "details": {k: (float(v) if isinstance(v, (float, np.floating)) else v)
                    for k, v in cert.details.items()},
        "u_solution": hvector_to_json(cert.u_solution),
        "unitary": superop_to_json(cert.unitary),
    }


def nf1_to_json(nf: NF1Membership) -> dict:
    return {
        "member": nf.member,
        "data": data_to_json(nf.data) if nf.data is not None else None,
        "reference": data_to_json(nf.reference),
        "witness": hvector_to_json(nf.witness) if nf.witness is not None else None,
    }


def second_class_to_json(sc: SecondClass) -> dict:
    return {
        "verdict": "PASS" if sc.passed else "FAIL",
        "u1": hvector_to_json(sc.u1),
        "U1": superop_to_json(sc.u1_unitary),
        "residuals": dict(sc.residuals),
        "certificate": certificate_to_json(sc.solution),
        "nf1": nf1_to_json(sc.nf1),
    }


def equivalence_to_json(eq: Equivalence) -> dict:
    return {
        "equivalent": eq.equivalent,
        "witness": superop_to_json(eq.witness) if eq.witness is not None else None,
        "residuals": dict(eq.residuals),
    }


def unitary_from_json(obj) -> np.ndarray:
    """A bare superoperator or any document carrying one under ``"unitary"``."""
    if isinstance(obj, dict) and "unitary" in obj:
        obj = obj["unitary"]
    elif isinstance(obj, dict) and "certificate" in obj:
        obj = obj["certificate"]["unitary"]
    return superop_from_json(obj)
