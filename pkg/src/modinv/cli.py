"""Command-line interface: JSON documents in, JSON documents out.

Exit codes: 0 success or PASS, 1 verification FAIL, 2 invalid input.
Diagnostics go to standard error, one JSON object per line.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import serialize as ser
from .errors import ConstructionFailed, ModinvError, PreconditionFailed
from .inverse_problem import (
    build_second_class,
    build_solution,
    nf1_membership,
    solutions_equivalent,
    verify_solution,
)
from .matkit import Tolerances, opnorm, relres
from .modular import check_modular_identities, factorize_delta, modular_from_vector, tomita_oracle
from .spectral_classes import (
    EnumerationBounds,
    FactorType,
    compatible_with,
    data_equivalent,
    derive_variants,
    dual_data,
    enumerate_classes,
    induced_delta_spectrum,
    is_self_dual,
    normalize_data,
    validate_data,
)
from .standard_form import make_model
from .vector_correspondence import classify_vector

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _diag(level: str, kind: str, message: str, **extra):
    rec = {"level": level, "kind": kind, "message": message}
    rec.update(extra)
    sys.stderr.write(json.dumps(rec, sort_keys=True) + "\n")


def _load(path: str):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from None


def _tol(args) -> Tolerances:
    return Tolerances(eq_tol=args.tol, spec_tol=args.spec_tol)


def _model_of(n, args):
    return make_model(n, _tol(args))


def _vector_model(args, path):
    u = ser.hvector_from_json(_load(path))
    return _model_of(u.shape[0], args), u


def _ftype_arg(text: str, n=None) -> FactorType:
    if text == "II_1":
        return FactorType.type_ii1()
    if text == "I_N":
        if n is None:
            raise UsageError("--ftype I_N needs --n")
        return FactorType.type_i(n)
    if text.startswith("I_"):
        try:
            return FactorType.type_i(int(text[2:]))
        except ValueError:
            pass
    raise UsageError(f"unknown factor type {text!r} (use I_N with --n, I_<N> or II_1)")


def _int_list(text: str):
    try:
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


# ---- handlers: each returns (document, exit code)

def cmd_model_info(args):
    model = _model_of(args.n, args)
    return {
        "n": model.n,
        "dim": model.dim,
        "trace_vector": ser.hvector_to_json(model.trace_vector),
        "trace_normalization": "tr(x) = Trace(x) / n",
        "inner_product": "<x, y> = Trace(x^H y) / n",
        "vectorization": "column-stacking",
        "tolerances": ser.tol_to_json(model.tol),
    }, EXIT_OK


def cmd_vector_classify(args):
    model, u = _vector_model(args, args.input)
    rep = classify_vector(model, u)
    return rep.to_dict(), EXIT_OK


def cmd_modular_compute(args):
    model, u = _vector_model(args, args.input)
    mo = modular_from_vector(model, u)
    res = check_modular_identities(model, mo, u)
    doc = {
        "delta": ser.superop_to_json(mo.delta),
        "j0": ser.antilinear_to_json(mo.j0),
        "h0": ser.hvector_to_json(mo.h0),
        "v": ser.hvector_to_json(mo.v),
        "identities": res,
        "tolerances": ser.tol_to_json(model.tol),
    }
    worst = max(res.values())
    if args.oracle:
        delta, j0 = tomita_oracle(model, u)
        doc["oracle"] = {
            "delta_deviation": relres(opnorm(delta - mo.delta), opnorm(mo.delta)),
            "j0_deviation": opnorm(j0.cmat - mo.j0.cmat),
        }
        worst = max(worst, *doc["oracle"].values())
    ok = worst <= model.tol.eq_tol
    doc["verdict"] = "PASS" if ok else "FAIL"
    return doc, EXIT_OK if ok else EXIT_FAIL


def cmd_delta_factorize(args):
    s = ser.superop_from_json(_load(args.input))
    model = _model_of(int(round(np.sqrt(s.shape[0]))), args)
    fac = factorize_delta(model, s)
    return {
        "h": ser.hvector_to_json(fac.h),
        "h_prime": ser.hvector_to_json(fac.h_prime),
        "residual": fac.residual,
    }, EXIT_OK


def _data_tol(args, path):
    return ser.data_from_json(_load(path)), _tol(args)


def cmd_classes_validate(args):
    d, tol = _data_tol(args, args.input)
    bad = validate_data(d, tol, normalized=not args.unnormalized)
    return {"valid": not bad, "violations": bad}, EXIT_OK if not bad else EXIT_FAIL


def _require(d, tol, normalized=False):
    bad = validate_data(d, tol, normalized=normalized)
    if bad:
        raise UsageError("invalid spectral data: " + "; ".join(bad))


def cmd_classes_normalize(args):
    d, tol = _data_tol(args, args.input)
    _require(d, tol)
    nd, c = normalize_data(d)
    return {"data": ser.data_to_json(nd), "c": c}, EXIT_OK


def cmd_classes_dual(args):
    d, tol = _data_tol(args, args.input)
    _require(d, tol)
    return {"data": ser.data_to_json(dual_data(d)), "self_dual": is_self_dual(d, tol)}, EXIT_OK


def cmd_classes_spectrum(args):
    d, tol = _data_tol(args, args.input)
    spec = induced_delta_spectrum(d, tol)
    doc = {"spectrum": ser.spectrum_to_json(spec)}
    if args.target:
        doc["compatible"] = compatible_with(d, ser.spectrum_from_json(_load(args.target)), tol)
    return doc, EXIT_OK


def cmd_classes_equivalent(args):
    tol = _tol(args)
    a = ser.data_from_json(_load(args.a))
    b = ser.data_from_json(_load(args.b))
    _require(a, tol)
    _require(b, tol)
    return {"equivalent": data_equivalent(a, b, tol)}, EXIT_OK


def cmd_classes_enumerate(args):
    tol = _tol(args)
    target = ser.spectrum_from_json(_load(args.target))
    ft = _ftype_arg(args.ftype, args.n)
    bounds = EnumerationBounds(max_k=args.max_k)
    res = enumerate_classes(target, ft, bounds, tol)
    return {"complete": res.complete,
            "classes": [ser.data_to_json(d) for d in res.classes]}, EXIT_OK


def cmd_classes_variants(args):
    d, tol = _data_tol(args, args.input)
    if (args.permutation is None) == (args.epsilon is None):
        raise UsageError("give exactly one of --permutation or --epsilon")
    if args.permutation is not None:
        v = derive_variants(d, permutation=_int_list(args.permutation), tol=tol)
    else:
        parts = args.epsilon.split(",")
        if len(parts) != 3:
            raise UsageError("--epsilon expects k,l,eps")
        try:
            eps = (int(parts[0]), int(parts[1]), float(parts[2]))
        except ValueError:
            raise UsageError(f"malformed --epsilon {args.epsilon!r}") from None
        v = derive_variants(d, epsilon=eps, tol=tol)
    return {"data": ser.data_to_json(v.data), "equivalent": v.equivalent,
            "compatible": v.compatible}, EXIT_OK


def _cert_result(doc, passed):
    return doc, EXIT_OK if passed else EXIT_FAIL


def cmd_solve_build(args):
    model, u0 = _vector_model(args, args.u0)
    d = ser.data_from_json(_load(args.data))
    cert = build_solution(model, u0, d, seed=args.seed)
    doc = ser.certificate_to_json(cert)
    doc["nf1"] = ser.nf1_to_json(nf1_membership(model, u0, cert.unitary))
    return _cert_result(doc, cert.passed)


def cmd_solve_verify(args):
    model, u0 = _vector_model(args, args.u0)
    u_op = ser.unitary_from_json(_load(args.unitary))
    expected = ser.hvector_from_json(_load(args.expected)) if args.expected else None
    cert = verify_solution(model, u0, u_op, expected=expected)
    doc = ser.certificate_to_json(cert)
    if cert.passed:
        doc["nf1"] = ser.nf1_to_json(nf1_membership(model, u0, u_op))
    return _cert_result(doc, cert.passed)


def cmd_solve_second_class(args):
    model, u0 = _vector_model(args, args.u0)
    sc = build_second_class(model, u0)
    return _cert_result(ser.second_class_to_json(sc), sc.passed)


def cmd_solve_equivalent(args):
    model, u0 = _vector_model(args, args.u0)
    ua = ser.unitary_from_json(_load(args.ua))
    ub = ser.unitary_from_json(_load(args.ub))
    for name, u_op in (("ua", ua), ("ub", ub)):
        cert = verify_solution(model, u0, u_op)
        if not cert.passed:
            _diag("error", "NotASolution", f"{name} does not verify", residuals=cert.residuals)
            return {"equivalent": None, "failed": name,
                    "residuals": cert.residuals}, EXIT_FAIL
    return ser.equivalence_to_json(solutions_equivalent(model, u0, ua, ub)), EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--tol", type=float, default=Tolerances().eq_tol,
                        help="equality tolerance for residuals")
    common.add_argument("--spec-tol", type=float, default=Tolerances().spec_tol,
                        help="relative tolerance for eigenvalue clustering")

    p = _Parser(prog="modinv", description="Modular objects and inverse problems for matrix factors.")
    groups = p.add_subparsers(dest="group", required=True, parser_class=_Parser)

    def leaf(sub, name, func, help_text):
        q = sub.add_parser(name, parents=[common], help=help_text)
        q.set_defaults(func=func)
        return q

    g = groups.add_parser("model").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    leaf(g, "info", cmd_model_info, "constants of the standard form").add_argument(
        "--n", type=int, required=True)

    g = groups.add_parser("vector").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    leaf(g, "classify", cmd_vector_classify, "cyclic/separating report").add_argument(
        "--in", dest="input", required=True)

    g = groups.add_parser("modular").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    q = leaf(g, "compute", cmd_modular_compute, "modular operator and conjugation of a vector")
    q.add_argument("--in", dest="input", required=True)
    q.add_argument("--oracle", action="store_true", help="cross-check against the polar oracle")

    g = groups.add_parser("delta").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    leaf(g, "factorize", cmd_delta_factorize, "split into left and right factors").add_argument(
        "--in", dest="input", required=True)

    g = groups.add_parser("classes").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    q = leaf(g, "validate", cmd_classes_validate, "admissibility of spectral data")
    q.add_argument("--in", dest="input", required=True)
    q.add_argument("--unnormalized", action="store_true", help="skip the unit-trace condition")
    leaf(g, "normalize", cmd_classes_normalize, "rescale to unit trace").add_argument(
        "--in", dest="input", required=True)
    leaf(g, "dual", cmd_classes_dual, "data of the inverse generator").add_argument(
        "--in", dest="input", required=True)
    q = leaf(g, "spectrum", cmd_classes_spectrum, "induced modular spectrum")
    q.add_argument("--in", dest="input", required=True)
    q.add_argument("--target", help="also test compatibility with this spectrum")
    q = leaf(g, "equivalent", cmd_classes_equivalent, "equivalence of two data sets")
    q.add_argument("--a", required=True)
    q.add_argument("--b", required=True)
    q = leaf(g, "enumerate", cmd_classes_enumerate, "all classes with a given modular spectrum")
    q.add_argument("--target", required=True)
    q.add_argument("--ftype", required=True, help="I_N (with --n), I_<N>")
    q.add_argument("--n", type=int)
    q.add_argument("--max-k", type=int, help="largest number of distinct eigenvalues")
    q = leaf(g, "variants", cmd_classes_variants, "permuted or shifted II_1 data")
    q.add_argument("--in", dest="input", required=True)
    q.add_argument("--permutation", help="comma-separated permutation, e.g. 1,0")
    q.add_argument("--epsilon", help="k,l,eps")

    g = groups.add_parser("solve").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    q = leaf(g, "build", cmd_solve_build, "solution with given spectral data")
    q.add_argument("--u0", required=True)
    q.add_argument("--data", required=True)
    q.add_argument("--seed", type=int)
    q = leaf(g, "verify", cmd_solve_verify, "certificate for a unitary")
    q.add_argument("--u0", required=True)
    q.add_argument("--unitary", required=True)
    q.add_argument("--expected", help="vector expected as U^* u0 (up to sign)")
    leaf(g, "second-class", cmd_solve_second_class, "dual vector and dual solution").add_argument(
        "--u0", required=True)
    q = leaf(g, "equivalent", cmd_solve_equivalent, "equivalence of two solutions")
    q.add_argument("--u0", required=True)
    q.add_argument("--ua", required=True)
    q.add_argument("--ub", required=True)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        doc, code = args.func(args)
    except UsageError as exc:
        _diag("error", "InvalidInput", str(exc))
        return EXIT_INVALID
    except ConstructionFailed as exc:
        _diag("error", type(exc).__name__, str(exc), residuals=exc.residuals)
        return EXIT_FAIL
    except ArithmeticError as exc:
        _diag("error", "NumericalDisagreement", str(exc))
        return EXIT_FAIL
    except PreconditionFailed as exc:
        _diag("error", type(exc).__name__, str(exc), residuals=exc.residuals)
        return EXIT_INVALID
    except (ModinvError, ValueError) as exc:
        _diag("error", type(exc).__name__, str(exc))
        return EXIT_INVALID
    sys.stdout.write(ser.dumps(doc))
    if code == EXIT_FAIL:
        _diag("warning", "VerificationFailed", "verdict is FAIL")
    return code


if __name__ == "__main__":
    sys.exit(main())
