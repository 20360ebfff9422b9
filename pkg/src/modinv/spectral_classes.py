"""Eigenvalue/multiplicity data of generating operators and their modular spectra.

Spectral data ``(mu_k, m_k)`` lists the distinct eigenvalues of a positive
operator ``H`` with the traces of its eigenprojections. Multiplicities are
exact fractions ``l/N`` for type I_N and reals in ``(0, 1]`` for type II_1.
The modular operator generated by ``H`` has eigenvalues ``mu_k / mu_l``; in
type I_N its eigenprojection for ``lambda`` has normalized dimension
``sum m_k m_l`` over the pairs with ratio ``lambda``, in type II_1 every
eigenspace is infinite dimensional.

Eigenvalue lists here are compared relative to each value
(``|a - b| <= spec_tol * max(|a|, |b|)``), since data is only defined up to a
positive scale.
"""
from __future__ import annotations

import bisect
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import InvalidInput
from .matkit import DEFAULT_TOL, Tolerances

INFINITE = "infinite"


@dataclass(frozen=True)
class FactorType:
    kind: str
    n: Optional[int] = None

    def __post_init__(self):
        if self.kind == "I_N":
            if self.n is None or int(self.n) != self.n or self.n < 1:
                raise InvalidInput(f"type I_N needs N >= 1, got {self.n}")
        elif self.kind == "II_1":
            if self.n is not None:
                raise InvalidInput("type II_1 carries no matrix dimension")
        else:
            raise InvalidInput(f"unknown factor type {self.kind!r}")

    @classmethod
    def type_i(cls, n: int) -> "FactorType":
        return cls("I_N", int(n))

    @classmethod
    def type_ii1(cls) -> "FactorType":
        return cls("II_1")

    @property
    def finite_type_i(self) -> bool:
        return self.kind == "I_N"

    def __str__(self):
        return f"I_{self.n}" if self.finite_type_i else "II_1"


def _coerce_m(m, ftype: FactorType):
    if isinstance(m, str):
        return Fraction(m)
    if isinstance(m, (Fraction, int)):
        return Fraction(m)
    m = float(m)
    if ftype.finite_type_i:
        l = round(m * ftype.n)
        if abs(m - l / ftype.n) <= 1e-12:
            return Fraction(l, ftype.n)
    return m


@dataclass(frozen=True)
class SpectralData:
    pairs: tuple
    ftype: FactorType

    def __post_init__(self):
        pairs = tuple((float(mu), _coerce_m(m, self.ftype)) for mu, m in self.pairs)
        object.__setattr__(self, "pairs", pairs)

    @property
    def mus(self) -> list:
        return [mu for mu, _ in self.pairs]

    @property
    def ms(self) -> list:
        return [m for _, m in self.pairs]

    def __len__(self):
        return len(self.pairs)


@dataclass(frozen=True)
class DeltaSpectrum:
    pairs: tuple
    ftype: FactorType = field(default=None)

    def __post_init__(self):
        out = []
        for lam, n in self.pairs:
            if isinstance(n, str) and n.lower() in (INFINITE, "inf"):
                n = INFINITE
            elif isinstance(n, (str, int, Fraction)):
                n = Fraction(n)
            else:
                n = float(n)
            out.append((float(lam), n))
        object.__setattr__(self, "pairs", tuple(sorted(out, key=lambda p: p[0])))

    @property
    def lambdas(self) -> list:
        return [lam for lam, _ in self.pairs]

    @property
    def finite(self) -> bool:
        return all(n != INFINITE for _, n in self.pairs)


def _close(a: float, b: float, spec_tol: float) -> bool:
    return abs(a - b) <= spec_tol * max(abs(a), abs(b))


def _m_equal(a, b, eq_tol: float) -> bool:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a == b
    return abs(float(a) - float(b)) <= eq_tol


def cluster_values(values: Sequence[float], spec_tol: float):
    """Group values that agree to relative precision ``spec_tol``.

    Returns ``[(mean, [indices])]`` in ascending order.
    """
    order = sorted(range(len(values)), key=lambda i: values[i])
    groups = []
    for i in order:
        if groups and _close(values[groups[-1][-1]], values[i], spec_tol):
            groups[-1].append(i)
        else:
            groups.append([i])
    return [(float(np.mean([values[i] for i in g])), g) for g in groups]


def validate_data(d: SpectralData, tol: Tolerances = DEFAULT_TOL,
                  normalized: bool = True) -> list:
    """Violations of the admissibility conditions; an empty list means valid.

    Checks positivity, distinct eigenvalues, ``sum m = 1``, the type-dependent
    multiplicity range and (when ``normalized``) ``sum m mu = 1``.
    """
    out = []
    if not d.pairs:
        return ["no eigenvalues"]
    for mu, m in d.pairs:
        if not np.isfinite(mu) or mu <= 0:
            out.append(f"eigenvalue {mu} is not a positive number")
        if not m > 0:
            out.append(f"multiplicity {m} is not positive")
    if len(cluster_values(d.mus, tol.spec_tol)) != len(d.pairs):
        out.append("eigenvalues are not pairwise distinct")
    total = sum(d.ms)
    if not _m_equal(total, Fraction(1), tol.eq_tol):
        out.append(f"multiplicities sum to {total}, expected 1")
    if d.ftype.finite_type_i:
        n = d.ftype.n
        for m in d.ms:
            if not (isinstance(m, Fraction) and (m * n).denominator == 1 and 1 <= m * n <= n):
                out.append(f"multiplicity {m} is not of the form l/{n} with 1 <= l <= {n}")
    else:
        for m in d.ms:
            if not 0 < m <= 1:
                out.append(f"multiplicity {m} is outside (0, 1]")
    if normalized:
        tr = sum(float(m) * mu for mu, m in d.pairs)
        if abs(tr - 1.0) > tol.eq_tol:
            out.append(f"trace sum(m * mu) = {tr!r}, expected 1")
    return out


def require_valid(d: SpectralData, tol: Tolerances = DEFAULT_TOL, normalized: bool = True):
    bad = validate_data(d, tol, normalized)
    if bad:
        raise InvalidInput("invalid spectral data: " + "; ".join(bad))


def normalize_data(d: SpectralData):
    """Rescale eigenvalues so that ``sum m mu = 1``; returns ``(data, c)``."""
    c = 1.0 / sum(float(m) * mu for mu, m in d.pairs)
    return SpectralData(tuple((c * mu, m) for mu, m in d.pairs), d.ftype), c


def induced_delta_spectrum(d: SpectralData, tol: Tolerances = DEFAULT_TOL) -> DeltaSpectrum:
    """Spectrum of the modular operator generated by data ``d``."""
    require_valid(d, tol, normalized=False)
    ratios, weights = [], []
    for (mu_k, m_k), (mu_l, m_l) in itertools.product(d.pairs, repeat=2):
        ratios.append(mu_k / mu_l)
        weights.append(m_k * m_l)
    pairs = []
    for lam, idx in cluster_values(ratios, tol.spec_tol):
        if d.ftype.finite_type_i:
            pairs.append((lam, sum(weights[i] for i in idx)))
        else:
            pairs.append((lam, INFINITE))
    if d.ftype.finite_type_i:
        total = sum(n for _, n in pairs)
        assert total == 1, f"modular multiplicities sum to {total}"
    return DeltaSpectrum(tuple(pairs), d.ftype)


def _canonical(d: SpectralData) -> SpectralData:
    nd, _ = normalize_data(d)
    return SpectralData(tuple(sorted(nd.pairs, key=lambda p: -p[0])), d.ftype)


def data_equivalent(d1: SpectralData, d2: SpectralData, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Same eigenvalues up to a positive scale and same multiplicities."""
    if d1.ftype != d2.ftype:
        raise InvalidInput(f"factor types differ: {d1.ftype} vs {d2.ftype}")
    a, b = _canonical(d1), _canonical(d2)
    if len(a) != len(b):
        return False
    return all(_close(ma, mb, tol.spec_tol) and _m_equal(ka, kb, tol.eq_tol)
               for (ma, ka), (mb, kb) in zip(a.pairs, b.pairs))


def dual_data(d: SpectralData) -> SpectralData:
    """Data ``(c / mu_k, m_k)`` of the inverse generator, normalized, in input order."""
    inv = SpectralData(tuple((1.0 / mu, m) for mu, m in d.pairs), d.ftype)
    return normalize_data(inv)[0]


def is_self_dual(d: SpectralData, tol: Tolerances = DEFAULT_TOL) -> bool:
    return data_equivalent(d, dual_data(d), tol)


def spectra_match(a: DeltaSpectrum, b: DeltaSpectrum, tol: Tolerances = DEFAULT_TOL) -> bool:
    if len(a.pairs) != len(b.pairs):
        return False
    for (la, na), (lb, nb) in zip(a.pairs, b.pairs):
        if not _close(la, lb, tol.spec_tol):
            return False
        if (na == INFINITE) != (nb == INFINITE):
            return False
        if na != INFINITE and not _m_equal(na, nb, tol.eq_tol):
            return False
    return True


def compatible_with(d: SpectralData, target: DeltaSpectrum, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Whether ``d`` generates a modular operator with spectrum ``target``."""
    return spectra_match(induced_delta_spectrum(d, tol), target, tol)


@dataclass(frozen=True)
class EnumerationBounds:
    max_k: Optional[int] = None
    max_candidates: int = 1_000_000


class Enumeration(NamedTuple):
    classes: list
    complete: bool


def _class_key(d: SpectralData):
    return (len(d.pairs), tuple((-mu, float(m)) for mu, m in d.pairs))


def _compositions(total: int, parts: int):
    """Ordered tuples of ``parts`` positive integers summing to ``total``."""
    for cuts in itertools.combinations(range(1, total), parts - 1):
        bounds = (0,) + cuts + (total,)
        yield tuple(bounds[i + 1] - bounds[i] for i in range(parts))


def enumerate_classes(target: DeltaSpectrum, ftype: FactorType,
                      bounds: Optional[EnumerationBounds] = None,
                      tol: Tolerances = DEFAULT_TOL) -> Enumeration:
    """All type I_N data classes whose modular spectrum is ``target``.

    Scale is fixed by ``max mu = 1``; every ``mu_k`` is then a ratio and hence
    one of the target eigenvalues ``<= 1``. Candidate eigenvalue sets are the
    subsets of those values containing 1 whose ratio set is the target set;
    multiplicities ``l_k / N`` are searched exhaustively. At most ``N``
    eigenvalues can occur since every multiplicity is at least ``1/N``.
    """
    if not ftype.finite_type_i:
        raise InvalidInput("enumeration is only defined for type I_N")
    if not target.finite:
        raise InvalidInput("target spectrum must have finite multiplicities")
    bounds = bounds or EnumerationBounds()
    n = ftype.n
    lams = target.lambdas
    ns = [nj for _, nj in target.pairs]
    ones = [i for i, lam in enumerate(lams) if _close(lam, 1.0, tol.spec_tol)]
    if not ones:
        return Enumeration([], True)
    cand = [1.0] + [lam for lam in lams if lam < 1.0 and not _close(lam, 1.0, tol.spec_tol)]
    cand.sort(reverse=True)

    def lookup(r):
        i = bisect.bisect_left(lams, r)
        for j in (i - 1, i):
            if 0 <= j < len(lams) and _close(lams[j], r, tol.spec_tol):
                return j
        return -1

    table = [[lookup(a / b) for b in cand] for a in cand]
    k_cap = min(len(cand), n)
    max_k = k_cap if bounds.max_k is None else min(bounds.max_k, k_cap)
    complete = max_k >= k_cap
    found = []
    visited = 0

    def fits(idx):
        hit = [[table[a][b] for b in idx] for a in idx]
        if len({j for row in hit for j in row}) != len(lams):
            return
        k = len(idx)
        for comp in _compositions(n, k):
            acc = [Fraction(0)] * len(lams)
            for a in range(k):
                for b in range(k):
                    acc[hit[a][b]] += Fraction(comp[a] * comp[b], n * n)
            if all(_m_equal(acc[j], ns[j], tol.eq_tol) for j in range(len(lams))):
                d = SpectralData(tuple((cand[a], Fraction(comp[i], n))
                                       for i, a in enumerate(idx)), ftype)
                found.append(_canonical(d))

    # depth-first over index sets containing 0 (mu = 1); a branch is cut as
    # soon as one pairwise ratio is not a target eigenvalue
    stack = [(0,)]
    while stack:
        idx = stack.pop()
        visited += 1
        if visited > bounds.max_candidates:
            complete = False
            break
        fits(idx)
        if len(idx) == max_k:
            continue
        for c in range(len(cand) - 1, idx[-1], -1):
            if all(table[c][a] >= 0 and table[a][c] >= 0 for a in idx):
                stack.append(idx + (c,))
    unique = []
    for d in sorted(found, key=_class_key):
        if not any(data_equivalent(d, e, tol) for e in unique):
            unique.append(d)
    return Enumeration(unique, complete)


class Variant(NamedTuple):
    data: SpectralData
    equivalent: bool
    compatible: bool


def derive_variants(d: SpectralData, permutation: Optional[Sequence[int]] = None,
                    epsilon: Optional[tuple] = None,
                    tol: Tolerances = DEFAULT_TOL) -> Variant:
    """New type II_1 classes with the same modular spectrum.

    ``permutation`` reassigns multiplicities ``m'_k = m_{sigma(k)}``;
    ``epsilon = (k, l, eps)`` moves ``eps`` of multiplicity from ``l`` to ``k``.
    The result is renormalized. Compatibility with the original modular
    spectrum always holds in type II_1 (ratios are unchanged, every
    multiplicity is infinite), while equivalence generally fails.
    """
    if d.ftype.finite_type_i:
        raise InvalidInput("variants are defined for type II_1 data")
    require_valid(d, tol)
    if (permutation is None) == (epsilon is None):
        raise InvalidInput("give exactly one of permutation or epsilon")
    ms = list(d.ms)
    if permutation is not None:
        perm = list(permutation)
        if sorted(perm) != list(range(len(ms))):
            raise InvalidInput(f"{perm} is not a permutation of 0..{len(ms) - 1}")
        new_ms = [ms[perm[k]] for k in range(len(ms))]
    else:
        k, l, eps = epsilon
        if k == l or not (0 <= k < len(ms) and 0 <= l < len(ms)):
            raise InvalidInput(f"bad index pair ({k}, {l})")
        if not (0 <= eps < ms[l]) or ms[k] + eps > 1:
            raise InvalidInput(f"shift {eps} leaves the admissible range")
        new_ms = list(ms)
        new_ms[k] = ms[k] + eps
        new_ms[l] = ms[l] - eps
    nd, _ = normalize_data(SpectralData(tuple(zip(d.mus, new_ms)), d.ftype))
    require_valid(nd, tol)
    return Variant(nd, data_equivalent(d, nd, tol),
                   compatible_with(nd, induced_delta_spectrum(d, tol), tol))
