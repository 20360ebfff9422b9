import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from modinv.errors import InvalidInput
from modinv.standard_form import make_model, matrix_unit
from modinv.vector_correspondence import (
    classify_vector,
    is_cyclic_separating,
    operator_of_vector,
    trace_of_positive,
    vector_of_operator,
)

from conftest import random_matrix


def test_operator_of_vector_examples(m2, u_diag, rng):
    np.testing.assert_array_equal(operator_of_vector(m2, m2.trace_vector), np.eye(2))
    np.testing.assert_array_equal(operator_of_vector(m2, u_diag), u_diag)
    u = random_matrix(2, rng)
    t = operator_of_vector(m2, u)
    np.testing.assert_array_equal(vector_of_operator(m2, t).u, u)


def test_vector_of_operator_examples(m2, rng):
    ov = vector_of_operator(m2, np.eye(2))
    np.testing.assert_array_equal(ov.u, np.eye(2))
    assert ov.hs_norm2 == pytest.approx(1)
    ov = vector_of_operator(m2, matrix_unit(2, 0, 0))
    assert ov.hs_norm2 == pytest.approx(0.5)
    t = random_matrix(2, rng)
    ov = vector_of_operator(m2, t)
    assert ov.hs_norm2 == pytest.approx(m2.norm(ov.u) ** 2, rel=1e-12)


def test_classify_examples(m2, u_diag):
    rep = classify_vector(m2, m2.trace_vector)
    assert rep.cyclic and rep.separating and rep.sigma_min == pytest.approx(1)
    rep = classify_vector(m2, matrix_unit(2, 0, 0))
    assert not rep.cyclic and not rep.separating and rep.cyclic_dims == (2, 2)
    rep = classify_vector(m2, u_diag)
    assert rep.cyclic and rep.separating and rep.oracle_agrees
    assert not rep.borderline


def test_borderline_flag(m2):
    rep = classify_vector(m2, np.diag([1.0, 4e-9]))
    assert rep.borderline


def test_trace_of_positive_examples(m2):
    assert trace_of_positive(m2, np.eye(2)) == pytest.approx(1)
    assert trace_of_positive(m2, matrix_unit(2, 0, 0)) == pytest.approx(0.5)
    assert trace_of_positive(m2, np.diag([1.5, 0.5])) == pytest.approx(1)
    with pytest.raises(InvalidInput):
        trace_of_positive(m2, np.diag([1.0, -1.0]))
    with pytest.raises(InvalidInput):
        trace_of_positive(m2, np.array([[0, 1], [0, 0]]))


def _crafted_singular(n, rng, kind):
    if kind == 0:
        return np.zeros((n, n), complex)
    r = 1 + kind % (n - 1) if n > 1 else 0
    return random_matrix(n, rng)[:, :r] @ random_matrix(n, rng)[:r, :]


@pytest.mark.parametrize("case", range(20))
def test_crafted_singular_vectors_agree_with_span_oracle(case):
    rng = np.random.default_rng(case)
    n = 2 + case % 4
    m = make_model(n)
    rep = classify_vector(m, _crafted_singular(n, rng, case % 5))
    assert not rep.cyclic and rep.oracle_agrees


@settings(max_examples=50)
@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_separating_vector_kills_only_zero(n, seed):
    # A u = 0 with u invertible forces A = 0: the solution of A u = b is unique
    rng = np.random.default_rng(seed)
    m = make_model(n)
    u = random_matrix(n, rng)
    if not is_cyclic_separating(m, u):
        return
    a = random_matrix(n, rng)
    b = a @ u
    recovered = np.linalg.solve(u.T, b.T).T
    sigma = np.linalg.svd(u, compute_uv=False)[-1]
    assert np.linalg.norm(recovered - a) <= 1e-9 * np.linalg.norm(b) / sigma * n
    # annihilator of u in M0 is trivial: the left-multiplication map is injective
    from modinv.standard_form import right_superop
    assert np.linalg.matrix_rank(right_superop(u)) == n * n


@settings(max_examples=40)
@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_operator_of_vector_injective(n, seed):
    rng = np.random.default_rng(seed)
    m = make_model(n)
    u, w = random_matrix(n, rng), random_matrix(n, rng)
    assert not np.array_equal(operator_of_vector(m, u), operator_of_vector(m, w))
    np.testing.assert_array_equal(operator_of_vector(m, u) @ m.trace_vector, u)
