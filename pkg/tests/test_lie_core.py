import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from liegeo.catalog import example5, flag_subspaces, milnor_algebra
from liegeo.lie_core import (LieAlgebra, PreconditionError, Subspace, adjoint_matrix, bracket,
                             center, derived_algebra, derived_series, is_nilpotent, is_solvable,
                             is_unimodular, jacobi_residual, lower_central_series, null_space,
                             quotient_by_central_line, rank, span_basis)
from liegeo.metric import InnerProduct, random_inner_product

from helpers import CATALOG, rng_for, seeds

E = np.eye(5)
H1 = CATALOG["heisenberg_3"]


def test_rank_and_null_space():
    m = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [1.0, 0.0, 1.0]])
    assert rank(m) == 2
    k = null_space(m)
    assert k.shape == (3, 1)
    assert np.allclose(m @ k, 0.0)
    assert rank(np.zeros((3, 3))) == 0
    assert span_basis(np.zeros((4, 0))).shape == (4, 0)


def test_rank_is_relative_to_scale():
    m = 1e-12 * np.array([[1.0, 0.0], [0.0, 1.0]])
    assert rank(m) == 2
    assert rank(np.diag([1.0, 1e-12])) == 1


def test_subspace_equality_is_span_equality():
    a = Subspace(np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]))
    b = Subspace(np.array([[1.0, 1.0], [1.0, -1.0], [0.0, 0.0]]))
    assert a == b
    assert a != Subspace(np.eye(3)[:, :2] + np.eye(3)[:, 1:])
    assert a.contains([2.0, -3.0, 0.0]) and not a.contains([0.0, 0.0, 1.0])
    with pytest.raises(ValueError):
        Subspace(np.array([[1.0, 2.0], [2.0, 4.0]]))


def test_antisymmetry_filled_and_conflicts_rejected():
    alg = LieAlgebra.from_brackets(2, {(0, 1): {1: 1.0}})
    assert alg.c[1, 0, 1] == -1.0
    c = np.zeros((2, 2, 2))
    c[0, 1, 1], c[1, 0, 1] = 1.0, 1.0
    with pytest.raises(ValueError, match="inconsistent"):
        LieAlgebra(c)
    c = np.zeros((2, 2, 2))
    c[0, 0, 1] = 1.0
    with pytest.raises(ValueError):
        LieAlgebra(c)
    with pytest.raises(ValueError):
        LieAlgebra(np.zeros((2, 2, 3)))


def test_structure_constants_are_read_only():
    with pytest.raises(ValueError):
        H1.c[0, 1, 2] = 5.0


def test_bracket_examples():
    alg = example5()
    assert np.array_equal(bracket(alg, E[0], E[1]), 3.0 * E[1])
    assert np.array_equal(bracket(alg, E[2], E[2]), np.zeros(5))
    e = np.eye(3)
    assert np.array_equal(bracket(H1, e[0], e[1]), e[2])
    with pytest.raises(ValueError):
        bracket(alg, E[0], np.ones(3))


def test_jacobi_residual_examples():
    assert jacobi_residual(example5()) == 0.0
    assert jacobi_residual(LieAlgebra.abelian(4)) == 0.0


def test_jacobi_residual_perturbations():
    # [X_2,X_3] = 2X_4 instead of X_4 is again a Lie algebra (rescale X_4, X_5)
    br = example5().brackets()
    br[(1, 2)] = {3: 2.0}
    assert jacobi_residual(LieAlgebra.from_brackets(5, br)) == 0.0
    # [X_1,X_4] = -2X_4 breaks the triple (1, 2, 3): -2 + 4 - 3 = -1
    br = example5().brackets()
    br[(0, 3)] = {3: -2.0}
    assert jacobi_residual(LieAlgebra.from_brackets(5, br)) == pytest.approx(1.0)


def test_adjoint_matrix_of_example5():
    a = np.array([0.3, -1.1, 0.7, 2.0, -0.4])
    a1, a2, a3, a4, a5 = a
    want = np.array([
        [0, 0, 0, 0, 0],
        [-3 * a2, 3 * a1, 0, 0, 0],
        [4 * a3, 0, -4 * a1, 0, 0],
        [a4, -a3, a2, -a1, 0],
        [-2 * a5, -a4, 0, a2, 2 * a1],
    ])
    assert np.allclose(adjoint_matrix(example5(), a), want, atol=1e-15)
    assert np.array_equal(adjoint_matrix(example5(), E[0]), np.diag([0, 3.0, -4.0, -1.0, 2.0]))
    assert not np.any(adjoint_matrix(example5(), np.zeros(5)))


def test_adjoint_columns_are_brackets():
    y = np.array([1.0, 2.0, -1.0, 0.5, 3.0])
    ad = adjoint_matrix(example5(), y)
    for j in range(5):
        assert np.array_equal(ad[:, j], bracket(example5(), y, E[j]))


def test_unimodularity():
    assert is_unimodular(example5())
    assert is_unimodular(LieAlgebra.abelian(3))
    assert not is_unimodular(LieAlgebra.from_brackets(2, {(0, 1): {1: 1.0}}))


def test_derived_algebra_and_center():
    assert derived_algebra(example5()) == flag_subspaces()[1]
    assert derived_algebra(LieAlgebra.abelian(3)).dim == 0
    assert derived_algebra(H1) == Subspace(np.eye(3)[:, 2])
    assert center(H1) == Subspace(np.eye(3)[:, 2])
    assert center(LieAlgebra.abelian(3)).dim == 3
    assert center(example5()).dim == 0


def test_solvable_nilpotent_examples():
    assert is_solvable(example5()) and not is_nilpotent(example5())
    assert is_solvable(LieAlgebra.abelian(2)) and is_nilpotent(LieAlgebra.abelian(2))
    so3 = milnor_algebra((1, 1, 1))
    assert not is_solvable(so3) and not is_nilpotent(so3)
    assert [s.dim for s in derived_series(so3)] == [3]
    assert [s.dim for s in lower_central_series(CATALOG["filiform_4"])] == [4, 2, 1, 0]


def test_dimension_zero_and_one():
    for n in (0, 1):
        alg = LieAlgebra.abelian(n)
        assert jacobi_residual(alg) == 0.0
        assert is_unimodular(alg) and is_nilpotent(alg) and is_solvable(alg)
        assert center(alg).dim == n


def test_quotient_examples():
    q = quotient_by_central_line(H1, InnerProduct.identity(3), np.eye(3)[2])
    assert q.algebra.n == 2 and not np.any(q.algebra.c)
    assert np.array_equal(q.metric.gram, np.eye(2))
    q = quotient_by_central_line(CATALOG["heisenberg_5"], InnerProduct.identity(5), E[4])
    assert q.algebra.n == 4 and not np.any(q.algebra.c)
    q = quotient_by_central_line(LieAlgebra.abelian(3), InnerProduct.identity(3), np.eye(3)[1])
    assert q.algebra.n == 2 and not np.any(q.algebra.c)


def test_quotient_preconditions():
    with pytest.raises(PreconditionError, match="central"):
        quotient_by_central_line(H1, InnerProduct.identity(3), np.eye(3)[0])
    with pytest.raises(PreconditionError, match="unit"):
        quotient_by_central_line(H1, InnerProduct.identity(3), 2.0 * np.eye(3)[2])


NILPOTENT = ["heisenberg_3", "heisenberg_5", "filiform_4", "free_nilpotent_6"]


@settings(max_examples=40, deadline=None)
@given(seed=seeds, name=st.sampled_from(NILPOTENT))
def test_quotient_is_a_homomorphism(seed, name):
    alg = CATALOG[name]
    rng = rng_for(seed)
    metric = random_inner_product(alg.n, rng)
    z = center(alg).basis[:, -1]
    z = z / metric.norm(z)
    q = quotient_by_central_line(alg, metric, z)
    u, v = rng.standard_normal((2, alg.n))
    lhs = q.projection @ bracket(alg, u, v)
    rhs = bracket(q.algebra, q.projection @ u, q.projection @ v)
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * (1 + np.abs(u).max() * np.abs(v).max())
    # lift o projection is the identity on z-perp
    w = q.lift @ rng.standard_normal(alg.n - 1)
    assert np.max(np.abs(q.lift @ (q.projection @ w) - w)) <= 1e-12 * max(1.0, np.abs(w).max())
    assert np.allclose(q.lift.T @ metric.gram @ q.lift, np.eye(alg.n - 1), atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(seed=seeds, name=st.sampled_from(sorted(CATALOG)))
def test_bracket_antisymmetric_and_adjoint_linear(seed, name):
    alg = CATALOG[name]
    rng = rng_for(seed)
    u, v = rng.standard_normal((2, alg.n))
    assert np.array_equal(bracket(alg, u, v) + bracket(alg, v, u), np.zeros(alg.n))
    assert np.allclose(adjoint_matrix(alg, u + v), adjoint_matrix(alg, u) + adjoint_matrix(alg, v),
                       atol=1e-13, rtol=0)
    assert abs(np.trace(adjoint_matrix(alg, u))) <= 1e-10 * (1 + np.linalg.norm(u))


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_catalog_algebras_are_unimodular_lie_algebras(name):
    alg = CATALOG[name]
    assert jacobi_residual(alg) <= 1e-12
    assert is_unimodular(alg)
    dims = [s.dim for s in derived_series(alg)]
    assert dims == sorted(dims, reverse=True)
    if is_nilpotent(alg):
        assert is_solvable(alg)


def test_in_basis_change_preserves_jacobi():
    rng = np.random.default_rng(5)
    q = np.linalg.qr(rng.standard_normal((5, 5)))[0]
    alg = example5().in_basis(q, lambda v: q.T @ v)
    assert jacobi_residual(alg) <= 1e-12
    assert is_unimodular(alg) and is_solvable(alg) and not is_nilpotent(alg)
    assert derived_algebra(alg).dim == 4
