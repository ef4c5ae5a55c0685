import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rstokes.fem import assemble, l2_project, InitialDatum
from rstokes.linalg import SolverError, SparseSymMatrix, SpdFactorization, matvec, solve_spd
from rstokes.mesh import build_interval_mesh


def _random_sym(n, rng, density=0.4):
    A = rng.standard_normal((n, n))
    A[rng.random((n, n)) > density] = 0.0
    A = 0.5 * (A + A.T)
    return A


def test_matvec_identity(rng):
    A = SparseSymMatrix.identity(7)
    x = rng.standard_normal(7)
    assert np.array_equal(matvec(A, x), x)


def test_matvec_single_interior_stiffness():
    # K=2 interval: one interior node, stiffness [[2/h]] with h = 1/2
    space = assemble(build_interval_mesh(2))
    assert space.S.toarray().tolist() == [[4.0]]
    assert matvec(space.S, np.array([1.0])).tolist() == [4.0]


def test_matvec_against_dense_oracle(rng):
    for n in (5, 17, 50):
        D = _random_sym(n, rng)
        A = SparseSymMatrix.from_coo(n, *np.nonzero(D), D[np.nonzero(D)])
        x = rng.standard_normal(n)
        assert np.max(np.abs(matvec(A, x) - D @ x)) < 1e-13


def test_matvec_dimension_mismatch(rng):
    A = SparseSymMatrix.identity(4)
    with pytest.raises(ValueError):
        matvec(A, rng.standard_normal(5))


def test_symmetry_flag_validated():
    with pytest.raises(ValueError):
        SparseSymMatrix.from_coo(2, [0, 1], [1, 0], [1.0, 2.0])


def test_nonfinite_rejected():
    with pytest.raises(ValueError):
        SparseSymMatrix.from_coo(2, [0, 1], [0, 1], [1.0, np.inf])


def test_solve_identity(rng):
    b = rng.standard_normal(10)
    assert np.allclose(solve_spd(SparseSymMatrix.identity(10), b), b)


def test_solve_zero_rhs():
    space = assemble(build_interval_mesh(16))
    x = solve_spd(space.S, np.zeros(space.n_dof))
    assert np.array_equal(x, np.zeros(space.n_dof))


def test_solve_against_dense_cholesky():
    # K=4 interior stiffness, rhs = M * interpolant of sin(pi x)
    space = assemble(build_interval_mesh(4))
    nodes = space.mesh.nodes[space.interior_nodes]
    b = matvec(space.M, np.sin(np.pi * nodes))
    x = solve_spd(space.S, b)
    expect = np.linalg.solve(space.S.toarray(), b)
    assert np.max(np.abs(x - expect)) < 1e-10


def test_solve_large_uses_cg_path():
    space = assemble(build_interval_mesh(128))   # 127 unknowns, above dense fallback
    rng = np.random.default_rng(3)
    b = rng.standard_normal(space.n_dof)
    x = solve_spd(space.S, b, tol=1e-13)
    res = np.linalg.norm(matvec(space.S, x) - b) / np.linalg.norm(b)
    assert res < 1e-12


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=2, max_value=40), st.integers(0, 2**31 - 1))
def test_solve_roundtrip_random_spd(n, seed):
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((n, n))
    D = B @ B.T + n * np.eye(n)
    A = SparseSymMatrix.from_coo(n, *np.nonzero(D), D[np.nonzero(D)])
    b = rng.standard_normal(n)
    x = solve_spd(A, b, tol=1e-12)
    assert np.linalg.norm(matvec(A, x) - b) <= 1e-10 * np.linalg.norm(b)


def test_solver_failure_reports_residual():
    # singular consistent-looking system: path-graph Laplacian with rhs
    # carrying a nullspace component never converges
    n = 80
    main = 2.0 * np.ones(n)
    main[0] = main[-1] = 1.0
    rows = list(range(n)) + list(range(n - 1)) + list(range(1, n))
    cols = list(range(n)) + list(range(1, n)) + list(range(n - 1))
    vals = list(main) + [-1.0] * (2 * (n - 1))
    A = SparseSymMatrix.from_coo(n, rows, cols, vals)
    b = np.zeros(n)
    b[0] = 1.0
    with pytest.raises(SolverError) as err:
        solve_spd(A, b, tol=1e-13)
    assert err.value.residual > 0.0


def test_factorization_matches_iterative():
    space = assemble(build_interval_mesh(64))
    rng = np.random.default_rng(5)
    b = rng.standard_normal(space.n_dof)
    direct = SpdFactorization(space.M).solve(b)
    iterative = solve_spd(space.M, b, tol=1e-14)
    assert np.max(np.abs(direct - iterative)) < 1e-10
