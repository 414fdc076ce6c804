from fractions import Fraction

import numpy as np
import pytest

from forestchain import (
    InfeasibleRootSetError,
    PeriodicChainError,
    ReducibleChainError,
    WeightedDigraph,
    cesaro_average,
    complete_prism,
    exact_det,
    fundamental_matrix,
    green_matrix_solve,
    hitting_solve,
    irreducibility_certificate,
    kemeny_trace,
    laplacian,
    laplacian_cofactor,
    mfpt_solve,
    minor_product_check,
    period,
    prism_tree_count,
    recurrent_classes,
    sigma1_series,
    stationary_solve,
    temperley_check,
    undirected_tree_count,
    uniform_chain,
)

from conftest import chain

F = Fraction


def _triangle_laplacian():
    return ((F(2), F(-1), F(-1)),
            (F(-1), F(2), F(-1)),
            (F(-1), F(-1), F(2)))


def test_exact_det_examples(fixture_a):
    lap = laplacian(fixture_a)
    minor = tuple(tuple(lap[i][j] for j in (1, 2)) for i in (1, 2))
    assert exact_det(minor) == 1  # equals the tree sum at state 0
    eye5 = tuple(tuple(F(int(i == j)) for j in range(5)) for i in range(5))
    assert exact_det(eye5) == 1
    assert exact_det(((F(1), F(2)), (F(2), F(4)))) == 0
    assert exact_det(()) == 1


def test_exact_det_needs_pivoting():
    m = ((F(0), F(1)), (F(1), F(0)))
    assert exact_det(m) == -1


def test_stationary_solve(fixture_a, d2):
    assert stationary_solve(fixture_a) == (F(3, 7), F(3, 14), F(5, 14))
    assert stationary_solve(d2) == (F(1, 2), F(1, 2))
    assert stationary_solve(uniform_chain(4)) == (F(1, 4),) * 4


def test_stationary_solve_rejects_reducible(r3):
    with pytest.raises(ReducibleChainError):
        stationary_solve(r3)


def test_mfpt_solve_fixture(fixture_a, d2):
    m = mfpt_solve(fixture_a)
    assert m[0][1] == 3
    assert m[0][2] == F(9, 5)
    assert m[1][0] == F(5, 3)
    assert m[1][2] == F(8, 5)
    assert m[2][0] == 1
    assert m[2][1] == 4  # from 2 the walk must pass 0 first: 1 + m01
    assert m[0][0] == F(7, 3)  # 1/pi_0
    d = mfpt_solve(d2)
    assert d[0][1] == d[1][0] == 1
    for n in range(2, 5):
        u = mfpt_solve(uniform_chain(n))
        assert all(u[i][j] == n for i in range(n) for j in range(n))


def test_fundamental_and_kemeny_trace(fixture_a, d2):
    assert kemeny_trace(fixture_a) == F(16, 7)
    assert kemeny_trace(d2) == F(3, 2)
    z = fundamental_matrix(d2)
    assert z[0][0] + z[1][1] == F(3, 2)
    for n in range(2, 7):
        assert kemeny_trace(uniform_chain(n)) == n


def test_green_matrix_solve(fixture_a, d2):
    assert green_matrix_solve(fixture_a, {0}) == ((F(1), F(2, 3)),
                                                  (F(0), F(1)))
    assert green_matrix_solve(d2, {0}) == ((F(1),),)
    u6 = uniform_chain(6)
    g = green_matrix_solve(u6, {0, 1})
    for a in range(4):
        for b in range(4):
            assert g[a][b] == (F(3, 2) if a == b else F(1, 2))


def test_green_matrix_solve_infeasible(r3):
    with pytest.raises(InfeasibleRootSetError):
        green_matrix_solve(r3, {1})


def test_hitting_solve(fixture_a, r3):
    assert hitting_solve(r3, {1, 2})[0] == (F(1, 2), F(1, 2))
    assert hitting_solve(fixture_a, {1, 2})[0] == (F(1, 2), F(1, 2))
    rows = hitting_solve(fixture_a, {0})
    assert rows == ((F(1),), (F(1),))


def test_cesaro_average(fixture_a, d2, r3):
    avg = cesaro_average(d2, 2)
    assert np.allclose(avg, 0.5)
    avg3 = cesaro_average(r3, 10_000)
    assert abs(avg3[0][1] - 0.5) < 1e-3
    pi = (3 / 7, 3 / 14, 5 / 14)
    avg_a = cesaro_average(fixture_a, 10_000)
    assert np.max(np.abs(avg_a - np.array([pi] * 3))) < 1e-3


def test_sigma1_series(fixture_a, d2):
    approx = sigma1_series(fixture_a, 500)
    assert abs(approx - 7 / 3) / (7 / 3) < 1e-6
    for n in range(2, 5):
        assert abs(sigma1_series(uniform_chain(n), 500) - 1) < 1e-6
    with pytest.raises(PeriodicChainError):
        sigma1_series(d2, 100)


def test_sigma1_series_rejects_reducible(r3):
    with pytest.raises(ReducibleChainError):
        sigma1_series(r3, 100)


def test_period(fixture_a, d2):
    assert period(d2) == 2
    assert period(fixture_a) == 1
    assert period(uniform_chain(3)) == 1
    ring4 = chain([[0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0]])
    assert period(ring4) == 4


def test_irreducibility_certificate(fixture_a, r3):
    assert irreducibility_certificate(fixture_a) is None
    cert = irreducibility_certificate(r3)
    assert cert is not None
    i, j = cert
    assert (i, j) in {(1, 0), (1, 2), (2, 0), (2, 1)}


def test_recurrent_classes(fixture_a, r3):
    rc = recurrent_classes(r3)
    assert rc.classes == ((1,), (2,))
    assert rc.transient == (0,)
    assert rc.class_of(1) == 0 and rc.class_of(0) is None
    whole = recurrent_classes(fixture_a)
    assert whole.classes == ((0, 1, 2),)
    assert whole.transient == ()


# ---------------------------------------------------------------------------
# undirected counting identities

def test_undirected_tree_count_examples():
    triangle = WeightedDigraph(3, tuple(
        (i, j, F(1)) for i in range(3) for j in range(3) if i != j))
    assert undirected_tree_count(triangle) == 3
    k4 = WeightedDigraph(4, tuple(
        (i, j, F(1)) for i in range(4) for j in range(4) if i != j))
    assert undirected_tree_count(k4) == 16
    path2 = WeightedDigraph(2, ((0, 1, F(1)), (1, 0, F(1))))
    assert undirected_tree_count(path2) == 1


def test_undirected_tree_count_rejects_asymmetric():
    g = WeightedDigraph(2, ((0, 1, F(2)), (1, 0, F(1))))
    with pytest.raises(ValueError):
        undirected_tree_count(g)


def test_cofactor_choice_independence():
    lap = _triangle_laplacian()
    values = {laplacian_cofactor(lap, i, j)
              for i in range(3) for j in range(3)}
    assert values == {F(3)}


def test_temperley_check():
    lhs, rhs = temperley_check(_triangle_laplacian())
    assert lhs == rhs == 3
    path = ((F(1), F(-1)), (F(-1), F(1)))
    assert temperley_check(path) == (1, 1)
    k4 = tuple(tuple(F(3) if i == j else F(-1) for j in range(4))
               for i in range(4))
    assert temperley_check(k4) == (16, 16)


def test_temperley_check_rejects_non_laplacian():
    with pytest.raises(ValueError):
        temperley_check(((F(1), F(0)), (F(0), F(1))))


def test_minor_product_check():
    lhs, rhs = minor_product_check(_triangle_laplacian())
    assert lhs == rhs == 3
    disconnected = ((F(1), F(-1), F(0), F(0)),
                    (F(-1), F(1), F(0), F(0)),
                    (F(0), F(0), F(1), F(-1)),
                    (F(0), F(0), F(-1), F(1)))
    lhs, rhs = minor_product_check(disconnected)
    assert lhs == rhs == 0


def test_prism_tree_count():
    assert prism_tree_count(2, 3) == 75
    for n, m in ((2, 3), (2, 4), (2, 5), (2, 6), (3, 3), (3, 4), (4, 3)):
        g = complete_prism(n, m)
        assert prism_tree_count(n, m) == undirected_tree_count(g)
    with pytest.raises(ValueError):
        complete_prism(1, 3)
    with pytest.raises(ValueError):
        complete_prism(2, 2)
