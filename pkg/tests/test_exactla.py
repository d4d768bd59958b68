import random
from fractions import Fraction

import pytest

from ainfring.exactla import GF, QQ, Echelon, SparseMatrix, rows_rank


def naive_rank(dense):
    """Textbook Gaussian elimination over the rationals."""
    a = [[Fraction(x) for x in row] for row in dense]
    rank, col = 0, 0
    nrows, ncols = len(a), len(a[0]) if a else 0
    while rank < nrows and col < ncols:
        piv = next((r for r in range(rank, nrows) if a[r][col] != 0), None)
        if piv is None:
            col += 1
            continue
        a[rank], a[piv] = a[piv], a[rank]
        for r in range(nrows):
            if r != rank and a[r][col] != 0:
                f = a[r][col] / a[rank][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[rank])]
        rank += 1
        col += 1
    return rank


def random_dense(rng, n, m, density=0.4, lo=-3, hi=3):
    return [[rng.randint(lo, hi) if rng.random() < density else 0 for _ in range(m)] for _ in range(n)]


@pytest.mark.parametrize("seed", range(8))
def test_rank_matches_naive_elimination(seed):
    rng = random.Random(seed)
    dense = random_dense(rng, rng.randint(1, 9), rng.randint(1, 9))
    M = SparseMatrix.from_dense(dense)
    assert M.rank() == naive_rank(dense)


@pytest.mark.parametrize("seed", range(5))
def test_modular_rank_bounds_rational_rank(seed):
    rng = random.Random(100 + seed)
    dense = random_dense(rng, 7, 6)
    rows = [{j: v for j, v in enumerate(r) if v} for r in dense]
    assert rows_rank(rows, GF(7)) <= rows_rank(rows, QQ) == naive_rank(dense)


def test_kernel_basis_vectors_are_killed():
    rng = random.Random(3)
    dense = random_dense(rng, 4, 7)
    M = SparseMatrix.from_dense(dense)
    ker = M.kernel_basis()
    assert len(ker) == 7 - M.rank()
    for v in ker:
        assert M.apply(v) == {}


def test_solve_and_inconsistency():
    M = SparseMatrix.from_dense([[1, 2], [2, 4]])
    assert M.solve({0: 1, 1: 2}) is not None
    assert M.solve({0: 1, 1: 3}) is None


def test_echelon_tracks_consistency():
    ech = Echelon(QQ, track_rhs=True)
    ech.add_row({0: 1, 1: 1}, 2)
    ech.add_row({0: 1, 1: -1}, 0)
    assert ech.consistent
    sol = ech.solution()
    assert sol == {0: 1, 1: 1}
    ech.add_row({0: 2}, 5)
    assert not ech.consistent


def test_prime_field_inverse():
    F = GF(13)
    for x in range(1, 13):
        assert (x * F.inv(x)) % 13 == 1
