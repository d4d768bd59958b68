import pytest

from ainfring.ainfty import formal_structure, stasheff_check
from ainfring.cech import perturbed_contraction
from ainfring.transfer import (TransferEngine, classical_m3, enumerate_trees, is_binary, strict_unitality_violations,
                               tree_leaves, transfer)


def schroeder(n):
    """Number of planar trees with n leaves and all internal vertices of valence >= 3 (recursive count)."""
    if n == 1:
        return 1
    total = 0

    def splits(k, parts):
        if k == 0:
            yield ()
            return
        for first in range(1, k + 1):
            for rest in splits(k - first, parts):
                yield (first,) + rest

    for comp in splits(n, None):
        if len(comp) < 2:
            continue
        prod = 1
        for c in comp:
            prod *= schroeder(c)
        total += prod
    return total


@pytest.mark.parametrize("n,count", [(1, 1), (2, 1), (3, 3), (4, 11), (5, 45)])
def test_tree_counts(n, count):
    trees = enumerate_trees(n)
    assert len(trees) == count == schroeder(n)
    assert all(tree_leaves(t) == n for t in trees)
    assert sum(is_binary(t) for t in trees) == [1, 1, 2, 5, 14][n - 1]


def test_m2_is_cup_product(canonical):
    con, m, _ = canonical
    form = formal_structure(m.algebra, m.window)
    assert m.m(2) == form.m(2)


def test_m3_matches_classical_formula(canonical):
    con, m, _ = canonical
    alg = m.algebra
    m3 = m.m(3)
    checked = 0
    for t in m3:
        assert m3[t] == classical_m3(con, *t)
        checked += 1
    # and no classical value is missing from the table
    w = m.window
    for a in range(len(alg.basis)):
        for b in range(len(alg.basis)):
            for c in range(len(alg.basis)):
                if alg.unit in (a, b, c) or not w.admissible([alg.p[a], alg.p[b], alg.p[c]]):
                    continue
                if classical_m3(con, a, b, c):
                    assert (a, b, c) in m3
    assert checked > 0


def test_tree_sum_equals_recursion(canonical, w4):
    con, m, _ = canonical
    eng = TransferEngine(con, w4)
    for n in (3, 4):
        for t, vec in m.op(n).items():
            assert eng.tree_sum(t) == vec


def test_transfer_is_strictly_unital(canonical, w4):
    con, _, _ = canonical
    assert strict_unitality_violations(TransferEngine(con, w4), 4) == []


def test_bidegrees(canonical):
    _, m, _ = canonical
    alg = m.algebra
    for n in (2, 3, 4):
        for t, vec in m.op(n).items():
            for o in vec:
                assert alg.q[o] == sum(alg.q[i] for i in t) + 2 - n
                assert alg.p[o] == sum(alg.p[i] for i in t)


def test_perturbed_transfer_satisfies_stasheff(w4):
    m, _ = transfer(perturbed_contraction(1, w4, 11), w4, 4)
    assert stasheff_check(m, 4).ok


def test_transfer_is_deterministic(w4):
    from ainfring.cech import standard_contraction
    a, _ = transfer(standard_contraction(1, w4), w4, 4)
    b, _ = transfer(standard_contraction(1, w4), w4, 4)
    assert a.ops == b.ops
