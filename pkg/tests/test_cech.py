import random

import pytest

from ainfring.bigraded import symmetric_window
from ainfring.cech import (CH0, CH1, CechDGA, associativity_violations, cohomology_dims, contraction_violations,
                           leibniz_violations, line_bundle_algebra, perturbed_contraction,
                           standard_contraction, verify_dga)


def riemann_roch(k, p):
    """h^0 and h^1 of O(kp) on P^1."""
    d = k * p
    return (d + 1 if d >= 0 else 0, -d - 1 if d <= -2 else 0)


@pytest.mark.parametrize("k", [1, 2])
def test_cohomology_dims_match_riemann_roch(k):
    w = symmetric_window(5, 2, 10 * k)
    dims = cohomology_dims(k, w)
    assert dims == {p: riemann_roch(k, p) for p in range(-5, 6)}


def test_algebra_dimensions_match_cohomology():
    w = symmetric_window(3)
    alg = line_bundle_algebra(1, w)
    for p in range(-3, 4):
        h0, h1 = riemann_roch(1, p)
        assert len(alg.output_block(0, p)) == h0
        assert len(alg.output_block(1, p)) == h1


def test_d_squared_leibniz_associativity_small():
    w = symmetric_window(3, 4, 6)
    assert leibniz_violations(1, w)[1] == 0
    assert associativity_violations(1, w)[1] == 0
    assert verify_dga(1, w).ok


def test_leibniz_on_random_cochains():
    w = symmetric_window(3, 4, 6)
    dga = standard_contraction(1, w).dga
    rng = random.Random(5)
    assert isinstance(dga, CechDGA)
    for _ in range(20):
        x = {(0, 1, c, j): rng.randint(-2, 2) for c in (CH0, CH1) for j in range(-1, 3)}
        y = {(0, -2, c, j): rng.randint(-2, 2) for c in (CH0, CH1) for j in range(-3, 2)}
        lhs = dga.d(dga.mul(x, y))
        rhs = dict(dga.mul(dga.d(x), y))
        for key, c in dga.mul(x, dga.d(y)).items():
            rhs[key] = rhs.get(key, 0) + c
        rhs = {k_: v for k_, v in rhs.items() if v}
        assert lhs == rhs


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_perturbed_contraction_satisfies_retract_identities(seed):
    w = symmetric_window(4, 4, 8)
    con = perturbed_contraction(1, w, seed)
    assert not con.is_standard
    assert contraction_violations(con, w) == []


def test_project_include_is_identity():
    w = symmetric_window(4)
    con = standard_contraction(1, w)
    for i in range(len(con.algebra.basis)):
        assert con.project(con.include(i)) == {i: 1}
