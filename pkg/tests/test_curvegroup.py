import pytest

from ainfring.ainfty import (AInfinityStructure, Homotopy, apply_strict_iso, compose, homotopy_extend,
                             identity_iso, random_strict_iso, stasheff_check)
from ainfring.curvegroup import (DegreeLeak, HomotopyInvalid, NotStrictlyUnital, cobar_inverse, cobar_mul,
                                 compose_restricted, conjugation_check, h1_block, h_epsilon,
                                 homotopy_from_cobar, one_plus, random_cobar, restrict_to_degree_zero,
                                 round_trip, synthetic_curve_algebra, synthetic_structure,
                                 synthetic_window)


@pytest.fixture(scope="module")
def curve2():
    return synthetic_structure(2, 4)


def test_synthetic_algebra_is_associative_and_structure_is_ainfty(curve2):
    assert curve2.algebra.check_associative() == []
    assert stasheff_check(curve2, 4).ok
    assert stasheff_check(synthetic_structure(2, 4, seed=3), 4).ok


def test_cobar_product_is_nested_pairing():
    a, b = {(1,): 2}, {(2, 3): 5}
    assert cobar_mul(a, b, 4) == {(2, 3, 1): 10}
    assert cobar_mul(a, b, 2) == {}


def test_cobar_inverse():
    alg = synthetic_curve_algebra(2)
    c = one_plus(random_cobar(alg, 4, seed=1))
    inv = cobar_inverse(c, 4)
    assert cobar_mul(c, inv, 4) == {(): 1}
    assert cobar_mul(inv, c, 4) == {(): 1}
    with pytest.raises(ValueError):
        cobar_inverse({(): 2}, 3)


def test_restriction_is_a_homomorphism():
    alg = synthetic_curve_algebra(2)
    w = synthetic_window(4)
    V = set(h1_block(alg))

    def v_only(g):
        for n, comp in g.comps.items():
            for t in list(comp):
                if all(i in V for i in t):
                    comp[t] = {o: c for o, c in comp[t].items() if o in V}
        return g

    g1 = v_only(random_strict_iso(alg, w, 4, 1))
    g2 = v_only(random_strict_iso(alg, w, 4, 2))
    lhs = restrict_to_degree_zero(compose(g2, g1, alg, w, 4), alg, 4)
    rhs = compose_restricted(restrict_to_degree_zero(g2, alg, 4), restrict_to_degree_zero(g1, alg, 4))
    assert lhs == rhs


def test_h_epsilon_reads_unit_coefficients():
    alg = synthetic_curve_algebra(1)
    v = random_cobar(alg, 3, seed=2)
    assert h_epsilon(homotopy_from_cobar(v, alg), alg, 3) == v


def test_degree_leak_is_reported():
    alg = synthetic_curve_algebra(1)
    x = alg.index(0, 1, "x")
    h = Homotopy({1: {(x,): {alg.unit: 1}}})
    with pytest.raises(DegreeLeak):
        h_epsilon(h, alg, 2)


def test_not_strictly_unital_is_reported(curve2):
    alg = curve2.algebra
    v = h1_block(alg)[0]
    ops = {n: {t: dict(c) for t, c in comp.items()} for n, comp in curve2.ops.items()}
    ops.setdefault(3, {})[(alg.unit, v, v)] = {v: 1}
    bad = AInfinityStructure(alg, curve2.window, ops)
    with pytest.raises(NotStrictlyUnital):
        conjugation_check(identity_iso(), Homotopy({}), bad)


def test_invalid_homotopy_is_reported(curve2):
    alg = curve2.algebra
    h = homotopy_from_cobar(random_cobar(alg, 2, seed=4), alg)
    g = random_strict_iso(alg, curve2.window, 4, 9)
    with pytest.raises(HomotopyInvalid):
        conjugation_check(g, h, curve2)


@pytest.mark.parametrize("genus,seed", [(1, 0), (2, 0), (2, 1)])
def test_conjugation_identities(genus, seed):
    m = synthetic_structure(genus, 4, seed=seed)
    v = random_cobar(m.algebra, 3, seed)
    h = homotopy_from_cobar(v, m.algebra)
    f = homotopy_extend(identity_iso(), h, m, m, 4)
    assert apply_strict_iso(f, m, 4).same_ops(m, 4)
    rep = conjugation_check(f, h, m)
    assert rep.ok, rep.lines()


@pytest.mark.parametrize("genus", [1, 2])
def test_round_trip_recovers_conjugation(genus):
    m = synthetic_structure(genus, 4)
    f, h, res = round_trip(m, random_cobar(m.algebra, 4, seed=6))
    assert res.agrees
    if genus == 2:
        # with two generators the conjugation action is visible
        assert not restrict_to_degree_zero(f, m.algebra, 4).is_identity()
