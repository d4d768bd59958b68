import pytest

from ainfring.ainfty import (apply_strict_iso, check_homotopy, compose, coderivation_square_check,
                             formal_structure, from_m_form, homotopy_extend, identity_iso, invert,
                             morphism_check, random_homotopy, random_strict_iso, rescale,
                             stasheff_check, to_m_form, zero_homotopy)
from ainfring.bigraded import symmetric_window
from ainfring.cech import line_bundle_algebra


@pytest.fixture(scope="module")
def small():
    w = symmetric_window(3, 4)
    alg = line_bundle_algebra(1, w)
    return alg, w, formal_structure(alg, w)


def test_m_form_conversion_is_an_involution(canonical):
    _, m, _ = canonical
    for n in (2, 3, 4):
        bar = m.op(n)
        assert from_m_form(m.algebra, to_m_form(m.algebra, bar)) == bar


def test_formal_structure_satisfies_stasheff(small):
    _, _, m = small
    assert stasheff_check(m, 4).ok
    assert coderivation_square_check(m, 4).ok


def test_stasheff_detects_a_bad_m3(canonical):
    _, m, _ = canonical
    broken = rescale(m, 1)
    t = next(iter(sorted(broken.ops[3])))
    broken.ops[3][t] = {o: 3 * c for o, c in broken.ops[3][t].items()}
    assert not stasheff_check(broken, 4).ok
    assert not coderivation_square_check(broken, 4).ok


def test_rescale_scales_each_arity(canonical):
    _, m, _ = canonical
    r = rescale(m, 3)
    for n in (2, 3, 4):
        for t, vec in m.ops[n].items():
            assert r.ops[n][t] == {o: 3 ** (n - 2) * c for o, c in vec.items()}
    assert stasheff_check(r, 4).ok


@pytest.mark.parametrize("seed", [0, 1])
def test_transport_along_random_iso(canonical, seed):
    _, m, _ = canonical
    g = random_strict_iso(m.algebra, m.window, 4, seed)
    mp = apply_strict_iso(g, m)
    assert stasheff_check(mp, 4).ok
    assert morphism_check(g, m, mp, 4).ok


def test_compose_and_invert(small):
    alg, w, m = small
    g1 = random_strict_iso(alg, w, 4, 1)
    g2 = random_strict_iso(alg, w, 4, 2)
    gi = invert(g1, alg, w)
    assert compose(gi, g1, alg, w).same(identity_iso(), 4)
    assert compose(g1, gi, alg, w).same(identity_iso(), 4)
    # transport is functorial
    lhs = apply_strict_iso(compose(g2, g1, alg, w), m)
    rhs = apply_strict_iso(g2, apply_strict_iso(g1, m))
    assert lhs.same_ops(rhs, 4)


def test_identity_is_a_morphism(canonical):
    _, m, _ = canonical
    rep = morphism_check(identity_iso(), m, m, 4)
    assert rep.ok and rep.cohomology_identity


def test_homotopy_extend_with_zero_is_identity(canonical):
    _, m, _ = canonical
    g = random_strict_iso(m.algebra, m.window, 4, 3)
    mp = apply_strict_iso(g, m)
    assert homotopy_extend(g, zero_homotopy(), m, mp, 4).same(g, 4)


def test_homotopy_extend_random_homotopy_on_formal(small):
    alg, w, m = small
    h = random_homotopy(alg, w, 3, seed=4)
    fp = homotopy_extend(identity_iso(), h, m, m, 4)
    assert check_homotopy(identity_iso(), fp, h, m, m, 4).ok
    assert morphism_check(fp, m, m, 4).ok
