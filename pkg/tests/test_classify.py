import pytest

from ainfring.ainfty import (AInfinityStructure, apply_strict_iso, formal_structure, identity_iso,
                             random_strict_iso, rescale)
from ainfring.bigraded import symmetric_window
from ainfring.cech import perturbed_contraction, standard_contraction
from ainfring.classify import (Certificate, DistinctClasses, PrefixMismatch, canonical_m3, cochain_class,
                               massey_koszul_check, obstruction_cocycle, strictify, triviality_test,
                               verify_certificate)
from ainfring.hochschild import structure_difference
from ainfring.transfer import transfer


def class_of(m):
    return cochain_class(structure_difference(m, formal_structure(m.algebra, m.window), 3)).class_vector


def test_canonical_obstruction_is_the_generator(canonical):
    _, m, _ = canonical
    obs = obstruction_cocycle(formal_structure(m.algebra, m.window), m, 3)
    assert not obs.is_coboundary
    assert obs.class_vector == [1]


def test_prefix_mismatch_reports_arity(canonical):
    _, m, _ = canonical
    other = AInfinityStructure(m.algebra, m.window, {n: {t: dict(v) for t, v in c.items()}
                                                     for n, c in m.ops.items()})
    t = next(iter(sorted(other.ops[3])))
    other.ops[3][t] = {o: 2 * c for o, c in other.ops[3][t].items()}
    with pytest.raises(PrefixMismatch) as ei:
        obstruction_cocycle(m, other, 4)
    assert ei.value.arity == 3


@pytest.mark.parametrize("lam", [2, -1, 3])
def test_class_scales_with_rescaling(canonical, lam):
    _, m, _ = canonical
    assert class_of(rescale(m, lam)) == [lam]


def test_class_invariant_under_strict_isos(canonical):
    _, m, _ = canonical
    g = random_strict_iso(m.algebra, m.window, 4, 12)
    assert class_of(apply_strict_iso(g, m)) == class_of(m) == [1]


def test_strictify_is_idempotent_on_equal_structures(canonical):
    _, m, _ = canonical
    cert = strictify(m, m)
    assert isinstance(cert, Certificate)
    assert cert.lam == 1 and cert.iso.same(identity_iso(), 4) and cert.steps == []


def test_strictify_recovers_negative_scale(canonical):
    _, m, _ = canonical
    cert = strictify(m, rescale(m, -1))
    assert cert.lam == -1
    assert verify_certificate(cert, m, rescale(m, -1))


def test_rescaling_forbidden_gives_distinct_classes(canonical):
    _, m, _ = canonical
    res = strictify(m, rescale(m, 2), allow_rescaling=False)
    assert isinstance(res, DistinctClasses)


def test_trivial_vs_formal_is_trivial(w4):
    from ainfring.cech import line_bundle_algebra
    f = formal_structure(line_bundle_algebra(1, w4), w4)
    assert not triviality_test(f, stabilize=False).nontrivial


def test_canonical_m3_generator_matches_transfer(canonical, w4):
    _, m, _ = canonical
    g = canonical_m3(m.algebra, w4)
    assert structure_difference(m, formal_structure(m.algebra, w4), 3) == g


@pytest.mark.parametrize("k", [1, 2])
def test_massey_product_equals_oracle(k):
    w = symmetric_window(4, 3)
    con = standard_contraction(k, w)
    m, _ = transfer(con, w, 3)
    res = massey_koszul_check(con, m)
    assert res.value == res.oracle
    assert abs(res.value) == 1


def test_massey_product_with_perturbed_contraction():
    w = symmetric_window(4, 3)
    con = perturbed_contraction(1, w, 5)
    m, _ = transfer(con, w, 3)
    res = massey_koszul_check(con, m)
    assert res.ok
