import itertools

from ainfring.bigraded import (TruncationWindow, admissible_tuples, suspension_sign, symmetric_window,
                               tensor_expand)
from ainfring.cech import line_bundle_algebra


def test_window_admissibility_uses_contiguous_sums():
    w = TruncationWindow(-2, 2)
    assert w.admissible([2, -2, 2])
    assert not w.admissible([2, 1])
    assert not w.admissible([-1, -1, -1])


def test_window_family_closed_under_subwords_and_merging():
    w = TruncationWindow(-3, 2)
    for ps in itertools.product(range(-3, 3), repeat=3):
        if not w.admissible(ps):
            continue
        assert w.admissible(ps[:2]) and w.admissible(ps[1:])
        assert w.admissible((ps[0] + ps[1], ps[2]))


def test_suspension_sign_formula():
    for qs in itertools.product(range(2), repeat=4):
        expected = (-1) ** sum((4 - i) * q for i, q in enumerate(qs, start=1))
        assert suspension_sign(qs) == expected


def test_tensor_expand_multiplies_coefficients():
    out = dict(tensor_expand([{0: 2, 1: 1}, {5: -1}]))
    assert out == {(0, 5): -2, (1, 5): -1}


def test_admissible_tuples_respect_window():
    w = symmetric_window(2, 3)
    alg = line_bundle_algebra(1, w)
    for tup in admissible_tuples(alg, 3, w, reduced=True):
        assert alg.unit not in tup
        assert w.admissible([alg.p[i] for i in tup])


def test_line_bundle_algebra_is_associative():
    alg = line_bundle_algebra(2, symmetric_window(3))
    assert alg.check_associative() == []
