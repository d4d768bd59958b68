"""The curve-case group computation: restriction to the degree-zero cobar part,
the element h(epsilon) and the conjugation formulas.

Conventions.  V denotes the H^1(O)-type block (q = 1, p = 0).  Its bar
suspension sV has bar degree 0, and words in sV are exactly the part of
Bar(A) of bar degree 0 and internal degree 0 built from reduced letters, so
every strict automorphism restricts to a coalgebra automorphism of T(sV).
Dually that is a continuous automorphism of the completed tensor algebra on
V*.  Elements of that algebra (``CobarElement``) are stored as functionals
on words: ``{word: coefficient}`` with words tuples of V indices, the empty
word standing for the constant term.

For a homotopy h from the identity to f, h_n maps V^{(x) n} to k.1; we put
h(eps)(w) = eps(h_n(w)).  With these conventions restrict(f) is
conjugation by 1 + h(eps): zeta -> (1 + h(eps)) zeta (1 + h(eps))^{-1}.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .ainfty import (AInfinityStructure, Homotopy, Morphism, apply_strict_iso, bar_differential_word,
                     check_homotopy, compositions, formal_structure, homotopy_extend, identity_iso,
                     random_strict_iso, tuples_for, _prefix_sums)
from .bigraded import BiDegree, BigradedAlgebra, TruncationWindow, tensor_expand, vadd

Word = Tuple[int, ...]
CobarElement = Dict[Word, object]


class DegreeLeak(Exception):
    pass


class NotStrictlyUnital(Exception):
    pass


class HomotopyInvalid(Exception):
    pass


# ---------------------------------------------------------------------------
# synthetic curve-shaped algebras

def synthetic_curve_algebra(genus: int = 1) -> BigradedAlgebra:
    """A curve-shaped bigraded algebra with an H^1(O)-type block of dimension ``genus``.

    Basis: 1 and x in R (p = 0, 1); v_1..v_g in M_0 (the H^1(O)-type block);
    xi in M_{-1}.  Products: x xi = xi x = v_1, everything else not forced by
    the unit vanishes.  Internal degrees live in [-1, 1].
    """
    if genus < 1:
        raise ValueError("genus must be at least 1")
    basis = [(0, 0, "1"), (0, 1, "x")] + [(1, 0, f"v{i + 1}") for i in range(genus)] + [(1, -1, "xi")]
    one, x, xi = 0, 1, len(basis) - 1
    v1 = 2
    table = {(x, xi): {v1: 1}, (xi, x): {v1: 1}}
    alg = BigradedAlgebra(f"curve(g={genus})", basis, table, one, dimension=1, koszul_r1=[x])
    alg.backend = ("curve", genus)
    return alg


def synthetic_window(max_arity: int = 4) -> TruncationWindow:
    return TruncationWindow(-1, 1, max_arity, 0)


def synthetic_structure(genus: int = 1, max_arity: int = 4, seed: Optional[int] = None
                        ) -> AInfinityStructure:
    """The formal structure on the synthetic algebra, optionally moved by a seeded strict iso."""
    alg = synthetic_curve_algebra(genus)
    w = synthetic_window(max_arity)
    m = formal_structure(alg, w)
    if seed is not None:
        g = random_strict_iso(alg, w, max_arity, seed)
        m = apply_strict_iso(g, m)
        m.label = f"curve(g={genus})[{seed}]"
    return m


def h1_block(alg: BigradedAlgebra) -> List[int]:
    return [i for i in alg.blocks.get(BiDegree(alg.dimension, 0), []) if i != alg.unit]


def words(alg: BigradedAlgebra, max_len: int, min_len: int = 0) -> List[Word]:
    V = h1_block(alg)
    out: List[Word] = []
    for n in range(min_len, max_len + 1):
        out.extend(itertools.product(V, repeat=n))
    return out


# ---------------------------------------------------------------------------
# restricted automorphisms and cobar elements

@dataclass
class RestrictedAutomorphism:
    """Components G_n : V^{(x) n} -> V (n >= 2) of a coalgebra automorphism of T(sV)."""

    generators: List[int]
    max_arity: int
    comps: Dict[int, Dict[Word, Dict[int, object]]] = field(default_factory=dict)

    def value(self, w: Word) -> Dict[int, object]:
        if len(w) == 1:
            return {w[0]: 1}
        return self.comps.get(len(w), {}).get(w, {})

    def dual(self, zeta: int) -> CobarElement:
        """The image of the generator v_zeta^* as a functional on words."""
        out: CobarElement = {}
        for n in range(1, self.max_arity + 1):
            for w in itertools.product(self.generators, repeat=n):
                c = self.value(w).get(zeta, 0)
                if c:
                    out[w] = c
        return out

    def is_identity(self) -> bool:
        return not any(self.comps.values())

    def __eq__(self, other):
        if not isinstance(other, RestrictedAutomorphism):
            return NotImplemented
        return self.generators == other.generators and self.comps == other.comps


def restrict_to_degree_zero(g: Morphism, alg: BigradedAlgebra, max_arity: int) -> RestrictedAutomorphism:
    V = h1_block(alg)
    comps: Dict[int, Dict[Word, Dict[int, object]]] = {}
    for n in range(2, max_arity + 1):
        res = {}
        for w in itertools.product(V, repeat=n):
            val = {o: c for o, c in g.value(w).items() if o in V and c}
            leak = {o for o in g.value(w) if o not in V}
            if leak:
                raise DegreeLeak(f"component {n} sends V-words outside V")
            if val:
                res[w] = val
        comps[n] = res
    return RestrictedAutomorphism(V, max_arity, comps)


def compose_restricted(r2: RestrictedAutomorphism, r1: RestrictedAutomorphism) -> RestrictedAutomorphism:
    N = min(r1.max_arity, r2.max_arity)
    comps = {}
    for n in range(2, N + 1):
        res = {}
        for w in itertools.product(r1.generators, repeat=n):
            acc: Dict[int, object] = {}
            for comp in compositions(n):
                vecs = []
                pos = 0
                for i in comp:
                    v = r1.value(w[pos:pos + i])
                    pos += i
                    if not v:
                        break
                    vecs.append(v)
                else:
                    for key, c in tensor_expand(vecs):
                        vadd(acc, r2.value(key), c)
            if acc:
                res[w] = acc
        comps[n] = res
    return RestrictedAutomorphism(r1.generators, N, comps)


def cobar_mul(a: CobarElement, b: CobarElement, max_len: int) -> CobarElement:
    out: CobarElement = {}
    for w1, x in a.items():
        for w2, y in b.items():
            if len(w1) + len(w2) > max_len:
                continue
            w = w2 + w1
            nv = out.get(w, 0) + x * y
            if nv:
                out[w] = nv
            else:
                out.pop(w, None)
    return out


def one_plus(u: CobarElement) -> CobarElement:
    out = dict(u)
    out[()] = out.get((), 0) + 1
    return {k: v for k, v in out.items() if v}


def cobar_inverse(a: CobarElement, max_len: int) -> CobarElement:
    """Inverse of an element with constant term 1."""
    if a.get((), 0) != 1:
        raise ValueError("only elements with constant term 1 are inverted")
    u = {k: -v for k, v in a.items() if k}
    out: CobarElement = {(): 1}
    power: CobarElement = {(): 1}
    for _ in range(max_len):
        power = cobar_mul(power, u, max_len)
        if not power:
            break
        for k, v in power.items():
            nv = out.get(k, 0) + v
            if nv:
                out[k] = nv
            else:
                out.pop(k, None)
    return out


def conjugate(c: CobarElement, x: CobarElement, max_len: int) -> CobarElement:
    return cobar_mul(cobar_mul(c, x, max_len), cobar_inverse(c, max_len), max_len)


def h_epsilon(h: Homotopy, alg: BigradedAlgebra, max_arity: int) -> CobarElement:
    """h(eps) as a functional on V-words: w -> eps(h_n(w))."""
    V = set(h1_block(alg))
    unit = alg.unit
    for n, comp in h.comps.items():
        for t, vec in comp.items():
            if unit in vec and any(i not in V for i in t):
                raise DegreeLeak(f"eps o h_{n} is nonzero on {t}, which has letters outside V")
    out: CobarElement = {}
    for n in range(1, max_arity + 1):
        for w in itertools.product(sorted(V), repeat=n):
            c = h.value(w).get(unit, 0)
            if c:
                out[w] = c
    return out


def homotopy_from_cobar(v: CobarElement, alg: BigradedAlgebra) -> Homotopy:
    """A homotopy supported on V-words with h(eps) = v (the free choice allowed for h)."""
    comps: Dict[int, Dict[Word, Dict[int, object]]] = {}
    for w, c in v.items():
        if not w:
            continue
        comps.setdefault(len(w), {})[w] = {alg.unit: c}
    return Homotopy(comps, label="h(v)")


def random_cobar(alg: BigradedAlgebra, max_len: int, seed: int, density: float = 0.5) -> CobarElement:
    rng = random.Random(seed)
    out: CobarElement = {}
    for w in words(alg, max_len, 1):
        if rng.random() < density:
            out[w] = rng.choice([-2, -1, 1, 2])
    return out


# ---------------------------------------------------------------------------
# full bar-word identities

def _word_map(morph_value, w: Word) -> Dict[Word, object]:
    """The coalgebra map with components morph_value applied to a word."""
    out: Dict[Word, object] = {}
    for comp in compositions(len(w)):
        vecs = []
        pos = 0
        for i in comp:
            v = morph_value(w[pos:pos + i])
            pos += i
            if not v:
                break
            vecs.append(v)
        else:
            for key, c in tensor_expand(vecs):
                nv = out.get(key, 0) + c
                if nv:
                    out[key] = nv
                else:
                    out.pop(key)
    return out


def _word_homotopy(alg, f_left, h: Homotopy, f_right, w: Word) -> Dict[Word, object]:
    """H(w) = sum [f_left ... | h | f_right ...] with the Koszul sign of h."""
    out: Dict[Word, object] = {}
    pre = _prefix_sums([alg.q[i] - 1 for i in w])
    for comp in compositions(len(w)):
        starts = _prefix_sums(comp)
        for j in range(len(comp)):
            vecs = []
            for idx, size in enumerate(comp):
                block = w[starts[idx]:starts[idx] + size]
                fn = f_left if idx < j else (h.value if idx == j else f_right)
                v = fn(block)
                if not v:
                    break
                vecs.append(v)
            else:
                s = -1 if pre[starts[j]] & 1 else 1
                for key, c in tensor_expand(vecs):
                    nv = out.get(key, 0) + s * c
                    if nv:
                        out[key] = nv
                    else:
                        out.pop(key)
    return out


def _lin(fn, vec: Dict[Word, object]) -> Dict[Word, object]:
    out: Dict[Word, object] = {}
    for w, c in vec.items():
        vadd(out, fn(w), c)
    return out


def full_word_violations(f: Morphism, h: Homotopy, m: AInfinityStructure, max_arity: int,
                         limit: int = 4000) -> Tuple[int, int]:
    """Check w - alpha_f(w) = D H(w) + H D(w) on reduced bar words (f_left = identity)."""
    alg = m.algebra
    ident = identity_iso().value
    D = lambda w: bar_differential_word(m, w)
    Hw = lambda w: _word_homotopy(alg, ident, h, f.value, w)
    checked = bad = 0
    for n in range(1, max_arity + 1):
        for w in tuples_for(alg, m.window, n, 0, n * alg.dimension)[:limit]:
            lhs = {w: 1}
            vadd(lhs, _word_map(f.value, w), -1)
            rhs = _lin(D, Hw(w))
            vadd(rhs, _lin(Hw, D(w)))
            checked += 1
            if lhs != rhs:
                bad += 1
    return checked, bad


# ---------------------------------------------------------------------------
# the checks

@dataclass
class ConjugationReport:
    homotopy_ok: bool
    full_words: Tuple[int, int]
    conjugation_ok: bool
    alpha_eps_ok: bool
    conjugator: CobarElement
    generators: int

    @property
    def ok(self) -> bool:
        return self.homotopy_ok and self.full_words[1] == 0 and self.conjugation_ok and self.alpha_eps_ok

    def lines(self) -> List[str]:
        yn = lambda b: "yes" if b else "no"
        return [f"homotopy relation alpha = id + dh + hd: {yn(self.homotopy_ok)}",
                f"full bar words: {self.full_words[0]} checked, {self.full_words[1]} failures",
                f"restriction = conjugation by 1 + h(eps): {yn(self.conjugation_ok)}",
                f"alpha(eps) formula: {yn(self.alpha_eps_ok)}",
                f"H^1(O)-type generators: {self.generators}",
                f"conjugator terms: {len([w for w in self.conjugator if w])}"]


def _check_unital(m: AInfinityStructure):
    from .ainfty import admissibility_check
    rep = admissibility_check(m)
    if not rep.strictly_unital or not rep.m2_is_product:
        raise NotStrictlyUnital("the structure is not strictly unital with m2 the product")


def conjugation_matches(r: RestrictedAutomorphism, u: CobarElement, max_arity: int) -> bool:
    c = one_plus(u)
    for z in r.generators:
        lhs = r.dual(z)
        rhs = {w: v for w, v in conjugate(c, {(z,): 1}, max_arity).items() if w}
        if lhs != rhs:
            return False
    return True


def alpha_epsilon_ok(f: Morphism, u: CobarElement, m: AInfinityStructure, max_arity: int) -> bool:
    """alpha(eps) = (1+u) eps (1+u)^{-1} + du (1+u)^{-1} on words with one unit letter.

    eps is the functional picking the unit letter and du = -u o D is the dual
    differential of a degree-zero functional.
    """
    alg = m.algebra
    V = h1_block(alg)
    unit = alg.unit
    N = max_arity
    c = one_plus(u)
    cinv = cobar_inverse(c, N + 1)
    eps = {(unit,): 1}
    conj = cobar_mul(cobar_mul(c, eps, N), cinv, N)
    test_words = []
    for n in range(0, N):
        for w in itertools.product(V, repeat=n):
            for pos in range(n + 1):
                test_words.append(w[:pos] + (unit,) + w[pos:])
    du: CobarElement = {}
    for w in test_words:
        val = 0
        for ww, cc in bar_differential_word(m, w).items():
            val -= cc * u.get(ww, 0)
        if val:
            du[w] = val
    rhs = dict(conj)
    for k, v in cobar_mul(du, cinv, N).items():
        rhs[k] = rhs.get(k, 0) + v
    for w in test_words:
        lhs = _word_map(f.value, w)
        a = sum(cc for ww, cc in lhs.items() if ww == (unit,))
        if a != rhs.get(w, 0):
            return False
    return True


def conjugation_check(f: Morphism, h: Homotopy, m: AInfinityStructure,
                      max_arity: Optional[int] = None) -> ConjugationReport:
    """Verify the dual homotopy identities, the conjugation formula and the alpha(eps) formula
    for a homotopy h from the identity to the automorphism f of m."""
    _check_unital(m)
    alg = m.algebra
    N = max_arity or m.max_arity
    ident = identity_iso()
    hom = check_homotopy(ident, f, h, m, m, N)
    if not hom.ok:
        raise HomotopyInvalid("h is not a homotopy from the identity to f")
    full = full_word_violations(f, h, m, N)
    u = h_epsilon(h, alg, N)
    r = restrict_to_degree_zero(f, alg, N)
    conj_ok = conjugation_matches(r, u, N)
    aeps = alpha_epsilon_ok(f, u, m, N)
    return ConjugationReport(hom.ok, full, conj_ok, aeps, one_plus(u), len(h1_block(alg)))


@dataclass
class MembershipResult:
    conjugator: CobarElement
    homotopy: Homotopy
    agrees: bool


def inner_subgroup_membership(f: Morphism, m: AInfinityStructure, max_arity: Optional[int] = None
                              ) -> MembershipResult:
    """Find 1 + h(eps) conjugating to restrict(f), via a homotopy from the identity to f."""
    from .classify import homotopy_connect
    alg = m.algebra
    N = max_arity or m.max_arity
    if not apply_strict_iso(f, m, N).same_ops(m, N):
        raise ValueError("f is not an automorphism of m")
    h = homotopy_connect(identity_iso(), f, m, m, N)
    u = h_epsilon(h, alg, N)
    r = restrict_to_degree_zero(f, alg, N)
    return MembershipResult(one_plus(u), h, conjugation_matches(r, u, N))


def round_trip(m: AInfinityStructure, v: CobarElement, max_arity: Optional[int] = None):
    """Target conjugator 1 + v -> homotopy with h(eps) = v -> f_h -> recovered conjugator."""
    alg = m.algebra
    N = max_arity or m.max_arity
    h = homotopy_from_cobar(v, alg)
    f = homotopy_extend(identity_iso(), h, m, m, N)
    res = inner_subgroup_membership(f, m, N)
    return f, h, res
