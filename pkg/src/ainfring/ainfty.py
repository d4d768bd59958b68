"""A-infinity structures, strict isomorphisms, morphisms and homotopies.

Storage convention: every multilinear map is kept in bar form, i.e. as a
map on (sA)^{\\otimes n}, so that the only signs ever needed are Koszul
signs.  An n-tuple of basis elements of bar degrees |v_i| = q_i - 1 is the
key; the value is a sparse output vector.  The m-form of an operation is
obtained on demand with :func:`ainfring.bigraded.suspension_sign`.

Structures are minimal (m_1 = 0 unless an arity-1 component is stored) and
strictly unital: m_2 is stored on all admissible pairs including the unit,
while higher operations, morphism components of arity >= 2 and all
homotopy components vanish on tuples containing the unit and are stored on
reduced tuples only.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .bigraded import (BigradedAlgebra, MultiMap, TruncationWindow, admissible_tuples,
                       suspension_sign, tensor_expand, tuple_shape, vadd)

Vector = Dict[object, object]


@lru_cache(maxsize=None)
def compositions(n: int) -> Tuple[Tuple[int, ...], ...]:
    """Ordered compositions of n into positive parts."""
    if n == 0:
        return ((),)
    out = []
    for first in range(1, n + 1):
        for rest in compositions(n - first):
            out.append((first,) + rest)
    return tuple(out)


def tuples_for(alg: BigradedAlgebra, window: TruncationWindow, n: int, qlo: int, qhi: int,
               reduced: bool = True) -> List[tuple]:
    """Admissible n-tuples with total cohomological degree in [qlo, qhi] (cached)."""
    cache = alg.__dict__.setdefault("_tuple_cache", {})
    key = (window.pmin, window.pmax, n, qlo, qhi, reduced)
    res = cache.get(key)
    if res is None:
        res = list(admissible_tuples(alg, n, window, range(qlo, qhi + 1), reduced))
        cache[key] = res
    return res


def apply_multi(opmap: MultiMap, vectors: Sequence[Vector]) -> Vector:
    out: Vector = {}
    for tup, c in tensor_expand(vectors):
        v = opmap.get(tup)
        if v:
            vadd(out, v, c)
    return out


def _neg(vec: Vector) -> Vector:
    return {k: -v for k, v in vec.items()}


def to_m_form(alg: BigradedAlgebra, comps: MultiMap) -> MultiMap:
    out = {}
    for tup, vec in comps.items():
        s = suspension_sign([alg.q[i] for i in tup])
        out[tup] = dict(vec) if s == 1 else _neg(vec)
    return out


from_m_form = to_m_form


def _clean_multimap(comps: MultiMap) -> MultiMap:
    out = {}
    for tup, vec in comps.items():
        v = {k: x for k, x in vec.items() if x}
        if v:
            out[tuple(tup)] = v
    return out


# ---------------------------------------------------------------------------
# structures

class AInfinityStructure:
    """A minimal strictly unital A-infinity structure on a finite bigraded algebra."""

    def __init__(self, algebra: BigradedAlgebra, window: TruncationWindow,
                 ops: Dict[int, MultiMap], label: str = ""):
        self.algebra = algebra
        self.window = window
        self.ops: Dict[int, MultiMap] = {n: _clean_multimap(v) for n, v in ops.items()}
        self.label = label
        self._m_cache: Dict[int, MultiMap] = {}

    @property
    def max_arity(self) -> int:
        return self.window.max_arity

    def op(self, n: int) -> MultiMap:
        return self.ops.get(n, {})

    def m(self, n: int) -> MultiMap:
        """The m-form of the arity-n operation."""
        if n not in self._m_cache:
            self._m_cache[n] = to_m_form(self.algebra, self.op(n))
        return self._m_cache[n]

    def bar_apply(self, k: int, vectors: Sequence[Vector]) -> Vector:
        opk = self.ops.get(k)
        if not opk:
            return {}
        return apply_multi(opk, vectors)

    @classmethod
    def from_m_ops(cls, algebra, window, m_ops: Dict[int, MultiMap], label: str = ""):
        return cls(algebra, window, {n: from_m_form(algebra, v) for n, v in m_ops.items()}, label)

    def truncated(self, max_arity: int) -> "AInfinityStructure":
        w = self.window.with_arity(max_arity)
        return AInfinityStructure(self.algebra, w, {n: v for n, v in self.ops.items() if n <= max_arity},
                                  self.label)

    def same_ops(self, other: "AInfinityStructure", max_arity: Optional[int] = None) -> bool:
        N = max_arity or min(self.max_arity, other.max_arity)
        return all(self.op(n) == other.op(n) for n in range(1, N + 1))

    def differing_arities(self, other: "AInfinityStructure", max_arity: Optional[int] = None) -> List[int]:
        N = max_arity or min(self.max_arity, other.max_arity)
        return [n for n in range(1, N + 1) if self.op(n) != other.op(n)]


def product_ops(alg: BigradedAlgebra, window: TruncationWindow) -> MultiMap:
    """Bar form of the algebra product on all admissible pairs (unit included)."""
    out: MultiMap = {}
    for tup in admissible_tuples(alg, 2, window, None, reduced=False):
        prod = alg.mul(*tup)
        if prod:
            s = -1 if alg.q[tup[0]] & 1 else 1
            out[tup] = {k: s * v for k, v in prod.items()}
    return out


def formal_structure(alg: BigradedAlgebra, window: TruncationWindow) -> AInfinityStructure:
    """The structure with m_2 = product and no higher operations."""
    return AInfinityStructure(alg, window, {2: product_ops(alg, window)}, label="formal")


trivial_structure = formal_structure


def rescale(m: AInfinityStructure, lam) -> AInfinityStructure:
    """m_n -> lam^{n-2} m_n."""
    lam = Fraction(lam)
    ops = {}
    for n, comps in m.ops.items():
        c = lam ** (n - 2)
        c = c.numerator if c.denominator == 1 else c
        ops[n] = {t: {k: c * v for k, v in vec.items()} for t, vec in comps.items()}
    return AInfinityStructure(m.algebra, m.window, ops, label=f"rescale({m.label},{lam})")


# ---------------------------------------------------------------------------
# identity checks

@dataclass
class IdentityReport:
    name: str
    max_arity: int
    checked: Dict[int, int] = field(default_factory=dict)
    violations: Dict[int, List[tuple]] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not any(self.violations.values())

    def violated_shapes(self, alg: BigradedAlgebra) -> Dict[int, List[tuple]]:
        return {n: sorted({tuple_shape(alg, t) for t in ts}) for n, ts in self.violations.items() if ts}

    def lines(self) -> List[str]:
        out = [f"{self.name}: {'pass' if self.ok else 'FAIL'} (arity <= {self.max_arity})"]
        for n in sorted(self.checked):
            out.append(f"  arity {n}: {self.checked[n]} tuples, {len(self.violations.get(n, []))} violations")
        return out


def _prefix_sums(vals: Sequence[int]) -> List[int]:
    out = [0]
    for v in vals:
        out.append(out[-1] + v)
    return out


def stasheff_check(m: AInfinityStructure, max_arity: Optional[int] = None,
                   reduced: bool = True) -> IdentityReport:
    """Check sum (-1)^{r+st} m_{r+1+t}(1^r x m_s x 1^t) = 0 in m-form.

    The Koszul rule adds (-1)^{s(|a_1|+...+|a_r|)} when m_s moves past the
    first r inputs.  Identities are evaluated on every admissible reduced
    tuple whose degree allows a nonzero value.
    """
    alg = m.algebra
    N = max_arity or m.max_arity
    d = alg.dimension
    mops = {n: m.m(n) for n in range(1, N + 1)}
    rep = IdentityReport("stasheff", N)
    unit = alg.unit
    for n in range(2, N + 1):
        tuples = tuples_for(alg, m.window, n, n - 3, n - 3 + d, reduced)
        bad = []
        for tup in tuples:
            qs = [alg.q[i] for i in tup]
            pre = _prefix_sums(qs)
            acc: Vector = {}
            for s in range(1, n + 1):
                ms = mops.get(s)
                if not ms:
                    continue
                for r in range(0, n - s + 1):
                    t = n - r - s
                    k = r + 1 + t
                    outer = mops.get(k)
                    if not outer:
                        continue
                    inner = ms.get(tup[r:r + s])
                    if not inner:
                        continue
                    sign = (r + s * t + s * pre[r]) & 1
                    c0 = -1 if sign else 1
                    for y, c in inner.items():
                        if k == 1:
                            key = (y,)
                        else:
                            if y == unit and k > 2:
                                continue
                            key = tup[:r] + (y,) + tup[r + s:]
                        val = outer.get(key)
                        if val:
                            vadd(acc, val, c0 * c)
            if acc:
                bad.append(tup)
        rep.checked[n] = len(tuples)
        rep.violations[n] = bad
    return rep


def bar_differential_word(m: AInfinityStructure, word: tuple) -> Dict[tuple, object]:
    """The coderivation D on a word of T(sA): sum of 1^r x b_s x 1^t with Koszul signs."""
    alg = m.algebra
    out: Dict[tuple, object] = {}
    n = len(word)
    pre = _prefix_sums([alg.q[i] - 1 for i in word])
    for s in range(1, n + 1):
        bs = m.ops.get(s)
        if not bs:
            continue
        for r in range(0, n - s + 1):
            inner = bs.get(word[r:r + s])
            if not inner:
                continue
            sign = -1 if pre[r] & 1 else 1
            for y, c in inner.items():
                key = word[:r] + (y,) + word[r + s:]
                nv = out.get(key, 0) + sign * c
                if nv:
                    out[key] = nv
                else:
                    del out[key]
    return out


def coderivation_square_check(m: AInfinityStructure, max_arity: Optional[int] = None,
                              reduced: bool = True) -> IdentityReport:
    """Square the bar coderivation on words and test its projection to sA.

    D o D is a coderivation, so it vanishes iff its corestriction to sA does;
    on a word w that corestriction is the sum over the words u of D(w) of
    b_{|u|}(u).  Unit letters are treated with the strict unitality rules.
    """
    alg = m.algebra
    N = max_arity or m.max_arity
    d = alg.dimension
    unit = alg.unit
    rep = IdentityReport("coderivation", N)
    for n in range(2, N + 1):
        tuples = tuples_for(alg, m.window, n, n - 3, n - 3 + d, reduced)
        bad = []
        for tup in tuples:
            acc: Vector = {}
            for u, c in bar_differential_word(m, tup).items():
                L = len(u)
                if L > 2 and unit in u:
                    continue
                bl = m.ops.get(L)
                if not bl:
                    continue
                val = bl.get(u)
                if val:
                    vadd(acc, val, c)
            if acc:
                bad.append(tup)
        rep.checked[n] = len(tuples)
        rep.violations[n] = bad
    return rep


@dataclass
class AdmissibilityReport:
    m1_zero: bool
    m2_is_product: bool
    bidegrees_ok: bool
    strictly_unital: bool
    problems: List[str]

    @property
    def ok(self) -> bool:
        return self.m1_zero and self.m2_is_product and self.bidegrees_ok and self.strictly_unital

    def lines(self) -> List[str]:
        yn = lambda b: "yes" if b else "no"
        return [f"m1 = 0: {yn(self.m1_zero)}", f"m2 = product: {yn(self.m2_is_product)}",
                f"bidegrees (2-n, 0): {yn(self.bidegrees_ok)}",
                f"strictly unital: {yn(self.strictly_unital)}"] + [f"  {p}" for p in self.problems[:10]]


def admissibility_check(m: AInfinityStructure) -> AdmissibilityReport:
    alg = m.algebra
    problems: List[str] = []
    m1_zero = not m.op(1)
    if not m1_zero:
        problems.append("nonzero m1")
    m2_ok = m.op(2) == product_ops(alg, m.window)
    if not m2_ok:
        problems.append("m2 differs from the algebra product")
    bideg_ok = True
    unital = True
    for n, comps in m.ops.items():
        for tup, vec in comps.items():
            qsum = sum(alg.q[i] for i in tup)
            psum = sum(alg.p[i] for i in tup)
            for o in vec:
                if alg.q[o] != qsum + 2 - n or alg.p[o] != psum:
                    bideg_ok = False
                    problems.append(f"m{n}{tup} has output {alg.basis[o]} of the wrong bidegree")
                    break
            if n >= 3 and alg.unit in tup:
                unital = False
                problems.append(f"m{n} is nonzero on the unit tuple {tup}")
    return AdmissibilityReport(m1_zero, m2_ok, bideg_ok, unital, problems)


# ---------------------------------------------------------------------------
# morphisms

class Morphism:
    """Components F_n of an A-infinity morphism in bar form (degree 0).

    When ``linear`` is None the arity-1 component is the identity.
    """

    def __init__(self, comps: Dict[int, MultiMap], linear: Optional[MultiMap] = None,
                 label: str = ""):
        self.comps: Dict[int, MultiMap] = {n: _clean_multimap(v) for n, v in comps.items() if n >= 2}
        self.linear = None if linear is None else _clean_multimap(linear)
        self.label = label

    @property
    def is_strict(self) -> bool:
        return self.linear is None

    def value(self, block: tuple) -> Vector:
        if len(block) == 1:
            if self.linear is None:
                return {block[0]: 1}
            return self.linear.get(block, {})
        c = self.comps.get(len(block))
        if not c:
            return {}
        return c.get(block, {})

    def comp(self, n: int) -> MultiMap:
        if n == 1:
            raise ValueError("use value() for the linear part")
        return self.comps.get(n, {})

    def max_arity(self) -> int:
        return max(self.comps, default=1)

    def m_form(self, alg: BigradedAlgebra, n: int) -> MultiMap:
        return to_m_form(alg, self.comp(n))

    def same(self, other: "Morphism", max_arity: int) -> bool:
        if (self.linear or None) != (other.linear or None):
            return False
        return all(self.comp(n) == other.comp(n) for n in range(2, max_arity + 1))


def identity_iso() -> Morphism:
    return Morphism({}, label="id")


StrictIso = Morphism


def _iso_tuples(alg, window, n, reduced=True):
    d = alg.dimension
    return tuples_for(alg, window, n, n - 1, n - 1 + d, reduced)


def _apply_blocks(morph_value: Callable[[tuple], Vector], tup: tuple, comp: Tuple[int, ...]):
    vecs = []
    pos = 0
    for i in comp:
        v = morph_value(tup[pos:pos + i])
        if not v:
            return None
        vecs.append(v)
        pos += i
    return vecs


def _outer_value(morph: Morphism, key: tuple, unit: int) -> Vector:
    if len(key) > 1 and unit in key:
        return {}
    return morph.value(key)


def apply_strict_iso(g: Morphism, m: AInfinityStructure, max_arity: Optional[int] = None
                     ) -> AInfinityStructure:
    """The structure g*m transported along the strict isomorphism g.

    g*m is the unique structure for which g is an A-infinity morphism
    m -> g*m; componentwise
    b'_n = sum g_{r+1+t}(1^r x b_s x 1^t) - sum_{k<n} b'_k(g x ... x g).
    """
    if not g.is_strict:
        raise ValueError("apply_strict_iso needs a strict isomorphism")
    alg = m.algebra
    N = max_arity or m.max_arity
    d = alg.dimension
    unit = alg.unit
    new: Dict[int, MultiMap] = {2: dict(m.op(2))}
    if m.op(1):
        raise ValueError("only minimal structures are supported")
    for n in range(3, N + 1):
        res: MultiMap = {}
        comps_k = [c for c in compositions(n) if 2 <= len(c) <= n - 1]
        for tup in tuples_for(alg, m.window, n, n - 2, n - 2 + d):
            pre = _prefix_sums([alg.q[i] - 1 for i in tup])
            acc: Vector = {}
            for s in range(2, n + 1):
                bs = m.ops.get(s)
                if not bs:
                    continue
                for r in range(0, n - s + 1):
                    inner = bs.get(tup[r:r + s])
                    if not inner:
                        continue
                    sign = -1 if pre[r] & 1 else 1
                    if s == n:
                        vadd(acc, inner, sign)
                        continue
                    for y, c in inner.items():
                        val = _outer_value(g, tup[:r] + (y,) + tup[r + s:], unit)
                        if val:
                            vadd(acc, val, sign * c)
            for comp in comps_k:
                vecs = _apply_blocks(g.value, tup, comp)
                if vecs is None:
                    continue
                bk = new.get(len(comp))
                if bk:
                    vadd(acc, apply_multi(bk, vecs), -1)
            if acc:
                res[tup] = acc
        new[n] = res
    w = m.window.with_arity(N)
    return AInfinityStructure(alg, w, new, label=f"{g.label or 'g'}*{m.label or 'm'}")


def compose(g2: Morphism, g1: Morphism, alg: BigradedAlgebra, window: TruncationWindow,
            max_arity: Optional[int] = None) -> Morphism:
    """g2 o g1 for strict isomorphisms of the algebra."""
    N = max_arity or window.max_arity
    unit = alg.unit
    out: Dict[int, MultiMap] = {}
    for n in range(2, N + 1):
        res: MultiMap = {}
        for tup in _iso_tuples(alg, window, n):
            acc: Vector = {}
            for comp in compositions(n):
                k = len(comp)
                vecs = _apply_blocks(g1.value, tup, comp)
                if vecs is None:
                    continue
                if k == 1:
                    vadd(acc, vecs[0])
                    continue
                outer = g2.comp(k)
                if not outer:
                    continue
                for key, c in tensor_expand(vecs):
                    if unit in key:
                        continue
                    val = outer.get(key)
                    if val:
                        vadd(acc, val, c)
            if acc:
                res[tup] = acc
        out[n] = res
    return Morphism(out, label=f"({g2.label}o{g1.label})")


def invert(g: Morphism, alg: BigradedAlgebra, window: TruncationWindow,
           max_arity: Optional[int] = None) -> Morphism:
    """The inverse strict isomorphism, solved arity by arity."""
    N = max_arity or window.max_arity
    unit = alg.unit
    inv: Dict[int, MultiMap] = {}
    ginv = Morphism(inv)
    for n in range(2, N + 1):
        res: MultiMap = {}
        for tup in _iso_tuples(alg, window, n):
            acc: Vector = {}
            for comp in compositions(n):
                k = len(comp)
                if k == n:
                    continue
                vecs = _apply_blocks(g.value, tup, comp)
                if vecs is None:
                    continue
                if k == 1:
                    vadd(acc, vecs[0], -1)
                    continue
                outer = inv.get(k)
                if not outer:
                    continue
                for key, c in tensor_expand(vecs):
                    if unit in key:
                        continue
                    val = outer.get(key)
                    if val:
                        vadd(acc, val, -c)
            if acc:
                res[tup] = acc
        inv[n] = res
    ginv.comps = inv
    ginv.label = f"{g.label}^-1"
    return ginv


def random_strict_iso(alg: BigradedAlgebra, window: TruncationWindow, max_arity: int,
                      seed: int, density: float = 0.3, coeffs: Sequence[int] = (-2, -1, 1, 2)
                      ) -> Morphism:
    """A seeded random element of the strict isomorphism group."""
    rng = random.Random(seed)
    out: Dict[int, MultiMap] = {}
    for n in range(2, max_arity + 1):
        res: MultiMap = {}
        for tup in _iso_tuples(alg, window, n):
            q = sum(alg.q[i] for i in tup) + 1 - n
            p = sum(alg.p[i] for i in tup)
            vec = {}
            for o in alg.output_block(q, p):
                if o == alg.unit and False:
                    continue
                if rng.random() < density:
                    vec[o] = rng.choice(list(coeffs))
            if vec:
                res[tup] = vec
        out[n] = res
    return Morphism(out, label=f"g[{seed}]")


def single_component_iso(n: int, comp: MultiMap, label: str = "") -> Morphism:
    return Morphism({n: comp}, label=label)


# ---------------------------------------------------------------------------
# morphism equation

class BarTarget:
    """Interface for the codomain of a morphism: k-ary bar operations on vectors."""

    def bar_apply(self, k: int, vectors: Sequence[Vector]) -> Vector:
        raise NotImplementedError


def morphism_check(f: Morphism, source: AInfinityStructure, target, max_arity: Optional[int] = None,
                   project: Optional[Callable[[Vector], Vector]] = None) -> "MorphismReport":
    """Check sum f(1^r x b_s x 1^t) = sum_k b'_k(f x ... x f) through max_arity.

    ``target`` is an AInfinityStructure or any object with ``bar_apply``.
    ``project`` maps target vectors to source-algebra vectors and is used for
    the cohomology-identity test of the linear component; by default the
    linear component itself must be the identity.
    """
    alg = source.algebra
    N = max_arity or source.max_arity
    d = alg.dimension
    unit = alg.unit
    rep = MorphismReport(N)
    for n in range(1, N + 1):
        tuples = tuples_for(alg, source.window, n, max(0, n - 2), n - 2 + d)
        comps = compositions(n)
        bad = []
        for tup in tuples:
            pre = _prefix_sums([alg.q[i] - 1 for i in tup])
            acc: Vector = {}
            for s in range(1, n + 1):
                bs = source.ops.get(s)
                if not bs:
                    continue
                for r in range(0, n - s + 1):
                    inner = bs.get(tup[r:r + s])
                    if not inner:
                        continue
                    sign = -1 if pre[r] & 1 else 1
                    for y, c in inner.items():
                        key = tup[:r] + (y,) + tup[r + s:]
                        val = _outer_value(f, key, unit)
                        if val:
                            vadd(acc, val, sign * c)
            for comp in comps:
                vecs = _apply_blocks(f.value, tup, comp)
                if vecs is None:
                    continue
                vadd(acc, target.bar_apply(len(comp), vecs), -1)
            if acc:
                bad.append(tup)
        rep.checked[n] = len(tuples)
        rep.violations[n] = bad
    ident = True
    for i in range(len(alg.basis)):
        if i == unit and not alg.basis:
            continue
        if not source.window.contains(alg.p[i]):
            continue
        img = f.value((i,))
        got = project(img) if project is not None else img
        if got != {i: 1}:
            ident = False
            break
    rep.cohomology_identity = ident
    return rep


@dataclass
class MorphismReport:
    max_arity: int
    checked: Dict[int, int] = field(default_factory=dict)
    violations: Dict[int, List[tuple]] = field(default_factory=dict)
    cohomology_identity: bool = False

    @property
    def ok(self) -> bool:
        return not any(self.violations.values()) and self.cohomology_identity

    def lines(self) -> List[str]:
        out = [f"morphism equation: {'pass' if not any(self.violations.values()) else 'FAIL'} (arity <= {self.max_arity})",
               f"cohomology identity: {'yes' if self.cohomology_identity else 'no'}"]
        for n in sorted(self.checked):
            out.append(f"  arity {n}: {self.checked[n]} tuples, {len(self.violations.get(n, []))} violations")
        return out


# ---------------------------------------------------------------------------
# homotopies

class Homotopy:
    """Components h_n (n >= 1) of a homotopy Bar(A) -> Bar(A'), bar degree -1."""

    def __init__(self, comps: Dict[int, MultiMap], label: str = ""):
        self.comps: Dict[int, MultiMap] = {n: _clean_multimap(v) for n, v in comps.items() if n >= 1}
        self.label = label

    def value(self, block: tuple) -> Vector:
        c = self.comps.get(len(block))
        if not c:
            return {}
        return c.get(block, {})

    def comp(self, n: int) -> MultiMap:
        return self.comps.get(n, {})

    def is_zero(self) -> bool:
        return not any(self.comps.values())

    def plus(self, n: int, comp: MultiMap) -> "Homotopy":
        comps = {k: {t: dict(v) for t, v in c.items()} for k, c in self.comps.items()}
        tgt = comps.setdefault(n, {})
        for t, v in comp.items():
            cur = tgt.setdefault(t, {})
            vadd(cur, v)
            if not cur:
                del tgt[t]
        return Homotopy(comps, self.label)


def zero_homotopy() -> Homotopy:
    return Homotopy({}, label="0")


def _homotopy_tuples(alg, window, n):
    d = alg.dimension
    return tuples_for(alg, window, n, n, n + d)


def _eq2_rhs(f: Morphism, fprime_value: Callable[[tuple], Vector], h: Homotopy,
             src: AInfinityStructure, tgt: AInfinityStructure, tup: tuple) -> Vector:
    """[d' H + H d] projected to the target algebra, on one tuple.

    H(v) = sum over splittings of [f ... f | h | f' ... f'] with the sign
    (-1)^{(bar degree of the inputs before h)}.
    """
    alg = src.algebra
    unit = alg.unit
    n = len(tup)
    pre = _prefix_sums([alg.q[i] - 1 for i in tup])
    acc: Vector = {}
    for comp in compositions(n):
        k = len(comp)
        bk = tgt.ops.get(k)
        if not bk:
            continue
        starts = _prefix_sums(comp)
        for j in range(k):
            vecs = []
            ok = True
            for idx, size in enumerate(comp):
                block = tup[starts[idx]:starts[idx] + size]
                if idx < j:
                    v = f.value(block)
                elif idx == j:
                    v = h.value(block)
                else:
                    v = fprime_value(block)
                if not v:
                    ok = False
                    break
                vecs.append(v)
            if not ok:
                continue
            sign = -1 if pre[starts[j]] & 1 else 1
            vadd(acc, apply_multi(bk, vecs), sign)
    for s in range(1, n + 1):
        bs = src.ops.get(s)
        if not bs:
            continue
        for r in range(0, n - s + 1):
            inner = bs.get(tup[r:r + s])
            if not inner:
                continue
            sign = -1 if pre[r] & 1 else 1
            for y, c in inner.items():
                if y == unit:
                    continue
                val = h.value(tup[:r] + (y,) + tup[r + s:])
                if val:
                    vadd(acc, val, sign * c)
    return acc


def homotopy_extend(f: Morphism, h: Homotopy, src: AInfinityStructure, tgt: AInfinityStructure,
                    max_arity: Optional[int] = None) -> Morphism:
    """The unique morphism f' such that h is a homotopy from f to f'.

    Solves f - f' = (d' H + H d) arity by arity; the right-hand side at
    arity n only involves components of f' of smaller arity.
    """
    alg = src.algebra
    N = max_arity or src.max_arity
    d = alg.dimension
    out: Dict[int, MultiMap] = {}
    linear: Optional[MultiMap] = None
    fp = Morphism({}, None)

    def fprime_value(block):
        n = len(block)
        if n == 1:
            if linear is None:
                return {block[0]: 1}
            return linear.get(block, {})
        return out.get(n, {}).get(block, {})

    # arity one: f'_1 = f_1 - b'_1 h_1 - h_1 b_1
    lin_changes: MultiMap = {}
    for tup in tuples_for(alg, src.window, 1, 0, d):
        corr = _eq2_rhs(f, fprime_value, h, src, tgt, tup)
        if corr:
            lin_changes[tup] = corr
    if lin_changes or f.linear is not None:
        linear = {}
        for tup in tuples_for(alg, src.window, 1, 0, d, reduced=False):
            v = dict(f.value(tup))
            if tup in lin_changes:
                vadd(v, lin_changes[tup], -1)
            if v:
                linear[tup] = v
        if all(linear.get((i,)) == {i: 1} for (i,) in tuples_for(alg, src.window, 1, 0, d, reduced=False)) \
                and len(linear) == len(tuples_for(alg, src.window, 1, 0, d, reduced=False)):
            linear = None
    for n in range(2, N + 1):
        res: MultiMap = {}
        for tup in _iso_tuples(alg, src.window, n):
            val = dict(f.value(tup))
            corr = _eq2_rhs(f, fprime_value, h, src, tgt, tup)
            if corr:
                vadd(val, corr, -1)
            if val:
                res[tup] = val
        out[n] = res
    fp.comps = out
    fp.linear = linear
    fp.label = f"ext({f.label},{h.label})"
    return fp


@dataclass
class HomotopyReport:
    max_arity: int
    checked: Dict[int, int] = field(default_factory=dict)
    violations: Dict[int, List[tuple]] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not any(self.violations.values())

    def lines(self) -> List[str]:
        out = [f"homotopy relation: {'pass' if self.ok else 'FAIL'} (arity <= {self.max_arity})"]
        for n in sorted(self.checked):
            out.append(f"  arity {n}: {self.checked[n]} tuples, {len(self.violations.get(n, []))} violations")
        return out


def check_homotopy(f: Morphism, fprime: Morphism, h: Homotopy, src: AInfinityStructure,
                   tgt: AInfinityStructure, max_arity: Optional[int] = None) -> HomotopyReport:
    """Verify f - f' = d' H + H d componentwise through max_arity."""
    alg = src.algebra
    N = max_arity or src.max_arity
    d = alg.dimension
    rep = HomotopyReport(N)
    for n in range(1, N + 1):
        bad = []
        tuples = tuples_for(alg, src.window, n, n - 1, n - 1 + d)
        for tup in tuples:
            lhs = dict(f.value(tup))
            vadd(lhs, fprime.value(tup), -1)
            rhs = _eq2_rhs(f, fprime.value, h, src, tgt, tup)
            if lhs != rhs:
                bad.append(tup)
        rep.checked[n] = len(tuples)
        rep.violations[n] = bad
    return rep


def random_homotopy(alg: BigradedAlgebra, window: TruncationWindow, max_arity: int, seed: int,
                    density: float = 0.3, coeffs: Sequence[int] = (-2, -1, 1, 2),
                    min_arity: int = 1) -> Homotopy:
    """A seeded random normalized homotopy with components of arity min_arity..max_arity."""
    rng = random.Random(seed)
    comps: Dict[int, MultiMap] = {}
    for n in range(min_arity, max_arity + 1):
        res: MultiMap = {}
        for tup in _homotopy_tuples(alg, window, n):
            q = sum(alg.q[i] for i in tup) - n
            p = sum(alg.p[i] for i in tup)
            vec = {}
            for o in alg.output_block(q, p):
                if rng.random() < density:
                    vec[o] = rng.choice(list(coeffs))
            if vec:
                res[tup] = vec
        comps[n] = res
    return Homotopy(comps, label=f"h[{seed}]")
