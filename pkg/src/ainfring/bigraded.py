"""Bigraded bookkeeping: degrees, windows, spaces, maps and sign rules.

Throughout, a basis element carries a cohomological degree ``q`` and an
internal degree ``p``.  Multilinear maps are stored as dictionaries
``{input tuple: {output index: coefficient}}``; missing keys are zero.

Two sign conventions coexist.  The "m-form" of an n-ary operation acts on
A^{\\otimes n}; the "bar form" acts on (sA)^{\\otimes n}, where s lowers the
cohomological degree by one.  With the identification s a <-> a of bases,
the two forms of the same operation differ on the basis tuple
(a_1, ..., a_n) by the scalar ``suspension_sign`` = (-1)^{sum (n-i)|a_i|}.
All operation-level signs in the package come from this single rule plus
the Koszul rule for tensor products of maps.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, NamedTuple, Optional, Sequence, Tuple

from .exactla import QQ, Field, SparseMatrix

Vec = Dict[object, object]
MultiMap = Dict[tuple, Dict[int, object]]


class BiDegree(NamedTuple):
    q: int
    p: int

    def __add__(self, other):  # type: ignore[override]
        return BiDegree(self.q + other[0], self.p + other[1])

    def __sub__(self, other):
        return BiDegree(self.q - other[0], self.p - other[1])


TensorShape = Tuple[BiDegree, ...]


@dataclass(frozen=True)
class TruncationWindow:
    """Finite window on internal degrees.

    A tensor shape is admissible when every contiguous partial sum of its
    internal degrees lies in [pmin, pmax].  This family of shapes is closed
    under taking contiguous sub-tuples and under multiplying neighbours, so
    restricting cochains to it yields an honest quotient complex.
    ``exp_bound`` bounds monomial exponents when Cech groups are turned into
    finite matrices.
    """

    pmin: int
    pmax: int
    max_arity: int = 4
    exp_bound: int = 12

    def __post_init__(self):
        if self.pmin > self.pmax:
            raise ValueError("empty window")
        if self.max_arity < 1:
            raise ValueError("max_arity must be positive")

    def contains(self, p: int) -> bool:
        return self.pmin <= p <= self.pmax

    def admissible(self, ps: Sequence[int]) -> bool:
        n = len(ps)
        for i in range(n):
            s = 0
            for j in range(i, n):
                s += ps[j]
                if s < self.pmin or s > self.pmax:
                    return False
        return True

    def enlarged(self, step: int = 2) -> "TruncationWindow":
        return TruncationWindow(self.pmin - step, self.pmax + step, self.max_arity,
                                self.exp_bound + 2 * step)

    def with_arity(self, max_arity: int) -> "TruncationWindow":
        return TruncationWindow(self.pmin, self.pmax, max_arity, self.exp_bound)

    def describe(self) -> str:
        return f"p in [{self.pmin},{self.pmax}], arity <= {self.max_arity}, exp_bound {self.exp_bound}"


def symmetric_window(w: int, max_arity: int = 4, exp_bound: Optional[int] = None) -> TruncationWindow:
    return TruncationWindow(-w, w, max_arity, exp_bound if exp_bound is not None else 2 * w)


def koszul_sign(map_degrees: Sequence[int], elem_degrees: Sequence[int]) -> int:
    """Sign of (f_1 x ... x f_k)(x_1 x ... x x_k) = +- f_1(x_1) x ... x f_k(x_k)."""
    s = 0
    before = 0
    for fdeg, xdeg in zip(map_degrees, elem_degrees):
        s += fdeg * before
        before += xdeg
    return -1 if s & 1 else 1


def suspension_sign(qs: Sequence[int]) -> int:
    """(-1)^{sum_i (n-i) q_i}: m-form coefficient = sign * bar-form coefficient."""
    n = len(qs)
    s = 0
    for i, q in enumerate(qs, start=1):
        s += (n - i) * q
    return -1 if s & 1 else 1


class BiGradedSpace:
    """Finite bigraded vector space given by labelled basis blocks."""

    def __init__(self, blocks: Dict[BiDegree, Sequence[object]]):
        self.blocks: Dict[BiDegree, Tuple[object, ...]] = {
            BiDegree(*k): tuple(v) for k, v in sorted(blocks.items()) if len(v)}
        self._index = {bd: {lab: i for i, lab in enumerate(labels)}
                       for bd, labels in self.blocks.items()}

    def dim(self, bd: Optional[BiDegree] = None) -> int:
        if bd is None:
            return sum(len(v) for v in self.blocks.values())
        return len(self.blocks.get(BiDegree(*bd), ()))

    def index(self, bd: BiDegree, label) -> int:
        return self._index[BiDegree(*bd)][label]

    def degrees(self) -> List[BiDegree]:
        return list(self.blocks)

    def dims_table(self) -> Dict[BiDegree, int]:
        return {bd: len(v) for bd, v in self.blocks.items()}


class GradedMap:
    """A linear map of bidegree ``shift`` between bigraded spaces, stored blockwise."""

    def __init__(self, source: BiGradedSpace, target: BiGradedSpace, shift: BiDegree,
                 blocks: Optional[Dict[BiDegree, SparseMatrix]] = None, field: Field = QQ):
        self.source = source
        self.target = target
        self.shift = BiDegree(*shift)
        self.field = field
        self.blocks: Dict[BiDegree, SparseMatrix] = {}
        for bd, mat in (blocks or {}).items():
            bd = BiDegree(*bd)
            tgt = bd + self.shift
            if mat.ncols != source.dim(bd) or mat.nrows != target.dim(tgt):
                raise ValueError(f"block {bd} has the wrong shape")
            if not mat.is_zero():
                self.blocks[bd] = mat

    def block(self, bd: BiDegree) -> SparseMatrix:
        bd = BiDegree(*bd)
        m = self.blocks.get(bd)
        if m is None:
            m = SparseMatrix(self.target.dim(bd + self.shift), self.source.dim(bd), field=self.field)
        return m

    def compose(self, other: "GradedMap") -> "GradedMap":
        """self o other."""
        blocks = {}
        for bd, mat in other.blocks.items():
            mid = bd + other.shift
            if mid in self.blocks:
                blocks[bd] = self.blocks[mid] @ mat
        return GradedMap(other.source, self.target, other.shift + self.shift, blocks, self.field)

    def __add__(self, other: "GradedMap") -> "GradedMap":
        if self.shift != other.shift:
            raise ValueError("cannot add maps of different bidegree")
        blocks = dict(self.blocks)
        for bd, mat in other.blocks.items():
            blocks[bd] = blocks[bd] + mat if bd in blocks else mat
        return GradedMap(self.source, self.target, self.shift, blocks, self.field)

    def scale(self, c) -> "GradedMap":
        return GradedMap(self.source, self.target, self.shift,
                         {bd: m.scale(c) for bd, m in self.blocks.items()}, self.field)

    def __sub__(self, other: "GradedMap") -> "GradedMap":
        return self + other.scale(-1)

    def is_zero(self) -> bool:
        return all(m.is_zero() for m in self.blocks.values())


def suspend_components(comps: MultiMap, degree_of) -> MultiMap:
    """Convert an n-ary map between m-form and bar form (the rule is an involution)."""
    out: MultiMap = {}
    for tup, vec in comps.items():
        s = suspension_sign([degree_of(i) for i in tup])
        out[tup] = vec if s == 1 else {k: -v for k, v in vec.items()}
    return out


desuspend_components = suspend_components


# ---------------------------------------------------------------------------
# sparse vector helpers

def vadd(acc: dict, vec: dict, c=1) -> dict:
    """acc += c * vec, dropping zeros."""
    for k, v in vec.items():
        nv = acc.get(k, 0) + c * v
        if nv:
            acc[k] = nv
        else:
            acc.pop(k, None)
    return acc


def vclean(vec: dict) -> dict:
    return {k: v for k, v in vec.items() if v}


def tensor_expand(vectors: Sequence[dict]) -> Iterator[Tuple[tuple, object]]:
    """Multilinear expansion of v_1 x ... x v_k into (basis tuple, coefficient)."""
    if not vectors:
        yield (), 1
        return
    items = [list(v.items()) for v in vectors]
    for combo in itertools.product(*items):
        c = 1
        for _, x in combo:
            c *= x
        if c:
            yield tuple(k for k, _ in combo), c


# ---------------------------------------------------------------------------
# finite bigraded algebras

class BigradedAlgebra:
    """A finite-dimensional piece of a bigraded associative unital algebra.

    ``basis`` lists (q, p, label) triples; ``table`` maps index pairs to the
    sparse product vector.  Pairs absent from the table multiply to zero.
    ``weights`` is an optional additive auxiliary grading (a torus weight)
    used to split large linear systems; ``sl2`` records that the weight
    comes from an sl2-action commuting with all structure maps.
    """

    def __init__(self, name: str, basis: Sequence[Tuple[int, int, object]],
                 table: Dict[Tuple[int, int], Dict[int, object]], unit: int,
                 weights: Optional[Sequence[int]] = None, dimension: int = 1,
                 sl2: bool = False, koszul_r1: Optional[Sequence[int]] = None):
        self.name = name
        self.basis = [tuple(b) for b in basis]
        self.table = {k: vclean(v) for k, v in table.items() if vclean(v)}
        self.unit = unit
        self.weights = list(weights) if weights is not None else [0] * len(self.basis)
        self.dimension = dimension
        self.sl2 = sl2
        self.q = [b[0] for b in self.basis]
        self.p = [b[1] for b in self.basis]
        self._lookup = {b: i for i, b in enumerate(self.basis)}
        blocks: Dict[BiDegree, List[int]] = {}
        for i, (q, p, _) in enumerate(self.basis):
            blocks.setdefault(BiDegree(q, p), []).append(i)
        self.blocks = dict(sorted(blocks.items()))
        self.unit_block = BiDegree(self.q[unit], self.p[unit])
        self.reduced_blocks = {}
        for bd, idx in self.blocks.items():
            ridx = [i for i in idx if i != unit]
            if ridx:
                self.reduced_blocks[bd] = ridx
        self.small_generators = list(koszul_r1) if koszul_r1 is not None else self._default_generators()
        self._left_pre = None
        self._right_pre = None

    def _default_generators(self) -> List[int]:
        pos = sorted(bd for bd in self.reduced_blocks if bd.q == 0 and bd.p > 0)
        return list(self.reduced_blocks[pos[0]]) if pos else []

    def __len__(self):
        return len(self.basis)

    def index(self, q: int, p: int, label) -> int:
        return self._lookup[(q, p, label)]

    def find(self, q: int, p: int, label) -> Optional[int]:
        return self._lookup.get((q, p, label))

    def mul(self, i: int, j: int) -> Dict[int, object]:
        if i == self.unit:
            return {j: 1}
        if j == self.unit:
            return {i: 1}
        return self.table.get((i, j), {})

    def mul_vec(self, x: dict, y: dict) -> dict:
        out: dict = {}
        for i, a in x.items():
            for j, b in y.items():
                vadd(out, self.mul(i, j), a * b)
        return out

    def space(self, reduced: bool = False) -> BiGradedSpace:
        src = self.reduced_blocks if reduced else self.blocks
        return BiGradedSpace({bd: [self.basis[i][2] for i in idx] for bd, idx in src.items()})

    def pre_tables(self):
        """{(a, o): [(x, c)]} with c = coefficient of o in a*x (left) and x*a (right)."""
        if self._left_pre is None:
            left: Dict[Tuple[int, int], list] = {}
            right: Dict[Tuple[int, int], list] = {}
            n = len(self.basis)
            for a in range(n):
                for x in range(n):
                    for o, c in self.mul(a, x).items():
                        left.setdefault((a, o), []).append((x, c))
                    for o, c in self.mul(x, a).items():
                        right.setdefault((a, o), []).append((x, c))
            self._left_pre, self._right_pre = left, right
        return self._left_pre, self._right_pre

    def check_associative(self) -> List[Tuple[int, int, int]]:
        bad = []
        n = len(self.basis)
        for a in range(n):
            for b in range(n):
                ab = self.mul(a, b)
                for c in range(n):
                    lhs: dict = {}
                    for k, v in ab.items():
                        vadd(lhs, self.mul(k, c), v)
                    rhs: dict = {}
                    for k, v in self.mul(b, c).items():
                        vadd(rhs, self.mul(a, k), v)
                    if lhs != rhs:
                        bad.append((a, b, c))
        return bad

    def output_block(self, q: int, p: int) -> List[int]:
        return self.blocks.get(BiDegree(q, p), [])


def admissible_shapes(alg: BigradedAlgebra, n: int, window: TruncationWindow,
                      qsums: Optional[Iterable[int]] = None, reduced: bool = True
                      ) -> List[TensorShape]:
    """All shapes of length n over the algebra's blocks that fit the window."""
    blocks = list((alg.reduced_blocks if reduced else alg.blocks).keys())
    qset = None if qsums is None else set(qsums)
    qmax = max((b.q for b in blocks), default=0)
    qmin = min((b.q for b in blocks), default=0)
    out: List[TensorShape] = []

    def rec(prefix, suffix_sums, qs):
        k = len(prefix)
        if k == n:
            if qset is None or qs in qset:
                out.append(tuple(prefix))
            return
        rem = n - k
        if qset is not None and not any(qs + rem * qmin <= t <= qs + rem * qmax for t in qset):
            return
        for b in blocks:
            sums = [s + b.p for s in suffix_sums]
            sums.append(b.p)
            if all(window.pmin <= s <= window.pmax for s in sums):
                prefix.append(b)
                rec(prefix, sums, qs + b.q)
                prefix.pop()

    rec([], [], 0)
    return out


def shape_tuples(alg: BigradedAlgebra, shape: TensorShape, reduced: bool = True) -> Iterator[tuple]:
    src = alg.reduced_blocks if reduced else alg.blocks
    return itertools.product(*[src[b] for b in shape])


def admissible_tuples(alg: BigradedAlgebra, n: int, window: TruncationWindow,
                      qsums: Optional[Iterable[int]] = None, reduced: bool = True) -> Iterator[tuple]:
    for sh in admissible_shapes(alg, n, window, qsums, reduced):
        yield from shape_tuples(alg, sh, reduced)


def tuple_shape(alg: BigradedAlgebra, tup: Sequence[int]) -> TensorShape:
    return tuple(BiDegree(alg.q[i], alg.p[i]) for i in tup)


def in_window(alg: BigradedAlgebra, tup: Sequence[int], window: TruncationWindow) -> bool:
    return window.admissible([alg.p[i] for i in tup])
