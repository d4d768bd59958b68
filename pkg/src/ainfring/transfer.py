"""Homotopy transfer of the Cech dg-algebra to its cohomology.

Given a contraction (include, project, Q) the transferred operations are sums
over planar rooted trees: leaves carry ``include``, every internal vertex the
dga operation of its valence, internal edges ``-Q`` and the root ``project``.
In bar form the decoration is sign free.  The Cech model has only a binary
product, so only binary trees contribute; :func:`enumerate_trees` still
lists all planar trees with vertices of valence >= 3 so that the tree sum
can be checked literally.

The production path is the memoised recursion

    phi_1 = include,  P_n = sum_{a+b=n} b_2(phi_a x phi_b),
    phi_n = -Q(P_n),  b_n = project(P_n),

which is the tree sum with shared subtrees.  The phi_n are the components of
the A-infinity quasi-isomorphism from the transferred structure to the dga.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .ainfty import AInfinityStructure, Morphism, tuples_for
from .bigraded import TruncationWindow, vadd
from .cech import CechDGA, Cochain, Contraction

Tree = Union[str, tuple]
LEAF = "|"


@lru_cache(maxsize=None)
def _trees(n: int) -> Tuple[Tree, ...]:
    if n == 1:
        return (LEAF,)
    out: List[Tree] = []
    for k in range(2, n + 1):
        out.extend(_forests(n, k))
    return tuple(out)


@lru_cache(maxsize=None)
def _forests(n: int, k: int) -> Tuple[tuple, ...]:
    """Ordered k-tuples of trees with n leaves in total."""
    if k == 1:
        return tuple((t,) for t in _trees(n))
    out = []
    for first in range(1, n - k + 2):
        for t in _trees(first):
            for rest in _forests(n - first, k - 1):
                out.append((t,) + rest)
    return tuple(out)


def enumerate_trees(n: int) -> List[Tree]:
    """Planar rooted trees with n leaves and internal vertices of valence >= 3."""
    if n < 1:
        raise ValueError("trees need at least one leaf")
    return list(_trees(n))


def tree_leaves(tree: Tree) -> int:
    if tree == LEAF:
        return 1
    return sum(tree_leaves(t) for t in tree)


def is_binary(tree: Tree) -> bool:
    return tree == LEAF or (len(tree) == 2 and all(is_binary(t) for t in tree))


class CechTarget:
    """The Cech dga viewed as an A-infinity algebra in bar form (b_1 = d)."""

    def __init__(self, dga: CechDGA):
        self.dga = dga

    def b2(self, x: Cochain, y: Cochain) -> Cochain:
        out: Cochain = {}
        for qx in {key[0] for key in x}:
            xs = {k: v for k, v in x.items() if k[0] == qx}
            vadd(out, self.dga.mul(xs, y), -1 if qx & 1 else 1)
        return out

    def bar_apply(self, k: int, vectors: Sequence[Cochain]) -> Cochain:
        if k == 1:
            return self.dga.d(vectors[0])
        if k == 2:
            return self.b2(vectors[0], vectors[1])
        return {}


class TransferEngine:
    """Memoised evaluation of the transferred operations and morphism components."""

    def __init__(self, contraction: Contraction, window: TruncationWindow):
        self.con = contraction
        self.alg = contraction.algebra
        self.dga = contraction.dga
        self.window = window
        self.target = CechTarget(self.dga)
        self._phi: Dict[tuple, Cochain] = {}
        self._P: Dict[tuple, Cochain] = {}

    def P(self, tup: tuple) -> Cochain:
        v = self._P.get(tup)
        if v is None:
            v = {}
            for a in range(1, len(tup)):
                left = self.phi(tup[:a])
                if not left:
                    continue
                right = self.phi(tup[a:])
                if not right:
                    continue
                vadd(v, self.target.b2(left, right))
            self._P[tup] = v
        return v

    def phi(self, tup: tuple) -> Cochain:
        v = self._phi.get(tup)
        if v is None:
            if len(tup) == 1:
                v = self.con.include(tup[0])
            else:
                v = {k: -c for k, c in self.con.homotopy(self.P(tup)).items()}
            self._phi[tup] = v
        return v

    def b(self, tup: tuple) -> Dict[int, object]:
        """Bar-form transferred operation on a basis tuple (arity >= 2)."""
        return self.con.project(self.P(tup))

    # literal tree sum, used as an independent check of the recursion
    def _tree_value(self, tree: Tree, tup: tuple, root: bool):
        if tree == LEAF:
            return self.con.include(tup[0])
        if len(tree) != 2:
            return {}
        nl = tree_leaves(tree[0])
        left = self._tree_value(tree[0], tup[:nl], False)
        right = self._tree_value(tree[1], tup[nl:], False)
        prod = self.target.b2(left, right) if left and right else {}
        if root:
            return self.con.project(prod)
        return {k: -c for k, c in self.con.homotopy(prod).items()}

    def tree_sum(self, tup: tuple) -> Dict[int, object]:
        n = len(tup)
        if n == 1:
            return {}
        out: Dict[int, object] = {}
        for tree in enumerate_trees(n):
            vadd(out, self._tree_value(tree, tup, True))
        return out


def classical_m3(con: Contraction, a: int, b: int, c: int) -> Dict[int, object]:
    """m_3(a,b,c) = project(Q(ia ib) ic - (-1)^{|a|} ia Q(ib ic)) in m-form."""
    dga = con.dga
    ia, ib, ic = con.include(a), con.include(b), con.include(c)
    qa = con.algebra.q[a]
    out = dga.mul(con.homotopy(dga.mul(ia, ib)), ic)
    vadd(out, dga.mul(ia, con.homotopy(dga.mul(ib, ic))), -1 if qa % 2 == 0 else 1)
    return con.project(out)


class TransferMorphism(Morphism):
    """The quasi-isomorphism (transferred structure) -> (Cech dga), components phi_n."""

    def __init__(self, engine: TransferEngine):
        super().__init__({}, linear={}, label="transfer")
        self.engine = engine
        self.linear = None

    @property
    def is_strict(self) -> bool:
        return False

    def value(self, block: tuple):
        return self.engine.phi(block)


def transfer(contraction: Contraction, window: TruncationWindow,
             max_arity: Optional[int] = None) -> Tuple[AInfinityStructure, TransferMorphism]:
    """Transferred minimal structure on the algebra of the contraction through max_arity."""
    N = max_arity or window.max_arity
    w = window.with_arity(N)
    eng = TransferEngine(contraction, w)
    alg = eng.alg
    d = alg.dimension
    ops: Dict[int, Dict[tuple, Dict[int, object]]] = {}
    for n in range(2, N + 1):
        res = {}
        for tup in tuples_for(alg, w, n, n - 2, n - 2 + d, reduced=(n > 2)):
            v = eng.b(tup)
            if v:
                res[tup] = v
        ops[n] = res
    m = AInfinityStructure(alg, w, ops, label=f"transfer[{contraction.describe()}]")
    return m, TransferMorphism(eng)


def strict_unitality_violations(engine: TransferEngine, max_arity: int,
                                limit: Optional[int] = None) -> List[tuple]:
    """Tuples containing the unit on which a transferred b_n (n >= 3) is nonzero."""
    alg = engine.alg
    bad = []
    for n in range(3, max_arity + 1):
        for tup in tuples_for(alg, engine.window, n, n - 2, n - 2 + alg.dimension, reduced=False):
            if alg.unit not in tup:
                continue
            if engine.b(tup):
                bad.append(tup)
                if limit and len(bad) >= limit:
                    return bad
    return bad
