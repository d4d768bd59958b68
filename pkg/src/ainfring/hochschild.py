"""Reduced Hochschild bidegree cochains, bar complexes and a filtration harness.

A cochain in C^n_{p,q} is a multilinear map A_+^{(x) n} -> A lowering the
internal degree by p and the cohomological degree by q; it is stored in
m-form as ``{input tuple: {output index: coefficient}}``.  Inputs range over
the reduced basis (the unit is excluded) and over window-admissible tuples
only, so every cochain space is finite.

Differential.  The default ("natural") convention is

    dc(a_1..a_{n+1}) = (-1)^{q|a_1|} a_1 c(a_2..) + sum_j (-1)^j c(..a_j a_{j+1}..)
                       + (-1)^{n+1} c(a_1..a_n) a_{n+1},

the Koszul sign of a map of cohomological degree -q passing a_1.  The
variant ``convention="literal"`` uses (-1)^{n|a_1|} instead; both agree on
the obstruction spaces C^n_{0,n-2}.  With the natural sign, the first
difference of two minimal structures agreeing below arity n is a cocycle,
and changing a structure by a strict isomorphism with a single component
f_{n-1} changes m_n by -d(f_{n-1}).

Dimensions are computed per torus weight (output weight minus input
weights), which the differential preserves.  For the projective line the
weight comes from an sl2-action, so the weight multiplicities of every
cohomology group are symmetric and unimodal; only weights 0, 2, 4, ... are
computed, stopping at the first zero.  Ranks of the large differential are
computed modulo a prime (a lower bound for the rational rank, hence an
upper bound for the dimension); the lower bound comes from explicit
rational cocycles shown independent modulo exact coboundaries.  When the
two bounds meet the dimension is certified; otherwise everything is
recomputed over the rationals.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from .bigraded import (BigradedAlgebra, MultiMap, TruncationWindow, admissible_shapes,
                       vadd)
from .errors import AinfError, NotSolvable, WindowTooSmall
from .exactla import DEFAULT_PRIME, GF, QQ, Echelon, SparseMatrix

Elem = Tuple[tuple, int]


class NotACocycle(NotSolvable):
    pass


class NotCoboundary(NotSolvable):
    """Raised by solve_coboundary; carries the cocycle as class representative."""

    def __init__(self, msg: str, representative: "HochschildCochain"):
        super().__init__(msg)
        self.representative = representative


class HypothesisFailed(AinfError):
    exit_code = 1

    def __init__(self, msg: str, index: int):
        super().__init__(msg)
        self.index = index


# ---------------------------------------------------------------------------
# cochains

@dataclass
class HochschildCochain:
    algebra: BigradedAlgebra
    window: TruncationWindow
    n: int
    p: int
    q: int
    comps: MultiMap = field(default_factory=dict)

    def __post_init__(self):
        self.comps = {t: {o: c for o, c in v.items() if c} for t, v in self.comps.items()}
        self.comps = {t: v for t, v in self.comps.items() if v}

    def is_zero(self) -> bool:
        return not self.comps

    def _like(self, comps) -> "HochschildCochain":
        return HochschildCochain(self.algebra, self.window, self.n, self.p, self.q, comps)

    def __add__(self, other: "HochschildCochain") -> "HochschildCochain":
        out = {t: dict(v) for t, v in self.comps.items()}
        for t, v in other.comps.items():
            vadd(out.setdefault(t, {}), v)
        return self._like(out)

    def scale(self, c) -> "HochschildCochain":
        return self._like({t: {o: c * x for o, x in v.items()} for t, v in self.comps.items()})

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        if not isinstance(other, HochschildCochain):
            return NotImplemented
        return (self.n, self.p, self.q) == (other.n, other.p, other.q) and self.comps == other.comps

    def weight(self, tup: tuple, o: int) -> int:
        w = self.algebra.weights
        return w[o] - sum(w[i] for i in tup)

    def weight_parts(self) -> Dict[int, MultiMap]:
        parts: Dict[int, MultiMap] = {}
        for t, v in self.comps.items():
            for o, c in v.items():
                parts.setdefault(self.weight(t, o), {}).setdefault(t, {})[o] = c
        return dict(sorted(parts.items()))

    def as_vector(self, index: Dict[Elem, int]) -> Dict[int, object]:
        vec = {}
        for t, v in self.comps.items():
            for o, c in v.items():
                i = index.get((t, o))
                if i is None:
                    raise WindowTooSmall(f"cochain entry {t}->{o} is outside the cochain space")
                vec[i] = c
        return vec

    @classmethod
    def from_vector(cls, alg, window, n, p, q, basis: Sequence[Elem], vec: Dict[int, object]):
        comps: MultiMap = {}
        for i, c in vec.items():
            t, o = basis[i]
            comps.setdefault(t, {})[o] = c
        return cls(alg, window, n, p, q, comps)


def structure_difference(m_new, m_old, n: int) -> HochschildCochain:
    """m'_n - m_n in m-form on reduced tuples, as a cochain in C^n_{0,n-2}."""
    alg = m_new.algebra
    out = {t: dict(v) for t, v in m_new.m(n).items() if alg.unit not in t}
    for t, v in m_old.m(n).items():
        if alg.unit in t:
            continue
        vadd(out.setdefault(t, {}), v, -1)
    return HochschildCochain(alg, m_new.window, n, 0, n - 2, out)


def morphism_difference(alg, window, f_new, f_old, n: int) -> HochschildCochain:
    """f'_n - f_n in m-form, a cochain in C^n_{0,n-1}."""
    from .ainfty import to_m_form
    out = {t: dict(v) for t, v in to_m_form(alg, f_new.comp(n)).items()}
    for t, v in to_m_form(alg, f_old.comp(n)).items():
        vadd(out.setdefault(t, {}), v, -1)
    return HochschildCochain(alg, window, n, 0, n - 1, out)


# ---------------------------------------------------------------------------
# cochain spaces

def _sorted_shapes(alg: BigradedAlgebra, n: int, q: int, p: int, window: TruncationWindow):
    d = alg.dimension
    shapes = admissible_shapes(alg, n, window, range(q, q + d + 1), reduced=True)
    good = []
    for sh in shapes:
        qo = sum(b.q for b in sh) - q
        po = sum(b.p for b in sh) - p
        if alg.output_block(qo, po):
            good.append(sh)
    good.sort(key=lambda sh: (sum(1 for b in sh if b.q > 0), sh))
    return good


def iter_cochain_basis(alg: BigradedAlgebra, n: int, p: int, q: int, window: TruncationWindow,
                       weight: Optional[int] = None) -> Iterator[Elem]:
    """Basis (input tuple, output) of C^n_{p,q}, shapes ordered by number of M factors."""
    W = alg.weights
    for sh in _sorted_shapes(alg, n, q, p, window):
        qo = sum(b.q for b in sh) - q
        po = sum(b.p for b in sh) - p
        outs = alg.output_block(qo, po)
        if weight is None:
            for tup in itertools.product(*[alg.reduced_blocks[b] for b in sh]):
                for o in outs:
                    yield tup, o
            continue
        byw: Dict[int, List[int]] = {}
        for o in outs:
            byw.setdefault(W[o], []).append(o)
        for tup in itertools.product(*[alg.reduced_blocks[b] for b in sh]):
            wo = weight + sum(W[i] for i in tup)
            for o in byw.get(wo, ()):
                yield tup, o


class CochainSpace:
    """Indexed basis of C^n_{p,q} (optionally one weight slice)."""

    def __init__(self, alg: BigradedAlgebra, n: int, p: int, q: int, window: TruncationWindow,
                 weight: Optional[int] = None):
        self.algebra = alg
        self.n, self.p, self.q = n, p, q
        self.window = window
        self.weight = weight
        self.basis: List[Elem] = list(iter_cochain_basis(alg, n, p, q, window, weight))
        self.index: Dict[Elem, int] = {e: i for i, e in enumerate(self.basis)}

    def __len__(self):
        return len(self.basis)

    def split_dims(self) -> Tuple[int, int]:
        """Dimensions of the summands with values in R (C(0)) and in M (C(d))."""
        alg = self.algebra
        c0 = sum(1 for _, o in self.basis if alg.q[o] == 0)
        return c0, len(self.basis) - c0


def cochain_space_dim(alg, n, p, q, window, weight=None) -> Tuple[int, List[Elem], Tuple[int, int]]:
    sp = CochainSpace(alg, n, p, q, window, weight)
    return len(sp), sp.basis, sp.split_dims()


def cochain_weights(alg, n, p, q, window) -> List[int]:
    W = alg.weights
    ws = set()
    for sh in _sorted_shapes(alg, n, q, p, window):
        qo = sum(b.q for b in sh) - q
        po = sum(b.p for b in sh) - p
        wo = {W[o] for o in alg.output_block(qo, po)}
        win = {0}
        for b in sh:
            win = {x + W[i] for x in win for i in alg.reduced_blocks[b]}
        ws |= {a - b for a in wo for b in win}
    return sorted(ws)


# ---------------------------------------------------------------------------
# the differential

def _left_sign(alg, a, n, q, convention):
    e = (q if convention == "natural" else n) * alg.q[a]
    return -1 if e & 1 else 1


def delta_row(alg: BigradedAlgebra, elem: Elem, src_index: Dict[Elem, int], q: int,
              convention: str = "natural") -> Dict[int, int]:
    """Coefficients of (dc)(elem) in terms of the coordinates of c in the source space."""
    ins, o = elem
    n = len(ins) - 1
    left, right = alg.pre_tables()
    row: Dict[int, int] = {}

    def add(col, v):
        if col is None:
            return
        nv = row.get(col, 0) + v
        if nv:
            row[col] = nv
        else:
            row.pop(col, None)

    for j in range(n):
        s = -1 if j % 2 == 0 else 1
        for y, c in alg.mul(ins[j], ins[j + 1]).items():
            if y == alg.unit:
                continue
            add(src_index.get((ins[:j] + (y,) + ins[j + 2:], o)), s * c)
    s = _left_sign(alg, ins[0], n, q, convention)
    for x, c in left.get((ins[0], o), ()):
        add(src_index.get((ins[1:], x)), s * c)
    s = -1 if (n + 1) & 1 else 1
    for x, c in right.get((ins[-1], o), ()):
        add(src_index.get((ins[:-1], x)), s * c)
    return row


def _splits(alg: BigradedAlgebra) -> Dict[int, List[Tuple[int, int, object]]]:
    sp = alg.__dict__.get("_split_cache")
    if sp is None:
        sp = {}
        red = [i for i in range(len(alg.basis)) if i != alg.unit]
        for a in red:
            for b in red:
                for y, c in alg.mul(a, b).items():
                    sp.setdefault(y, []).append((a, b, c))
        alg.__dict__["_split_cache"] = sp
    return sp


def hochschild_differential(c: HochschildCochain, convention: str = "natural") -> HochschildCochain:
    """dc, evaluated forward from the support of c and truncated to the window."""
    alg = c.algebra
    window = c.window
    n, q = c.n, c.q
    out: MultiMap = {}
    red = [i for i in range(len(alg.basis)) if i != alg.unit]
    splits = _splits(alg)

    def ok(t):
        return window.admissible([alg.p[i] for i in t])

    def add(t, vec, coef):
        vadd(out.setdefault(t, {}), vec, coef)

    sr = -1 if (n + 1) & 1 else 1
    for t, vec in c.comps.items():
        for a in red:
            ta = (a,) + t
            if ok(ta):
                s = _left_sign(alg, a, n, q, convention)
                add(ta, alg.mul_vec({a: 1}, vec), s)
            tb = t + (a,)
            if ok(tb):
                add(tb, alg.mul_vec(vec, {a: 1}), sr)
        for j, y in enumerate(t):
            s = -1 if j % 2 == 0 else 1
            for a, b, cc in splits.get(y, ()):
                tt = t[:j] + (a, b) + t[j + 1:]
                if ok(tt):
                    add(tt, vec, s * cc)
    out = {t: v for t, v in out.items() if v}
    return HochschildCochain(alg, window, n + 1, c.p, q, out)


# ---------------------------------------------------------------------------
# rank machinery

def _rows(alg, target_basis: Iterable[Elem], src_index, q, convention="natural"):
    for elem in target_basis:
        yield delta_row(alg, elem, src_index, q, convention)


def _smart_targets(alg: BigradedAlgebra, space: CochainSpace, window: TruncationWindow
                   ) -> Iterator[Elem]:
    """C^{n+1} elements obtained from C^n by adding a generator of R_1 at either end,
    followed by all remaining elements in basis order."""
    seen = set()
    gens = alg.small_generators
    for ins, o in space.basis:
        for r in gens:
            t = ins + (r,)
            if window.admissible([alg.p[i] for i in t]):
                for y in alg.mul(o, r):
                    e = (t, y)
                    if e not in seen:
                        seen.add(e)
                        yield e
            t = (r,) + ins
            if window.admissible([alg.p[i] for i in t]):
                for y in alg.mul(r, o):
                    e = (t, y)
                    if e not in seen:
                        seen.add(e)
                        yield e
    for e in iter_cochain_basis(alg, space.n + 1, space.p, space.q, window, space.weight):
        if e not in seen:
            yield e


def _rank(rows: Iterable[Dict[int, int]], field, target: Optional[int] = None) -> Tuple[int, int]:
    ech = Echelon(field)
    used = 0
    for r in rows:
        used += 1
        if not r:
            continue
        if field.characteristic:
            r = {k: v % field.p for k, v in r.items() if v % field.p}
        ech.add_row(r)
        if target is not None and ech.rank >= target:
            break
    return ech.rank, used


def image_echelon(alg, src: CochainSpace, tgt: CochainSpace, field=QQ) -> Echelon:
    """Echelon form of the image of d: src -> tgt, as vectors in tgt coordinates."""
    cols: Dict[int, Dict[int, object]] = {}
    for i, elem in enumerate(tgt.basis):
        for j, v in delta_row(alg, elem, src.index, tgt.q).items():
            cols.setdefault(j, {})[i] = v
    ech = Echelon(field)
    for j in sorted(cols):
        ech.add_row(cols[j])
    return ech


@dataclass
class WeightResult:
    weight: int
    dim_prev: int
    dim: int
    rank_prev: int
    rank_next: int
    value: int
    method: str


@dataclass
class WindowResult:
    window: TruncationWindow
    value: int
    weights: List[WeightResult]
    seconds: float


@dataclass
class HHResult:
    n: int
    p: int
    q: int
    inner: WindowResult
    outer: Optional[WindowResult]

    @property
    def value(self) -> int:
        return self.inner.value

    @property
    def stabilized(self) -> bool:
        return self.outer is not None and self.outer.value == self.inner.value

    def lines(self, timings: bool = True) -> List[str]:
        out = [f"HH^{self.n}_{{{self.p},{self.q}}} = {self.value}"
               + (" (stabilized)" if self.stabilized else " (NOT stabilized)")]
        for wr in [self.inner] + ([self.outer] if self.outer else []):
            t = f" ({wr.seconds:.1f} s)" if timings else ""
            out.append(f"  window [{wr.window.pmin},{wr.window.pmax}]: {wr.value}{t}")
            for w in wr.weights:
                out.append(f"    weight {w.weight}: dim C^{self.n - 1}={w.dim_prev} dim C^{self.n}={w.dim} "
                           f"rank={w.rank_prev}/{w.rank_next} -> {w.value} [{w.method}]")
        return out


def elimination_order(alg: BigradedAlgebra, space: CochainSpace) -> Dict[int, int]:
    """Column relabelling used for rank computations.

    Pivoting on the reverse lexicographic order of input bidegrees keeps
    fill-in low (several times faster than the reporting order)."""
    key = lambda i: (tuple((alg.q[x], alg.p[x]) for x in space.basis[i][0]), space.basis[i])
    perm = sorted(range(len(space)), key=key, reverse=True)
    return {old: new for new, old in enumerate(perm)}


def _permuted(rows, pos):
    for r in rows:
        yield {pos[k]: v for k, v in r.items()}


def _weight_dim(alg, n, p, q, window, w, candidates: Sequence[HochschildCochain],
                prime: Optional[int]) -> WeightResult:
    prev = CochainSpace(alg, n - 1, p, q, window, w)
    cur = CochainSpace(alg, n, p, q, window, w)
    if not len(cur):
        return WeightResult(w, len(prev), 0, 0, 0, 0, "empty")
    ech = image_echelon(alg, prev, cur, QQ)
    r1 = ech.rank
    lower = 0
    for cand in candidates:
        part = cand.weight_parts().get(w)
        if not part:
            continue
        vec = HochschildCochain(alg, window, n, p, q, part).as_vector(cur.index)
        if ech.add_row(vec):
            lower += 1
    target = len(cur) - r1 - lower
    pos = elimination_order(alg, cur)
    if prime is not None:
        rows = _permuted(_rows(alg, _smart_targets(alg, cur, window), cur.index, q), pos)
        r2, _ = _rank(rows, GF(prime), target)
        if r2 >= target:
            return WeightResult(w, len(prev), len(cur), r1, r2, lower, f"certified mod {prime} + QQ lower bound")
    rows = _permuted(_rows(alg, _smart_targets(alg, cur, window), cur.index, q), pos)
    r2q, _ = _rank(rows, QQ, target)
    return WeightResult(w, len(prev), len(cur), r1, r2q, len(cur) - r1 - r2q, "QQ")


def hh_window(alg: BigradedAlgebra, n: int, p: int, q: int, window: TruncationWindow,
              candidates: Sequence[HochschildCochain] = (), prime: Optional[int] = DEFAULT_PRIME) -> WindowResult:
    """dim HH^n_{p,q} of the truncated complex on one window."""
    if n < 1:
        raise ValueError("n must be positive")
    t0 = time.time()
    valid = []
    for c in candidates:
        if hochschild_differential(c).is_zero():
            valid.append(c)
    results: List[WeightResult] = []
    total = 0
    if alg.sl2:
        present = cochain_weights(alg, n, p, q, window)
        for start in sorted({abs(w) % 2 for w in present}):
            w = start
            while True:
                r = _weight_dim(alg, n, p, q, window, w, valid, prime)
                results.append(r)
                total += r.value if w == 0 else 2 * r.value
                if r.value == 0:
                    break
                w += 2
    else:
        for w in cochain_weights(alg, n, p, q, window):
            r = _weight_dim(alg, n, p, q, window, w, valid, prime)
            results.append(r)
            total += r.value
    return WindowResult(window, total, results, time.time() - t0)


def hh_dim(algebra_for: Callable[[TruncationWindow], BigradedAlgebra], n: int, p: int, q: int,
           window: TruncationWindow, outer: Optional[TruncationWindow] = None,
           candidates_for: Optional[Callable[[BigradedAlgebra, TruncationWindow], Sequence[HochschildCochain]]] = None,
           prime: Optional[int] = DEFAULT_PRIME) -> HHResult:
    """Dimension on an inner window, re-verified on a strictly larger outer window."""
    if outer is None:
        outer = window.enlarged(2)
    if not (outer.pmin < window.pmin and outer.pmax > window.pmax) and not (
            outer.pmin <= window.pmin and outer.pmax >= window.pmax and
            (outer.pmin, outer.pmax) != (window.pmin, window.pmax)):
        raise WindowTooSmall("the outer window must strictly contain the inner one")
    res = []
    for w in (window, outer):
        alg = algebra_for(w)
        cands = candidates_for(alg, w) if candidates_for else ()
        res.append(hh_window(alg, n, p, q, w, cands, prime))
    return HHResult(n, p, q, res[0], res[1])


# ---------------------------------------------------------------------------
# solving

def _solve_weight(alg, window, n, p, q, w, part: MultiMap, extra: Sequence[MultiMap] = ()):
    prev = CochainSpace(alg, n - 1, p, q, window, w)
    cur = CochainSpace(alg, n, p, q, window, w)
    rhs = HochschildCochain(alg, window, n, p, q, part).as_vector(cur.index)
    extra_vecs = [HochschildCochain(alg, window, n, p, q, e).as_vector(cur.index) for e in extra]
    ech = Echelon(QQ, track_rhs=True)
    N = len(prev)
    for i, elem in enumerate(cur.basis):
        row = delta_row(alg, elem, prev.index, q)
        for k, ev in enumerate(extra_vecs):
            v = ev.get(i)
            if v:
                row[N + k] = v
        b = rhs.get(i, 0)
        if row:
            ech.add_row(row, b)
            if not ech.consistent:
                return None, prev
        elif b:
            return None, prev
    return ech.solution(), prev


def solve_coboundary(c: HochschildCochain) -> HochschildCochain:
    """A cochain b with d b = c (canonical: free variables zero), or NotCoboundary."""
    alg = c.algebra
    if not hochschild_differential(c).is_zero():
        raise NotACocycle(f"the cochain in C^{c.n}_{{{c.p},{c.q}}} is not a cocycle")
    comps: MultiMap = {}
    for w, part in c.weight_parts().items():
        sol, prev = _solve_weight(alg, c.window, c.n, c.p, c.q, w, part)
        if sol is None:
            raise NotCoboundary(f"class in HH^{c.n}_{{{c.p},{c.q}}} (weight {w}) is nonzero", c)
        for i, v in sol.items():
            t, o = prev.basis[i]
            comps.setdefault(t, {})[o] = v
    b = HochschildCochain(alg, c.window, c.n - 1, c.p, c.q, comps)
    if hochschild_differential(b) != c:
        raise AssertionError("coboundary solve produced a wrong answer")
    return b


def class_coordinates(c: HochschildCochain, generators: Sequence[HochschildCochain]) -> Optional[List]:
    """Coefficients lambda with c - sum lambda_i g_i exact, or None when c is outside the span."""
    alg = c.algebra
    coords = [Fraction(0)] * len(generators)
    weights = set(c.weight_parts())
    for g in generators:
        weights |= set(g.weight_parts())
    for w in sorted(weights):
        part = c.weight_parts().get(w, {})
        gparts = [g.weight_parts().get(w, {}) for g in generators]
        active = [k for k, gp in enumerate(gparts) if gp]
        sol, prev = _solve_weight(alg, c.window, c.n, c.p, c.q, w, part, [gparts[k] for k in active])
        if sol is None:
            return None
        N = len(prev)
        for pos, k in enumerate(active):
            val = Fraction(sol.get(N + pos, 0))
            if coords[k] and val != coords[k]:
                return None
            coords[k] = val
    return [x.numerator if x.denominator == 1 else x for x in coords]


# ---------------------------------------------------------------------------
# bar complexes

@dataclass
class BarComplex:
    """B(M_1,...,M_n) = M_1 (x) T(R_+) (x) M_2 (x) ... (x) T(R_+) (x) M_n in internal degree j.

    Factors are 'k' (the augmentation module) or 'M' (the top cohomology
    module).  A basis element is a word of letters; R_+ letters count -1 in
    the cohomological degree.  The differential multiplies adjacent letters
    (never two module letters, and a letter next to a k-factor dies) with
    sign (-1)^{number of R letters up to and including the left one}.
    Words are truncated by the window (all contiguous internal-degree sums
    inside it), which gives a subcomplex.
    """

    algebra: BigradedAlgebra
    factors: Tuple[str, ...]
    j: int
    window: TruncationWindow
    words: Dict[int, List[tuple]] = field(default_factory=dict)
    index: Dict[int, Dict[tuple, int]] = field(default_factory=dict)

    def __post_init__(self):
        alg = self.algebra
        d = alg.dimension
        R = [b for b in alg.reduced_blocks if b.q == 0]
        M = [b for b in alg.reduced_blocks if b.q == d]
        win = self.window
        shapes = set()

        def gen(fi, in_slot, seq, sums, total):
            if not in_slot:
                f = self.factors[fi]
                blocks = [] if f == "k" else M
                if f == "k":
                    nxt(fi, seq, sums, total)
                for b in blocks:
                    ns = [s + b.p for s in sums] + [b.p]
                    if all(win.pmin <= s <= win.pmax for s in ns):
                        nxt(fi, seq + [("M", b)], ns, total + b.p)
            else:
                gen_slot(fi, seq, sums, total)

        def nxt(fi, seq, sums, total):
            if fi == len(self.factors) - 1:
                if total == self.j:
                    shapes.add(tuple(seq))
                return
            gen_slot(fi, seq, sums, total)

        def gen_slot(fi, seq, sums, total):
            gen(fi + 1, False, seq, sums, total)
            for b in R:
                ns = [s + b.p for s in sums] + [b.p]
                if all(win.pmin <= s <= win.pmax for s in ns):
                    gen_slot(fi, seq + [("R", b)], ns, total + b.p)

        gen(0, False, [], [], 0)
        words: Dict[int, List[tuple]] = {}
        for sh in sorted(shapes):
            deg = -sum(1 for kind, _ in sh if kind == "R")
            blocks = [alg.reduced_blocks[b] for _, b in sh]
            for x in itertools.product(*blocks):
                words.setdefault(deg, []).append((tuple(k for k, _ in sh), x))
        self.words = dict(sorted(words.items()))
        self.index = {dg: {w: i for i, w in enumerate(ws)} for dg, ws in self.words.items()}

    def differential(self, kinds: tuple, x: tuple) -> Dict[tuple, int]:
        alg = self.algebra
        out: Dict[tuple, int] = {}
        nR = 0
        for i in range(len(x) - 1):
            if kinds[i] == "R":
                nR += 1
            if kinds[i] == "M" and kinds[i + 1] == "M":
                continue
            s = -1 if nR & 1 else 1
            for y, c in alg.mul(x[i], x[i + 1]).items():
                kind = "R" if alg.q[y] == 0 else "M"
                key = (kinds[:i] + (kind,) + kinds[i + 2:], x[:i] + (y,) + x[i + 2:])
                nv = out.get(key, 0) + s * c
                if nv:
                    out[key] = nv
                else:
                    out.pop(key)
        return out

    def matrix(self, deg: int) -> SparseMatrix:
        src = self.words.get(deg, [])
        tgt = self.index.get(deg + 1, {})
        rows: Dict[int, Dict[int, int]] = {}
        for jcol, (kinds, x) in enumerate(src):
            for key, v in self.differential(kinds, x).items():
                i = tgt.get(key)
                if i is None:
                    raise AssertionError("bar truncation is not a subcomplex")
                rows.setdefault(i, {})[jcol] = v
        return SparseMatrix(len(self.words.get(deg + 1, [])), len(src), rows)

    def dims(self) -> Dict[int, int]:
        return {dg: len(ws) for dg, ws in self.words.items()}


@dataclass
class BarCohomology:
    factors: Tuple[str, ...]
    j: int
    window: TruncationWindow
    chain_dims: Dict[int, int]
    betti: Dict[int, int]
    method: str

    def nonzero(self) -> Dict[int, int]:
        return {d: b for d, b in self.betti.items() if b}


def bar_cohomology(bc: BarComplex, prime: Optional[int] = DEFAULT_PRIME) -> BarCohomology:
    """Cohomology dimensions per degree.

    Ranks are taken modulo a prime first.  Modular Betti numbers bound the
    rational ones from above, and both have the same Euler characteristic,
    so when the modular ones live in degrees of a single parity they are the
    rational ones.  Otherwise the ranks are recomputed over the rationals.
    ``prime=None`` skips the modular pass.
    """
    degs = sorted(bc.words)
    dims = bc.dims()

    def betti(field):
        ranks = {}
        for dg in degs:
            m = bc.matrix(dg)
            ech = Echelon(field)
            t = m.transpose()
            for i in sorted(t.rows):
                r = t.rows[i]
                if field.characteristic:
                    r = {k: v % field.p for k, v in r.items() if v % field.p}
                ech.add_row(r)
            ranks[dg] = ech.rank
        return {dg: dims[dg] - ranks[dg] - ranks.get(dg - 1, 0) for dg in degs}

    if prime is None:
        return BarCohomology(bc.factors, bc.j, bc.window, dims, betti(QQ), "QQ")
    mod = betti(GF(prime))
    parities = {dg % 2 for dg, b in mod.items() if b}
    if len(parities) <= 1:
        return BarCohomology(bc.factors, bc.j, bc.window, dims, mod, f"mod {prime}, Euler-certified")
    return BarCohomology(bc.factors, bc.j, bc.window, dims, betti(QQ), "QQ")


def bar_complex(algebra: BigradedAlgebra, factors: Sequence[str], j: int,
                window: TruncationWindow) -> BarComplex:
    for f in factors:
        if f not in ("k", "M"):
            raise ValueError(f"unknown factor {f!r}")
    if not window.contains(j):
        raise WindowTooSmall(f"internal degree {j} lies outside the window")
    return BarComplex(algebra, tuple(factors), j, window)


@dataclass
class StableBar:
    inner: BarCohomology
    outer: BarCohomology

    @property
    def stabilized(self) -> bool:
        return self.inner.nonzero() == self.outer.nonzero()

    @property
    def betti(self) -> Dict[int, int]:
        return self.inner.nonzero()

    def lines(self) -> List[str]:
        name = "B(" + ",".join(self.inner.factors) + ")"
        out = [f"{name} at internal degree {self.inner.j}: H = {self.betti or 0}"
               + (" (stabilized)" if self.stabilized else " (NOT stabilized)")]
        for r in (self.inner, self.outer):
            out.append(f"  window [{r.window.pmin},{r.window.pmax}]: chains {r.chain_dims}, H {r.nonzero() or 0} [{r.method}]")
        return out


def bar_stable(algebra_for: Callable[[TruncationWindow], BigradedAlgebra], factors: Sequence[str], j: int,
               window: TruncationWindow, outer: TruncationWindow, prime: Optional[int] = DEFAULT_PRIME) -> StableBar:
    """Bar cohomology on two nested windows."""
    res = [bar_cohomology(bar_complex(algebra_for(w), factors, j, w), prime) for w in (window, outer)]
    return StableBar(res[0], res[1])


# ---------------------------------------------------------------------------
# filtered complexes

@dataclass
class FilteredComplex:
    """Three consecutive terms C^{n-1} -> C^n -> C^{n+1} with filtration levels.

    ``levels[k][i]`` is the largest f with basis vector i of term k in F^f;
    the filtration is decreasing and the differentials must respect it.
    """

    d_prev: SparseMatrix
    d_next: SparseMatrix
    levels: Tuple[List[int], List[int], List[int]]


@dataclass
class InjectivityVerdict:
    hypothesis_levels: List[int]
    kernel_dim: int

    @property
    def injective(self) -> bool:
        return self.kernel_dim == 0


def _span_rank(vectors: Iterable[Dict[int, object]]) -> int:
    ech = Echelon(QQ)
    for v in vectors:
        if v:
            ech.add_row(v)
    return ech.rank


def _columns(m: SparseMatrix) -> List[Dict[int, object]]:
    cols: Dict[int, Dict[int, object]] = {}
    for i, r in m.rows.items():
        for j, v in r.items():
            cols.setdefault(j, {})[i] = v
    return [cols.get(j, {}) for j in range(m.ncols)]


def _restrict(m: SparseMatrix, rows_keep: List[int], cols_keep: List[int]) -> SparseMatrix:
    ri = {r: i for i, r in enumerate(rows_keep)}
    ci = {c: i for i, c in enumerate(cols_keep)}
    out: Dict[int, Dict[int, object]] = {}
    for r, row in m.rows.items():
        if r not in ri:
            continue
        for c, v in row.items():
            if c in ci:
                out.setdefault(ri[r], {})[ci[c]] = v
    return SparseMatrix(len(rows_keep), len(cols_keep), out)


def _cohomology_dim(d_prev: SparseMatrix, d_next: SparseMatrix, dim: int) -> int:
    return dim - d_next.rank() - d_prev.rank()


def filtered_injectivity_check(fc: FilteredComplex) -> InjectivityVerdict:
    """Verify H^n gr_i = 0 for i > 0, then compute ker(H^n C -> H^n gr_0) exactly."""
    L0, L1, L2 = fc.levels
    for m, (src, tgt) in ((fc.d_prev, (L0, L1)), (fc.d_next, (L1, L2))):
        for r, row in m.rows.items():
            for c in row:
                if tgt[r] < src[c]:
                    raise ValueError("the differential does not respect the filtration")
    levels = sorted({x for x in L1 if x > 0})
    for i in levels:
        k0 = [a for a, x in enumerate(L0) if x == i]
        k1 = [a for a, x in enumerate(L1) if x == i]
        k2 = [a for a, x in enumerate(L2) if x == i]
        h = _cohomology_dim(_restrict(fc.d_prev, k1, k0), _restrict(fc.d_next, k2, k1), len(k1))
        if h:
            raise HypothesisFailed(f"H^n gr_{i} has dimension {h}", i)
    n1 = len(L1)
    Z = SparseMatrix(1, n1).kernel_basis() if fc.d_next.nrows == 0 else fc.d_next.kernel_basis()
    B = [c for c in _columns(fc.d_prev) if c]
    F1 = [{a: 1} for a, x in enumerate(L1) if x >= 1]
    dimZ = _span_rank(Z)
    dimB = _span_rank(B)
    dimBF = _span_rank(B + F1)
    dimZF = _span_rank(Z + F1)
    inter = dimZ + dimBF - dimZF
    return InjectivityVerdict(levels, inter - dimB)


def hochschild_filtered_complex(alg: BigradedAlgebra, n: int, q: int, window: TruncationWindow,
                                weight: Optional[int] = None) -> FilteredComplex:
    """The quotient C(0) = C / C(d) in degrees n-1, n, n+1 with F^j = {output degree >= j}."""
    spaces = [CochainSpace(alg, k, 0, q, window, weight) for k in (n - 1, n, n + 1)]
    keep = [[i for i, (_, o) in enumerate(sp.basis) if alg.q[o] == 0] for sp in spaces]
    mats = []
    for a in (0, 1):
        src, tgt = spaces[a], spaces[a + 1]
        rows = {}
        tpos = {i: r for r, i in enumerate(keep[a + 1])}
        spos = {i: r for r, i in enumerate(keep[a])}
        for i in keep[a + 1]:
            row = delta_row(alg, tgt.basis[i], src.index, q)
            row = {spos[c]: v for c, v in row.items() if c in spos}
            if row:
                rows[tpos[i]] = row
        mats.append(SparseMatrix(len(keep[a + 1]), len(keep[a]), rows))
    levels = tuple([alg.p[sp.basis[i][1]] for i in kp] for sp, kp in zip(spaces, keep))
    shift = min(min(lv, default=0) for lv in levels)
    levels = tuple([x - shift for x in lv] for lv in levels)
    return FilteredComplex(mats[0], mats[1], levels)
