"""Cech model for the cohomology of line bundles on the projective line.

For L = O(k) and internal degree p put m = k p.  With t = x/y, the Cech
complex of L^p for the cover U_0 = {y != 0}, U_1 = {x != 0} is

    C^0_p = k[t] (+) k[t^{-1}]      (sections on U_0 and U_1, each in its
                                     own trivialisation)
    C^1_p = k[t, t^{-1}]            (sections on U_01, U_0-trivialisation)
    d(f_0, f_1) = f_0 - t^m f_1.

Elements are sparse dicts keyed by (q, p, chart, e): chart 0/1 for the two
summands of C^0 and chart 2 for C^1, e the exponent of t.  The product is
the Cech cup product for the ordered cover:  componentwise on C^0,
f . gamma = f_0 gamma and gamma . g = gamma t^{m_g} g_1.  It is strictly
associative, graded Leibniz, and all structure constants are 0 or 1.

The cohomology basis used everywhere is the monomial one:
H^0(L^p) has t^e, 0 <= e <= m, and H^1(L^p) has t^e, m+1 <= e <= -1.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from .bigraded import (BiDegree, BiGradedSpace, BigradedAlgebra, GradedMap, TruncationWindow,
                       vadd)
from .exactla import SparseMatrix

Key = Tuple[int, int, int, int]
Cochain = Dict[Key, object]

CH0, CH1, CH01 = 0, 1, 2


class CechDGA:
    """The (infinite) Cech dg-algebra (+)_p C(L^p), acting on sparse elements."""

    def __init__(self, k: int = 1):
        if k < 1:
            raise ValueError("the line bundle must have positive degree")
        self.k = k

    def degree(self, x: Cochain) -> int:
        qs = {key[0] for key in x}
        if len(qs) > 1:
            raise ValueError("inhomogeneous Cech element")
        return qs.pop() if qs else 0

    def mul_mono(self, a: Key, b: Key) -> Optional[Key]:
        qa, pa, ca, ea = a
        qb, pb, cb, eb = b
        if qa == 0 and qb == 0:
            if ca != cb:
                return None
            return (0, pa + pb, ca, ea + eb)
        if qa == 0 and qb == 1:
            if ca != CH0:
                return None
            return (1, pa + pb, CH01, ea + eb)
        if qa == 1 and qb == 0:
            if cb != CH1:
                return None
            return (1, pa + pb, CH01, ea + eb + self.k * pb)
        return None

    def mul(self, x: Cochain, y: Cochain) -> Cochain:
        out: Cochain = {}
        for a, u in x.items():
            for b, v in y.items():
                key = self.mul_mono(a, b)
                if key is not None:
                    nv = out.get(key, 0) + u * v
                    if nv:
                        out[key] = nv
                    else:
                        out.pop(key, None)
        return out

    def d(self, x: Cochain) -> Cochain:
        out: Cochain = {}
        for (q, p, c, e), v in x.items():
            if q != 0:
                continue
            if c == CH0:
                key, s = (1, p, CH01, e), 1
            else:
                key, s = (1, p, CH01, e + self.k * p), -1
            nv = out.get(key, 0) + s * v
            if nv:
                out[key] = nv
            else:
                out.pop(key, None)
        return out

    def unit(self) -> Cochain:
        return {(0, 0, CH0, 0): 1, (0, 0, CH1, 0): 1}


def h0_range(k: int, p: int) -> range:
    return range(0, k * p + 1) if k * p >= 0 else range(0)


def h1_range(k: int, p: int) -> range:
    return range(k * p + 1, 0) if k * p <= -2 else range(0)


def line_bundle_algebra(k: int, window: TruncationWindow) -> BigradedAlgebra:
    """The cohomology algebra A_L = (+)_p H^*(L^p) restricted to the window's p-range."""
    basis: List[Tuple[int, int, int]] = []
    for p in range(window.pmin, window.pmax + 1):
        for e in h0_range(k, p):
            basis.append((0, p, e))
        for e in h1_range(k, p):
            basis.append((1, p, e))
    lookup = {b: i for i, b in enumerate(basis)}
    table = {}
    for i, (q1, p1, e1) in enumerate(basis):
        for j, (q2, p2, e2) in enumerate(basis):
            q, p, e = q1 + q2, p1 + p2, e1 + e2
            if q > 1 or not window.contains(p):
                continue
            o = lookup.get((q, p, e))
            if o is not None:
                table[(i, j)] = {o: 1}
    unit = lookup[(0, 0, 0)]
    weights = [2 * e - k * p for (q, p, e) in basis]
    r1 = [lookup[(0, 1, e)] for e in h0_range(k, 1) if (0, 1, e) in lookup]
    alg = BigradedAlgebra(f"A_L(P1, O({k}))", basis, table, unit, weights=weights,
                          dimension=1, sl2=True, koszul_r1=r1)
    alg.backend = ("P1", k)
    return alg


class Contraction:
    """Deformation retract of the Cech complex onto its cohomology.

    ``include`` and ``project`` are chain maps with project o include = 1 and
    1 - include o project = d Q + Q d.  The side conditions Q^2 = 0,
    Q include = 0 and project Q = 0 hold as well.

    The standard homotopy Q sends t^j in C^1_p to (t^j, 0) for j >= 0, to
    (0, -t^{j-m}) for j <= m with j < 0, and kills the harmonic monomials.
    A perturbation adds a map Z : C^1 -> include(H^0) supported on finitely
    many non-harmonic monomials; then Q' = Q + Z and
    project' = project - project o Z o d on C^0, which is again a contraction.
    """

    def __init__(self, dga: CechDGA, algebra: BigradedAlgebra,
                 perturbation: Optional[Dict[Tuple[int, int], Dict[int, int]]] = None,
                 seed: Optional[int] = None):
        self.dga = dga
        self.k = dga.k
        self.algebra = algebra
        self.perturbation = perturbation or {}
        self.seed = seed
        self._incl_cache: Dict[int, Cochain] = {}

    @property
    def is_standard(self) -> bool:
        return not self.perturbation

    def include(self, idx: int) -> Cochain:
        v = self._incl_cache.get(idx)
        if v is None:
            q, p, e = self.algebra.basis[idx]
            if q == 0:
                v = {(0, p, CH0, e): 1, (0, p, CH1, e - self.k * p): 1}
            else:
                v = {(1, p, CH01, e): 1}
            self._incl_cache[idx] = v
        return v

    def include_vec(self, vec: Dict[int, object]) -> Cochain:
        out: Cochain = {}
        for i, c in vec.items():
            vadd(out, self.include(i), c)
        return out

    def _project_std(self, x: Cochain) -> Dict[int, object]:
        out: Dict[int, object] = {}
        find = self.algebra.find
        for (q, p, c, e), v in x.items():
            m = self.k * p
            if q == 0:
                if c != CH1:
                    continue
                target = m + e
                if 0 <= target <= m:
                    idx = find(0, p, target)
                    if idx is None:
                        raise KeyError(f"H^0 in degree {p} lies outside the algebra window")
                    out[idx] = out.get(idx, 0) + v
            else:
                if m + 1 <= e <= -1:
                    idx = find(1, p, e)
                    if idx is None:
                        raise KeyError(f"H^1 in degree {p} lies outside the algebra window")
                    out[idx] = out.get(idx, 0) + v
        return {i: v for i, v in out.items() if v}

    def project(self, x: Cochain) -> Dict[int, object]:
        out = self._project_std(x)
        if self.perturbation:
            c0 = {key: v for key, v in x.items() if key[0] == 0}
            if c0:
                for (_, p, _, j), v in self.dga.d(c0).items():
                    for idx, c in self.perturbation.get((p, j), {}).items():
                        nv = out.get(idx, 0) - c * v
                        if nv:
                            out[idx] = nv
                        else:
                            out.pop(idx, None)
        return out

    def homotopy(self, x: Cochain) -> Cochain:
        out: Cochain = {}
        for (q, p, c, j), v in x.items():
            if q != 1:
                continue
            m = self.k * p
            if j >= 0:
                key, s = (0, p, CH0, j), 1
            elif j <= m:
                key, s = (0, p, CH1, j - m), -1
            else:
                key = None
            if key is not None:
                nv = out.get(key, 0) + s * v
                if nv:
                    out[key] = nv
                else:
                    del out[key]
            z = self.perturbation.get((p, j))
            if z:
                for idx, cz in z.items():
                    vadd(out, self.include(idx), cz * v)
        return out

    def describe(self) -> str:
        if self.is_standard:
            return "standard"
        return f"perturbed(seed={self.seed}, support={len(self.perturbation)})"


def standard_contraction(k: int, window: TruncationWindow,
                         algebra: Optional[BigradedAlgebra] = None) -> Contraction:
    alg = algebra or line_bundle_algebra(k, window)
    return Contraction(CechDGA(k), alg)


def perturbed_contraction(k: int, window: TruncationWindow, seed: int,
                          algebra: Optional[BigradedAlgebra] = None,
                          density: float = 0.35, span: Optional[int] = None) -> Contraction:
    """Seeded perturbation of the standard homotopy.

    Z is drawn on C^1 monomials t^j of degrees p >= 0 with |j| <= span and
    takes values in include(H^0_p).  If a draw fails validation the seed is
    advanced by one and the draw repeated; the seed actually used is kept on
    the returned object.
    """
    alg = algebra or line_bundle_algebra(k, window)
    span = window.exp_bound if span is None else span
    dga = CechDGA(k)
    for attempt in range(16):
        s = seed + attempt
        rng = random.Random(s)
        pert: Dict[Tuple[int, int], Dict[int, int]] = {}
        for p in range(max(0, window.pmin), window.pmax + 1):
            h0 = [alg.find(0, p, e) for e in h0_range(k, p)]
            h0 = [i for i in h0 if i is not None]
            if not h0:
                continue
            for j in range(-span, span + 1):
                if rng.random() >= density:
                    continue
                tgt = rng.choice(h0)
                c = rng.choice([-2, -1, 1, 2])
                pert[(p, j)] = {tgt: c}
        con = Contraction(dga, alg, pert, seed=s)
        if not pert:
            continue
        if not contraction_violations(con, window, limit=1):
            return con
    raise RuntimeError("could not build a valid perturbed contraction")


# ---------------------------------------------------------------------------
# finite matrix models and the dg-algebra checks

def chain_basis(k: int, p: int, E: int) -> Dict[int, List[Key]]:
    """Exponent-bounded basis of C^0_p and C^1_p."""
    m = k * p
    c0 = [(0, p, CH0, e) for e in range(0, E + 1)] + [(0, p, CH1, e) for e in range(-E, 1)]
    c1 = [(1, p, CH01, e) for e in range(m - E, E + 1)]
    return {0: c0, 1: c1}


def chain_space(k: int, window: TruncationWindow) -> BiGradedSpace:
    blocks = {}
    for p in range(window.pmin, window.pmax + 1):
        b = chain_basis(k, p, window.exp_bound)
        blocks[BiDegree(0, p)] = b[0]
        blocks[BiDegree(1, p)] = b[1]
    return BiGradedSpace(blocks)


def _vector_to_block(space: BiGradedSpace, bd: BiDegree, x: Cochain) -> Optional[Dict[int, object]]:
    out = {}
    for key, v in x.items():
        try:
            out[space.index(bd, key)] = v
        except KeyError:
            return None
    return out


def differential_map(k: int, window: TruncationWindow) -> GradedMap:
    dga = CechDGA(k)
    space = chain_space(k, window)
    blocks = {}
    for p in range(window.pmin, window.pmax + 1):
        src = space.blocks.get(BiDegree(0, p), ())
        rows: Dict[int, Dict[int, object]] = {}
        for j, key in enumerate(src):
            img = _vector_to_block(space, BiDegree(1, p), dga.d({key: 1}))
            if img is None:
                raise ValueError("exp_bound too small for the differential")
            for i, v in img.items():
                rows.setdefault(i, {})[j] = v
        blocks[BiDegree(0, p)] = SparseMatrix(space.dim(BiDegree(1, p)), len(src), rows)
    return GradedMap(space, space, BiDegree(1, 0), blocks)


def cohomology_dims(k: int, window: TruncationWindow) -> Dict[int, Tuple[int, int]]:
    """(dim H^0, dim H^1) per internal degree, computed from the bounded matrices."""
    d = differential_map(k, window)
    out = {}
    for p in range(window.pmin, window.pmax + 1):
        mat = d.block(BiDegree(0, p))
        r = mat.rank()
        out[p] = (mat.ncols - r, mat.nrows - r)
    return out


def expected_dims(k: int, p: int) -> Tuple[int, int]:
    return len(h0_range(k, p)), len(h1_range(k, p))


def contraction_violations(con: Contraction, window: TruncationWindow,
                           limit: Optional[int] = None) -> List[str]:
    """Check the retract identities on every bounded basis vector of the window."""
    dga = con.dga
    k = con.k
    bad: List[str] = []
    for p in range(window.pmin, window.pmax + 1):
        basis = chain_basis(k, p, window.exp_bound)
        for q in (0, 1):
            for key in basis[q]:
                x = {key: 1}
                lhs = vadd(dga.d(con.homotopy(x)), con.homotopy(dga.d(x)))
                rhs = dict(x)
                vadd(rhs, con.include_vec(con.project(x)), -1)
                if lhs != rhs:
                    bad.append(f"retract fails on {key}")
                if con.homotopy(con.homotopy(x)):
                    bad.append(f"Q^2 != 0 on {key}")
                if q == 0 and con.project(dga.d(x)):
                    bad.append(f"project not a chain map on {key}")
                if limit and len(bad) >= limit:
                    return bad
        for idx in con.algebra.blocks.get(BiDegree(0, p), []) + con.algebra.blocks.get(BiDegree(1, p), []):
            ix = con.include(idx)
            if dga.d(ix):
                bad.append(f"include({idx}) is not a cocycle")
            if con.project(ix) != {idx: 1}:
                bad.append(f"project o include != 1 on {idx}")
            if con.homotopy(ix):
                bad.append(f"Q o include != 0 on {idx}")
        for q in (0, 1):
            for key in chain_basis(k, p, window.exp_bound)[q]:
                if con.project(con.homotopy({key: 1})):
                    bad.append(f"project o Q != 0 on {key}")
        if limit and len(bad) >= limit:
            return bad[:limit]
    return bad


def _product_table(dga: CechDGA, E: int, p1: int, p2: int) -> np.ndarray:
    """Index table of the monomial product C_{p1} x C_{p2} -> C_{p1+p2}.

    Entry -1 means the product vanishes, -2 that it leaves the exponent bound.
    Two extra rows (for left factors that are themselves -1 or -2) propagate
    those markers, so tables can be chained by fancy indexing.
    """
    k = dga.k
    b1 = chain_basis(k, p1, E)
    b2 = chain_basis(k, p2, E)
    b12 = chain_basis(k, p1 + p2, E)
    keys1, keys2 = b1[0] + b1[1], b2[0] + b2[1]
    idx = {key: i for i, key in enumerate(b12[0] + b12[1])}
    arr = np.full((len(keys1) + 2, len(keys2) + 2), -1, dtype=np.int64)
    # index -1 (vanishing factor) lands in the last row/column, -2 in the one before
    arr[-2, :] = -2
    arr[:, -2] = -2
    arr[-1, :] = -1
    arr[:, -1] = -1
    for i, x in enumerate(keys1):
        for j, y in enumerate(keys2):
            key = dga.mul_mono(x, y)
            if key is not None:
                arr[i, j] = idx.get(key, -2)
    return arr


def associativity_violations(k: int, window: TruncationWindow) -> Tuple[int, int]:
    """Compare (xy)z with x(yz) on all bounded basis triples of admissible degrees.

    Returns (number of triples compared, number of disagreements).  Triples in
    which some product leaves the exponent bound are outside the window
    interior and are not compared.  Products of Cech monomials are monomials
    with coefficient one, so comparing result indices is an exact check.
    """
    dga = CechDGA(k)
    E = window.exp_bound
    ps = range(window.pmin, window.pmax + 1)
    tables: Dict[Tuple[int, int], np.ndarray] = {}

    def table(a, b):
        t = tables.get((a, b))
        if t is None:
            t = tables[(a, b)] = _product_table(dga, E, a, b)
        return t

    checked = bad = 0
    for p1 in ps:
        for p2 in ps:
            if not window.contains(p1 + p2):
                continue
            t12 = table(p1, p2)[:-2, :-2]
            for p3 in ps:
                if not window.admissible([p1, p2, p3]):
                    continue
                t23 = table(p2, p3)[:-2, :-2]
                tl = table(p1 + p2, p3)
                tr = table(p1, p2 + p3)
                n3 = t23.shape[1]
                left = tl[t12[:, :, None], np.arange(n3)[None, None, :]]
                right = tr[np.arange(t12.shape[0])[:, None, None], t23[None, :, :]]
                interior = ((t12 != -2)[:, :, None] & (t23 != -2)[None, :, :]
                            & (left != -2) & (right != -2))
                checked += int(interior.sum())
                bad += int((interior & (left != right)).sum())
    return checked, bad


def leibniz_violations(k: int, window: TruncationWindow) -> Tuple[int, int]:
    """d(xy) = dx.y + (-1)^{|x|} x.dy on bounded basis pairs of the window interior."""
    dga = CechDGA(k)
    E = window.exp_bound
    checked = bad = 0
    ps = range(window.pmin, window.pmax + 1)
    for p1 in ps:
        b1 = chain_basis(k, p1, E)
        for p2 in ps:
            if not window.contains(p1 + p2):
                continue
            b2 = chain_basis(k, p2, E)
            lim1 = chain_basis(k, p1 + p2, E)
            c1keys = set(lim1[1])
            c0keys = set(lim1[0])
            for q1 in (0, 1):
                for x in b1[q1]:
                    for q2 in (0, 1):
                        if q1 + q2 > 1:
                            continue
                        for y in b2[q2]:
                            xy = dga.mul({x: 1}, {y: 1})
                            lhs = dga.d(xy)
                            rhs = dga.mul(dga.d({x: 1}), {y: 1})
                            vadd(rhs, dga.mul({x: 1}, dga.d({y: 1})), -1 if q1 else 1)
                            keys = set(xy) | set(lhs) | set(rhs)
                            if not all(kk in c0keys or kk in c1keys for kk in keys):
                                continue
                            checked += 1
                            if lhs != rhs:
                                bad += 1
    return checked, bad


@dataclass
class DGAReport:
    window: TruncationWindow
    k: int
    d_squared_zero: bool
    leibniz_checked: int
    leibniz_failures: int
    assoc_checked: int
    assoc_failures: int
    retract_failures: List[str]
    dims: Dict[int, Tuple[int, int]]
    dims_ok: bool

    @property
    def ok(self) -> bool:
        return (self.d_squared_zero and not self.leibniz_failures and not self.assoc_failures
                and not self.retract_failures and self.dims_ok)

    def lines(self) -> List[str]:
        out = [f"window: {self.window.describe()}",
               f"d^2 = 0: {'yes' if self.d_squared_zero else 'no'}",
               f"Leibniz: {self.leibniz_checked} pairs, {self.leibniz_failures} failures",
               f"associativity: {self.assoc_checked} triples, {self.assoc_failures} failures",
               f"retract identities: {'yes' if not self.retract_failures else 'no'}"]
        for p, (h0, h1) in sorted(self.dims.items()):
            out.append(f"H(L^{p}): h0={h0} h1={h1}")
        return out


def verify_dga(k: int, window: TruncationWindow, contraction: Optional[Contraction] = None) -> DGAReport:
    d = differential_map(k, window)
    dd = d.compose(d)
    d_sq = dd.is_zero()
    lc, lb = leibniz_violations(k, window)
    ac, ab = associativity_violations(k, window)
    con = contraction or standard_contraction(k, window)
    retract = contraction_violations(con, window)
    dims = cohomology_dims(k, window)
    dims_ok = all(dims[p] == expected_dims(k, p) for p in dims)
    return DGAReport(window, k, d_sq, lc, lb, ac, ab, retract, dims, dims_ok)
