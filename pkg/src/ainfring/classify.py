"""Obstruction theory on top of the Hochschild machinery.

Sign conventions (all verified numerically, see the tests):

* a strict isomorphism with a single component f_{n-1} changes m_n by
  -delta(f_{n-1}) (m-form), so an obstruction c = delta(b) is killed by
  f_{n-1} = -b;
* adding a homotopy component h_{n-1} changes the extended morphism at arity
  n by +delta(h_{n-1}), so a morphism discrepancy c = delta(b) is absorbed by
  h_{n-1} = +b.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

from .ainfty import (AInfinityStructure, Homotopy, Morphism, admissibility_check, apply_multi,
                     apply_strict_iso, check_homotopy, compose, formal_structure, from_m_form,
                     homotopy_extend, identity_iso, rescale, single_component_iso, zero_homotopy)
from .bigraded import BigradedAlgebra, TruncationWindow, vadd
from .cech import CH0, CH1, CH01, Cochain, Contraction, line_bundle_algebra, standard_contraction
from .errors import AinfError, NotAdmissible, NotConnectable, NotStabilized, WindowTooSmall
from .hochschild import (HochschildCochain, HypothesisFailed, NotCoboundary, class_coordinates,
                         hh_dim, hochschild_differential, morphism_difference, solve_coboundary,
                         structure_difference)


class PrefixMismatch(NotAdmissible):
    def __init__(self, msg: str, arity: int):
        super().__init__(msg)
        self.arity = arity


class BetaNormalization(AinfError):
    pass


# ---------------------------------------------------------------------------
# backends and generators

def algebra_family(alg: BigradedAlgebra) -> Callable[[TruncationWindow], BigradedAlgebra]:
    """The algebra of the same backend on another window."""
    backend = getattr(alg, "backend", None)
    if backend is None:
        raise WindowTooSmall("the algebra has no backend, so it cannot be rebuilt on another window")
    kind, param = backend
    if kind == "P1":
        return lambda w: line_bundle_algebra(param, w)
    if kind == "curve":
        return lambda w: alg
    raise ValueError(f"unknown backend {kind}")


_GENERATORS: Dict[tuple, HochschildCochain] = {}


def canonical_m3(alg: BigradedAlgebra, window: TruncationWindow) -> HochschildCochain:
    """The transferred m_3 (standard contraction) as a cochain in C^3_{0,1}."""
    from .transfer import transfer
    backend = getattr(alg, "backend", None)
    if not backend or backend[0] != "P1":
        raise ValueError("the canonical class is only defined for line-bundle algebras")
    key = (backend, window.pmin, window.pmax)
    c = _GENERATORS.get(key)
    if c is None:
        w3 = window.with_arity(3)
        con = standard_contraction(backend[1], w3, alg)
        m, _ = transfer(con, w3, 3)
        c = structure_difference(m, formal_structure(alg, w3), 3)
        _GENERATORS[key] = c
    return HochschildCochain(alg, window, 3, 0, 1, c.comps)


def hh_generators(alg: BigradedAlgebra, window: TruncationWindow, n: int, q: int) -> List[HochschildCochain]:
    """Known generators of HH^n_{0,q}: [m_3] for (3, 1) on line-bundle algebras."""
    backend = getattr(alg, "backend", None)
    if (n, q) == (3, 1) and backend and backend[0] == "P1":
        return [canonical_m3(alg, window)]
    return []


def _same_space(m: AInfinityStructure, mp: AInfinityStructure):
    if m.algebra.basis != mp.algebra.basis or (m.window.pmin, m.window.pmax) != (mp.window.pmin, mp.window.pmax):
        raise NotAdmissible("the two structures live on different algebras or windows")


def _require_admissible(m: AInfinityStructure):
    rep = admissibility_check(m)
    if not rep.ok:
        raise NotAdmissible("; ".join(rep.problems[:3]))


# ---------------------------------------------------------------------------
# obstruction classes

@dataclass
class ObstructionClass:
    n: int
    cocycle: HochschildCochain
    is_coboundary: bool
    class_vector: Optional[List] = None
    primitive: Optional[HochschildCochain] = None

    @property
    def zero(self) -> bool:
        return self.is_coboundary

    def lines(self) -> List[str]:
        cv = "0" if self.is_coboundary else (str(self.class_vector) if self.class_vector is not None else "nonzero")
        return [f"obstruction in C^{self.n}_{{0,{self.n - 2}}}: {sum(len(v) for v in self.cocycle.comps.values())} entries",
                f"class: {cv}"]


def cochain_class(c: HochschildCochain) -> ObstructionClass:
    """Decide whether a cocycle is exact and, if not, express it in known generators."""
    if not hochschild_differential(c).is_zero():
        raise AinfError(f"the cochain in C^{c.n}_{{{c.p},{c.q}}} is not a cocycle")
    if c.is_zero():
        return ObstructionClass(c.n, c, True, [0] * len(hh_generators(c.algebra, c.window, c.n, c.q)) or None,
                                HochschildCochain(c.algebra, c.window, c.n - 1, c.p, c.q, {}))
    try:
        b = solve_coboundary(c)
        gens = hh_generators(c.algebra, c.window, c.n, c.q)
        return ObstructionClass(c.n, c, True, [0] * len(gens) or None, b)
    except NotCoboundary:
        gens = hh_generators(c.algebra, c.window, c.n, c.q)
        coords = class_coordinates(c, gens) if gens else None
        return ObstructionClass(c.n, c, False, coords)


def obstruction_cocycle(m: AInfinityStructure, mp: AInfinityStructure, n: int) -> ObstructionClass:
    """c = m'_n - m_n, valid when the two structures agree below arity n."""
    _same_space(m, mp)
    for i in range(2, n):
        if m.op(i) != mp.op(i):
            raise PrefixMismatch(f"the structures already differ in arity {i}", i)
    return cochain_class(structure_difference(mp, m, n))


@dataclass
class TrivialityResult:
    nontrivial: bool
    obstruction: ObstructionClass
    hh_dimension: Optional[int] = None
    windows: Tuple[str, ...] = ()

    @property
    def class_vector(self):
        return self.obstruction.class_vector

    def lines(self) -> List[str]:
        out = [f"verdict: {'nontrivial' if self.nontrivial else 'trivial'}"]
        out += self.obstruction.lines()
        if self.hh_dimension is not None:
            out.append(f"dim HH^3_{{0,1}} = {self.hh_dimension} (stable on {', '.join(self.windows)})")
        return out


def triviality_test(m: AInfinityStructure, stabilize: bool = True,
                    outer: Optional[TruncationWindow] = None) -> TrivialityResult:
    """Nontrivial iff [m_{d+2}] != 0.

    A cocycle that is not exact on some window is not exact on any larger
    window (the window complex is a quotient), so a nonzero verdict is
    final.  When ``stabilize`` is set the dimension of the ambient HH group is
    also computed on the window and an enlarged one and must agree.
    """
    _require_admissible(m)
    alg = m.algebra
    d = alg.dimension
    n = d + 2
    obs = cochain_class(structure_difference(m, formal_structure(alg, m.window), n))
    res = TrivialityResult(not obs.is_coboundary, obs)
    if stabilize:
        inner = m.window.with_arity(n)
        out_w = (outer or inner.enlarged(2)).with_arity(n)
        fam = algebra_family(alg)
        hh = hh_dim(fam, n, 0, d, inner, out_w,
                    candidates_for=lambda a, w: hh_generators(a, w, n, d))
        if not hh.stabilized:
            raise NotStabilized(f"HH^{n}_{{0,{d}}} differs between {inner.describe()} and {out_w.describe()}")
        res.hh_dimension = hh.value
        res.windows = (f"[{inner.pmin},{inner.pmax}]", f"[{out_w.pmin},{out_w.pmax}]")
    return res


# ---------------------------------------------------------------------------
# strictification

@dataclass
class Certificate:
    lam: object
    iso: Morphism
    verified_arity: int
    classes: Tuple[Optional[list], Optional[list]] = (None, None)
    steps: List[int] = field(default_factory=list)

    def lines(self) -> List[str]:
        comps = {n: sum(len(v) for v in c.values()) for n, c in self.iso.comps.items() if c}
        return [f"certificate: lambda = {self.lam}",
                f"verified through arity {self.verified_arity}",
                f"obstructions killed at arities {self.steps or 'none'}",
                f"iso component sizes: {comps or 'identity'}"]


@dataclass
class DistinctClasses:
    class_m: Optional[list]
    class_mprime: Optional[list]
    reason: str

    def lines(self) -> List[str]:
        return ["distinct classes: " + self.reason,
                f"class of m: {self.class_m if self.class_m is not None else 'nonzero'}",
                f"class of m': {self.class_mprime if self.class_mprime is not None else 'nonzero'}"]


def _norm(x):
    x = Fraction(x)
    return x.numerator if x.denominator == 1 else x


def _solve_lambda(c: HochschildCochain, cp: HochschildCochain, d: int):
    """lambda with [c'] = lambda^d [c], or a DistinctClasses explanation."""
    oc, ocp = cochain_class(c), cochain_class(cp)
    if oc.is_coboundary and ocp.is_coboundary:
        return 1, oc, ocp
    if oc.is_coboundary != ocp.is_coboundary:
        return DistinctClasses(oc.class_vector if not oc.is_coboundary else [0],
                               ocp.class_vector if not ocp.is_coboundary else [0],
                               "one class vanishes and the other does not"), oc, ocp
    coords = class_coordinates(cp, [c])
    if coords is None:
        return DistinctClasses(oc.class_vector, ocp.class_vector, "the classes are not proportional"), oc, ocp
    mu = Fraction(coords[0])
    if d == 1:
        return _norm(mu), oc, ocp
    for cand in _rational_roots(mu, d):
        return _norm(cand), oc, ocp
    return DistinctClasses(oc.class_vector, ocp.class_vector,
                           f"ratio {mu} has no {d}-th root in the field"), oc, ocp


def _rational_roots(mu: Fraction, d: int) -> List[Fraction]:
    def iroot(n):
        r = round(abs(n) ** (1.0 / d))
        for cand in (r - 1, r, r + 1):
            if cand >= 0 and cand ** d == abs(n):
                return cand
        return None
    a, b = iroot(mu.numerator), iroot(mu.denominator)
    if a is None or b is None:
        return []
    root = Fraction(a, b)
    if mu < 0:
        return [-root] if d % 2 else []
    return [root]


def strictify(m: AInfinityStructure, mp: AInfinityStructure, allow_rescaling: bool = True,
              max_arity: Optional[int] = None):
    """A strict iso g and lambda with g*(rescale(m, lambda)) = m', or DistinctClasses."""
    _same_space(m, mp)
    _require_admissible(m)
    _require_admissible(mp)
    alg = m.algebra
    d = alg.dimension
    N = max_arity or min(m.max_arity, mp.max_arity)
    n0 = d + 2
    lam = 1
    classes = (None, None)
    if N >= n0:
        for i in range(2, n0):
            if m.op(i) != mp.op(i):
                raise PrefixMismatch(f"the structures differ in arity {i}", i)
        c = structure_difference(m, formal_structure(alg, m.window), n0)
        cp = structure_difference(mp, formal_structure(alg, m.window), n0)
        if c != cp:
            diff = cochain_class(cp - c)
            if not diff.is_coboundary:
                if not allow_rescaling:
                    return DistinctClasses(cochain_class(c).class_vector, cochain_class(cp).class_vector,
                                           "the classes differ and rescaling is not allowed")
                lam, oc, ocp = _solve_lambda(c, cp, d)
                classes = (oc.class_vector, ocp.class_vector)
                if isinstance(lam, DistinctClasses):
                    return lam
    base = rescale(m, lam) if lam != 1 else m
    g = identity_iso()
    cur = base
    steps = []
    for n in range(n0, N + 1):
        c = structure_difference(mp, cur, n)
        if c.is_zero():
            continue
        try:
            b = solve_coboundary(c)
        except NotCoboundary as exc:
            raise NotConnectable(f"obstruction at arity {n} is not exact: {exc}") from exc
        f = single_component_iso(n - 1, from_m_form(alg, {t: {o: -v for o, v in vec.items()}
                                                          for t, vec in b.comps.items()}))
        g = compose(f, g, alg, m.window, N)
        cur = apply_strict_iso(g, base, N)
        steps.append(n)
    g.label = "strictify"
    if not apply_strict_iso(g, base, N).same_ops(mp, N):
        raise AinfError("strictification certificate does not reproduce the target structure")
    return Certificate(lam, g, N, classes, steps)


def verify_certificate(cert: Certificate, m: AInfinityStructure, mp: AInfinityStructure) -> bool:
    base = rescale(m, cert.lam) if cert.lam != 1 else m
    return apply_strict_iso(cert.iso, base, cert.verified_arity).same_ops(mp, cert.verified_arity)


# ---------------------------------------------------------------------------
# homotopy connection

def homotopy_connect(f: Morphism, fp: Morphism, m: AInfinityStructure, mp: AInfinityStructure,
                     max_arity: Optional[int] = None) -> Homotopy:
    """A homotopy h from f to f' (both strict isos m -> m')."""
    alg = m.algebra
    N = max_arity or m.max_arity
    for name, g in (("f", f), ("f'", fp)):
        if not g.is_strict:
            raise NotConnectable(f"{name} is not a strict isomorphism")
        if not apply_strict_iso(g, m, N).same_ops(mp, N):
            raise NotConnectable(f"{name} does not carry m to m'")
    h = zero_homotopy()
    for n in range(2, N + 1):
        cur = homotopy_extend(f, h, m, mp, n)
        c = morphism_difference(alg, m.window, fp, cur, n)
        if c.is_zero():
            continue
        try:
            b = solve_coboundary(c)
        except NotCoboundary as exc:
            raise NotConnectable(f"morphism obstruction at arity {n} is not exact") from exc
        h = h.plus(n - 1, from_m_form(alg, b.comps))
    h.label = "connect"
    rep = check_homotopy(f, fp, h, m, mp, N)
    if not rep.ok or not homotopy_extend(f, h, m, mp, N).same(fp, N):
        raise AinfError("homotopy_connect produced an invalid homotopy")
    return h


# ---------------------------------------------------------------------------
# the Koszul Massey product

@dataclass
class MasseyResult:
    value: object
    oracle: object
    beta: Dict[int, object]
    sections: Tuple[Dict[int, object], Dict[int, object]]
    syzygy: Tuple[Dict[int, object], Dict[int, object]]
    terms: List[object]

    @property
    def ok(self) -> bool:
        return self.value == self.oracle and abs(self.value) == 1

    def lines(self) -> List[str]:
        return [f"Massey value: {self.value}",
                f"oracle value: {self.oracle}",
                f"terms m3(s_j, sigma_j, beta): {self.terms}",
                f"agreement: {'yes' if self.value == self.oracle else 'no'}"]


def _solve_bounding(con: Contraction, target: Cochain, p: int) -> Cochain:
    """A degree-0 cochain x in C^0_p with d x = target, by brute-force linear algebra."""
    from .exactla import QQ, Echelon
    k = con.k
    if not target:
        return {}
    es = [key[3] for key in target]
    span = max(abs(e) for e in es) + abs(k * p) + 2
    cols = [(0, p, CH0, e) for e in range(0, span + 1)] + [(0, p, CH1, e) for e in range(-span, 1)]
    rows: Dict[tuple, Dict[int, object]] = {}
    for j, key in enumerate(cols):
        for r, v in con.dga.d({key: 1}).items():
            rows.setdefault(r, {})[j] = v
    ech = Echelon(QQ, track_rhs=True)
    for r in sorted(set(rows) | set(target)):
        row = rows.get(r, {})
        b = target.get(r, 0)
        if row:
            ech.add_row(dict(row), b)
            if not ech.consistent:
                raise BetaNormalization("the cochain is not a coboundary")
        elif b:
            raise BetaNormalization("the cochain is not a coboundary")
    sol = ech.solution()
    return {cols[j]: v for j, v in sol.items() if v}


def koszul_data(con: Contraction):
    """Sections s = (x^k, y^k), syzygy sigma = (-y^k, x^k) and the connecting class beta."""
    alg = con.algebra
    k = con.k
    if alg.blocks.get((0, -1)):
        raise HypothesisFailed("Hom(L, O) = H^0(L^{-1}) is nonzero", 0)
    if not alg.blocks.get((1, -2)):
        raise WindowTooSmall("H^1(L^{-2}) is outside the window")
    xk = alg.find(0, 1, k)
    yk = alg.find(0, 1, 0)
    if xk is None or yk is None:
        raise WindowTooSmall("H^0(L) is outside the window")
    s = ({xk: 1}, {yk: 1})
    sigma = ({yk: -1}, {xk: 1})
    dga = con.dga
    # lift of 1 through s: chart 0 uses y^k (b = 1), chart 1 uses x^k (a = 1)
    lift = ({(0, -1, CH1, 0): 1}, {(0, -1, CH0, 0): 1})
    total: Cochain = {}
    for sj, lj in zip(s, lift):
        vadd(total, dga.mul(con.include_vec(sj), lj))
    if total != dga.unit():
        raise BetaNormalization("the chosen lift does not map to 1")
    dl = [dga.d(lj) for lj in lift]
    # solve sigma_j . g = d(lift_j) for g in C^1_{-2}
    from .exactla import QQ, Echelon
    span = 4 * k + 4
    cols = [(1, -2, CH01, e) for e in range(-span, span + 1)]
    ech = Echelon(QQ, track_rhs=True)
    rows: Dict[tuple, Dict[int, object]] = {}
    for j, key in enumerate(cols):
        for idx in range(2):
            for r, v in dga.mul(con.include_vec(sigma[idx]), {key: 1}).items():
                rows.setdefault((idx, r), {})[j] = v
    targets = {(idx, r): v for idx in range(2) for r, v in dl[idx].items()}
    for r in sorted(set(rows) | set(targets)):
        row = rows.get(r, {})
        b = targets.get(r, 0)
        if row:
            ech.add_row(dict(row), b)
            if not ech.consistent:
                raise BetaNormalization("d(lift) is not in the image of sigma")
        elif b:
            raise BetaNormalization("d(lift) is not in the image of sigma")
    g = {cols[j]: v for j, v in ech.solution().items() if v}
    beta = con.project(g)
    if not beta:
        raise BetaNormalization("the connecting class vanishes")
    return s, sigma, g, beta


def massey_oracle(con: Contraction, s, sigma, g: Cochain) -> object:
    """The triple product <s, sigma, beta> computed by bounding cochains in the Cech complex."""
    dga = con.dga
    ss = {}
    for sj, tj in zip(s, sigma):
        vadd(ss, dga.mul(con.include_vec(sj), con.include_vec(tj)))
    if ss:
        raise BetaNormalization("s . sigma is not zero on the cochain level")
    acc: Cochain = {}
    for sj, tj in zip(s, sigma):
        target = dga.mul(con.include_vec(tj), g)
        v = _solve_bounding(con, target, -1)
        vadd(acc, dga.mul(con.include_vec(sj), v))
    val = con.project(acc)
    unit = con.algebra.unit
    if any(i != unit for i in val):
        raise AinfError("the Massey product left H^0(O)")
    return -val.get(unit, 0)


def massey_koszul_check(con: Contraction, m: AInfinityStructure) -> MasseyResult:
    """sum_j m3(s_j, sigma_j, beta) for the Koszul data, compared with the Cech oracle."""
    s, sigma, g, beta = koszul_data(con)
    m3 = m.m(3)
    unit = m.algebra.unit
    terms = []
    total: Dict[int, object] = {}
    for sj, tj in zip(s, sigma):
        v = apply_multi(m3, [sj, tj, beta])
        if any(i != unit for i in v):
            raise AinfError("m3 on the Koszul triple left H^0(O)")
        terms.append(v.get(unit, 0))
        vadd(total, v)
    value = total.get(unit, 0)
    oracle = massey_oracle(con, s, sigma, g)
    return MasseyResult(value, oracle, beta, s, sigma, terms)
