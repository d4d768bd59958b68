"""Command-line interface.

Exit codes: 0 verified, 1 verified-negative, 2 usage or malformed input,
3 window too small or not stabilized, 4 internal invariant failure.

Defaults come from a JSON config file given by ``--config`` or the
``AINFRING_CONFIG`` environment variable::

    {"field": "QQ" | <prime>, "window": {"pmin": -4, "pmax": 4, "max_arity": 4,
     "exp_bound": 8}, "seed": 0, "output_dir": "out"}
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from typing import List, Optional, Sequence

from . import formats
from .errors import AinfError, FormatError, WindowTooSmall
from .exactla import DEFAULT_PRIME
from .bigraded import TruncationWindow

CONFIG_ENV = "AINFRING_CONFIG"


class UsageError(AinfError):
    exit_code = 2


# ---------------------------------------------------------------------------
# configuration

@dataclass
class Config:
    prime: Optional[int] = DEFAULT_PRIME  # None means exact rationals everywhere
    window: TruncationWindow = TruncationWindow(-4, 4, 4, 8)
    seed: int = 0
    output_dir: str = "out"

    def validate(self):
        if self.prime is not None:
            if self.prime <= self.window.max_arity:
                raise UsageError(f"prime {self.prime} must exceed max_arity {self.window.max_arity}")
            if self.prime < 2 or any(self.prime % d == 0 for d in range(2, int(self.prime ** 0.5) + 1)):
                raise UsageError(f"{self.prime} is not a prime")
        return self


def load_config(path: Optional[str]) -> Config:
    path = path or os.environ.get(CONFIG_ENV)
    cfg = Config()
    if not path:
        return cfg
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    unknown = set(raw) - {"field", "window", "seed", "output_dir"}
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    fld = raw.get("field", "prime")
    if fld == "QQ":
        cfg.prime = None
    elif isinstance(fld, int):
        cfg.prime = fld
    elif fld != "prime":
        raise UsageError("field must be \"QQ\" or a prime number")
    if "window" in raw:
        w = raw["window"]
        try:
            cfg.window = TruncationWindow(int(w["pmin"]), int(w["pmax"]), int(w.get("max_arity", 4)),
                                          int(w.get("exp_bound", 2 * max(abs(w["pmin"]), abs(w["pmax"])))))
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"bad window in config: {exc}") from None
    cfg.seed = int(raw.get("seed", 0))
    cfg.output_dir = str(raw.get("output_dir", "out"))
    return cfg.validate()


def _window(args, cfg: Config, arity: Optional[int] = None) -> TruncationWindow:
    w = cfg.window
    pmin = args.pmin if getattr(args, "pmin", None) is not None else w.pmin
    pmax = args.pmax if getattr(args, "pmax", None) is not None else w.pmax
    exp = getattr(args, "exp", None)
    exp = exp if exp is not None else w.exp_bound
    n = arity or getattr(args, "max_arity", None) or w.max_arity
    if pmin > pmax:
        raise UsageError(f"pmin {pmin} exceeds pmax {pmax}")
    if n < 1:
        raise UsageError("max-arity must be positive")
    if exp < max(abs(pmin), abs(pmax)):
        raise UsageError(f"exp bound {exp} is below max |p| = {max(abs(pmin), abs(pmax))}")
    win = TruncationWindow(pmin, pmax, n, exp)
    Config(cfg.prime, win, cfg.seed, cfg.output_dir).validate()
    return win


def _prime(cfg: Config) -> Optional[int]:
    return cfg.prime


# ---------------------------------------------------------------------------
# output helpers

class Out:
    def __init__(self, directory: str):
        self.dir = directory
        self.written: List[str] = []

    def write(self, name: str, text: str) -> str:
        path = os.path.join(self.dir, name)
        formats.write_atomic(path, text)
        self.written.append(path)
        return path


def _say(lines: Sequence[str]):
    for ln in lines:
        print(ln)


def _verdict(out: Out, name: str, command: str, ok: bool, lines: Sequence[str], extra=()) -> int:
    out.write(name, formats.verdict_text(command, "pass" if ok else "fail", lines, extra))
    _say(lines)
    return 0 if ok else 1


def _load_structure(path: str, alg=None):
    return formats.structure_from_doc(formats.read(path, "structure"), alg)


def _check_same_algebra(*docs):
    hashes = {d.get("algebra_hash") for d in docs}
    if len(hashes) > 1:
        raise FormatError("input files belong to different algebras or windows (algebra hash mismatch)")


# ---------------------------------------------------------------------------
# subcommands

def cmd_geom(args, cfg: Config) -> int:
    from .cech import cohomology_dims, verify_dga
    if args.exp is None:
        raise UsageError("--exp (monomial exponent bound) is required")
    w = _window(args, cfg)
    rep = verify_dga(args.k, w)
    dims = cohomology_dims(args.k, w)
    out = Out(args.out or cfg.output_dir)
    body = [f"{p} {h0} {h1}" for p, (h0, h1) in sorted(dims.items())]
    out.write(args.name + ".dga", formats.emit("dga", [("k", args.k), ("window", formats.fmt_window(w))], body))
    table = ["p  h0  h1"] + [f"{p:>3} {h0:>3} {h1:>3}" for p, (h0, h1) in sorted(dims.items())]
    return _verdict(out, args.name + ".geom.verdict", "geom", rep.ok, table + rep.lines())


def _load_dga(path: str):
    doc = formats.read(path, "dga")
    return int(doc.get("k")), formats.parse_window(doc.get("window"))


def _contraction(k, w, kind: str, seed: int, alg=None):
    from .cech import perturbed_contraction, standard_contraction
    if kind == "standard":
        return standard_contraction(k, w, alg)
    if kind == "perturbed":
        return perturbed_contraction(k, w, seed, alg)
    raise UsageError(f"unknown contraction {kind!r}")


def _transfer_check(con, m, phi, N):
    from .ainfty import coderivation_square_check, morphism_check, stasheff_check
    from .transfer import CechTarget
    st = stasheff_check(m, N)
    co = coderivation_square_check(m, N)
    mc = morphism_check(phi, m, CechTarget(con.dga), min(N, 4), project=con.project)
    return st, co, mc


def cmd_transfer(args, cfg: Config) -> int:
    from .transfer import transfer
    k, dw = _load_dga(args.dga)
    N = args.max_arity or cfg.window.max_arity
    w = dw.with_arity(N)
    Config(cfg.prime, w).validate()
    con = _contraction(k, w, args.contraction, args.seed if args.seed is not None else cfg.seed)
    out = Out(args.out or cfg.output_dir)
    if args.formal:
        from .ainfty import formal_structure, stasheff_check
        m = formal_structure(con.algebra, w)
        out.write(args.name + ".st", formats.structure_to_text(m))
        st = stasheff_check(m, N)
        return _verdict(out, args.name + ".transfer.verdict", "transfer", st.ok, st.lines())
    m, phi = transfer(con, w, N)
    st, co, mc = _transfer_check(con, m, phi, N)
    ok = st.ok and co.ok and mc.ok and st.ok == co.ok
    cdesc = args.contraction if args.contraction == "standard" else f"perturbed:{con.seed}"
    text = formats.structure_to_text(m, [("contraction", cdesc)])
    out.write(args.name + ".st", text)
    cert = formats.emit("transfer", [("k", k), ("window", formats.fmt_window(w)), ("contraction", cdesc),
                                     ("structure", formats.document_hash(text))],
                        ["phi_1 = include; phi_n = -Q(P_n); m_n = project(P_n)"])
    out.write(args.name + ".tm", cert)
    lines = st.lines() + [f"coderivation square: {'pass' if co.ok else 'FAIL'}"] + mc.lines()
    return _verdict(out, args.name + ".transfer.verdict", "transfer", ok, lines)


def _rebuild_contraction(desc: str, k, w, alg=None):
    if desc == "standard":
        return _contraction(k, w, "standard", 0, alg)
    if desc.startswith("perturbed:"):
        return _contraction(k, w, "perturbed", int(desc.split(":", 1)[1]), alg)
    raise FormatError(f"unknown contraction descriptor {desc!r}")


def cmd_check(args, cfg: Config) -> int:
    from .ainfty import (admissibility_check, check_homotopy, coderivation_square_check, morphism_check,
                         stasheff_check)
    doc = formats.read(args.file)
    out = Out(args.out or cfg.output_dir)
    name = os.path.basename(args.file) + ".check.verdict"
    if doc.kind == "structure":
        m = formats.structure_from_doc(doc)
        st = stasheff_check(m)
        co = coderivation_square_check(m)
        adm = admissibility_check(m)
        ok = st.ok and co.ok and adm.ok
        lines = st.lines() + [f"coderivation square: {'pass' if co.ok else 'FAIL'}"] + adm.lines()
        return _verdict(out, name, "check", ok, lines)
    if doc.kind == "transfer":
        if not args.structure:
            raise UsageError("checking a transfer certificate needs --structure")
        from .transfer import CechTarget, transfer
        sdoc = formats.read(args.structure, "structure")
        if formats.document_hash(_read_text(args.structure)) != doc.get("structure"):
            raise FormatError("the structure file is not the one named in the certificate")
        m = formats.structure_from_doc(sdoc)
        k = int(doc.get("k"))
        w = formats.parse_window(doc.get("window"))
        con = _rebuild_contraction(doc.get("contraction"), k, w, m.algebra)
        m2, phi = transfer(con, w, w.max_arity)
        same = m2.same_ops(m, w.max_arity)
        mc = morphism_check(phi, m, CechTarget(con.dga), min(4, w.max_arity), project=con.project)
        lines = [f"structure reproduced: {'yes' if same else 'no'}"] + mc.lines()
        return _verdict(out, name, "check", same and mc.ok, lines)
    if doc.kind == "certificate":
        from .classify import Certificate, verify_certificate
        if not (args.m and args.mprime):
            raise UsageError("checking a certificate needs --m and --mprime")
        mdoc, mpdoc = formats.read(args.m, "structure"), formats.read(args.mprime, "structure")
        _check_same_algebra(doc, mdoc, mpdoc)
        m, mp = formats.structure_from_doc(mdoc), formats.structure_from_doc(mpdoc, None)
        iso = formats.morphism_from_doc(doc, m.algebra)
        cert = Certificate(formats.parse_coef(doc.get("lambda")), iso, int(doc.get("verified_arity")))
        ok = verify_certificate(cert, m, mp)
        return _verdict(out, name, "check", ok, [f"certificate reproduces m': {'yes' if ok else 'no'}",
                                                 f"lambda = {doc.get('lambda')}"])
    if doc.kind == "morphism":
        if not (args.m and args.mprime):
            raise UsageError("checking a morphism needs --m (source) and --mprime (target)")
        mdoc, mpdoc = formats.read(args.m, "structure"), formats.read(args.mprime, "structure")
        _check_same_algebra(doc, mdoc, mpdoc)
        m, mp = formats.structure_from_doc(mdoc), formats.structure_from_doc(mpdoc)
        f = formats.morphism_from_doc(doc, m.algebra)
        rep = morphism_check(f, m, mp)
        return _verdict(out, name, "check", rep.ok, rep.lines())
    if doc.kind == "homotopy":
        if not (args.m and args.mprime and args.f and args.fprime):
            raise UsageError("checking a homotopy needs --m, --mprime, --f and --fprime")
        docs = [formats.read(p) for p in (args.m, args.mprime, args.f, args.fprime)]
        _check_same_algebra(doc, *docs)
        m, mp = formats.structure_from_doc(docs[0]), formats.structure_from_doc(docs[1])
        f, fp = formats.morphism_from_doc(docs[2], m.algebra), formats.morphism_from_doc(docs[3], m.algebra)
        h = formats.homotopy_from_doc(doc, m.algebra)
        rep = check_homotopy(f, fp, h, m, mp)
        return _verdict(out, name, "check", rep.ok, rep.lines())
    raise UsageError(f"cannot check a {doc.kind} file")


def _read_text(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _algebra_family(desc: str):
    return lambda w: formats.algebra_from_descriptor(desc, w)


def cmd_hh(args, cfg: Config) -> int:
    from .classify import hh_generators
    from .hochschild import hh_dim
    w = _window(args, cfg, arity=max(args.n, 1))
    outer = TruncationWindow(args.outer_pmin if args.outer_pmin is not None else w.pmin - 2,
                             args.outer_pmax if args.outer_pmax is not None else w.pmax + 2,
                             w.max_arity, w.exp_bound + 4)
    desc = args.algebra or f"P1:k={args.k}"
    res = hh_dim(_algebra_family(desc), args.n, args.p, args.q, w, outer,
                 candidates_for=lambda a, ww: hh_generators(a, ww, args.n, args.q), prime=_prime(cfg))
    out = Out(args.out or cfg.output_dir)
    print(f"{res.value} ({'stabilized' if res.stabilized else 'NOT stabilized'})")
    out.write(f"hh_{args.n}_{args.p}_{args.q}.verdict",
              formats.verdict_text("hh", "pass" if res.stabilized else "unstable", res.lines(timings=False)))
    _say(res.lines())
    return 0 if res.stabilized else 3


def cmd_bar(args, cfg: Config) -> int:
    from .hochschild import bar_stable
    w = _window(args, cfg)
    outer = TruncationWindow(args.outer_pmin if args.outer_pmin is not None else w.pmin - 2,
                             args.outer_pmax if args.outer_pmax is not None else w.pmax + 2,
                             w.max_arity, w.exp_bound + 4)
    factors = [f.strip() for f in args.factors.split(",") if f.strip()]
    if not factors or any(f not in ("k", "M") for f in factors):
        raise UsageError("--factors must be a comma-separated list of k and M")
    res = bar_stable(_algebra_family(f"P1:k={args.k}"), factors, args.j, w, outer, _prime(cfg))
    out = Out(args.out or cfg.output_dir)
    out.write(f"bar_{''.join(factors)}_{args.j}.verdict",
              formats.verdict_text("bar", "pass" if res.stabilized else "unstable", res.lines()))
    _say(res.lines())
    return 0 if res.stabilized else 3


def cmd_classify(args, cfg: Config) -> int:
    from .classify import DistinctClasses, strictify, triviality_test
    out = Out(args.out or cfg.output_dir)
    mtext = _read_text(args.m)
    mdoc = formats.parse(mtext, "structure")
    m = formats.structure_from_doc(mdoc)
    if not args.mprime:
        res = triviality_test(m, stabilize=not args.no_stabilize)
        lines = res.lines()
        out.write(args.name + ".verdict", formats.verdict_text("classify", "nontrivial" if res.nontrivial else "trivial", lines))
        _say(lines)
        return 0
    mptext = _read_text(args.mprime)
    mpdoc = formats.parse(mptext, "structure")
    _check_same_algebra(mdoc, mpdoc)
    mp = formats.structure_from_doc(mpdoc)
    res = strictify(m, mp, allow_rescaling=not args.no_rescale)
    if isinstance(res, DistinctClasses):
        out.write(args.name + ".verdict", formats.verdict_text("classify", "distinct", res.lines()))
        _say(res.lines())
        return 1
    extra = [("lambda", formats.fmt_coef(res.lam)), ("verified_arity", res.verified_arity),
             ("source", formats.document_hash(mtext)), ("target", formats.document_hash(mptext))]
    text = formats.morphism_to_text(res.iso, m.algebra, m.window, extra, kind="certificate")
    out.write(args.name + ".cert", text)
    out.write(args.name + ".verdict", formats.verdict_text("classify", "isomorphic", res.lines()))
    _say(res.lines())
    return 0


def cmd_massey(args, cfg: Config) -> int:
    from .classify import massey_koszul_check
    k, dw = _load_dga(args.dga)
    sdoc = formats.read(args.structure, "structure")
    m = formats.structure_from_doc(sdoc)
    if m.algebra.backend != ("P1", k):
        raise FormatError("the structure does not belong to the given dga")
    desc = sdoc.meta.get("contraction", "standard")
    con = _rebuild_contraction(desc, k, m.window, m.algebra)
    res = massey_koszul_check(con, m)
    out = Out(args.out or cfg.output_dir)
    print(res.value)
    ok = res.ok
    out.write(args.name + ".verdict", formats.verdict_text("massey", "pass" if ok else "fail", res.lines()))
    _say(res.lines())
    return 0 if ok else 4


def cmd_homotopy(args, cfg: Config) -> int:
    from .classify import homotopy_connect
    docs = [formats.read(p) for p in (args.m, args.mprime, args.f, args.fprime)]
    _check_same_algebra(*docs)
    m, mp = formats.structure_from_doc(docs[0]), formats.structure_from_doc(docs[1])
    f, fp = (formats.morphism_from_doc(d, m.algebra) for d in docs[2:])
    h = homotopy_connect(f, fp, m, mp)
    out = Out(args.out or cfg.output_dir)
    out.write(args.name + ".ht", formats.homotopy_to_text(h, m.algebra, m.window))
    sizes = {n: len(c) for n, c in sorted(h.comps.items()) if c}
    lines = ["homotopy found, check_homotopy: pass", f"component sizes: {sizes or 'zero homotopy'}"]
    out.write(args.name + ".verdict", formats.verdict_text("homotopy", "pass", lines))
    _say(lines)
    return 0


def cmd_group(args, cfg: Config) -> int:
    from .curvegroup import conjugation_check, inner_subgroup_membership
    sdoc = formats.read(args.structure, "structure")
    fdoc = formats.read(args.automorphism, "morphism")
    _check_same_algebra(sdoc, fdoc)
    m = formats.structure_from_doc(sdoc)
    f = formats.morphism_from_doc(fdoc, m.algebra)
    res = inner_subgroup_membership(f, m)
    rep = conjugation_check(f, res.homotopy, m)
    lines = rep.lines() + ["conjugator 1 + h(eps):"]
    alg = m.algebra
    for w in sorted(res.conjugator, key=lambda w: (len(w), w)):
        word = " ".join(formats.label(alg, i) for i in w) or "1"
        lines.append(f"  [{word}] {formats.fmt_coef(res.conjugator[w])}")
    out = Out(args.out or cfg.output_dir)
    ok = rep.ok and res.agrees
    out.write(args.name + ".verdict", formats.verdict_text("group", "pass" if ok else "fail", lines))
    _say(lines)
    return 0 if ok else 4


def cmd_report(args, cfg: Config) -> int:
    from .report import run_report
    out_dir = args.out or cfg.output_dir
    rows, ok = run_report(out_dir, quick=args.quick, seed=cfg.seed, prime=_prime(cfg))
    for r in rows:
        print(f"{r.status:5} {r.claim:12} {r.check}: {r.value}")
    return 0 if ok else 4


# ---------------------------------------------------------------------------
# parser

def _window_args(p: argparse.ArgumentParser, arity=True):
    p.add_argument("--pmin", type=int)
    p.add_argument("--pmax", type=int)
    p.add_argument("--exp", type=int, help="monomial exponent bound for the Cech matrices")
    if arity:
        p.add_argument("--max-arity", type=int, dest="max_arity")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ainfring", description="A-infinity structures on A_L for P^1")
    ap.add_argument("--config", help=f"JSON config (default: ${CONFIG_ENV})")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("geom", help="build and verify the Cech dg-algebra")
    p.add_argument("--k", type=int, default=1)
    _window_args(p)
    p.add_argument("--name", default="p1")
    p.add_argument("--out")
    p.set_defaults(func=cmd_geom)

    p = sub.add_parser("transfer", help="transfer the canonical structure to cohomology")
    p.add_argument("--dga", required=True)
    p.add_argument("--contraction", default="standard", choices=["standard", "perturbed"])
    p.add_argument("--seed", type=int)
    p.add_argument("--max-arity", type=int, dest="max_arity")
    p.add_argument("--formal", action="store_true", help="emit the trivial structure (m_n = 0 for n >= 3)")
    p.add_argument("--name", default="canonical")
    p.add_argument("--out")
    p.set_defaults(func=cmd_transfer)

    p = sub.add_parser("check", help="re-verify any emitted file")
    p.add_argument("file")
    p.add_argument("--structure")
    p.add_argument("--m")
    p.add_argument("--mprime")
    p.add_argument("--f")
    p.add_argument("--fprime")
    p.add_argument("--out")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("hh", help="stabilized Hochschild bidegree cohomology dimension")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=int, default=0)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--algebra", help="algebra descriptor, e.g. P1:k=1 or curve:genus=2")
    _window_args(p, arity=False)
    p.add_argument("--outer-pmin", type=int, dest="outer_pmin")
    p.add_argument("--outer-pmax", type=int, dest="outer_pmax")
    p.add_argument("--out")
    p.set_defaults(func=cmd_hh)

    p = sub.add_parser("bar", help="cohomology of the bar complexes B(M_1,...,M_n)")
    p.add_argument("--factors", required=True, help="e.g. k,M,k")
    p.add_argument("--j", type=int, default=0, help="internal degree")
    p.add_argument("--k", type=int, default=1)
    _window_args(p, arity=False)
    p.add_argument("--outer-pmin", type=int, dest="outer_pmin")
    p.add_argument("--outer-pmax", type=int, dest="outer_pmax")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bar)

    p = sub.add_parser("classify", help="triviality test, or strictify m to m'")
    p.add_argument("--m", required=True)
    p.add_argument("--mprime")
    p.add_argument("--no-rescale", action="store_true", dest="no_rescale")
    p.add_argument("--no-stabilize", action="store_true", dest="no_stabilize")
    p.add_argument("--name", default="classify")
    p.add_argument("--out")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("massey", help="the Koszul Massey product m3(s, sigma, beta)")
    p.add_argument("--dga", required=True)
    p.add_argument("--structure", required=True)
    p.add_argument("--name", default="massey")
    p.add_argument("--out")
    p.set_defaults(func=cmd_massey)

    p = sub.add_parser("homotopy", help="connect two strict isomorphisms m -> m' by a homotopy")
    for flag in ("--m", "--mprime", "--f", "--fprime"):
        p.add_argument(flag, required=True)
    p.add_argument("--name", default="homotopy")
    p.add_argument("--out")
    p.set_defaults(func=cmd_homotopy)

    p = sub.add_parser("group", help="conjugator 1 + h(eps) of a strict automorphism")
    p.add_argument("--structure", required=True)
    p.add_argument("--automorphism", required=True)
    p.add_argument("--name", default="group")
    p.add_argument("--out")
    p.set_defaults(func=cmd_group)

    p = sub.add_parser("report", help="run all checks and write CSV and figures")
    p.add_argument("--quick", action="store_true", help="smaller windows")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = load_config(args.config)
        return args.func(args, cfg)
    except WindowTooSmall as exc:
        print(f"error: {exc}; try a larger window (e.g. widen pmin/pmax by 2)", file=sys.stderr)
        return exc.exit_code
    except AinfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except Exception as exc:  # an invariant broke somewhere: always a bug
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
