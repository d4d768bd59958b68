"""Canonical text serializations.

Every file has the shape::

    ainfring <kind>
    format: 1
    <key>: <value>
    ...
    sha256: <hex digest of the body>
    ---
    <body lines>

The body is the only hashed part; header values are short and are checked
for consistency separately (``algebra_hash`` ties a file to an algebra and
window).  Basis elements are written ``q:p:label``; multilinear maps are
written in m-form, one input tuple per line::

    3 | 0:1:1 1:-2:-1 0:1:0 -> 0:0:0=-1

Coefficients are integers or reduced fractions ``a/b``.  Emission is
deterministic, so ``emit(parse(text)) == text`` byte for byte.
"""

from __future__ import annotations

import hashlib
import os
import tempfile
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .ainfty import AInfinityStructure, Homotopy, Morphism, from_m_form, to_m_form
from .bigraded import BigradedAlgebra, MultiMap, TruncationWindow
from .errors import FormatError

FORMAT_VERSION = 1
SEPARATOR = "---"


# ---------------------------------------------------------------------------
# generic container

def body_hash(body: Sequence[str]) -> str:
    return hashlib.sha256(("\n".join(body) + "\n").encode()).hexdigest()


def emit(kind: str, meta: Sequence[Tuple[str, object]], body: Sequence[str]) -> str:
    lines = [f"ainfring {kind}", f"format: {FORMAT_VERSION}"]
    for k, v in meta:
        if "\n" in str(v):
            raise ValueError("header values must be single-line")
        lines.append(f"{k}: {v}")
    lines.append(f"sha256: {body_hash(body)}")
    lines.append(SEPARATOR)
    lines.extend(body)
    return "\n".join(lines) + "\n"


class Document:
    def __init__(self, kind: str, meta: Dict[str, str], body: List[str]):
        self.kind = kind
        self.meta = meta
        self.body = body

    def get(self, key: str) -> str:
        try:
            return self.meta[key]
        except KeyError:
            raise FormatError(f"{self.kind} file lacks the header field '{key}'") from None


def parse(text: str, expect: Optional[str] = None) -> Document:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or not lines[0].startswith("ainfring "):
        raise FormatError("not an ainfring file")
    kind = lines[0][len("ainfring "):].strip()
    if expect is not None and kind != expect:
        raise FormatError(f"expected a {expect} file, got {kind}")
    try:
        sep = lines.index(SEPARATOR)
    except ValueError:
        raise FormatError("missing body separator") from None
    meta: Dict[str, str] = {}
    for ln in lines[1:sep]:
        if ": " not in ln:
            raise FormatError(f"malformed header line: {ln!r}")
        k, v = ln.split(": ", 1)
        meta[k] = v
    if meta.get("format") != str(FORMAT_VERSION):
        raise FormatError(f"unsupported format version {meta.get('format')}")
    body = lines[sep + 1:]
    if meta.get("sha256") != body_hash(body):
        raise FormatError("content hash mismatch")
    del meta["format"], meta["sha256"]
    return Document(kind, meta, body)


def read(path: str, expect: Optional[str] = None) -> Document:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse(fh.read(), expect)
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from None


def write_atomic(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# scalars, windows, algebras

def fmt_coef(c) -> str:
    if isinstance(c, Fraction):
        return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
    return str(int(c))


def parse_coef(s: str):
    try:
        f = Fraction(s)
    except ValueError:
        raise FormatError(f"bad coefficient {s!r}") from None
    return f.numerator if f.denominator == 1 else f


def fmt_window(w: TruncationWindow) -> str:
    return f"{w.pmin} {w.pmax} {w.max_arity} {w.exp_bound}"


def parse_window(s: str) -> TruncationWindow:
    try:
        a, b, n, e = (int(x) for x in s.split())
        return TruncationWindow(a, b, n, e)
    except ValueError as exc:
        raise FormatError(f"bad window {s!r}: {exc}") from None


def algebra_descriptor(alg: BigradedAlgebra) -> str:
    backend = getattr(alg, "backend", None)
    if backend is None:
        raise FormatError("only backend algebras can be serialized")
    kind, param = backend
    return f"P1:k={param}" if kind == "P1" else f"curve:genus={param}"


def algebra_from_descriptor(desc: str, window: TruncationWindow) -> BigradedAlgebra:
    from .cech import line_bundle_algebra
    from .curvegroup import synthetic_curve_algebra
    try:
        kind, rest = desc.split(":", 1)
        key, val = rest.split("=", 1)
        val = int(val)
    except ValueError:
        raise FormatError(f"bad algebra descriptor {desc!r}") from None
    if kind == "P1" and key == "k":
        return line_bundle_algebra(val, window)
    if kind == "curve" and key == "genus":
        return synthetic_curve_algebra(val)
    raise FormatError(f"unknown algebra descriptor {desc!r}")


def label(alg: BigradedAlgebra, i: int) -> str:
    q, p, lab = alg.basis[i]
    return f"{q}:{p}:{lab}"


def _index_map(alg: BigradedAlgebra) -> Dict[str, int]:
    cache = alg.__dict__.get("_label_index")
    if cache is None:
        cache = {label(alg, i): i for i in range(len(alg.basis))}
        alg.__dict__["_label_index"] = cache
    return cache


def algebra_hash(alg: BigradedAlgebra, window: TruncationWindow) -> str:
    body = [algebra_descriptor(alg), f"{window.pmin} {window.pmax}"]
    body += [label(alg, i) for i in range(len(alg.basis))]
    return body_hash(body)[:16]


# ---------------------------------------------------------------------------
# multilinear maps

def multimap_lines(alg: BigradedAlgebra, n: int, comps: MultiMap, prefix: str = "") -> List[str]:
    out = []
    for tup in sorted(comps):
        vec = comps[tup]
        if not vec:
            continue
        ins = " ".join(label(alg, i) for i in tup)
        outs = " ".join(f"{label(alg, o)}={fmt_coef(vec[o])}" for o in sorted(vec))
        out.append(f"{prefix}{n} | {ins} -> {outs}")
    return out


def parse_multimap_lines(alg: BigradedAlgebra, lines: Sequence[str], prefix: str = ""
                         ) -> Dict[int, MultiMap]:
    idx = _index_map(alg)
    ops: Dict[int, MultiMap] = {}
    for ln in lines:
        if not ln or ln.startswith("#"):
            continue
        try:
            head, rest = ln.split(" | ", 1)
            ins, outs = rest.split(" -> ", 1)
            if prefix and not head.startswith(prefix):
                raise ValueError
            n = int(head[len(prefix):])
            tup = tuple(idx[x] for x in ins.split())
            vec = {}
            for item in outs.split():
                lab, c = item.rsplit("=", 1)
                vec[idx[lab]] = parse_coef(c)
        except (ValueError, KeyError):
            raise FormatError(f"malformed map line: {ln!r}") from None
        if len(tup) != n:
            raise FormatError(f"arity mismatch in line: {ln!r}")
        ops.setdefault(n, {})[tup] = vec
    return ops


# ---------------------------------------------------------------------------
# structures

def _base_meta(alg, window) -> List[Tuple[str, object]]:
    return [("algebra", algebra_descriptor(alg)), ("window", fmt_window(window)),
            ("algebra_hash", algebra_hash(alg, window))]


def structure_to_text(m: AInfinityStructure, extra: Sequence[Tuple[str, object]] = ()) -> str:
    alg = m.algebra
    body: List[str] = []
    for n in sorted(m.ops):
        body.extend(multimap_lines(alg, n, m.m(n)))
    meta = _base_meta(alg, m.window) + [("max_arity", m.max_arity), ("label", m.label or "-")]
    meta += list(extra)
    return emit("structure", meta, body)


def _algebra_of(doc: Document, alg: Optional[BigradedAlgebra] = None):
    window = parse_window(doc.get("window"))
    if alg is None:
        alg = algebra_from_descriptor(doc.get("algebra"), window)
    if algebra_hash(alg, window) != doc.get("algebra_hash"):
        raise FormatError("algebra hash mismatch")
    return alg, window


def structure_from_doc(doc: Document, alg: Optional[BigradedAlgebra] = None) -> AInfinityStructure:
    if doc.kind != "structure":
        raise FormatError(f"expected a structure file, got {doc.kind}")
    alg, window = _algebra_of(doc, alg)
    ops = parse_multimap_lines(alg, doc.body)
    N = int(doc.get("max_arity"))
    for n in range(2, N + 1):
        ops.setdefault(n, {})
    label_ = doc.get("label")
    m = AInfinityStructure.from_m_ops(alg, window.with_arity(N), ops, label="" if label_ == "-" else label_)
    return m


def structure_from_text(text: str, alg: Optional[BigradedAlgebra] = None) -> AInfinityStructure:
    return structure_from_doc(parse(text, "structure"), alg)


# ---------------------------------------------------------------------------
# morphisms and homotopies

def morphism_to_text(f: Morphism, alg: BigradedAlgebra, window: TruncationWindow,
                     extra: Sequence[Tuple[str, object]] = (), kind: str = "morphism") -> str:
    if not f.is_strict:
        raise FormatError("only strict morphisms are serialized componentwise")
    body = []
    for n in sorted(f.comps):
        body.extend(multimap_lines(alg, n, to_m_form(alg, f.comps[n])))
    meta = _base_meta(alg, window) + [("max_arity", max(f.comps, default=1)), ("label", f.label or "-")]
    return emit(kind, meta + list(extra), body)


def morphism_from_doc(doc: Document, alg: Optional[BigradedAlgebra] = None) -> Morphism:
    alg, _ = _algebra_of(doc, alg)
    ops = parse_multimap_lines(alg, doc.body)
    for n in range(2, int(doc.get("max_arity")) + 1):
        ops.setdefault(n, {})
    label_ = doc.get("label")
    return Morphism({n: from_m_form(alg, c) for n, c in sorted(ops.items())}, label="" if label_ == "-" else label_)


def homotopy_to_text(h: Homotopy, alg: BigradedAlgebra, window: TruncationWindow,
                     extra: Sequence[Tuple[str, object]] = ()) -> str:
    body = []
    for n in sorted(h.comps):
        body.extend(multimap_lines(alg, n, to_m_form(alg, h.comps[n])))
    meta = _base_meta(alg, window) + [("label", h.label or "-")]
    return emit("homotopy", meta + list(extra), body)


def homotopy_from_doc(doc: Document, alg: Optional[BigradedAlgebra] = None) -> Homotopy:
    alg, _ = _algebra_of(doc, alg)
    ops = parse_multimap_lines(alg, doc.body)
    label_ = doc.get("label")
    return Homotopy({n: from_m_form(alg, c) for n, c in ops.items()}, label="" if label_ == "-" else label_)


def document_hash(text: str) -> str:
    """Hash of a whole file, used to pin inputs inside certificates."""
    return hashlib.sha256(text.encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# verdicts

def verdict_text(command: str, status: str, lines: Sequence[str],
                 extra: Sequence[Tuple[str, object]] = ()) -> str:
    return emit("verdict", [("command", command), ("status", status)] + list(extra), list(lines))
