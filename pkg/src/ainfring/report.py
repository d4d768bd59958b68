"""Aggregate verdict table (CSV) and figures.

Nothing time-dependent is written to disk, so repeated runs produce
byte-identical files.  Figures are PNGs rendered by the Agg backend with the
software tag stripped from the metadata.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass
from typing import List, Optional, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from . import formats  # noqa: E402
from .bigraded import symmetric_window  # noqa: E402
from .exactla import DEFAULT_PRIME  # noqa: E402


@dataclass
class Row:
    claim: str
    check: str
    value: str
    expected: str
    status: str


def _row(claim, check, value, expected) -> Row:
    return Row(claim, check, str(value), str(expected), "pass" if str(value) == str(expected) else "FAIL")


def collect(quick: bool = False, seed: int = 0, prime: Optional[int] = DEFAULT_PRIME) -> Tuple[List[Row], dict]:
    from .ainfty import (apply_strict_iso, coderivation_square_check, formal_structure, identity_iso,
                         morphism_check, random_strict_iso, rescale, stasheff_check)
    from .cech import line_bundle_algebra, perturbed_contraction, standard_contraction, verify_dga
    from .ainfty import homotopy_extend, zero_homotopy
    from .classify import hh_generators, homotopy_connect, massey_koszul_check, strictify, triviality_test
    from .curvegroup import conjugation_check, random_cobar, round_trip, synthetic_structure
    from .hochschild import bar_stable, hh_dim
    from .transfer import CechTarget, transfer

    rows: List[Row] = []
    data: dict = {}
    fam = lambda w: line_bundle_algebra(1, w)

    wg = symmetric_window(4 if quick else 6, 4, 8 if quick else 12)
    rep = verify_dga(1, wg)
    data["dims"] = rep.dims
    rows.append(_row("dga", f"Cech dga identities on [{wg.pmin},{wg.pmax}]", rep.ok, True))

    W = symmetric_window(4, 5)
    con = standard_contraction(1, W)
    m, phi = transfer(con, W, 5)
    st, co = stasheff_check(m, 5), coderivation_square_check(m, 5)
    rows.append(_row("transfer", "Stasheff through arity 5", st.ok, True))
    rows.append(_row("transfer", "coderivation verdict agrees", st.ok == co.ok, True))
    mc = morphism_check(phi, m, CechTarget(con.dga), 4, project=con.project)
    rows.append(_row("canonical", "transfer morphism, arity 4", mc.ok, True))

    m4 = m.truncated(4)
    mas = massey_koszul_check(con, m4)
    rows.append(_row("massey", "Massey value = oracle", mas.value == mas.oracle, True))
    rows.append(_row("massey", "|Massey value|", abs(mas.value), 1))
    tr = triviality_test(m4, stabilize=False)
    rows.append(_row("uniqueness", "canonical structure", "nontrivial" if tr.nontrivial else "trivial", "nontrivial"))

    inner, outer = (symmetric_window(4, 4), symmetric_window(6, 4)) if quick else \
        (symmetric_window(6, 4), symmetric_window(8, 4))
    hh_series = {}
    for (n, q, expected) in ((2, 1, 0), (3, 1, 1), (4, 2, 0)):
        if quick and n == 4:
            inner4, outer4 = symmetric_window(4, 4), symmetric_window(6, 4)
        else:
            inner4, outer4 = inner, outer
        res = hh_dim(fam, n, 0, q, inner4.with_arity(n), outer4.with_arity(n),
                     candidates_for=lambda a, w, n=n, q=q: hh_generators(a, w, n, q), prime=prime)
        hh_series[(n, q)] = [(r.window.pmax, r.value) for r in (res.inner, res.outer)]
        rows.append(_row("vanishing", f"HH^{n}_{{0,{q}}} stabilized", res.value if res.stabilized else "unstable",
                         expected))
    data["hh"] = hh_series

    bars = {}
    for factors, j in ((("k", "M"), 0), (("k", "M", "k"), 0), (("M", "M"), -2)):
        b = bar_stable(fam, factors, j, symmetric_window(4, 4), symmetric_window(6, 4), prime)
        name = "B(" + ",".join(factors) + ")"
        bars[name] = b.betti
        rows.append(_row("bar", f"{name} at j={j}", b.betti if b.stabilized else "unstable", {-2: 1}))
    data["bar"] = bars

    alg = m4.algebra
    lams = []
    for s in range(seed, seed + (2 if quick else 5)):
        g = random_strict_iso(alg, m4.window, 4, s)
        cert = strictify(m4, apply_strict_iso(g, m4))
        lams.append(cert.lam)
    rows.append(_row("uniqueness", "strictify(m, g*m) lambda", sorted(set(lams)), [1]))
    pm, _ = transfer(perturbed_contraction(1, m4.window, seed + 7), m4.window, 4)
    rows.append(_row("uniqueness", "standard vs perturbed lambda", strictify(m4, pm).lam, 1))
    rows.append(_row("uniqueness", "rescale by 2 lambda", strictify(m4, rescale(m4, 2)).lam, 2))
    dc = strictify(m4, formal_structure(alg, m4.window))
    rows.append(_row("uniqueness", "canonical vs trivial", type(dc).__name__, "DistinctClasses"))

    g = random_strict_iso(alg, m4.window, 4, seed)
    mp = apply_strict_iso(g, m4)
    c1 = strictify(m4, mp)
    homotopy_connect(c1.iso, g, m4, mp)  # raises unless check_homotopy passes
    rows.append(_row("homotopy", "two isos m -> g*m connected", True, True))
    rows.append(_row("extension", "extend(f, 0) = f", homotopy_extend(g, zero_homotopy(), m4, mp, 4).same(g, 4), True))

    mc2 = synthetic_structure(2, 4, seed=seed)
    calg = mc2.algebra
    f, hh, res = round_trip(mc2, random_cobar(calg, 3, seed))
    crep = conjugation_check(f, hh, mc2)
    rows.append(_row("group", "synthetic g=2 conjugation identities", crep.ok, True))
    rows.append(_row("group", "round trip recovers restriction", res.agrees, True))
    mc1 = synthetic_structure(1, 4, seed=seed)
    f1, h1, res1 = round_trip(mc1, random_cobar(mc1.algebra, 4, seed))
    rows.append(_row("group", "synthetic g=1 round trip", res1.agrees and conjugation_check(f1, h1, mc1).ok, True))
    p1 = conjugation_check(identity_iso(), zero_homotopy(), m4, 3)
    rows.append(_row("group", "P1 degenerate conjugation", p1.ok, True))
    return rows, data


def rows_csv(rows: List[Row]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["claim", "check", "value", "expected", "status"])
    for r in rows:
        w.writerow([r.claim, r.check, r.value, r.expected, r.status])
    return buf.getvalue()


def _save(fig, path: str):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    tmp = path + ".tmp"
    fig.savefig(tmp, format="png", dpi=100, metadata={"Software": None})
    plt.close(fig)
    os.replace(tmp, path)


def figures(data: dict, out_dir: str) -> List[str]:
    paths = []
    dims = data["dims"]
    ps = sorted(dims)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.bar([p - 0.2 for p in ps], [dims[p][0] for p in ps], width=0.4, label="h0")
    ax.bar([p + 0.2 for p in ps], [dims[p][1] for p in ps], width=0.4, label="h1")
    ax.set_xlabel("internal degree p")
    ax.set_ylabel("dimension")
    ax.set_title("H^*(O(p)) on P^1")
    ax.legend()
    path = os.path.join(out_dir, "cohomology_dims.png")
    _save(fig, path)
    paths.append(path)

    fig, ax = plt.subplots(figsize=(6, 3.5))
    for (n, q), series in sorted(data["hh"].items()):
        ax.plot([s[0] for s in series], [s[1] for s in series], marker="o", label=f"HH^{n}_(0,{q})")
    ax.set_xlabel("window half-width")
    ax.set_ylabel("dimension")
    ax.set_title("Hochschild dimensions across windows")
    ax.legend()
    path = os.path.join(out_dir, "hh_stabilization.png")
    _save(fig, path)
    paths.append(path)

    fig, ax = plt.subplots(figsize=(6, 3.5))
    names = sorted(data["bar"])
    for i, name in enumerate(names):
        betti = data["bar"][name]
        for deg, b in sorted(betti.items()):
            ax.bar(i, b, label=f"{name}, degree {deg}")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names)
    ax.set_ylabel("total cohomology")
    ax.set_title("Bar complex cohomology (degree -2)")
    path = os.path.join(out_dir, "bar_cohomology.png")
    _save(fig, path)
    paths.append(path)
    return paths


def run_report(out_dir: str, quick: bool = False, seed: int = 0, prime: Optional[int] = DEFAULT_PRIME):
    rows, data = collect(quick, seed, prime)
    formats.write_atomic(os.path.join(out_dir, "report.csv"), rows_csv(rows))
    figures(data, out_dir)
    return rows, all(r.status == "pass" for r in rows)
