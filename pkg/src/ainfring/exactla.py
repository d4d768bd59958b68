"""Exact sparse linear algebra over the rationals and over prime fields.

Everything here is deterministic: rows are consumed in increasing index
order, every incoming row is reduced against the current pivots, and the
pivot of a surviving row is its smallest remaining column.  Two runs on the
same input therefore produce the same echelon form, the same kernel basis and
the same particular solution.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

Row = Dict[int, object]


class Field:
    """Base class for the two coefficient fields used in the package."""

    name = "field"
    characteristic = 0

    def convert(self, x):
        raise NotImplementedError

    def inv(self, x):
        raise NotImplementedError

    def __repr__(self):
        return self.name


class Rationals(Field):
    name = "QQ"
    characteristic = 0

    def convert(self, x):
        if isinstance(x, int):
            return x
        if isinstance(x, Fraction):
            return x.numerator if x.denominator == 1 else x
        f = Fraction(x)
        return f.numerator if f.denominator == 1 else f

    def inv(self, x):
        if x == 0:
            raise ZeroDivisionError("inverse of zero")
        f = Fraction(1) / x
        return f.numerator if f.denominator == 1 else f


class PrimeField(Field):
    def __init__(self, p: int):
        if p < 2 or any(p % d == 0 for d in range(2, int(p ** 0.5) + 1)):
            raise ValueError(f"{p} is not prime")
        self.p = p
        self.characteristic = p
        self.name = f"GF({p})"

    def convert(self, x):
        if isinstance(x, Fraction):
            den = x.denominator % self.p
            if den == 0:
                raise ZeroDivisionError(f"denominator divisible by {self.p}")
            return (x.numerator * pow(den, -1, self.p)) % self.p
        return int(x) % self.p

    def inv(self, x):
        x %= self.p
        if x == 0:
            raise ZeroDivisionError("inverse of zero")
        return pow(x, -1, self.p)

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("GF", self.p))


QQ = Rationals()
DEFAULT_PRIME = 2147483647


def GF(p: int = DEFAULT_PRIME) -> PrimeField:
    return PrimeField(p)


def clean_row(row: Row, field: Field = QQ) -> Row:
    out = {}
    for c, v in row.items():
        v = field.convert(v)
        if v:
            out[c] = v
    return out


class Echelon:
    """Incrementally maintained row echelon form.

    Rows are fed one at a time.  With ``track_rhs`` each row carries a
    right-hand side value, so the object doubles as a streaming solver for
    ``A x = b``.  Pivot rows are stored normalised (pivot entry 1).
    """

    def __init__(self, field: Field = QQ, track_rhs: bool = False):
        self.field = field
        self.track_rhs = track_rhs
        self.pivots: Dict[int, Row] = {}
        self.pivot_rhs: Dict[int, object] = {}
        self.consistent = True
        self.rows_seen = 0

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def _reduce(self, row: Row, rhs=0):
        pivots = self.pivots
        if self.field.characteristic:
            p = self.field.p
            while row:
                c = min(row)
                prow = pivots.get(c)
                if prow is None:
                    return row, c, rhs
                f = row[c]
                for k, v in prow.items():
                    nv = (row.get(k, 0) - f * v) % p
                    if nv:
                        row[k] = nv
                    else:
                        row.pop(k, None)
                if self.track_rhs:
                    rhs = (rhs - f * self.pivot_rhs[c]) % p
            return row, None, rhs
        while row:
            c = min(row)
            prow = pivots.get(c)
            if prow is None:
                return row, c, rhs
            f = row[c]
            for k, v in prow.items():
                nv = row.get(k, 0) - f * v
                if nv:
                    row[k] = nv
                else:
                    row.pop(k, None)
            if self.track_rhs:
                rhs = rhs - f * self.pivot_rhs[c]
        return row, None, rhs

    def add_row(self, row: Row, rhs=0) -> bool:
        """Add a row; return True when it produced a new pivot."""
        self.rows_seen += 1
        row = dict(row)
        row, c, rhs = self._reduce(row, rhs)
        if c is None:
            if self.track_rhs and rhs != 0:
                self.consistent = False
            return False
        inv = self.field.inv(row[c])
        if self.field.characteristic:
            p = self.field.p
            self.pivots[c] = {k: (v * inv) % p for k, v in row.items()}
            if self.track_rhs:
                self.pivot_rhs[c] = (rhs * inv) % p
        else:
            conv = self.field.convert
            self.pivots[c] = {k: conv(v * inv) for k, v in row.items()}
            if self.track_rhs:
                self.pivot_rhs[c] = conv(rhs * inv)
        return True

    def reduce(self, row: Row) -> Row:
        """Return the residual of ``row`` modulo the row space seen so far."""
        saved = self.track_rhs
        self.track_rhs = False
        try:
            out, _, _ = self._reduce(dict(row))
        finally:
            self.track_rhs = saved
        return out

    def in_row_space(self, row: Row) -> bool:
        return not self.reduce(row)

    def rref(self) -> Dict[int, Row]:
        """Fully reduced pivot rows (each pivot column cleared elsewhere)."""
        cols = sorted(self.pivots)
        red = {c: dict(self.pivots[c]) for c in cols}
        rhs = dict(self.pivot_rhs)
        ch = self.field.characteristic
        for c in reversed(cols):
            prow = red[c]
            for c2 in cols:
                if c2 >= c:
                    break
                r2 = red[c2]
                f = r2.get(c)
                if not f:
                    continue
                for k, v in prow.items():
                    nv = r2.get(k, 0) - f * v
                    if ch:
                        nv %= ch
                    if nv:
                        r2[k] = nv
                    else:
                        r2.pop(k, None)
                if self.track_rhs:
                    nv = rhs[c2] - f * rhs[c]
                    rhs[c2] = nv % ch if ch else nv
        self._rref_rhs = rhs
        return red

    def solution(self) -> Optional[Row]:
        """Particular solution with all free variables set to zero."""
        if not self.track_rhs:
            raise ValueError("solution() needs track_rhs=True")
        if not self.consistent:
            return None
        self.rref()
        return {c: v for c, v in self._rref_rhs.items() if v}


def rows_rank(rows: Iterable[Row], field: Field = QQ, target: Optional[int] = None) -> int:
    ech = Echelon(field)
    for r in rows:
        ech.add_row(clean_row(r, field))
        if target is not None and ech.rank >= target:
            break
    return ech.rank


class SparseMatrix:
    """A sparse matrix stored as a dict of row dicts."""

    def __init__(self, nrows: int, ncols: int, rows: Optional[Dict[int, Row]] = None,
                 field: Field = QQ):
        self.nrows = nrows
        self.ncols = ncols
        self.field = field
        self.rows: Dict[int, Row] = {}
        if rows:
            for i, r in rows.items():
                r = clean_row(r, field)
                if r:
                    self.rows[i] = r

    @classmethod
    def from_dense(cls, data: List[List[object]], field: Field = QQ) -> "SparseMatrix":
        nrows = len(data)
        ncols = len(data[0]) if nrows else 0
        rows = {i: {j: v for j, v in enumerate(r) if v} for i, r in enumerate(data)}
        return cls(nrows, ncols, rows, field)

    @classmethod
    def identity(cls, n: int, field: Field = QQ) -> "SparseMatrix":
        return cls(n, n, {i: {i: 1} for i in range(n)}, field)

    def to_dense(self) -> List[List[object]]:
        out = [[0] * self.ncols for _ in range(self.nrows)]
        for i, r in self.rows.items():
            for j, v in r.items():
                out[i][j] = v
        return out

    def __getitem__(self, ij: Tuple[int, int]):
        i, j = ij
        return self.rows.get(i, {}).get(j, 0)

    def __setitem__(self, ij: Tuple[int, int], v):
        i, j = ij
        v = self.field.convert(v)
        r = self.rows.setdefault(i, {})
        if v:
            r[j] = v
        else:
            r.pop(j, None)
            if not r:
                del self.rows[i]

    def nnz(self) -> int:
        return sum(len(r) for r in self.rows.values())

    def is_zero(self) -> bool:
        return not self.rows

    def __eq__(self, other):
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return (self.nrows, self.ncols) == (other.nrows, other.ncols) and self.rows == other.rows

    def transpose(self) -> "SparseMatrix":
        t: Dict[int, Row] = {}
        for i, r in self.rows.items():
            for j, v in r.items():
                t.setdefault(j, {})[i] = v
        return SparseMatrix(self.ncols, self.nrows, t, self.field)

    def __add__(self, other: "SparseMatrix") -> "SparseMatrix":
        self._check_shape(other)
        out = {i: dict(r) for i, r in self.rows.items()}
        for i, r in other.rows.items():
            tgt = out.setdefault(i, {})
            for j, v in r.items():
                tgt[j] = tgt.get(j, 0) + v
        return SparseMatrix(self.nrows, self.ncols, out, self.field)

    def __neg__(self) -> "SparseMatrix":
        return self.scale(-1)

    def __sub__(self, other: "SparseMatrix") -> "SparseMatrix":
        return self + (-other)

    def scale(self, c) -> "SparseMatrix":
        return SparseMatrix(self.nrows, self.ncols,
                            {i: {j: c * v for j, v in r.items()} for i, r in self.rows.items()},
                            self.field)

    def _check_shape(self, other):
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise ValueError(f"shape mismatch {self.nrows}x{self.ncols} vs {other.nrows}x{other.ncols}")

    def __matmul__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.ncols != other.nrows:
            raise ValueError("inner dimensions differ")
        out: Dict[int, Row] = {}
        for i, r in self.rows.items():
            acc: Row = {}
            for k, a in r.items():
                orow = other.rows.get(k)
                if not orow:
                    continue
                for j, b in orow.items():
                    acc[j] = acc.get(j, 0) + a * b
            out[i] = acc
        return SparseMatrix(self.nrows, other.ncols, out, self.field)

    def apply(self, vec: Row) -> Row:
        """Matrix times a sparse column vector."""
        out: Row = {}
        for i, r in self.rows.items():
            s = 0
            for j, v in r.items():
                x = vec.get(j)
                if x:
                    s += v * x
            s = self.field.convert(s)
            if s:
                out[i] = s
        return out

    def echelon(self) -> Echelon:
        ech = Echelon(self.field)
        for i in sorted(self.rows):
            ech.add_row(self.rows[i])
        return ech

    def rank(self) -> int:
        return self.echelon().rank

    def kernel_basis(self) -> List[Row]:
        """Basis of {x : A x = 0}, one vector per free column, in column order."""
        red = self.echelon().rref()
        free = [c for c in range(self.ncols) if c not in red]
        basis = []
        for f in free:
            v: Row = {f: 1}
            for c, prow in red.items():
                x = prow.get(f)
                if x:
                    v[c] = self.field.convert(-x)
            basis.append(dict(sorted(v.items())))
        return basis

    def solve(self, b: Row) -> Optional[Row]:
        """A particular solution of ``A x = b`` or None when inconsistent."""
        ech = Echelon(self.field, track_rhs=True)
        for i in range(self.nrows):
            r = self.rows.get(i)
            bi = self.field.convert(b.get(i, 0))
            if r:
                ech.add_row(r, bi)
            elif bi:
                return None
            if not ech.consistent:
                return None
        return ech.solution()


def iter_nonzero(vec: Row) -> Iterator[Tuple[int, object]]:
    for k in sorted(vec):
        v = vec[k]
        if v:
            yield k, v
