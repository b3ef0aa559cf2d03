"""Sparse row reduction over an exact or floating-point scalar field."""

from __future__ import annotations

from typing import Iterable, Mapping


def _clean(row: dict, field) -> dict:
    return {c: v for c, v in row.items() if not field.is_zero(v)}


class SparseRREF:
    """Incrementally maintained reduced row echelon form.

    Rows are dictionaries ``column -> scalar``.  Every stored pivot row has a
    one in its pivot column and zeros in all other pivot columns.  In exact
    mode the pivot is the smallest column whose entry can be inverted exactly
    (a lone entry is simply scaled to one); in numeric mode the entry of
    largest magnitude is chosen, and entries below the field tolerance are
    dropped after each elimination.
    """

    def __init__(self, field):
        self.field = field
        self.pivots: dict[int, dict] = {}

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce(self, row: Mapping) -> dict:
        f = self.field
        r = _clean(dict(row), f)
        while True:
            hits = [c for c in r if c in self.pivots]
            if not hits:
                return r
            c = min(hits)
            factor = r[c]
            for col, val in self.pivots[c].items():
                v = r.get(col, f.zero()) - factor * val
                if f.is_zero(v):
                    r.pop(col, None)
                else:
                    r[col] = v
            r.pop(c, None)

    def add(self, row: Mapping) -> int | None:
        """Insert a row; return its pivot column or None if it was dependent."""
        f = self.field
        r = self.reduce(row)
        if not r:
            return None
        if len(r) == 1:
            c = next(iter(r))
            r = {c: f.one()}
        else:
            if f.exact:
                easy = [k for k in r if r[k].invertible_here()]
                c = min(easy) if easy else min(r)
            else:
                c = max(r, key=lambda k: (f.magnitude(r[k]), -k))
            inv = f.inv(r[c])
            r = {col: v * inv for col, v in r.items()}
            r[c] = f.one()
        for pc, prow in self.pivots.items():
            factor = prow.get(c)
            if factor is None:
                continue
            for col, val in r.items():
                v = prow.get(col, f.zero()) - factor * val
                if f.is_zero(v):
                    prow.pop(col, None)
                else:
                    prow[col] = v
            prow.pop(c, None)
            prow[pc] = f.one()
        self.pivots[c] = r
        return c

    def contains(self, row: Mapping) -> bool:
        return not self.reduce(row)

    def kernel(self, columns: Iterable[int]) -> list[dict]:
        """Basis of the solution space of ``row . x = 0`` over the given columns.

        One vector per free column, with a one at that column and zeros at
        the other free columns.
        """
        f = self.field
        basis = []
        for free in sorted(columns):
            if free in self.pivots:
                continue
            vec = {free: f.one()}
            for pc, prow in self.pivots.items():
                val = prow.get(free)
                if val is not None and not f.is_zero(val):
                    vec[pc] = -val
            basis.append(vec)
        return basis


def span_rank(vectors: Iterable[Mapping], field) -> int:
    r = SparseRREF(field)
    for v in vectors:
        r.add(v)
    return r.rank


def same_span(a: Iterable[Mapping], b: Iterable[Mapping], field) -> bool:
    a, b = list(a), list(b)
    ra, rb = SparseRREF(field), SparseRREF(field)
    for v in a:
        ra.add(v)
    for v in b:
        rb.add(v)
    if ra.rank != rb.rank:
        return False
    return all(ra.contains(v) for v in b)
