"""Graded center of a truncated dga and the center as an algebra in its own right.

The graded center in degree k is the common kernel of ``x -> [x, g]`` over a
generating set of the algebra.  In a truncated window the commutator of a
basis element near the top of the window with a generator may not be
representable, so only *interior* candidates are searched: basis elements
whose products with every generator (on both sides) stay in the window.
A degree is ``complete`` when all of its basis elements are interior.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .algebra import OUT_OF_WINDOW, AlgebraElement, GradedBasisAlgebra, OutOfWindow, _sign
from .linalg import SparseRREF


def _span_closure(A: GradedBasisAlgebra, gens: list[int]) -> list[SparseRREF]:
    """Per-degree spans of all products of the given basis generators."""
    f = A.field
    spans = [SparseRREF(f) for _ in range(A.max_degree + 1)]
    vectors: list[list[dict]] = [[] for _ in range(A.max_degree + 1)]
    gen_by_deg: dict[int, list[int]] = {}
    for g in gens:
        gen_by_deg.setdefault(int(A.degrees[g]), []).append(g)

    def push(k, vec):
        if vec and spans[k].add(vec) is not None:
            vectors[k].append(vec)
            return True
        return False

    for k in range(A.max_degree + 1):
        if k == 0:
            push(0, dict(A._unit))
        for g in gen_by_deg.get(k, []):
            push(k, {g: f.one()})
        for j in range(1, k + 1):
            for g in gen_by_deg.get(j, []):
                for vec in list(vectors[k - j]):
                    try:
                        push(k, A.mul_coords({g: f.one()}, vec, "strict"))
                    except OutOfWindow:
                        pass
        # close under left multiplication by degree-zero generators
        changed = True
        while changed:
            changed = False
            for g in gen_by_deg.get(0, []):
                for vec in list(vectors[k]):
                    try:
                        changed |= push(k, A.mul_coords({g: f.one()}, vec, "strict"))
                    except OutOfWindow:
                        pass
    return spans


def generation_degree(A: GradedBasisAlgebra) -> int:
    """Smallest g such that basis elements of degree <= g generate the window."""
    for g in range(A.max_degree + 1):
        gens = [i for i in range(A.dim) if A.degrees[i] <= g]
        spans = _span_closure(A, gens)
        if all(spans[k].rank == len(A.basis_of_degree(k)) for k in range(A.max_degree + 1)):
            return g
    return A.max_degree


def default_generators(A: GradedBasisAlgebra) -> list[AlgebraElement]:
    g = generation_degree(A)
    return [A(i) for i in range(A.dim) if A.degrees[i] <= g]


@dataclass
class CenterBasis:
    algebra: GradedBasisAlgebra
    generators: list
    elements: dict = field(default_factory=dict)     # degree -> list[AlgebraElement]
    candidates: dict = field(default_factory=dict)   # degree -> list of basis indices searched
    complete: dict = field(default_factory=dict)     # degree -> every basis element was interior
    pivots: dict = field(default_factory=dict)       # degree -> basis index carrying the unit coefficient

    def computed(self, k: int) -> bool:
        return bool(self.candidates.get(k)) or not self.algebra.basis_of_degree(k)

    @property
    def computed_degrees(self) -> list[int]:
        return [k for k in range(self.algebra.max_degree + 1) if self.computed(k)]

    def dims(self) -> list[int]:
        """Dimensions in the leading run of computed degrees."""
        out = []
        for k in range(self.algebra.max_degree + 1):
            if not self.computed(k):
                break
            out.append(len(self.elements.get(k, [])))
        return out

    def dim(self, k: int) -> int:
        if not self.computed(k):
            raise ValueError(f"degree {k} has no interior candidates in this window")
        return len(self.elements.get(k, []))

    def coordinates(self, x: AlgebraElement):
        """Coordinates of ``x`` in the center basis (degree -> list), or None if not in the span."""
        A = self.algebra
        f = A.field
        out = {}
        rest = x
        for k in sorted(x.degrees()):
            if not self.computed(k):
                return None
            coeffs = [x.coords.get(p, f.zero()) for p in self.pivots.get(k, [])]
            out[k] = coeffs
            for c, z in zip(coeffs, self.elements.get(k, [])):
                rest = rest - z * c
        return out if rest.is_zero() else None


def graded_center(A: GradedBasisAlgebra, generators=None, degrees=None) -> CenterBasis:
    """Graded center of ``A`` searched over interior candidates.

    ``generators`` defaults to all basis elements up to the generation degree.
    The basis returned in each degree has one vector per free column of the
    reduced commutant system: a one at its pivot basis element and zeros at
    the pivots of the other vectors.
    """
    f = A.field
    if generators is None:
        gens = default_generators(A)
    else:
        gens = [g if isinstance(g, AlgebraElement) else A(g) for g in generators]
    for g in gens:
        if g.degree is None:
            raise ValueError("generators must be homogeneous")
    gen_support = sorted({i for g in gens for i in g.coords})
    result = CenterBasis(A, gens)
    degs = range(A.max_degree + 1) if degrees is None else degrees
    for k in degs:
        cands = []
        for b in A.basis_of_degree(k):
            ok = all(A.product_coords(b, i) is not OUT_OF_WINDOW and A.product_coords(i, b) is not OUT_OF_WINDOW
                     for i in gen_support)
            if ok:
                cands.append(b)
        result.candidates[k] = cands
        result.complete[k] = len(cands) == len(A.basis_of_degree(k))
        if not cands:
            result.elements[k] = []
            result.pivots[k] = []
            continue
        rows: dict[tuple, dict] = {}
        for col, b in enumerate(cands):
            eb = {b: f.one()}
            for gi, g in enumerate(gens):
                s = _sign(k * g.degree)
                bg = A.mul_coords(eb, g.coords, "strict")
                gb = A.mul_coords(g.coords, eb, "strict")
                comm = dict(bg)
                for key, v in gb.items():
                    comm[key] = comm[key] - v * s if key in comm else -(v * s)
                for key, v in comm.items():
                    if not f.is_zero(v):
                        rows.setdefault((gi, key), {})[col] = v
        rref = SparseRREF(f)
        for key in sorted(rows):
            rref.add(rows[key])
        kernel = rref.kernel(range(len(cands)))
        elems, pivots = [], []
        for vec in kernel:
            free = min(c for c in vec if c not in rref.pivots)
            pivots.append(cands[free])
            elems.append(A.element({cands[c]: v for c, v in vec.items()}))
        result.elements[k] = elems
        result.pivots[k] = pivots
    return result


class CenterNotClosed(ArithmeticError):
    """A product of center elements failed to land in the computed center."""


def center_algebra(Z: CenterBasis, name: str | None = None) -> tuple[GradedBasisAlgebra, "CenterEmbedding"]:
    """The computed center as a truncated dga, with its inclusion into the owner."""
    A = Z.algebra
    top = -1
    for k in range(A.max_degree + 1):
        if not Z.computed(k):
            break
        top = k
    if top < 0:
        raise ValueError("degree zero of the center is not computed")
    basis, elems, offsets = [], [], {}
    used = set()
    for k in range(top + 1):
        offsets[k] = len(basis)
        for j, z in enumerate(Z.elements.get(k, [])):
            nm = A.names[next(iter(z.coords))] if len(z.coords) == 1 else f"z{k}_{j}"
            if nm in used:
                nm = f"z{k}_{j}"
            used.add(nm)
            basis.append((nm, k))
            elems.append(z)
    if not basis:
        raise ValueError("empty center")
    f = A.field
    interior = {b for k in range(top + 1) for b in Z.candidates.get(k, [])}

    def express(x: AlgebraElement):
        if any(int(A.degrees[i]) > top for i in x.coords):
            return OUT_OF_WINDOW
        coords = Z.coordinates(x)
        if coords is None:
            if any(i not in interior for i in x.coords):
                return OUT_OF_WINDOW
            raise CenterNotClosed(f"{x!r} is not in the computed center")
        out = {}
        for k, cs in coords.items():
            for j, c in enumerate(cs):
                if not f.is_zero(c):
                    out[offsets[k] + j] = c
        return out

    def product(i, j):
        try:
            x = elems[i].mul(elems[j], "strict")
        except OutOfWindow:
            return OUT_OF_WINDOW
        return express(x)

    def differential(i):
        try:
            x = elems[i].d("strict")
        except OutOfWindow:
            return OUT_OF_WINDOW
        return express(x)

    star = None
    if A.has_star:
        def star(i):
            out = express(elems[i].star())
            return None if out is OUT_OF_WINDOW else out

    unit = express(A.one())
    if unit is OUT_OF_WINDOW:
        raise CenterNotClosed("unit outside computed center")
    Zalg = GradedBasisAlgebra(basis, product, differential, unit=unit, star=star, max_degree=top,
                              field=f, truncation=A.truncation, complete=False,
                              name=name or f"Z({A.name})", metadata={"center_of": A.name},
                              star_convention=A.star_convention)
    return Zalg, CenterEmbedding(Zalg, A, elems, express)


@dataclass
class CenterEmbedding:
    center: GradedBasisAlgebra
    owner: GradedBasisAlgebra
    images: list
    _express: object

    def include(self, z: AlgebraElement) -> AlgebraElement:
        out = self.owner.zero()
        for i, c in z.coords.items():
            out = out + self.images[i] * c
        return out

    def restrict(self, x: AlgebraElement) -> AlgebraElement | None:
        """Preimage of an owner element lying in the center, else None."""
        try:
            coords = self._express(x)
        except CenterNotClosed:
            return None
        if coords is OUT_OF_WINDOW:
            return None
        return self.center.element(coords)
