"""K-theory lattice and graded Hom calculus for powers of the projective line.

Everything here is exact integer arithmetic.  Classes live in the rank 2^n
tensor lattice spanned, factor by factor, by the structure-sheaf class and
the point class.  Morphism spaces between shifted external products of line
bundles and skyscrapers are recorded as ``{degree: dimension}`` tables, with
the convention ``Hom^k(A, B) = Hom(A, B[k])``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from itertools import product as iproduct

import numpy as np

__all__ = [
    "FactorSymbol",
    "FactorClass",
    "Generator",
    "FormalObject",
    "KClass",
    "line",
    "POINT",
    "line_bundle",
    "skyscraper",
    "factor_hom_degrees",
    "hom_degrees",
    "euler_pairing",
    "euler_matrix",
    "k_class",
    "symbol_class",
    "decomposable_class",
    "external_product",
    "all_bit_vectors",
    "bits_leq",
    "subset_index",
    "line_bundle_basis_matrix",
]


@dataclass(frozen=True)
class FactorSymbol:
    """One tensor slot: the line bundle O(degree), or the marked-point skyscraper.

    ``degree is None`` encodes the skyscraper.  A single marked point per
    factor suffices: morphism dimensions between the generator families in
    scope do not depend on the point.
    """

    degree: int | None = None

    @property
    def is_point(self) -> bool:
        return self.degree is None

    def __str__(self) -> str:
        return "pt" if self.degree is None else str(self.degree)


def line(m: int) -> FactorSymbol:
    return FactorSymbol(int(m))


POINT = FactorSymbol(None)


@dataclass(frozen=True)
class FactorClass:
    """Rank and degree of a class on one projective line."""

    rank: int
    degree: int

    def __add__(self, other: "FactorClass") -> "FactorClass":
        return FactorClass(self.rank + other.rank, self.degree + other.degree)

    def __neg__(self) -> "FactorClass":
        return FactorClass(-self.rank, -self.degree)

    def scale(self, t: int) -> "FactorClass":
        return FactorClass(t * self.rank, t * self.degree)


@dataclass(frozen=True)
class Generator:
    """External product of per-factor symbols, homologically shifted.

    These are the stable subquotient candidates every filtration is built
    from; ``O(2,pt)[1]`` means the line bundle of degree 2 on the first
    factor times a skyscraper on the second, shifted by one.
    """

    symbols: tuple[FactorSymbol, ...]
    shift: int = 0

    @property
    def n(self) -> int:
        return len(self.symbols)

    def shifted(self, k: int) -> "Generator":
        return Generator(self.symbols, self.shift + k)

    def __str__(self) -> str:
        body = ",".join(str(s) for s in self.symbols)
        return f"O({body})[{self.shift}]"


def line_bundle(*degrees: int, shift: int = 0) -> Generator:
    return Generator(tuple(line(m) for m in degrees), shift)


def skyscraper(n: int, shift: int = 0) -> Generator:
    return Generator((POINT,) * n, shift)


@dataclass(frozen=True)
class FormalObject:
    """Ordered filtration of generators; the first entry is the bottom subquotient.

    An empty filtration denotes the zero object.
    """

    filtration: tuple[Generator, ...] = ()

    @property
    def n(self) -> int:
        return self.filtration[0].n if self.filtration else 0


# ---------------------------------------------------------------------------
# K-classes


def subset_index(bits: tuple[int, ...]) -> int:
    """Position of the basis vector e_S in Kronecker order (factor 0 most significant)."""
    idx = 0
    for b in bits:
        idx = (idx << 1) | int(b)
    return idx


def all_bit_vectors(n: int) -> list[tuple[int, ...]]:
    """All of {0,1}^n, ordered by total weight then lexicographically."""
    vecs = [tuple(bits) for bits in iproduct((0, 1), repeat=n)]
    vecs.sort(key=lambda b: (sum(b), b))
    return vecs


def bits_leq(i: tuple[int, ...], j: tuple[int, ...]) -> bool:
    """Componentwise partial order on multi-indices."""
    return all(a <= b for a, b in zip(i, j))


@dataclass(frozen=True)
class KClass:
    """Element of the numerical Grothendieck lattice in the tensor basis.

    ``coords[subset_index(bits)]`` is the coefficient of the basis vector
    that puts the point class on the factors where ``bits`` is 1 and the
    structure-sheaf class elsewhere.
    """

    n: int
    coords: tuple[int, ...]

    def __post_init__(self):
        if len(self.coords) != 1 << self.n:
            raise ValueError("coords length must be 2**n")

    def coefficient(self, bits: tuple[int, ...]) -> int:
        return self.coords[subset_index(bits)]

    def as_array(self) -> np.ndarray:
        return np.array(self.coords, dtype=np.int64)

    def __add__(self, other: "KClass") -> "KClass":
        assert self.n == other.n
        return KClass(self.n, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "KClass":
        return KClass(self.n, tuple(-a for a in self.coords))

    def __sub__(self, other: "KClass") -> "KClass":
        return self + (-other)

    def scale(self, t: int) -> "KClass":
        return KClass(self.n, tuple(t * a for a in self.coords))

    @staticmethod
    def zero(n: int) -> "KClass":
        return KClass(n, (0,) * (1 << n))


def external_product(x: KClass, y: KClass) -> KClass:
    """Kronecker product of coordinate vectors: class of the external tensor product."""
    coords = tuple(a * b for a in x.coords for b in y.coords)
    return KClass(x.n + y.n, coords)


def symbol_class(sym: FactorSymbol) -> FactorClass:
    return FactorClass(0, 1) if sym.is_point else FactorClass(1, sym.degree)


def decomposable_class(factors: list[FactorClass] | tuple[FactorClass, ...]) -> KClass:
    """Class of an external product, one rank/degree pair per factor."""
    parts = [KClass(1, (f.rank, f.degree)) for f in factors]
    return reduce(external_product, parts)


def k_class(obj: FormalObject | Generator) -> KClass:
    """Signed sum of the classes of the filtration subquotients."""
    if isinstance(obj, Generator):
        obj = FormalObject((obj,))
    if not obj.filtration:
        raise ValueError("cannot infer the number of factors of the zero object")
    n = obj.n
    total = KClass.zero(n)
    for g in obj.filtration:
        base = decomposable_class([symbol_class(s) for s in g.symbols])
        total = total + base.scale((-1) ** (g.shift % 2))
    return total


def line_bundle_basis_matrix(ks: tuple[int, ...]) -> np.ndarray:
    """Basis-change helper: columns are the classes of O(k+i) products.

    Column ``j`` holds the tensor-basis coordinates of the line bundle with
    degree vector ``ks + bits`` where ``bits = all_bit_vectors(len(ks))[j]``.
    The matrix is unimodular (triangular up to the weight ordering).
    """
    n = len(ks)
    cols = []
    for bits in all_bit_vectors(n):
        cls = decomposable_class([FactorClass(1, k + b) for k, b in zip(ks, bits)])
        cols.append(cls.coords)
    return np.array(cols, dtype=np.int64).T


# ---------------------------------------------------------------------------
# Graded Hom dimensions


def factor_hom_degrees(a: FactorSymbol, b: FactorSymbol) -> dict[int, int]:
    """Graded dimensions of Hom^*(a, b) on one projective line.

    Between line bundles this is the cohomology of O(b - a); maps into and
    out of the skyscraper sit in degrees 0 and 1 respectively, and the
    skyscraper self-Homs occupy degrees 0 and 1.
    """
    if not a.is_point and not b.is_point:
        d = b.degree - a.degree
        out = {}
        if d + 1 > 0:
            out[0] = d + 1
        if -d - 1 > 0:
            out[1] = -d - 1
        return out
    if not a.is_point and b.is_point:
        return {0: 1}
    if a.is_point and not b.is_point:
        return {1: 1}
    return {0: 1, 1: 1}


def _convolve(d1: dict[int, int], d2: dict[int, int]) -> dict[int, int]:
    out: dict[int, int] = {}
    for k1, v1 in d1.items():
        for k2, v2 in d2.items():
            out[k1 + k2] = out.get(k1 + k2, 0) + v1 * v2
    return out


def hom_degrees(g1: Generator, g2: Generator) -> dict[int, int]:
    """Graded dimensions of Hom^*(g1, g2) on the product.

    The per-factor tables multiply as a convolution in the degree variable
    (the Kunneth rule), and the shifts move the result by
    ``g1.shift - g2.shift``.
    """
    if g1.n != g2.n:
        raise ValueError("generators live on different products")
    total = {0: 1}
    for a, b in zip(g1.symbols, g2.symbols):
        total = _convolve(total, factor_hom_degrees(a, b))
        if not total:
            return {}
    delta = g2.shift - g1.shift
    return {d - delta: v for d, v in total.items()}


def euler_pairing(g1: Generator, g2: Generator) -> int:
    """Alternating sum of graded Hom dimensions."""
    return sum((-1) ** (k % 2) * v for k, v in hom_degrees(g1, g2).items())


def euler_matrix(n: int) -> np.ndarray:
    """Gram matrix of the Euler pairing in the tensor basis.

    On one factor the pairing of (structure sheaf, point) classes is
    [[1, 1], [-1, 0]]; the product lattice takes Kronecker powers.
    """
    m1 = np.array([[1, 1], [-1, 0]], dtype=np.int64)
    return reduce(np.kron, [m1] * n)
