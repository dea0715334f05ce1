"""Reference shape-function spaces on the unit n-cube and the rate predictor.

Builders produce explicit monomial-form bases for the tensor-product family
Q_r^- Lambda^k, the full polynomial family P_r Lambda^k, the scalar
serendipity family, and the 2D serendipity 1-form family.  Inclusion
testing is exact: spaces with a pure monomial basis are compared by
coordinate-set inclusion (equivalent to the rank test and much faster),
anything else falls back to rational row reduction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import comb

from . import exactla
from .forms import DiffForm, Monomial, enumerate_sigma

__all__ = [
    "FormSpace",
    "RatePrediction",
    "build_P",
    "build_Qminus",
    "dim_Qminus",
    "superlinear_degree",
    "build_serendipity",
    "build_SrLambda1_2d",
    "contains",
    "in_span",
    "predict_rates",
    "zero_space",
]


@dataclass
class FormSpace:
    """A finite-dimensional span of differential k-forms on [0,1]^n."""

    n: int
    k: int
    basis: list[DiffForm]
    label: str = ""
    # Set by builders whose basis is unit-coefficient monomial forms: the
    # set of (sigma, exponents) coordinates spanned.  Enables the fast
    # membership path in contains().
    monomial_coords: frozenset[tuple[tuple[int, ...], Monomial]] | None = field(
        default=None, repr=False
    )
    _echelon: tuple | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        for f in self.basis:
            if f.n != self.n or f.k != self.k:
                raise ValueError(f"basis form with (n,k)=({f.n},{f.k}) in space ({self.n},{self.k})")

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def is_zero(self) -> bool:
        return not self.basis

    def coordinates(self) -> list[tuple[tuple[int, ...], Monomial]]:
        """Sorted union of (sigma, monomial) coordinates over the basis."""
        coords = set()
        for f in self.basis:
            for sigma, poly in f.components.items():
                for exps in poly.terms:
                    coords.add((sigma, exps))
        return sorted(coords)

    def rank(self) -> int:
        """Exact rank of the basis as vectors of rational coefficients."""
        coords = self.coordinates()
        index = {c: j for j, c in enumerate(coords)}
        rows = []
        for f in self.basis:
            row = [Fraction(0)] * len(coords)
            for sigma, poly in f.components.items():
                for exps, c in poly.terms.items():
                    row[index[(sigma, exps)]] = c
            rows.append(row)
        return exactla.rank(rows)


def zero_space(n: int, k: int, label: str = "zero") -> FormSpace:
    return FormSpace(n, k, [], label, monomial_coords=frozenset())


def _monomial_space(
    n: int, k: int, items: list[tuple[tuple[int, ...], Monomial]], label: str
) -> FormSpace:
    basis = [DiffForm.monomial_form(n, sigma, exps) for sigma, exps in items]
    return FormSpace(n, k, basis, label, monomial_coords=frozenset(items))


def build_P(r: int, k: int, n: int) -> FormSpace:
    """P_r Lambda^k(I^n): coefficients of total degree at most r.

    Negative r yields the zero space (the convention the rate predictor
    relies on).
    """
    if k < 0 or k > n:
        raise ValueError(f"form degree k={k} invalid for n={n}")
    label = f"P r={r} k={k} n={n}"
    if r < 0:
        return zero_space(n, k, label)
    sigmas = enumerate_sigma(k, n)
    monos = [e for e in product(range(r + 1), repeat=n) if sum(e) <= r]
    monos.sort()
    items = [(s, e) for s in sigmas for e in monos]
    space = _monomial_space(n, k, items, label)
    assert space.dim == comb(n, k) * comb(n + r, n)
    return space


def dim_Qminus(r: int, k: int, n: int) -> int:
    """Closed-form dimension binom(n,k) (r+1)^(n-k) r^k."""
    if k < 0 or k > n:
        raise ValueError(f"form degree k={k} invalid for n={n}")
    if r < 0:
        return 0
    return comb(n, k) * (r + 1) ** (n - k) * r**k


def build_Qminus(r: int, k: int, n: int) -> FormSpace:
    """Q_r^- Lambda^k(I^n): degree <= r in every variable, <= r-1 in the
    variables selected by the index map.  Zero space for r = 0, k > 0 and
    for negative r."""
    if k < 0 or k > n:
        raise ValueError(f"form degree k={k} invalid for n={n}")
    label = f"Qminus r={r} k={k} n={n}"
    if r < 0 or (r == 0 and k > 0):
        return zero_space(n, k, label)
    items: list[tuple[tuple[int, ...], Monomial]] = []
    for sigma in enumerate_sigma(k, n):
        sset = set(sigma)
        caps = [r - 1 if i in sset else r for i in range(1, n + 1)]
        for exps in product(*(range(c + 1) for c in caps)):
            items.append((sigma, exps))
    space = _monomial_space(n, k, items, label)
    assert space.dim == dim_Qminus(r, k, n)
    return space


def superlinear_degree(exponents: Monomial) -> int:
    """Total degree ignoring variables that enter linearly."""
    return sum(e for e in exponents if e >= 2)


def build_serendipity(r: int, n: int) -> FormSpace:
    """Scalar serendipity space S_r(I^n): monomials of superlinear degree
    at most r.  Exponents above r cannot pass the filter, so the box
    [0, r]^n is an exhaustive enumeration domain."""
    if r < 1:
        raise ValueError("serendipity spaces need r >= 1")
    label = f"S r={r} n={n}"
    items = [
        ((), e)
        for e in sorted(product(range(r + 1), repeat=n))
        if superlinear_degree(e) <= r
    ]
    return _monomial_space(n, 0, items, label)


def build_SrLambda1_2d(r: int) -> FormSpace:
    """2D serendipity 1-forms: P_r Lambda^1(I^2) plus the span of
    d(x1^(r+1) x2) and d(x1 x2^(r+1))."""
    if r < 1:
        raise ValueError("serendipity 1-form spaces need r >= 1")
    base = build_P(r, 1, 2)
    extras = [
        DiffForm.monomial_form(2, (), (r + 1, 1)).d(),
        DiffForm.monomial_form(2, (), (1, r + 1)).d(),
    ]
    return FormSpace(2, 1, base.basis + extras, f"SLambda1 r={r} n=2")


def _echelon_of(space: FormSpace) -> tuple:
    if space._echelon is None:
        coords = space.coordinates()
        index = {c: j for j, c in enumerate(coords)}
        rows = []
        for f in space.basis:
            row = [Fraction(0)] * len(coords)
            for sigma, poly in f.components.items():
                for exps, c in poly.terms.items():
                    row[index[(sigma, exps)]] = c
            rows.append(row)
        echelon, pivots = exactla.rref(rows)
        space._echelon = (index, echelon, pivots)
    return space._echelon


def in_span(space: FormSpace, f: DiffForm) -> bool:
    """Exact membership of a single form in the span of a space's basis."""
    if f.is_zero:
        return True
    if f.n != space.n or f.k != space.k:
        raise ValueError("form and space live on different (n, k)")
    if space.monomial_coords is not None:
        return all(
            (sigma, exps) in space.monomial_coords
            for sigma, poly in f.components.items()
            for exps in poly.terms
        )
    index, echelon, pivots = _echelon_of(space)
    vec = [Fraction(0)] * len(index)
    for sigma, poly in f.components.items():
        for exps, c in poly.terms.items():
            col = index.get((sigma, exps))
            if col is None:
                return False
            vec[col] = c
    return exactla.in_row_span(echelon, pivots, vec)


def contains(v: FormSpace, w: FormSpace) -> bool:
    """True iff every basis element of w lies in span(v).  Exact."""
    if v.n != w.n or v.k != w.k:
        raise ValueError("spaces live on different (n, k)")
    return all(in_span(v, f) for f in w.basis)


@dataclass(frozen=True)
class RatePrediction:
    """Largest guaranteed L2 orders: s_affine on parallelotope meshes,
    s_multilinear on general multilinear (curvilinear cubic) meshes."""

    s_affine: int
    s_multilinear: int


def predict_rates(v: FormSpace, max_s: int = 64) -> RatePrediction:
    """Largest s with P_(s-1) Lambda^k inside V, and with
    Q_(s+k-1)^- Lambda^k inside V.  s = 0 is always admissible since both
    test spaces degenerate to zero there."""
    if v.is_zero:
        raise ValueError("rate prediction needs a nonzero space")
    n, k = v.n, v.k
    s_affine = 0
    for s in range(1, max_s + 1):
        probe = build_P(s - 1, k, n)
        if probe.dim > v.dim or not contains(v, probe):
            break
        s_affine = s
    s_multi = 0
    for s in range(1, s_affine + 1):
        probe = build_Qminus(s + k - 1, k, n)
        if probe.dim > v.dim or not contains(v, probe):
            break
        s_multi = s
    return RatePrediction(s_affine, s_multi)
