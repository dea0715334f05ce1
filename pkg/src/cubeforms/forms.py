"""Exact algebra of polynomial differential forms on coordinate boxes.

Polynomials carry arbitrary-precision rational coefficients, so wedge
products, exterior derivatives, traces and L2 pairings on the unit cube
are computed without rounding.  Floating point enters only through
``evaluate``.  Variables are numbered 1..n to match the usual dx^i
notation; a 0-form in zero variables (n = 0) is a plain constant, which
keeps vertex traces on the same code path as everything else.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Mapping, Sequence

Monomial = tuple[int, ...]
IndexMap = tuple[int, ...]
Scalar = Fraction | int

__all__ = [
    "Monomial",
    "IndexMap",
    "Polynomial",
    "DiffForm",
    "Face",
    "enumerate_sigma",
    "wedge",
    "exterior_derivative",
    "trace",
    "l2_inner_reference",
    "l2_inner_box",
    "integrate_unit_box",
    "evaluate",
    "monomial_degree",
    "permutation_sign",
]


def enumerate_sigma(k: int, n: int) -> list[IndexMap]:
    """All increasing k-index selections from 1..n, in lexicographic order.

    This ordering is the canonical component ordering used by every matrix
    and basis downstream.
    """
    if k < 0 or k > n:
        raise ValueError(f"form degree k={k} out of range for n={n}")
    return [tuple(c) for c in combinations(range(1, n + 1), k)]


def monomial_degree(exponents: Monomial) -> int:
    return sum(exponents)


def permutation_sign(left: IndexMap, right: IndexMap) -> int:
    """Sign of sorting the concatenation of two increasing index maps."""
    inversions = sum(1 for s in left for t in right if s > t)
    return -1 if inversions % 2 else 1


class Polynomial:
    """Polynomial in ``nvars`` variables with exact rational coefficients.

    Stored as a map from exponent tuples to nonzero Fractions (canonical
    form).  Instances are treated as immutable.
    """

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[Monomial, Scalar] | None = None):
        self.nvars = nvars
        clean: dict[Monomial, Fraction] = {}
        if terms:
            for exps, c in terms.items():
                c = Fraction(c)
                if c == 0:
                    continue
                if len(exps) != nvars or any(e < 0 for e in exps):
                    raise ValueError(f"bad exponent tuple {exps} for nvars={nvars}")
                exps = tuple(int(e) for e in exps)
                acc = clean.get(exps)
                val = c if acc is None else acc + c
                if val == 0:
                    clean.pop(exps, None)
                else:
                    clean[exps] = val
        self.terms = clean

    @classmethod
    def zero(cls, nvars: int) -> "Polynomial":
        return cls(nvars)

    @classmethod
    def constant(cls, nvars: int, c: Scalar) -> "Polynomial":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def variable(cls, nvars: int, i: int) -> "Polynomial":
        """The coordinate polynomial x_i (1-based i)."""
        if not 1 <= i <= nvars:
            raise ValueError(f"variable index {i} out of range 1..{nvars}")
        exps = tuple(1 if j == i - 1 else 0 for j in range(nvars))
        return cls(nvars, {exps: 1})

    @classmethod
    def monomial(cls, nvars: int, exps: Monomial, c: Scalar = 1) -> "Polynomial":
        return cls(nvars, {tuple(exps): c})

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=-1)

    def degree_in(self, i: int) -> int:
        """Degree in variable x_i (1-based); -1 for the zero polynomial."""
        return max((e[i - 1] for e in self.terms), default=-1)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        if self.nvars != other.nvars:
            raise ValueError("polynomial arity mismatch")
        out = dict(self.terms)
        for exps, c in other.terms.items():
            val = out.get(exps, Fraction(0)) + c
            if val == 0:
                out.pop(exps, None)
            else:
                out[exps] = val
        p = Polynomial.__new__(Polynomial)
        p.nvars = self.nvars
        p.terms = out
        return p

    def __neg__(self) -> "Polynomial":
        p = Polynomial.__new__(Polynomial)
        p.nvars = self.nvars
        p.terms = {e: -c for e, c in self.terms.items()}
        return p

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other: "Polynomial | Scalar") -> "Polynomial":
        if isinstance(other, (int, Fraction)):
            c = Fraction(other)
            if c == 0:
                return Polynomial.zero(self.nvars)
            p = Polynomial.__new__(Polynomial)
            p.nvars = self.nvars
            p.terms = {e: v * c for e, v in self.terms.items()}
            return p
        if self.nvars != other.nvars:
            raise ValueError("polynomial arity mismatch")
        out: dict[Monomial, Fraction] = {}
        for ea, ca in self.terms.items():
            for eb, cb in other.terms.items():
                key = tuple(x + y for x, y in zip(ea, eb))
                val = out.get(key, Fraction(0)) + ca * cb
                if val == 0:
                    out.pop(key, None)
                else:
                    out[key] = val
        p = Polynomial.__new__(Polynomial)
        p.nvars = self.nvars
        p.terms = out
        return p

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "Polynomial":
        if e < 0:
            raise ValueError("negative polynomial power")
        out = Polynomial.constant(self.nvars, 1)
        for _ in range(e):
            out = out * self
        return out

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Polynomial)
            and self.nvars == other.nvars
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def partial(self, i: int) -> "Polynomial":
        """Exact partial derivative with respect to x_i (1-based)."""
        out: dict[Monomial, Fraction] = {}
        pos = i - 1
        for exps, c in self.terms.items():
            e = exps[pos]
            if e == 0:
                continue
            key = exps[:pos] + (e - 1,) + exps[pos + 1 :]
            out[key] = out.get(key, Fraction(0)) + c * e
        return Polynomial(self.nvars, out)

    def restrict(self, fixed: Mapping[int, Scalar], keep: Sequence[int]) -> "Polynomial":
        """Substitute values for the ``fixed`` variables, keep the rest.

        ``keep`` lists the surviving variable indices (1-based, increasing);
        the result is a polynomial in ``len(keep)`` variables, reindexed in
        that order.
        """
        keep = tuple(keep)
        out: dict[Monomial, Fraction] = {}
        for exps, c in self.terms.items():
            coeff = c
            dead = False
            for i, val in fixed.items():
                e = exps[i - 1]
                if e == 0:
                    continue
                v = Fraction(val)
                if v == 0:
                    dead = True
                    break
                coeff *= v**e
            if dead:
                continue
            key = tuple(exps[i - 1] for i in keep)
            val2 = out.get(key, Fraction(0)) + coeff
            if val2 == 0:
                out.pop(key, None)
            else:
                out[key] = val2
        return Polynomial(len(keep), out)

    def compose(self, args: Sequence["Polynomial"]) -> "Polynomial":
        """Substitute x_i := args[i-1]; all args share one target arity."""
        if len(args) != self.nvars:
            raise ValueError("composition needs one polynomial per variable")
        if self.nvars == 0:
            return Polynomial(0, dict(self.terms))
        m = args[0].nvars
        # Power cache keeps repeated monomial substitution cheap.
        powers: list[list[Polynomial]] = [[Polynomial.constant(m, 1)] for _ in args]
        out = Polynomial.zero(m)
        for exps, c in self.terms.items():
            term = Polynomial.constant(m, c)
            for pos, e in enumerate(exps):
                cache = powers[pos]
                while len(cache) <= e:
                    cache.append(cache[-1] * args[pos])
                term = term * cache[e]
            out = out + term
        return out

    def eval_exact(self, point: Sequence[Scalar]) -> Fraction:
        if len(point) != self.nvars:
            raise ValueError("point arity mismatch")
        vals = [Fraction(x) for x in point]
        total = Fraction(0)
        for exps, c in self.terms.items():
            term = c
            for x, e in zip(vals, exps):
                if e:
                    term *= x**e
            total += term
        return total

    def eval_float(self, point: Sequence[float]) -> float:
        total = 0.0
        for exps, c in self.terms.items():
            term = float(c)
            for x, e in zip(point, exps):
                if e:
                    term *= float(x) ** e
            total += term
        return total

    def integral_box(self, edge: Scalar = 1) -> Fraction:
        """Exact integral over the box [0, edge]^nvars."""
        h = Fraction(edge)
        total = Fraction(0)
        for exps, c in self.terms.items():
            term = c
            for e in exps:
                term *= h ** (e + 1) / (e + 1)
            total += term
        return total

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for exps in sorted(self.terms):
            c = self.terms[exps]
            mono = "*".join(
                f"x{i + 1}" if e == 1 else f"x{i + 1}^{e}"
                for i, e in enumerate(exps)
                if e
            )
            parts.append(f"{c}" if not mono else (mono if c == 1 else f"{c}*{mono}"))
        return " + ".join(parts)


@dataclass(frozen=True)
class Face:
    """A face of the unit n-cube: some coordinates fixed at 0 or 1.

    ``fixed`` maps coordinate index (1-based) to its value; ``free`` lists
    the remaining coordinates in increasing order.  Together they must
    partition 1..n.
    """

    n: int
    fixed: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        fixed = dict(self.fixed)
        if any(v not in (0, 1) for v in fixed.values()):
            raise ValueError("face coordinates must be fixed at 0 or 1")
        if any(not 1 <= i <= self.n for i in fixed):
            raise ValueError("fixed coordinate index out of range")
        object.__setattr__(self, "fixed", fixed)

    @property
    def free(self) -> tuple[int, ...]:
        return tuple(i for i in range(1, self.n + 1) if i not in self.fixed)

    @property
    def dim(self) -> int:
        return self.n - len(self.fixed)

    def __repr__(self) -> str:
        inside = ", ".join(f"x{i}={v}" for i, v in sorted(self.fixed.items()))
        return f"Face(n={self.n}, {{{inside}}})" if inside else f"Face(n={self.n})"


class DiffForm:
    """Polynomial differential k-form sum_sigma f_sigma dx^sigma on a box.

    ``components`` maps increasing index tuples to coefficient polynomials;
    zero components are never stored.
    """

    __slots__ = ("n", "k", "components")

    def __init__(
        self,
        n: int,
        k: int,
        components: Mapping[IndexMap, Polynomial] | None = None,
    ):
        if k < 0:
            raise ValueError("form degree must be non-negative")
        self.n = n
        self.k = k
        clean: dict[IndexMap, Polynomial] = {}
        if components:
            for sigma, poly in components.items():
                sigma = tuple(sigma)
                if len(sigma) != k:
                    raise ValueError(f"index map {sigma} has wrong length for k={k}")
                if any(not 1 <= s <= n for s in sigma) or list(sigma) != sorted(set(sigma)):
                    raise ValueError(f"index map {sigma} not strictly increasing in 1..{n}")
                if poly.nvars != n:
                    raise ValueError("component polynomial arity mismatch")
                if not poly.is_zero:
                    prev = clean.get(sigma)
                    merged = poly if prev is None else prev + poly
                    if merged.is_zero:
                        clean.pop(sigma, None)
                    else:
                        clean[sigma] = merged
        self.components = clean

    @classmethod
    def zero(cls, n: int, k: int) -> "DiffForm":
        return cls(n, k)

    @classmethod
    def from_polynomial(cls, poly: Polynomial) -> "DiffForm":
        """Wrap a polynomial as a 0-form."""
        return cls(poly.nvars, 0, {(): poly})

    @classmethod
    def monomial_form(
        cls, n: int, sigma: IndexMap, exps: Monomial, c: Scalar = 1
    ) -> "DiffForm":
        return cls(n, len(sigma), {tuple(sigma): Polynomial.monomial(n, exps, c)})

    @classmethod
    def basis_form(cls, n: int, sigma: IndexMap) -> "DiffForm":
        """The constant form dx^sigma."""
        return cls.monomial_form(n, sigma, (0,) * n, 1)

    @property
    def is_zero(self) -> bool:
        return not self.components

    def component(self, sigma: IndexMap) -> Polynomial:
        return self.components.get(tuple(sigma), Polynomial.zero(self.n))

    def __add__(self, other: "DiffForm") -> "DiffForm":
        if self.n != other.n or self.k != other.k:
            raise ValueError("form shape mismatch in addition")
        out = dict(self.components)
        for sigma, poly in other.components.items():
            merged = out[sigma] + poly if sigma in out else poly
            if merged.is_zero:
                out.pop(sigma, None)
            else:
                out[sigma] = merged
        f = DiffForm.__new__(DiffForm)
        f.n, f.k, f.components = self.n, self.k, out
        return f

    def __neg__(self) -> "DiffForm":
        f = DiffForm.__new__(DiffForm)
        f.n, f.k = self.n, self.k
        f.components = {s: -p for s, p in self.components.items()}
        return f

    def __sub__(self, other: "DiffForm") -> "DiffForm":
        return self + (-other)

    def __mul__(self, c: Scalar) -> "DiffForm":
        return DiffForm(self.n, self.k, {s: p * c for s, p in self.components.items()})

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, DiffForm)
            and self.n == other.n
            and self.k == other.k
            and self.components == other.components
        )

    def __hash__(self):
        return hash((self.n, self.k, frozenset(self.components.items())))

    def wedge(self, other: "DiffForm") -> "DiffForm":
        if self.n != other.n:
            raise ValueError("ambient dimension mismatch in wedge")
        n = self.n
        deg = self.k + other.k
        out: dict[IndexMap, Polynomial] = {}
        if deg <= n:
            for s, ps in self.components.items():
                sset = set(s)
                for t, pt in other.components.items():
                    if sset & set(t):
                        continue
                    sign = permutation_sign(s, t)
                    key = tuple(sorted(s + t))
                    term = ps * pt
                    if sign < 0:
                        term = -term
                    merged = out[key] + term if key in out else term
                    if merged.is_zero:
                        out.pop(key, None)
                    else:
                        out[key] = merged
        f = DiffForm.__new__(DiffForm)
        f.n, f.k, f.components = n, deg, out
        return f

    def d(self) -> "DiffForm":
        """Exterior derivative; a (k+1)-form, zero for top-degree forms."""
        n = self.n
        out: dict[IndexMap, Polynomial] = {}
        for sigma, poly in self.components.items():
            sset = set(sigma)
            for i in range(1, n + 1):
                if i in sset:
                    continue
                dp = poly.partial(i)
                if dp.is_zero:
                    continue
                below = sum(1 for s in sigma if s < i)
                if below % 2:
                    dp = -dp
                key = tuple(sorted(sigma + (i,)))
                merged = out[key] + dp if key in out else dp
                if merged.is_zero:
                    out.pop(key, None)
                else:
                    out[key] = merged
        f = DiffForm.__new__(DiffForm)
        f.n, f.k, f.components = n, self.k + 1, out
        return f

    def trace(self, face: Face) -> "DiffForm":
        """Restrict to a face: substitute its fixed coordinates and drop
        every component whose index map touches one of them."""
        if face.n != self.n:
            raise ValueError("face does not belong to this form's cube")
        free = face.free
        local = {i: pos + 1 for pos, i in enumerate(free)}
        out: dict[IndexMap, Polynomial] = {}
        for sigma, poly in self.components.items():
            if any(s in face.fixed for s in sigma):
                continue
            p = poly.restrict(face.fixed, free)
            if p.is_zero:
                continue
            key = tuple(local[s] for s in sigma)
            out[key] = out[key] + p if key in out else p
        return DiffForm(len(free), self.k, out)

    def evaluate(self, point: Sequence[float]) -> dict[IndexMap, float]:
        if len(point) != self.n:
            raise ValueError("point arity mismatch")
        return {s: p.eval_float(point) for s, p in self.components.items()}

    def max_degree(self) -> int:
        """Largest total degree over all components; -1 if zero."""
        return max((p.degree() for p in self.components.values()), default=-1)

    def __repr__(self) -> str:
        if not self.components:
            return f"DiffForm(0; n={self.n}, k={self.k})"
        parts = []
        for sigma in sorted(self.components):
            dx = "^".join(f"dx{s}" for s in sigma) or "1"
            parts.append(f"({self.components[sigma]}) {dx}".strip())
        return " + ".join(parts)


def wedge(f: DiffForm, g: DiffForm) -> DiffForm:
    return f.wedge(g)


def exterior_derivative(f: DiffForm) -> DiffForm:
    return f.d()


def trace(f: DiffForm, face: Face) -> DiffForm:
    return f.trace(face)


def l2_inner_box(f: DiffForm, g: DiffForm, edge: Scalar = 1) -> Fraction:
    """Exact L2 pairing of two k-forms over the box [0, edge]^n."""
    if f.n != g.n or f.k != g.k:
        raise ValueError("form shape mismatch in L2 pairing")
    total = Fraction(0)
    for sigma, pf in f.components.items():
        pg = g.components.get(sigma)
        if pg is not None:
            total += (pf * pg).integral_box(edge)
    return total


def l2_inner_reference(f: DiffForm, g: DiffForm) -> Fraction:
    """Exact L2 inner product on the unit cube, summed over components."""
    return l2_inner_box(f, g, 1)


def integrate_unit_box(f: DiffForm) -> Fraction:
    """Integrate a top-degree form (k = n) over the unit cube.

    For n = 0 this is evaluation of the constant.
    """
    if f.k != f.n:
        raise ValueError("only top-degree forms can be integrated")
    top = tuple(range(1, f.n + 1))
    poly = f.components.get(top)
    return Fraction(0) if poly is None else poly.integral_box(1)


def evaluate(f: DiffForm, point: Sequence[float]) -> dict[IndexMap, float]:
    return f.evaluate(point)
