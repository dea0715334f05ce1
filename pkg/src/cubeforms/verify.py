"""Exact verification suites: dimensions, DOF counts, unisolvence,
calculus identities, subcomplex property, and pullback inclusions.

Every check here is decided in exact rational arithmetic.  Results come
back as (name, ok, detail) triples so the CLI can print one line per check
and tests can assert on them; any failing triple names the offending
(r, k, n).
"""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import product

from .dofs import build_dofs, dof_count_by_faces, enumerate_faces, unisolvence_matrix
from .forms import DiffForm, enumerate_sigma, l2_inner_box, l2_inner_reference
from .mapping import (
    MultilinearMap,
    check_diffeo,
    map_from_vertices,
    pullback_polynomial,
)
from .spaces import build_P, build_Qminus, dim_Qminus, in_span

CheckResult = tuple[str, bool, str]


def _corner_tuples(n: int):
    return list(product((0, 1), repeat=n))


def random_rational_multilinear(
    n: int, rng: random.Random, denom: int = 8, spread: int = 2
) -> MultilinearMap:
    """Random valid multilinear map with rational vertices near the corners."""
    while True:
        verts = {
            alpha: tuple(
                Fraction(alpha[i]) + Fraction(rng.randint(-spread, spread), denom)
                for i in range(n)
            )
            for alpha in _corner_tuples(n)
        }
        fmap = map_from_vertices(verts)
        if check_diffeo(fmap):
            return fmap


def random_rational_affine(
    n: int, rng: random.Random, denom: int = 8, spread: int = 2
) -> MultilinearMap:
    """Random affine map x -> A x + b with rational entries and det A > 0."""
    while True:
        a = [
            [
                Fraction(1 if i == j else 0) + Fraction(rng.randint(-spread, spread), denom)
                for j in range(n)
            ]
            for i in range(n)
        ]
        b = [Fraction(rng.randint(-spread, spread), denom) for _ in range(n)]
        verts = {
            alpha: tuple(
                b[i] + sum(a[i][j] * alpha[j] for j in range(n)) for i in range(n)
            )
            for alpha in _corner_tuples(n)
        }
        fmap = map_from_vertices(verts)
        if fmap.is_affine and check_diffeo(fmap):
            return fmap


def check_dimensions(max_n: int = 4, max_r: int = 4) -> list[CheckResult]:
    out = []
    for n in range(1, max_n + 1):
        for k in range(n + 1):
            for r in range(max_r + 1):
                ok = build_Qminus(r, k, n).dim == dim_Qminus(r, k, n)
                out.append((f"dimension r={r} k={k} n={n}", ok, ""))
    return out


def check_dof_counts(max_n: int = 4, max_r: int = 4, build_up_to_n: int = 3) -> list[CheckResult]:
    out = []
    for n in range(1, max_n + 1):
        for k in range(n + 1):
            for r in range(1, max_r + 1):
                ok = dof_count_by_faces(r, k, n) == dim_Qminus(r, k, n)
                if n <= build_up_to_n:
                    ok = ok and build_dofs(r, k, n).count == dim_Qminus(r, k, n)
                out.append((f"dof-count r={r} k={k} n={n}", ok, ""))
    return out


def check_unisolvence(max_n: int = 3, max_r: int = 3) -> list[CheckResult]:
    out = []
    for n in range(1, min(max_n, 3) + 1):
        for k in range(n + 1):
            for r in range(1, min(max_r, 3) + 1):
                _, ok = unisolvence_matrix(r, k, n)
                out.append((f"unisolvence r={r} k={k} n={n}", ok, ""))
    return out


def _sample_forms(n: int) -> list[DiffForm]:
    """Small deterministic family of forms with mixed degrees and coefficients."""
    forms = []
    for k in range(n + 1):
        f = DiffForm.zero(n, k)
        for m, sigma in enumerate(enumerate_sigma(k, n)):
            exps = tuple((m + i + k) % 3 for i in range(n))
            f = f + DiffForm.monomial_form(n, sigma, exps, Fraction(m + 1, m + 2))
        forms.append(f)
    return forms


def check_calculus(max_n: int = 3) -> list[CheckResult]:
    out = []
    for n in range(1, max_n + 1):
        forms = _sample_forms(n)
        ok_dd = all(f.d().d().is_zero for f in forms)
        out.append((f"d.d=0 n={n}", ok_dd, ""))
        ok_anti = True
        ok_leibniz = True
        for f in forms:
            for g in forms:
                fg = f.wedge(g)
                gf = g.wedge(f)
                sign = -1 if (f.k * g.k) % 2 else 1
                if fg != sign * gf:
                    ok_anti = False
                lhs = fg.d()
                rhs = f.d().wedge(g) + (f.wedge(g.d()) * (-1 if f.k % 2 else 1))
                if lhs != rhs:
                    ok_leibniz = False
        out.append((f"anticommutativity n={n}", ok_anti, ""))
        out.append((f"leibniz n={n}", ok_leibniz, ""))
        ok_trace = True
        for f in forms:
            for d in range(n):
                for face in enumerate_faces(n, d):
                    if f.d().trace(face) != f.trace(face).d():
                        ok_trace = False
        out.append((f"trace-d commutation n={n}", ok_trace, ""))
    return out


def check_subcomplex(max_n: int = 3, max_r: int = 3) -> list[CheckResult]:
    out = []
    for n in range(1, max_n + 1):
        for k in range(n):
            for r in range(1, max_r + 1):
                target = build_Qminus(r, k + 1, n)
                ok = all(
                    in_span(target, f.d()) for f in build_Qminus(r, k, n).basis
                )
                out.append((f"subcomplex r={r} k={k} n={n}", ok, ""))
        for r in range(1, max_r + 1):
            ok = all(f.d().is_zero for f in build_Qminus(r, n, n).basis)
            out.append((f"subcomplex-top r={r} n={n}", ok, ""))
    return out


def check_pullback_inclusions(
    n: int, max_r: int = 3, n_maps: int = 20, seed: int = 2024
) -> list[CheckResult]:
    """Affine pullbacks stay in P_r; multilinear pullbacks land in
    Q_(r+k)^-, where r is the total degree of the pulled monomial.  Also
    naturality (d commutes) and wedge preservation, all exact."""
    rng = random.Random(seed)
    out = []
    qspaces = {
        (r, k): build_Qminus(r + k, k, n) for k in range(n + 1) for r in range(max_r + 1)
    }
    pspaces = {(r, k): build_P(r, k, n) for k in range(n + 1) for r in range(max_r + 1)}
    for idx in range(n_maps):
        fmap = random_rational_multilinear(n, rng)
        amap = random_rational_affine(n, rng)
        ok_q = True
        ok_p = True
        for k in range(n + 1):
            for v in build_P(max_r, k, n).basis:
                deg = v.max_degree()
                if not in_span(qspaces[(deg, k)], pullback_polynomial(fmap, v)):
                    ok_q = False
                if not in_span(pspaces[(deg, k)], pullback_polynomial(amap, v)):
                    ok_p = False
        out.append((f"pullback-multilinear->Qminus n={n} map={idx}", ok_q, ""))
        out.append((f"pullback-affine->P n={n} map={idx}", ok_p, ""))
    fmap = random_rational_multilinear(n, rng)
    forms = _sample_forms(n)
    ok_nat = all(
        pullback_polynomial(fmap, f.d()) == pullback_polynomial(fmap, f).d()
        for f in forms
    )
    out.append((f"pullback-naturality n={n}", ok_nat, ""))
    ok_wedge = all(
        pullback_polynomial(fmap, f.wedge(g))
        == pullback_polynomial(fmap, f).wedge(pullback_polynomial(fmap, g))
        for f in forms
        for g in forms
    )
    out.append((f"pullback-wedge n={n}", ok_wedge, ""))
    return out


def check_dilation_scaling(max_n: int = 3) -> list[CheckResult]:
    """Exact L2 scaling of pullbacks under dilation: the squared norm on the
    reference cube equals h^(2k-n) times the squared norm over the scaled box."""
    out = []
    for n in range(1, max_n + 1):
        forms = _sample_forms(n)
        for h in (Fraction(1, 2), Fraction(1, 3), Fraction(2)):
            fmap = MultilinearMap.dilation(n, h)
            ok = True
            for v in forms:
                k = v.k
                lhs = l2_inner_reference(
                    pullback_polynomial(fmap, v), pullback_polynomial(fmap, v)
                )
                rhs = h ** (2 * k - n) * l2_inner_box(v, v, h)
                if lhs != rhs:
                    ok = False
            out.append((f"dilation-scaling h={h} n={n}", ok, ""))
    return out


def run_all(max_n: int = 3, max_r: int = 3, pullback_maps: int = 5) -> list[CheckResult]:
    """The exact suite driven by the check subcommand."""
    results: list[CheckResult] = []
    results += check_dimensions(max_n, max_r)
    results += check_dof_counts(max_n, max_r)
    results += check_unisolvence(max_n, max_r)
    results += check_calculus(min(max_n, 3))
    results += check_subcomplex(min(max_n, 3), min(max_r, 3))
    for n in (2, 3):
        if n <= max_n:
            results += check_pullback_inclusions(n, min(max_r, 3), pullback_maps)
    results += check_dilation_scaling(min(max_n, 3))
    return results
