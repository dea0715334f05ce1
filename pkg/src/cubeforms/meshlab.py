"""Mesh families, tensor Gauss quadrature, and broken L2 projection studies.

The measured quantity is the elementwise best approximation of a smooth
target form by the mapped reference space, which lower-bounds the
conforming infimum; fitted h-rates from it are compared against the
inclusion-based predictions.  Element computations run through the
kernels module (numba by default, numpy fallback) and are independent
across elements; reductions happen in fixed element order so reported
errors do not depend on the thread count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import log
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .forms import DiffForm, Polynomial, Scalar, enumerate_sigma, integrate_unit_box
from .mapping import MultilinearMap, check_diffeo, jacobian, map_from_vertices, pullback_polynomial
from .spaces import FormSpace, RatePrediction, predict_rates

__all__ = [
    "NumericalError",
    "QuadratureRule",
    "TargetForm",
    "Mesh",
    "ConvergenceReport",
    "gauss_rule",
    "mesh_uniform",
    "mesh_parallelotope",
    "mesh_trapezoidal",
    "mesh_trilinear_3d",
    "build_mesh",
    "target_trig",
    "target_from_form",
    "target_from_reference",
    "element_l2_error",
    "discrete_l2_pairing",
    "exact_l2_pairing",
    "convergence_study",
    "default_quad_order",
]

MESH_FAMILIES = ("uniform", "parallelotope", "trapezoidal", "trilinear3d")


class NumericalError(RuntimeError):
    """Numeric failure in the projection pipeline (singular or rank-deficient)."""


@dataclass(frozen=True)
class QuadratureRule:
    """Tensor Gauss-Legendre rule on [0,1]^n, exact for per-variable degree
    up to 2q-1."""

    n: int
    order: int
    points: np.ndarray
    weights: np.ndarray


def gauss_rule(n: int, q: int) -> QuadratureRule:
    if not 1 <= q <= 20:
        raise ValueError("per-axis quadrature order must be in 1..20")
    nodes, wts = np.polynomial.legendre.leggauss(q)
    nodes = (nodes + 1.0) / 2.0
    wts = wts / 2.0
    pts_1d = [(x, w) for x, w in zip(nodes, wts)]
    points = np.empty((q**n, n))
    weights = np.empty(q**n)
    for row, combo in enumerate(product(pts_1d, repeat=n)):
        points[row] = [c[0] for c in combo]
        weights[row] = np.prod([c[1] for c in combo])
    return QuadratureRule(n, q, points, weights)


@dataclass(frozen=True)
class TargetForm:
    """Smooth k-form target: callable giving all component values at once.

    The evaluator receives physical points and the matching reference
    points of the current element; catalog targets only use the physical
    ones, while mapped-reference targets (used to test projection of
    elements of the space itself) use the reference points.
    """

    n: int
    k: int
    label: str
    fn: Callable[[np.ndarray, np.ndarray], np.ndarray]

    def values(self, xphys: np.ndarray, xref: np.ndarray) -> np.ndarray:
        out = np.asarray(self.fn(xphys, xref), dtype=np.float64)
        m = len(enumerate_sigma(self.k, self.n))
        if out.shape != (xphys.shape[0], m):
            raise ValueError(f"target returned shape {out.shape}, expected ({xphys.shape[0]}, {m})")
        return out


def target_trig(n: int, k: int, scale: float = 1.0) -> TargetForm:
    """Default smooth target: component m is sin(scale pi sum_i i x_i + m/(M+1)).

    Every component is nonzero and non-polynomial.  Lower scales push the
    preasymptotic regime to coarser meshes, which matters for 3D studies
    where refinement depth is limited.
    """
    m = len(enumerate_sigma(k, n))
    freqs = np.arange(1, n + 1, dtype=np.float64)
    shifts = np.arange(m, dtype=np.float64) / (m + 1)
    label = "trig" if scale == 1.0 else f"trig scale={scale:g}"

    def fn(xphys, _xref):
        phase = scale * np.pi * (xphys @ freqs)
        return np.sin(phase[:, None] + shifts[None, :])

    return TargetForm(n, k, label, fn)


def target_from_form(form: DiffForm, label: str = "poly") -> TargetForm:
    """A polynomial differential form used as target, evaluated in physical
    coordinates."""
    sigmas = enumerate_sigma(form.k, form.n)
    comps = [form.component(s) for s in sigmas]

    def fn(xphys, _xref):
        cols = []
        for poly in comps:
            col = np.zeros(xphys.shape[0])
            for exps, c in poly.terms.items():
                col += float(c) * np.prod(xphys ** np.array(exps), axis=1)
            cols.append(col)
        return np.stack(cols, axis=1)

    return TargetForm(form.n, form.k, label, fn)


def target_from_reference(fmap: MultilinearMap, what: DiffForm, label: str = "mapped") -> TargetForm:
    """The pushforward of a reference form through a fixed element map,
    evaluated via the reference points.  Only meaningful on that element."""
    n, k = fmap.n, what.k
    sigmas = enumerate_sigma(k, n)
    sig_idx = np.array([[s - 1 for s in sig] for sig in sigmas], dtype=np.int64).reshape(
        len(sigmas), k
    )
    coeffs_f, alphas = fmap.float_arrays()
    exps, coefs = _form_arrays(what, sigmas)

    def fn(_xphys, xref):
        jacs = _kernels.multilinear_jacobian(coeffs_f, alphas, xref)
        _, invs = _kernels.jacobian_det_inv(jacs)
        minors = _kernels.inverse_minors(invs, sig_idx, sig_idx)
        mono = _kernels.eval_monomials(xref, exps)
        hat = mono @ coefs.T  # (P, M)
        return np.einsum("pt,pts->ps", hat, minors)

    return TargetForm(n, k, label, fn)


# ---------------------------------------------------------------------------
# float views of spaces and forms


def _form_arrays(form: DiffForm, sigmas: list) -> tuple[np.ndarray, np.ndarray]:
    """(exponent rows (T,n), per-component coefficient matrix (M,T))."""
    monos = sorted({e for p in form.components.values() for e in p.terms})
    if not monos:
        monos = [(0,) * form.n]
    index = {e: t for t, e in enumerate(monos)}
    coefs = np.zeros((len(sigmas), len(monos)))
    for m, sig in enumerate(sigmas):
        poly = form.components.get(sig)
        if poly is not None:
            for exps, c in poly.terms.items():
                coefs[m, index[exps]] = float(c)
    return np.array(monos, dtype=np.int64).reshape(len(monos), form.n), coefs


def _space_arrays(space: FormSpace):
    """Cached float view of a FormSpace: (sigmas, exps (T,n), coeffs (J,M,T))."""
    cached = getattr(space, "_float_view", None)
    if cached is not None:
        return cached
    sigmas = enumerate_sigma(space.k, space.n)
    monos = sorted(
        {e for f in space.basis for p in f.components.values() for e in p.terms}
    )
    if not monos:
        monos = [(0,) * space.n]
    index = {e: t for t, e in enumerate(monos)}
    coeffs = np.zeros((len(space.basis), len(sigmas), len(monos)))
    sig_pos = {s: m for m, s in enumerate(sigmas)}
    for j, f in enumerate(space.basis):
        for sig, poly in f.components.items():
            m = sig_pos[sig]
            for exps, c in poly.terms.items():
                coeffs[j, m, index[exps]] = float(c)
    exps_arr = np.array(monos, dtype=np.int64).reshape(len(monos), space.n)
    sig_idx = np.array([[s - 1 for s in sig] for sig in sigmas], dtype=np.int64).reshape(
        len(sigmas), space.k
    )
    view = (sigmas, sig_idx, exps_arr, coeffs)
    space._float_view = view
    return view


# ---------------------------------------------------------------------------
# meshes


@dataclass
class Mesh:
    n: int
    elements: list[MultilinearMap]
    family: str
    params: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.elements)


def _validate_mesh(mesh: Mesh, expected_volume: Fraction) -> Mesh:
    total = Fraction(0)
    for idx, el in enumerate(mesh.elements):
        if not check_diffeo(el):
            raise ValueError(f"element {idx} of {mesh.family} mesh is not orientation preserving")
        total += jacobian(el).det_poly.integral_box(1)
    if abs(float(total - expected_volume)) > 1e-10:
        raise ValueError(f"{mesh.family} mesh does not tile: volume {float(total)}")
    return mesh


def mesh_uniform(n: int, subdivisions: int) -> Mesh:
    if subdivisions < 1:
        raise ValueError("need at least one subdivision")
    big_n = subdivisions
    elements = []
    for cell in product(range(big_n), repeat=n):
        verts = {
            alpha: tuple(Fraction(c + a, big_n) for c, a in zip(cell, alpha))
            for alpha in product((0, 1), repeat=n)
        }
        elements.append(map_from_vertices(verts))
    mesh = Mesh(n, elements, "uniform", {"N": big_n})
    return _validate_mesh(mesh, Fraction(1))


def _exact_det(rows: list[list[Fraction]]) -> Fraction:
    n = len(rows)
    if n == 1:
        return rows[0][0]
    total = Fraction(0)
    for j in range(n):
        minor = [r[:j] + r[j + 1 :] for r in rows[1:]]
        term = rows[0][j] * _exact_det(minor)
        total += term if j % 2 == 0 else -term
    return total


def mesh_parallelotope(n: int, subdivisions: int, shear: Sequence[Sequence[Scalar]]) -> Mesh:
    """Uniform mesh composed with the global affine map x -> (I + S) x."""
    s = [[Fraction(x) for x in row] for row in shear]
    if len(s) != n or any(len(r) != n for r in s):
        raise ValueError("shear matrix must be n x n")
    a = [[s[i][j] + (1 if i == j else 0) for j in range(n)] for i in range(n)]
    det = _exact_det(a)
    if det <= 0:
        raise ValueError("I + shear must have positive determinant")
    base = mesh_uniform(n, subdivisions)
    elements = []
    for el in base.elements:
        verts = {}
        for alpha in product((0, 1), repeat=n):
            v = el.eval_exact(alpha)
            verts[alpha] = tuple(
                sum((a[i][j] * v[j] for j in range(n)), Fraction(0)) for i in range(n)
            )
        elements.append(map_from_vertices(verts))
    mesh = Mesh(n, elements, "parallelotope", {"N": subdivisions, "shear": shear})
    return _validate_mesh(mesh, det)


def _as_fraction(x: Scalar | float | str) -> Fraction:
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(x)


def _trapezoid_heights(big_n: int, d: Fraction) -> list[list[Fraction]]:
    """y[i][j] for the 2D trapezoid vertex pattern; boundary rows clamped."""
    ys = []
    for i in range(big_n + 1):
        col = []
        for j in range(big_n + 1):
            if j == 0:
                col.append(Fraction(0))
            elif j == big_n:
                col.append(Fraction(1))
            else:
                wiggle = d / 2 if (i + j) % 2 == 0 else -d / 2
                col.append((j + wiggle) / big_n)
        ys.append(col)
    return ys


def mesh_trapezoidal(subdivisions: int, d: Scalar | float) -> Mesh:
    """2D mesh of trapezoids with vertical left/right edges and oppositely
    slanted top/bottom; interior cells are scale-invariant under refinement,
    so elements stay uniformly non-affine."""
    big_n = subdivisions
    dd = _as_fraction(d)
    if big_n < 2 or big_n % 2:
        raise ValueError("trapezoidal meshes need an even N >= 2")
    if not 0 <= dd < 1:
        raise ValueError("distortion must satisfy 0 <= d < 1")
    ys = _trapezoid_heights(big_n, dd)
    elements = []
    for i, j in product(range(big_n), repeat=2):
        verts = {
            (a1, a2): (Fraction(i + a1, big_n), ys[i + a1][j + a2])
            for a1, a2 in product((0, 1), repeat=2)
        }
        elements.append(map_from_vertices(verts))
    mesh = Mesh(2, elements, "trapezoidal", {"N": big_n, "d": dd})
    return _validate_mesh(mesh, Fraction(1))


def mesh_trilinear_3d(subdivisions: int, d: Scalar | float) -> Mesh:
    """3D analogue: the trapezoid pattern in (x, y) tensored with z-layers,
    plus an alternating z-offset at interior vertices, so faces are truly
    non-planar and elements genuinely trilinear."""
    big_n = subdivisions
    dd = _as_fraction(d)
    if big_n < 2 or big_n % 2:
        raise ValueError("trilinear meshes need an even N >= 2")
    if not 0 <= dd < 1:
        raise ValueError("distortion must satisfy 0 <= d < 1")
    ys = _trapezoid_heights(big_n, dd)

    def zval(i: int, j: int, kk: int) -> Fraction:
        if kk == 0 or kk == big_n:
            return Fraction(kk, big_n)
        wiggle = dd / 2 if (i + j + kk) % 2 == 0 else -dd / 2
        return (kk + wiggle) / big_n

    elements = []
    for i, j, kk in product(range(big_n), repeat=3):
        verts = {
            (a1, a2, a3): (
                Fraction(i + a1, big_n),
                ys[i + a1][j + a2],
                zval(i + a1, j + a2, kk + a3),
            )
            for a1, a2, a3 in product((0, 1), repeat=3)
        }
        elements.append(map_from_vertices(verts))
    mesh = Mesh(3, elements, "trilinear3d", {"N": big_n, "d": dd})
    return _validate_mesh(mesh, Fraction(1))


def build_mesh(
    family: str,
    n: int,
    subdivisions: int,
    d: Scalar | float = 0,
    shear: Sequence[Sequence[Scalar]] | None = None,
) -> Mesh:
    if family == "uniform":
        return mesh_uniform(n, subdivisions)
    if family == "parallelotope":
        if shear is None:
            shear = [[Fraction(0)] * n for _ in range(n)]
        return mesh_parallelotope(n, subdivisions, shear)
    if family == "trapezoidal":
        if n != 2:
            raise ValueError("trapezoidal meshes are 2D")
        return mesh_trapezoidal(subdivisions, d)
    if family == "trilinear3d":
        if n != 3:
            raise ValueError("trilinear meshes are 3D")
        return mesh_trilinear_3d(subdivisions, d)
    raise ValueError(f"unknown mesh family {family!r}")


# ---------------------------------------------------------------------------
# element projection


def default_quad_order(space: FormSpace, n: int) -> int:
    deg = 0
    for f in space.basis:
        for poly in f.components.values():
            for exps in poly.terms:
                deg = max(deg, max(exps, default=0))
    return deg + (4 if n >= 3 else 6)


def _element_data(fmap: MultilinearMap, quad: QuadratureRule):
    coeffs_f, alphas = fmap.float_arrays()
    xref = quad.points
    jacs = _kernels.multilinear_jacobian(coeffs_f, alphas, xref)
    dets, invs = _kernels.jacobian_det_inv(jacs)
    if not np.all(np.isfinite(dets)) or np.any(dets <= 0):
        raise NumericalError("Jacobian determinant not positive at quadrature points")
    xphys = _kernels.multilinear_values(coeffs_f, alphas, xref)
    return xref, xphys, dets, invs


def element_l2_error(
    fmap: MultilinearMap,
    vhat: FormSpace,
    target: TargetForm,
    quad: QuadratureRule,
) -> float:
    """Broken L2 distance from the target to the mapped reference space on
    one element, via weighted least squares over the quadrature points."""
    n, k = vhat.n, vhat.k
    if (target.n, target.k) != (n, k):
        raise ValueError("target and space live on different (n, k)")
    if fmap.n != n:
        raise ValueError("element map dimension mismatch")
    if k > 3:
        raise NumericalError("numeric pipeline supports form degree k <= 3")
    xref, xphys, dets, invs = _element_data(fmap, quad)
    sigmas, sig_idx, exps, coeffs = _space_arrays(vhat)
    mu = quad.weights * dets
    scale = np.sqrt(mu)
    uvals = target.values(xphys, xref)
    nbasis = len(vhat.basis)
    if nbasis == 0:
        return float(np.linalg.norm(uvals * scale[:, None]))
    minors = _kernels.inverse_minors(invs, sig_idx, sig_idx)
    mono = _kernels.eval_monomials(xref, exps)
    hat = np.einsum("jmt,pt->jmp", coeffs, mono)
    phys = np.einsum("jtp,pts->psj", hat, minors)
    a = (phys * scale[:, None, None]).reshape(-1, nbasis)
    y = (uvals * scale[:, None]).reshape(-1)
    sol, _, rank, sv = np.linalg.lstsq(a, y, rcond=None)
    if rank < nbasis:
        cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf
        raise NumericalError(
            f"rank-deficient evaluation matrix (rank {rank} < {nbasis}, cond {cond:.3e}); "
            "quadrature may be too coarse"
        )
    return float(np.linalg.norm(y - a @ sol))


def discrete_l2_pairing(
    fmap: MultilinearMap, f: DiffForm, g: DiffForm, quad: QuadratureRule
) -> float:
    """Quadrature value of the physical-element L2 pairing of two polynomial
    forms given in physical coordinates."""
    if f.n != g.n or f.k != g.k:
        raise ValueError("form shape mismatch")
    xref, xphys, dets, _ = _element_data(fmap, quad)
    fv = target_from_form(f).values(xphys, xref)
    gv = target_from_form(g).values(xphys, xref)
    return float(np.sum(quad.weights * dets * np.sum(fv * gv, axis=1)))


def exact_l2_pairing(fmap: MultilinearMap, f: DiffForm, g: DiffForm) -> Fraction:
    """Exact rational value of the same pairing: pull the volume integrand
    back to the reference cube and integrate."""
    if f.n != g.n or f.k != g.k:
        raise ValueError("form shape mismatch")
    n = f.n
    total = Polynomial.zero(n)
    for sigma, pf in f.components.items():
        pg = g.components.get(sigma)
        if pg is not None:
            total = total + pf * pg
    volume_form = DiffForm(n, n, {tuple(range(1, n + 1)): total})
    return integrate_unit_box(pullback_polynomial(fmap, volume_form))


# ---------------------------------------------------------------------------
# convergence studies


@dataclass
class ConvergenceReport:
    family: str
    space_label: str
    n: int
    k: int
    target_label: str
    quad_order: int
    subdivisions: list[int]
    errors: list[float]
    prediction: RatePrediction
    params: dict = field(default_factory=dict)

    @property
    def hs(self) -> list[float]:
        return [1.0 / nn for nn in self.subdivisions]

    @property
    def rate_pairs(self) -> list[float | None]:
        out: list[float | None] = [None]
        for (n0, e0), (n1, e1) in zip(
            zip(self.subdivisions, self.errors), zip(self.subdivisions[1:], self.errors[1:])
        ):
            if e0 <= 0 or e1 <= 0:
                out.append(None)
            else:
                out.append(log(e0 / e1) / log(n1 / n0))
        return out

    @property
    def rate_lsq(self) -> float | None:
        pts = [
            (log(nn), log(e))
            for nn, e in zip(self.subdivisions, self.errors)
            if e > 0
        ][-3:]
        if len(pts) < 2:
            return None
        xs = np.array([p[0] for p in pts])
        ys = np.array([p[1] for p in pts])
        slope = np.polyfit(xs, ys, 1)[0]
        return float(-slope)

    @property
    def last_pair_rate(self) -> float | None:
        return self.rate_pairs[-1] if len(self.subdivisions) > 1 else None


def _mesh_error(
    mesh: Mesh, vhat: FormSpace, target: TargetForm, quad: QuadratureRule, threads: int = 1
) -> float:
    def one(idx_el):
        idx, el = idx_el
        try:
            return element_l2_error(el, vhat, target, quad)
        except NumericalError as exc:
            raise NumericalError(f"element {idx}: {exc}") from exc

    items = list(enumerate(mesh.elements))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            errs = list(pool.map(one, items))
    else:
        errs = [one(item) for item in items]
    sq = np.array(errs, dtype=np.float64)
    return float(np.sqrt(np.sum(sq * sq)))


def convergence_study(
    vhat: FormSpace,
    target: TargetForm,
    family: str,
    subdivision_list: Sequence[int],
    d: Scalar | float = 0,
    shear: Sequence[Sequence[Scalar]] | None = None,
    quad_order: int | None = None,
    threads: int = 1,
) -> ConvergenceReport:
    """Run the h-refinement study of the broken L2 projection error."""
    subdivision_list = list(subdivision_list)
    if subdivision_list != sorted(subdivision_list) or len(set(subdivision_list)) != len(
        subdivision_list
    ):
        raise ValueError("subdivision list must be strictly increasing")
    n = vhat.n
    q = quad_order if quad_order is not None else default_quad_order(vhat, n)
    quad = gauss_rule(n, q)
    errors = []
    for big_n in subdivision_list:
        mesh = build_mesh(family, n, big_n, d=d, shear=shear)
        errors.append(_mesh_error(mesh, vhat, target, quad, threads=threads))
    params: dict = {}
    if family in ("trapezoidal", "trilinear3d"):
        params["d"] = _as_fraction(d)
    if family == "parallelotope" and shear is not None:
        params["shear"] = shear
    return ConvergenceReport(
        family=family,
        space_label=vhat.label,
        n=n,
        k=vhat.k,
        target_label=target.label,
        quad_order=q,
        subdivisions=subdivision_list,
        errors=errors,
        prediction=predict_rates(vhat),
        params=params,
    )
