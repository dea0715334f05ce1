"""Faces of the n-cube, tensor-product degrees of freedom, unisolvence.

Each functional integrates the trace of a form over a face against a
weight from the matching tensor-product space one degree down; vertex
functionals degenerate to point evaluation through the same code path.
All verdicts (counts, matrix invertibility, dual bases) are exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from math import comb

from . import exactla
from .forms import DiffForm, Face, integrate_unit_box, trace
from .spaces import build_Qminus, dim_Qminus

__all__ = [
    "Face",
    "DofFunctional",
    "DofSet",
    "enumerate_faces",
    "build_dofs",
    "apply_dof",
    "unisolvence_matrix",
    "dual_basis",
    "dof_count_by_faces",
]


def enumerate_faces(n: int, d: int) -> list[Face]:
    """All d-dimensional faces of [0,1]^n, ordered by the pattern of fixed
    coordinates and then by their 0/1 values.  Count is 2^(n-d) binom(n,d)."""
    if d < 0 or d > n:
        raise ValueError(f"face dimension {d} out of range for n={n}")
    faces = []
    for fixed_coords in combinations(range(1, n + 1), n - d):
        for values in product((0, 1), repeat=n - d):
            faces.append(Face(n, dict(zip(fixed_coords, values))))
    return faces


@dataclass(frozen=True)
class DofFunctional:
    """v -> integral over the face of tr v wedge weight (point evaluation
    when the face is a vertex)."""

    face: Face
    weight: DiffForm

    def __call__(self, v: DiffForm) -> Fraction:
        return apply_dof(self, v)


@dataclass
class DofSet:
    r: int
    k: int
    n: int
    functionals: list[DofFunctional]

    @property
    def count(self) -> int:
        return len(self.functionals)


def apply_dof(xi: DofFunctional, v: DiffForm) -> Fraction:
    if v.n != xi.face.n:
        raise ValueError("form does not live on the functional's cube")
    if v.k > xi.face.dim:
        raise ValueError("form degree exceeds the face dimension")
    restricted = trace(v, xi.face)
    return integrate_unit_box(restricted.wedge(xi.weight))


def build_dofs(r: int, k: int, n: int) -> DofSet:
    """Degrees of freedom for the tensor-product k-form space of order r:
    one functional per weight-space basis element on each face of dimension
    d >= k, weights drawn from the order r-1 space of (d-k)-forms on the
    face.  Total count equals the space dimension."""
    if r < 1:
        raise ValueError("degrees of freedom are defined for r >= 1")
    if k < 0 or k > n:
        raise ValueError(f"form degree k={k} invalid for n={n}")
    functionals: list[DofFunctional] = []
    for d in range(k, n + 1):
        weight_space = build_Qminus(r - 1, d - k, d)
        if weight_space.is_zero:
            continue
        for face in enumerate_faces(n, d):
            for q in weight_space.basis:
                functionals.append(DofFunctional(face, q))
    dofset = DofSet(r, k, n, functionals)
    assert dofset.count == dim_Qminus(r, k, n)
    return dofset


def dof_count_by_faces(r: int, k: int, n: int) -> int:
    """The face-by-face counting sum: over dimensions d = k..n, faces
    contribute binom(d,k) r^k (r-1)^(d-k) functionals each."""
    return sum(
        2 ** (n - d) * comb(n, d) * comb(d, k) * r**k * (r - 1) ** (d - k)
        for d in range(k, n + 1)
    )


def unisolvence_matrix(r: int, k: int, n: int) -> tuple[list[list[Fraction]], bool]:
    """Matrix of all functionals applied to the monomial basis, plus the
    exact invertibility verdict."""
    space = build_Qminus(r, k, n)
    dofs = build_dofs(r, k, n)
    matrix = [[apply_dof(xi, b) for b in space.basis] for xi in dofs.functionals]
    return matrix, exactla.is_invertible(matrix)


def dual_basis(r: int, k: int, n: int) -> list[DiffForm]:
    """Forms phi_j with xi_i(phi_j) = delta_ij, solved exactly against the
    unisolvence matrix."""
    space = build_Qminus(r, k, n)
    matrix, ok = unisolvence_matrix(r, k, n)
    if not ok:
        raise ArithmeticError(f"unisolvence matrix singular for (r,k,n)=({r},{k},{n})")
    inv = exactla.invert(matrix)
    duals = []
    for j in range(len(space.basis)):
        phi = DiffForm.zero(n, k)
        for m, b in enumerate(space.basis):
            c = inv[m][j]
            if c != 0:
                phi = phi + b * c
        duals.append(phi)
    return duals
