import numpy as np
import pytest

from cubeforms import _kernels
from cubeforms.forms import Polynomial
from cubeforms.mapping import jacobian
from cubeforms.verify import random_rational_multilinear

BACKENDS = _kernels.backends()


def _case(n, rng, npts=17):
    fmap = random_rational_multilinear(n, rng)
    coeffs, alphas = fmap.float_arrays()
    pts = np.array([[rng.random() for _ in range(n)] for _ in range(npts)])
    return fmap, coeffs, alphas, pts


def test_both_backends_available():
    assert "numpy" in BACKENDS
    assert _kernels.BACKEND in BACKENDS


def test_env_flag_forces_numpy_backend():
    import subprocess
    import sys

    out = subprocess.run(
        [sys.executable, "-c", "from cubeforms import _kernels; print(_kernels.BACKEND)"],
        env={"CUBEFORMS_DISABLE_JIT": "1", "PATH": "/usr/bin:/bin"},
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == "numpy"


@pytest.mark.parametrize("n", [2, 3])
def test_backends_agree(n, rng):
    fmap, coeffs, alphas, pts = _case(n, rng)
    exps = np.array(
        [[min(i + j, 3) for j in range(n)] for i in range(4)], dtype=np.int64
    )
    rows = np.array([[i] for i in range(n)], dtype=np.int64)
    results = {}
    for name, impl in BACKENDS.items():
        mono = impl["eval_monomials"](pts, exps)
        vals = impl["multilinear_values"](coeffs, alphas, pts)
        jacs = impl["multilinear_jacobian"](coeffs, alphas, pts)
        dets, invs = impl["jacobian_det_inv"](jacs)
        minors = impl["inverse_minors"](invs, rows, rows)
        results[name] = (mono, vals, jacs, dets, invs, minors)
    if len(results) < 2:
        pytest.skip("only one backend importable")
    a = results["numpy"]
    b = results[[k for k in results if k != "numpy"][0]]
    for x, y in zip(a, b):
        assert np.allclose(x, y, atol=1e-13)


@pytest.mark.parametrize("n", [2, 3])
def test_monomials_match_exact_evaluation(n, rng):
    _, _, _, pts = _case(n, rng, npts=5)
    exps = np.array([[2] + [1] * (n - 1), [0] * n], dtype=np.int64)
    got = _kernels.eval_monomials(pts, exps)
    for row, pt in enumerate(pts):
        want = Polynomial.monomial(n, tuple(exps[0])).eval_float(pt)
        assert got[row, 0] == pytest.approx(want, rel=1e-14)
        assert got[row, 1] == 1.0


@pytest.mark.parametrize("n", [2, 3])
def test_jacobian_matches_symbolic(n, rng):
    fmap, coeffs, alphas, pts = _case(n, rng, npts=4)
    jacs = _kernels.multilinear_jacobian(coeffs, alphas, pts)
    dets, _ = _kernels.jacobian_det_inv(jacs)
    jac = jacobian(fmap)
    for p, pt in enumerate(pts):
        for i in range(n):
            for j in range(n):
                want = jac.entries[i][j].eval_float(pt)
                assert jacs[p, i, j] == pytest.approx(want, abs=1e-13)
        assert dets[p] == pytest.approx(jac.det_poly.eval_float(pt), abs=1e-13)


def test_values_match_exact_map(rng):
    fmap, coeffs, alphas, pts = _case(2, rng, npts=6)
    vals = _kernels.multilinear_values(coeffs, alphas, pts)
    for p, pt in enumerate(pts):
        want = fmap(pt)
        assert np.allclose(vals[p], want, atol=1e-14)


def test_inverse_minors_top_degree(rng):
    # For k = n the single minor is det of the inverse, i.e. 1/det.
    fmap, coeffs, alphas, pts = _case(3, rng, npts=8)
    jacs = _kernels.multilinear_jacobian(coeffs, alphas, pts)
    dets, invs = _kernels.jacobian_det_inv(jacs)
    full = np.array([[0, 1, 2]], dtype=np.int64)
    minors = _kernels.inverse_minors(invs, full, full)
    assert np.allclose(minors[:, 0, 0], 1.0 / dets, atol=1e-12)
