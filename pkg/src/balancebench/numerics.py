"""Small dense matrix algebra sized for this test bench.

Everything here operates on plain ``numpy`` 2-D arrays of at most 4x4.
That cap is deliberate: the bench never linearizes more than four states,
so closed-form characteristic polynomials and an exact Routh-Hurwitz test
are available, and the continuous algebraic Riccati equation can be solved
by Newton-Kleinman iteration (each step is a Lyapunov equation vectorized
into a dense linear system of at most 16 unknowns) without any general
eigenvalue machinery.

All functions are pure and deterministic: identical inputs give
bit-identical outputs.
"""

from __future__ import annotations

import math
from itertools import combinations, product
from typing import Callable, Sequence

import numpy as np

from .errors import InputError, SolverError

MAX_DIM = 4

# Linear solves reject pivots below this magnitude as singular.
PIVOT_TOL = 1e-12

# Newton-Kleinman iteration: stop at this residual, accept up to the
# looser bound if the iteration stalls first.
CARE_CONVERGED = 1e-12
CARE_ACCEPT = 1e-9
CARE_MAX_ITER = 100

_SEED_SIGMAS = (0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0)
_SEED_GRID = (0.0, 0.1, -0.1, 1.0, -1.0, 10.0, -10.0, 100.0, -100.0, 1000.0, -1000.0)


def as_matrix(value, name: str = "matrix") -> np.ndarray:
    """Validate *value* as a finite 2-D matrix of at most 4x4 floats."""
    mat = np.asarray(value, dtype=float)
    if mat.ndim == 1:
        mat = mat.reshape(-1, 1)
    if mat.ndim != 2:
        raise InputError(f"{name} must be 2-D, got ndim={mat.ndim}")
    rows, cols = mat.shape
    if not (1 <= rows <= MAX_DIM and 1 <= cols <= MAX_DIM):
        raise InputError(f"{name} must be between 1x1 and {MAX_DIM}x{MAX_DIM}, got {rows}x{cols}")
    if not np.all(np.isfinite(mat)):
        raise InputError(f"{name} has non-finite entries")
    return mat


def _square(value, name: str) -> np.ndarray:
    mat = as_matrix(value, name)
    if mat.shape[0] != mat.shape[1]:
        raise InputError(f"{name} must be square, got {mat.shape[0]}x{mat.shape[1]}")
    return mat


def mat_mul(a, b) -> np.ndarray:
    """Matrix product with explicit dimension checking."""
    am = as_matrix(a, "a")
    bm = as_matrix(b, "b")
    if am.shape[1] != bm.shape[0]:
        raise InputError(f"dimension mismatch: {am.shape[0]}x{am.shape[1]} times {bm.shape[0]}x{bm.shape[1]}")
    return am @ bm


def det(a) -> float:
    """Determinant by cofactor expansion (exact closed form for n <= 4)."""
    mat = _square(a, "matrix")
    return _det(mat)


def _det(mat: np.ndarray) -> float:
    n = mat.shape[0]
    if n == 1:
        return float(mat[0, 0])
    if n == 2:
        return float(mat[0, 0] * mat[1, 1] - mat[0, 1] * mat[1, 0])
    total = 0.0
    cols = list(range(n))
    for j in range(n):
        minor = mat[1:, cols[:j] + cols[j + 1:]]
        total += (-1.0) ** j * float(mat[0, j]) * _det(minor)
    return total


def char_poly(a) -> np.ndarray:
    """Monic characteristic polynomial det(sI - A), highest degree first.

    Uses the principal-minor expansion: the coefficient of ``s**(n-k)`` is
    ``(-1)**k`` times the sum of all k-th order principal minors.
    """
    mat = _square(a, "matrix")
    n = mat.shape[0]
    coeffs = np.zeros(n + 1)
    coeffs[0] = 1.0
    for k in range(1, n + 1):
        minor_sum = 0.0
        for idx in combinations(range(n), k):
            sub = mat[np.ix_(idx, idx)]
            minor_sum += _det(sub)
        coeffs[k] = (-1.0) ** k * minor_sum
    return coeffs


def routh_hurwitz(coeffs) -> bool:
    """Exact Routh-Hurwitz test for polynomials of degree 1 to 4.

    Returns True when every root has strictly negative real part.
    Marginal cases (a zero coefficient, or equality in a Routh condition)
    count as not Hurwitz.
    """
    p = np.asarray(coeffs, dtype=float).ravel()
    if p.size < 2 or p.size > 5:
        raise InputError(f"degree must be 1..4, got {p.size - 1}")
    if not np.all(np.isfinite(p)):
        raise InputError("polynomial has non-finite coefficients")
    if p[0] == 0.0:
        raise InputError("leading coefficient is zero")
    if p[0] < 0.0:
        p = -p
    if np.any(p <= 0.0):
        return False
    deg = p.size - 1
    if deg <= 2:
        return True
    if deg == 3:
        # s^3 + a2 s^2 + a1 s + a0 after normalization; condition a2*a1 > a3*a0
        return bool(p[1] * p[2] > p[0] * p[3])
    # degree 4: a3*a2 > a4*a1 and (a3*a2 - a4*a1)*a1 > a3^2*a0
    c1 = p[1] * p[2] - p[0] * p[3]
    if c1 <= 0.0:
        return False
    return bool(c1 * p[3] > p[1] * p[1] * p[4])


def rk4_step(f: Callable[[np.ndarray, float], np.ndarray], x, u: float, dt: float) -> np.ndarray:
    """One classical 4th-order Runge-Kutta step with u held constant.

    ``f(x, u)`` must return the state derivative. The control input is a
    zero-order hold over the whole step. Non-finite results are returned
    as-is; callers decide how to treat divergence.
    """
    if not (dt > 0.0):
        raise InputError(f"dt must be positive, got {dt}")
    x0 = np.asarray(x, dtype=float)
    k1 = np.asarray(f(x0, u), dtype=float)
    k2 = np.asarray(f(x0 + 0.5 * dt * k1, u), dtype=float)
    k3 = np.asarray(f(x0 + 0.5 * dt * k2, u), dtype=float)
    k4 = np.asarray(f(x0 + dt * k3, u), dtype=float)
    return x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def solve_linear(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve a x = b by Gaussian elimination with partial pivoting.

    Not capped at 4x4: the vectorized Lyapunov systems inside the Riccati
    solver are up to 16x16. Raises SolverError when a pivot falls below
    PIVOT_TOL.
    """
    aw = np.array(a, dtype=float)
    bw = np.array(b, dtype=float)
    n = aw.shape[0]
    if aw.ndim != 2 or aw.shape[1] != n:
        raise InputError("coefficient matrix must be square")
    vector = bw.ndim == 1
    if vector:
        bw = bw.reshape(-1, 1)
    if bw.shape[0] != n:
        raise InputError("right-hand side has incompatible shape")
    for col in range(n):
        pivot_row = col + int(np.argmax(np.abs(aw[col:, col])))
        pivot = aw[pivot_row, col]
        if abs(pivot) < PIVOT_TOL:
            raise SolverError(f"singular system: pivot {pivot:.3e} below {PIVOT_TOL:.0e}")
        if pivot_row != col:
            aw[[col, pivot_row]] = aw[[pivot_row, col]]
            bw[[col, pivot_row]] = bw[[pivot_row, col]]
        for row in range(col + 1, n):
            factor = aw[row, col] / pivot
            if factor != 0.0:
                aw[row, col:] -= factor * aw[col, col:]
                bw[row] -= factor * bw[col]
    x = np.zeros_like(bw)
    for row in range(n - 1, -1, -1):
        x[row] = (bw[row] - aw[row, row + 1:] @ x[row + 1:]) / aw[row, row]
    return x[:, 0] if vector else x


def solve_lyapunov(a: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Solve A' P + P A = C for symmetric P by vectorization.

    With row-major flattening p = vec(P), the equation becomes
    ``(A' kron I + I kron A') p = vec(C)``.
    """
    am = _square(a, "a")
    cm = _square(c, "c")
    n = am.shape[0]
    if cm.shape[0] != n:
        raise InputError("a and c must have matching dimensions")
    eye = np.eye(n)
    system = np.kron(am.T, eye) + np.kron(eye, am.T)
    p = solve_linear(system, cm.flatten()).reshape(n, n)
    return 0.5 * (p + p.T)


def is_symmetric(m: np.ndarray, tol: float = 1e-10) -> bool:
    return bool(np.max(np.abs(m - m.T)) <= tol)


def is_positive_semidefinite(m: np.ndarray, tol: float = 1e-12) -> bool:
    """Sylvester test: symmetric with every principal minor >= -tol."""
    mat = _square(m, "matrix")
    if not is_symmetric(mat):
        return False
    n = mat.shape[0]
    for k in range(1, n + 1):
        for idx in combinations(range(n), k):
            if _det(mat[np.ix_(idx, idx)]) < -tol:
                return False
    return True


def is_positive_definite(m: np.ndarray) -> bool:
    """Sylvester test: symmetric with every leading principal minor > 0."""
    mat = _square(m, "matrix")
    if not is_symmetric(mat):
        return False
    n = mat.shape[0]
    return all(_det(mat[:k, :k]) > 0.0 for k in range(1, n + 1))


def care_residual(a: np.ndarray, b: np.ndarray, q: np.ndarray, r: np.ndarray,
                  p: np.ndarray) -> float:
    """Largest absolute entry of A'P + PA - P B R^-1 B' P + Q."""
    rinv_btp = solve_linear(r, b.T @ p)
    res = a.T @ p + p @ a - p @ b @ rinv_btp + q
    return float(np.max(np.abs(res)))


def _is_stabilizing(a: np.ndarray, b: np.ndarray, k: np.ndarray) -> bool:
    closed = a - b @ k
    if not np.all(np.isfinite(closed)):
        return False
    try:
        return routh_hurwitz(char_poly(closed))
    except InputError:
        return False


def _ackermann(a: np.ndarray, b: np.ndarray, roots: Sequence[float]) -> np.ndarray:
    """Single-input pole placement gain for the given closed-loop roots."""
    n = a.shape[0]
    ctrb = np.hstack([np.linalg.matrix_power(a, i) @ b for i in range(n)])
    desired = np.array([1.0])
    for root in roots:
        desired = np.convolve(desired, np.array([1.0, -root]))
    poly_a = np.zeros((n, n))
    power = np.eye(n)
    for coeff in desired[::-1]:
        poly_a += coeff * power
        power = power @ a
    e_last = np.zeros(n)
    e_last[-1] = 1.0
    y = solve_linear(ctrb.T, e_last)
    return (y @ poly_a).reshape(1, n)


def _stabilizing_seed(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Deterministic search for a gain K with A - BK Hurwitz.

    Tries K = 0, then (single input) pole placement at -sigma*(1..n) over a
    sigma sweep, then a coarse grid over the entries of K, each candidate
    validated by the Routh-Hurwitz test.
    """
    n = a.shape[0]
    m_inputs = b.shape[1]
    zero = np.zeros((m_inputs, n))
    if _is_stabilizing(a, b, zero):
        return zero
    if m_inputs == 1:
        for sigma in _SEED_SIGMAS:
            try:
                cand = _ackermann(a, b, [-sigma * (i + 1) for i in range(n)])
            except SolverError:
                break
            if _is_stabilizing(a, b, cand):
                return cand
    if m_inputs * n <= 4:
        for entries in product(_SEED_GRID, repeat=m_inputs * n):
            cand = np.array(entries).reshape(m_inputs, n)
            if _is_stabilizing(a, b, cand):
                return cand
    raise SolverError("no stabilizing gain found; the pair (A, B) may not be stabilizable")


def solve_care(a, b, q, r) -> np.ndarray:
    """Stabilizing solution P of A'P + PA - P B R^-1 B' P + Q = 0.

    Newton-Kleinman iteration: from a stabilizing gain K, solve the
    Lyapunov equation (A-BK)'P + P(A-BK) = -(Q + K'RK) and update
    K = R^-1 B'P. Converges quadratically; iteration stops at residual
    CARE_CONVERGED, or on stall, and the best P is accepted when its
    residual is below CARE_ACCEPT.
    """
    am = _square(a, "a")
    bm = as_matrix(b, "b")
    qm = _square(q, "q")
    rm = _square(r, "r")
    n = am.shape[0]
    if bm.shape[0] != n:
        raise InputError("b must have as many rows as a")
    if qm.shape[0] != n:
        raise InputError("q must match the dimension of a")
    if rm.shape[0] != bm.shape[1]:
        raise InputError("r must match the number of inputs")
    if not is_positive_semidefinite(qm):
        raise InputError("q must be symmetric positive semidefinite")
    if not is_positive_definite(rm):
        raise InputError("r must be symmetric positive definite")

    k = _stabilizing_seed(am, bm)
    best_p = None
    best_res = math.inf
    for _ in range(CARE_MAX_ITER):
        closed = am - bm @ k
        rhs = -(qm + k.T @ rm @ k)
        p = solve_lyapunov(closed, rhs)
        res = care_residual(am, bm, qm, rm, p)
        if res < best_res:
            best_p, best_res = p, res
            if res < CARE_CONVERGED:
                break
        else:
            break  # stalled
        k = solve_linear(rm, bm.T @ p)
    if best_p is None or best_res >= CARE_ACCEPT:
        raise SolverError(f"Riccati iteration did not converge; best residual {best_res:.3e}")
    return best_p


def lqr_gain(a, b, q, r) -> np.ndarray:
    """Optimal state-feedback gain K = R^-1 B' P from the Riccati solution.

    The closed loop A - BK is verified Hurwitz via the Routh-Hurwitz test
    on its characteristic polynomial.
    """
    p = solve_care(a, b, q, r)
    am = _square(a, "a")
    bm = as_matrix(b, "b")
    rm = _square(r, "r")
    k = solve_linear(rm, bm.T @ p)
    if k.ndim == 1:
        k = k.reshape(1, -1)
    if not _is_stabilizing(am, bm, k):
        raise SolverError("computed gain does not stabilize the closed loop")
    return k
