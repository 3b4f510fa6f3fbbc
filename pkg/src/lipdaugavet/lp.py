"""Dense two-phase simplex (Bland's rule) in exact or floating-point arithmetic.

Problems are stated as ``maximize c.x  s.t.  A_ub x <= b_ub, A_eq x = b_eq``
with free variables.  They are solved through their dual, a standard-form
program ``min b.y  s.t.  M y = c, y >= 0`` whose tableau has one row per
primal variable.  That keeps tableaux small for Lipschitz-ball problems,
which have few variables and many pair constraints.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _num
from ._num import EXACT, FLOAT
from .errors import DaugavetError, NumericBreakdown

OPTIMAL = "OPTIMAL"
INFEASIBLE = "INFEASIBLE"
UNBOUNDED = "UNBOUNDED"

FLOAT_TOL = 1e-9
# Default solver for float problems; exact problems always use the tableau.
FLOAT_BACKEND = "highs"

_dump_sink = None


def set_dump(sink) -> None:
    """Write every subsequently solved problem to ``sink`` (a text file), or stop with None."""
    global _dump_sink
    _dump_sink = sink


@dataclass
class LpProblem:
    c: np.ndarray
    A_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    mode: str = FLOAT

    def __post_init__(self):
        _num.check_mode(self.mode)
        self.c = _num.asarray(self.c, self.mode).ravel()
        k = self.c.shape[0]
        self.A_ub, self.b_ub = self._block(self.A_ub, self.b_ub, k, "inequality")
        self.A_eq, self.b_eq = self._block(self.A_eq, self.b_eq, k, "equality")
        if self.mode == FLOAT:
            for arr in (self.c, self.A_ub, self.b_ub, self.A_eq, self.b_eq):
                if not np.all(np.isfinite(arr)):
                    raise DaugavetError("BAD_PROBLEM", "LP data must be finite")

    def _block(self, A, b, k, what):
        if A is None or len(A) == 0:
            return _num.zeros((0, k), self.mode), _num.zeros((0,), self.mode)
        A = _num.asarray(A, self.mode)
        b = _num.asarray(b, self.mode).ravel()
        if A.ndim != 2 or A.shape[1] != k or A.shape[0] != b.shape[0]:
            raise DaugavetError("BAD_PROBLEM", f"{what} block has inconsistent dimensions")
        return A, b

    @property
    def n_vars(self) -> int:
        return self.c.shape[0]

    def dump(self) -> str:
        """Plain-text listing: objective row, then one row per constraint."""
        enc = lambda v: str(_num.encode(v, self.mode))
        out = io.StringIO()
        out.write("max " + " ".join(enc(v) for v in self.c) + "\n")
        for row, rhs in zip(self.A_ub, self.b_ub):
            out.write(" ".join(enc(v) for v in row) + " <= " + enc(rhs) + "\n")
        for row, rhs in zip(self.A_eq, self.b_eq):
            out.write(" ".join(enc(v) for v in row) + " = " + enc(rhs) + "\n")
        return out.getvalue()


@dataclass
class LpSolution:
    """``dual`` holds multipliers (ub rows then eq rows).

    OPTIMAL: ``dual @ A == c`` and ``dual @ b == value`` with ub multipliers >= 0.
    INFEASIBLE: ``dual @ A == 0`` and ``dual @ b < 0`` (Farkas certificate).
    UNBOUNDED: ``x`` is feasible and ``ray`` satisfies A_ub ray <= 0, A_eq ray = 0, c.ray > 0.
    """

    status: str
    value: object = None
    x: np.ndarray | None = None
    dual: np.ndarray | None = None
    ray: np.ndarray | None = None
    iterations: int = 0


# ------------------------------------------------------------------ kernel

@dataclass
class _Std:
    status: str
    y: np.ndarray | None = None
    pi: np.ndarray | None = None
    ray: np.ndarray | None = None
    iterations: int = 0


def _simplex_std(M: np.ndarray, r: np.ndarray, cost: np.ndarray, mode: str,
                 max_iter: int | None = None) -> _Std:
    """min cost.y  s.t.  M y = r, y >= 0, by two-phase tableau simplex.

    Returns duals ``pi`` (M^T pi <= cost) at optimum, a Farkas vector
    ``pi`` (M^T pi <= 0, r.pi > 0) when infeasible, or a ray when unbounded.
    """
    exact = mode == EXACT
    k, N = M.shape
    tol = 0 if exact else FLOAT_TOL * max(1.0, float(np.max(np.abs(M))) if M.size else 1.0)
    if max_iter is None:
        max_iter = None if exact else 50 * (k + N) + 1000
    sign = np.array([-1 if v < 0 else 1 for v in r], dtype=np.int64)
    T = _num.zeros((k, N + k + 1), mode)
    T[:, :N] = M * sign[:, None]
    for i in range(k):
        T[i, N + i] = _num.one(mode)
    T[:, -1] = r * sign
    basis = list(range(N, N + k))
    iters = 0

    def pivot(row, col, obj):
        nonlocal iters
        iters += 1
        if max_iter is not None and iters > max_iter:
            raise NumericBreakdown(message="simplex iteration limit reached")
        piv = T[row, col]
        T[row] = T[row] / piv
        colv = T[:, col].copy()
        colv[row] = 0
        nz = np.nonzero(colv != 0)[0] if exact else np.nonzero(np.abs(colv) > 0)[0]
        if len(nz):
            T[nz] -= np.outer(colv[nz], T[row]) if not exact else _outer(colv[nz], T[row])
        if exact:
            T[row, col] = _num.one(mode)
            T[nz, col] = Fraction(0)
        obj -= obj[col] * T[row]
        basis[row] = col

    def run(obj, allowed):
        # Bland's rule: first improving column, ties in the ratio test by basis index
        while True:
            red = obj[:allowed]
            cand = np.nonzero(np.asarray(red < -tol, dtype=bool))[0]
            if len(cand) == 0:
                return None
            col = int(cand[0])
            column = T[:, col]
            pos = np.nonzero(np.asarray(column > tol, dtype=bool))[0]
            if len(pos) == 0:
                return col
            ratios = T[pos, -1] / column[pos]
            best = min(ratios)
            if exact:
                ties = [int(p) for p, q in zip(pos, ratios) if q == best]
            else:
                ties = [int(p) for p, q in zip(pos, ratios) if q <= best + tol]
            row = min(ties, key=lambda i: basis[i])
            pivot(row, col, obj)

    # phase 1
    obj = _num.zeros((N + k + 1,), mode)
    obj[:N] = -T[:, :N].sum(axis=0)
    obj[-1] = -T[:, -1].sum()
    run(obj, N)
    w = -obj[-1]
    if w > tol * max(1.0, float(np.max(np.abs(r))) if r.size else 1.0) * (1 if exact else 10):
        pit = _num.one(mode) - obj[N:N + k]
        pi = pit * sign
        return _Std(INFEASIBLE, pi=pi, iterations=iters)
    # drive artificials out of the basis where possible
    for i in range(k):
        if basis[i] >= N:
            row = T[i, :N]
            nz = np.nonzero(np.asarray(row != 0 if exact else np.abs(row) > tol, dtype=bool))[0]
            if len(nz):
                pivot(i, int(nz[0]), obj)
    # phase 2
    cB = _num.zeros((k,), mode)
    for i, b in enumerate(basis):
        if b < N:
            cB[i] = cost[b]
    obj = _num.zeros((N + k + 1,), mode)
    obj[:N] = cost - cB @ T[:, :N]
    obj[N:N + k] = -(cB @ T[:, N:N + k])
    obj[-1] = -(cB @ T[:, -1])
    col = run(obj, N)
    if col is not None:
        ray = _num.zeros((N,), mode)
        ray[col] = _num.one(mode)
        for i, b in enumerate(basis):
            if b < N:
                ray[b] = -T[i, col]
        return _Std(UNBOUNDED, ray=ray, iterations=iters)
    y = _num.zeros((N,), mode)
    for i, b in enumerate(basis):
        if b < N:
            y[b] = T[i, -1]
    pi = -obj[N:N + k] * sign
    return _Std(OPTIMAL, y=y, pi=pi, iterations=iters)


def _outer(a, b):
    out = np.empty((len(a), len(b)), dtype=object)
    for i, ai in enumerate(a):
        out[i] = ai * b
    return out


# --------------------------------------------------------------- front end

def solve_lp(problem: LpProblem, backend: str | None = None) -> LpSolution:
    """Solve ``problem``; the result carries a checkable certificate.

    ``backend`` is "simplex" (the tableau code here) or "highs" (scipy's
    HiGHS, float mode only).  Float problems default to HiGHS; a non-optimal
    HiGHS status is re-solved by the simplex to obtain a certificate.
    """
    mode = problem.mode
    if _dump_sink is not None:
        _dump_sink.write(problem.dump() + "\n")
    if backend is None:
        backend = FLOAT_BACKEND if mode == FLOAT else "simplex"
    if backend == "highs":
        if mode != FLOAT:
            raise ValueError("the HiGHS backend works in float mode only")
        sol = _solve_highs(problem)
        if sol is not None:
            return sol
    elif backend != "simplex":
        raise ValueError(f"unknown backend {backend!r}")
    A, b, E, e, c = problem.A_ub, problem.b_ub, problem.A_eq, problem.b_eq, problem.c
    m_ub, m_eq = A.shape[0], E.shape[0]
    # dual: min b.y + e.(w+ - w-)  s.t.  A^T y + E^T (w+ - w-) = c,  y, w+, w- >= 0
    M = np.concatenate([A.T, E.T, -E.T], axis=1) if (m_ub + m_eq) else _num.zeros((problem.n_vars, 0), mode)
    cost = np.concatenate([b, e, -e])
    res = _simplex_std(M, c, cost, mode)
    iters = res.iterations

    def split(v):
        return np.concatenate([v[:m_ub], v[m_ub:m_ub + m_eq] - v[m_ub + m_eq:]])

    if res.status == OPTIMAL:
        x = res.pi
        dual = split(res.y)
        value = c @ x if problem.n_vars else _num.zero(mode)
        sol = LpSolution(OPTIMAL, value, x, dual, iterations=iters)
        if mode == FLOAT:
            _check_optimal(problem, sol)
        return sol
    if res.status == UNBOUNDED:
        # a dual ray is a Farkas certificate of primal infeasibility
        return LpSolution(INFEASIBLE, dual=split(res.ray), iterations=iters)
    # dual infeasible: the primal is unbounded or infeasible
    ray = res.pi
    feas = _simplex_std(M, _num.zeros((problem.n_vars,), mode), cost, mode)
    iters += feas.iterations
    if feas.status == UNBOUNDED:
        return LpSolution(INFEASIBLE, dual=split(feas.ray), iterations=iters)
    return LpSolution(UNBOUNDED, None, feas.pi, None, ray, iterations=iters)


def _solve_highs(problem: LpProblem) -> LpSolution | None:
    from scipy.optimize import linprog

    A, b, E, e, c = problem.A_ub, problem.b_ub, problem.A_eq, problem.b_eq, problem.c
    res = linprog(-c, A_ub=A if A.shape[0] else None, b_ub=b if A.shape[0] else None,
                  A_eq=E if E.shape[0] else None, b_eq=e if E.shape[0] else None,
                  bounds=(None, None), method="highs")
    if res.status != 0:
        return None
    y_ub = -res.ineqlin.marginals if A.shape[0] else np.zeros(0)
    y_eq = -res.eqlin.marginals if E.shape[0] else np.zeros(0)
    sol = LpSolution(OPTIMAL, float(c @ res.x), np.asarray(res.x, dtype=float),
                     np.concatenate([y_ub, y_eq]), iterations=int(getattr(res, "nit", 0)))
    _check_optimal(problem, sol)
    return sol


def _check_optimal(problem: LpProblem, sol: LpSolution) -> None:
    A, b, E, e, c = problem.A_ub, problem.b_ub, problem.A_eq, problem.b_eq, problem.c
    x, y = sol.x, sol.dual
    scale = max(1.0, float(np.max(np.abs(b))) if b.size else 1.0,
                float(np.max(np.abs(e))) if e.size else 1.0,
                float(np.max(np.abs(c))) if c.size else 1.0)
    tol = 1e-9 * scale * 10
    m_ub = A.shape[0]
    bad = []
    if m_ub and np.max(A @ x - b) > tol:
        bad.append("primal feasibility")
    if E.shape[0] and np.max(np.abs(E @ x - e)) > tol:
        bad.append("equality feasibility")
    if m_ub and np.min(y[:m_ub]) < -tol:
        bad.append("dual sign")
    full = np.concatenate([A, E]) if A.size or E.size else np.zeros((0, len(c)))
    if full.shape[0] and np.max(np.abs(y @ full - c)) > tol:
        bad.append("dual feasibility")
    if m_ub and np.max(np.abs(y[:m_ub] * (A @ x - b))) > tol:
        bad.append("complementary slackness")
    if bad:
        raise NumericBreakdown(message="float simplex residuals too large: " + ", ".join(bad))


def verify_certificate(problem: LpProblem, sol: LpSolution, tol: float = 1e-7) -> bool:
    """Independent check of the certificate attached to ``sol``."""
    exact = problem.mode == EXACT
    t = 0 if exact else tol
    A, b, E, e, c = problem.A_ub, problem.b_ub, problem.A_eq, problem.b_eq, problem.c
    full = np.concatenate([A, E])
    rhs = np.concatenate([b, e])
    m_ub = A.shape[0]
    if sol.status == OPTIMAL:
        x, y = sol.x, sol.dual
        ok = (m_ub == 0 or np.max(A @ x - b) <= t)
        ok &= E.shape[0] == 0 or np.max(np.abs(E @ x - e)) <= t
        ok &= m_ub == 0 or min(y[:m_ub]) >= -t
        ok &= full.shape[0] == 0 or np.max(np.abs(y @ full - c)) <= t
        ok &= abs((y @ rhs if full.shape[0] else 0) - sol.value) <= t * max(1, abs(float(sol.value)))
        return bool(ok)
    if sol.status == INFEASIBLE:
        y = sol.dual
        ok = m_ub == 0 or min(y[:m_ub]) >= -t
        ok &= np.max(np.abs(y @ full)) <= t
        ok &= y @ rhs < -t if not exact else y @ rhs < 0
        return bool(ok)
    x, d = sol.x, sol.ray
    ok = m_ub == 0 or (np.max(A @ x - b) <= t and np.max(A @ d) <= t)
    ok &= E.shape[0] == 0 or (np.max(np.abs(E @ x - e)) <= t and np.max(np.abs(E @ d)) <= t)
    ok &= c @ d > t
    return bool(ok)


# ---------------------------------------------------- Lipschitz unit ball

def _coeffs(functional, mode: str) -> np.ndarray:
    vals = getattr(functional, "coeffs", functional)
    return _num.asarray(vals, mode).ravel()


def check_zero_sum(c: np.ndarray, mode: str) -> None:
    s = c.sum()
    if mode == EXACT:
        if s != 0:
            raise DaugavetError("NOT_ZERO_SUM", f"functional coefficients sum to {s}")
    elif abs(float(s)) > 1e-9 * max(1.0, float(np.abs(c).sum())):
        raise DaugavetError("NOT_ZERO_SUM", f"functional coefficients sum to {s}")


def ball_problem(K, objective, extra_ub=(), extra_eq=()) -> LpProblem:
    """LP over the Lipschitz unit ball of ``K`` with the base point pinned to 0.

    ``objective`` and the rows of ``extra_ub``/``extra_eq`` (pairs ``(a, b)``
    meaning ``a.f <= b`` / ``a.f = b``) are full-length vectors; their base
    coefficient is dropped since f(base) = 0.
    """
    mode = K.mode
    n = K.n
    pairs = K.essential_pairs()
    rows = _num.zeros((2 * len(pairs) + len(extra_ub), n - 1), mode)
    rhs = _num.zeros((rows.shape[0],), mode)
    one = _num.one(mode)
    for k, (u, v) in enumerate(pairs):
        for s, (a, b) in enumerate(((u, v), (v, u))):
            r = 2 * k + s
            if a:
                rows[r, a - 1] = one
            if b:
                rows[r, b - 1] = -one
            rhs[r] = K.dist[u, v]
    off = 2 * len(pairs)
    for j, (a, b) in enumerate(extra_ub):
        rows[off + j] = _num.asarray(a, mode)[1:]
        rhs[off + j] = _num.to_number(b, mode)
    if extra_eq:
        E = np.stack([_num.asarray(a, mode)[1:] for a, _ in extra_eq])
        e = _num.asarray([b for _, b in extra_eq], mode)
    else:
        E = e = None
    c = _num.asarray(objective, mode)[1:]
    return LpProblem(c, rows, rhs, E, e, mode=mode)


def maximize_on_ball(K, objective, extra_ub=(), extra_eq=(), method: str = "support"):
    """Maximise a linear form over the unit ball plus extra constraints.

    Returns ``(solution, f)`` where ``f`` is a full-length maximiser (or None).
    With ``method="support"`` the LP is posed on the subspace carrying all
    nonzero coefficients and the optimum is extended by McShane's formula;
    restriction maps the unit ball of K onto that of the subspace, so the
    value is unchanged.
    """
    mode = K.mode
    obj = _num.asarray(objective, mode)
    ub = [(_num.asarray(a, mode), b) for a, b in extra_ub]
    eq = [(_num.asarray(a, mode), b) for a, b in extra_eq]
    if method == "ball":
        prob = ball_problem(K, obj, ub, eq)
        sol = solve_lp(prob)
        f = None
        if sol.status == OPTIMAL:
            f = _num.zeros((K.n,), mode)
            f[1:] = sol.x
        return sol, f
    if method != "support":
        raise ValueError(f"unknown method {method!r}")
    support = set(np.nonzero(np.asarray(obj != 0, dtype=bool))[0].tolist())
    for a, _ in ub + eq:
        support |= set(np.nonzero(np.asarray(a != 0, dtype=bool))[0].tolist())
    idx = sorted(support)
    if len(idx) < 2:
        idx = sorted(set(idx) | {0, 1} if K.n > 1 else idx)
    sub = K.subspace(idx)
    sel = lambda a: a[idx]
    prob = ball_problem(sub, sel(obj), [(sel(a), b) for a, b in ub], [(sel(a), b) for a, b in eq])
    sol = solve_lp(prob)
    f = None
    if sol.status == OPTIMAL:
        vals = _num.zeros((len(idx),), mode)
        vals[1:] = sol.x
        from .lipschitz import mcshane_upper
        f = mcshane_upper(K, idx, vals, _num.one(mode))
    return sol, f


def dual_norm(space, functional, method: str = "ball"):
    """Norm of a zero-sum functional: max of sum c_p f(p) over the unit ball."""
    value, _ = dual_norm_witness(space, functional, method)
    return value


def dual_norm_witness(space, functional, method: str = "ball"):
    mode = space.mode
    c = _coeffs(functional, mode)
    if c.shape[0] != space.n:
        raise DaugavetError("BAD_FUNCTIONAL", "functional length differs from the space size")
    check_zero_sum(c, mode)
    if not np.any(np.asarray(c != 0, dtype=bool)):
        return _num.zero(mode), _num.zeros((space.n,), mode)
    sol, f = maximize_on_ball(space, c, method=method)
    if sol.status != OPTIMAL:
        raise NumericBreakdown(message=f"dual norm LP returned {sol.status}")
    return sol.value, f
