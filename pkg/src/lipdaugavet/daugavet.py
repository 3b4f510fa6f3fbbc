"""Operators on Lip0(K), the Daugavet defect and the slice/hull/local-pair tests.

Operators act on base-pointed coordinates: a function is represented by its
values at points 1..n-1 after subtracting the value at point 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _num
from ._num import EXACT, FLOAT
from .errors import DaugavetError, NumericBreakdown
from .lipschitz import LipFunction, lip_norm, mcshane_upper
from .lp import OPTIMAL, check_zero_sum, dual_norm, dual_norm_witness, maximize_on_ball
from .metric import MetricSpace

FLOAT_TOL = 1e-9
# float pair searches treat values within this of the running best as ties
TIE_TOL = 1e-12


def _tol(mode: str):
    return 0 if mode == EXACT else FLOAT_TOL


def _out(x, mode):
    return x if mode == EXACT else float(x)


# ---------------------------------------------------------------- types

@dataclass(eq=False)
class DualFunctional:
    """Zero-sum coefficient vector acting by f -> sum_p c_p f(p)."""

    space: MetricSpace
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = _num.asarray(self.coeffs, self.space.mode).ravel()
        if self.coeffs.shape[0] != self.space.n:
            raise DaugavetError("BAD_FUNCTIONAL", "one coefficient per point is required")
        check_zero_sum(self.coeffs, self.space.mode)

    def __call__(self, f):
        vals = f.values if isinstance(f, LipFunction) else _num.asarray(f, self.space.mode)
        return self.coeffs @ vals

    def __mul__(self, c):
        return DualFunctional(self.space, self.coeffs * _num.to_number(c, self.space.mode))

    __rmul__ = __mul__

    def support(self) -> list[int]:
        return np.nonzero(np.asarray(self.coeffs != 0, dtype=bool))[0].tolist()

    def to_dict(self) -> dict:
        return {"coeffs": _num.encode_array(self.coeffs, self.space.mode)}


def eval_functional(space: MetricSpace, t1: int, t2: int) -> DualFunctional:
    """x -> (x(t2) - x(t1)) / d(t1, t2)."""
    if t1 == t2:
        raise DaugavetError("SAME_POINT", "the two points must differ", point=t1)
    mode = space.mode
    c = _num.zeros((space.n,), mode)
    a = space.dist[t1, t2]
    c[t2] = _num.one(mode) / a
    c[t1] = -_num.one(mode) / a
    return DualFunctional(space, c)


@dataclass(eq=False)
class LinearOperator:
    """Matrix on base-pointed coordinates, optionally with its rank-1 form."""

    space: MetricSpace
    matrix: np.ndarray
    functional: DualFunctional | None = None
    function: LipFunction | None = None

    def __post_init__(self):
        n = self.space.n
        self.matrix = _num.asarray(self.matrix, self.space.mode).reshape(n - 1, n - 1)

    @classmethod
    def rank1(cls, functional: DualFunctional, function: LipFunction) -> "LinearOperator":
        g = function.values - function.values[0]
        M = np.outer(g[1:], functional.coeffs[1:]) if functional.space.mode == FLOAT \
            else _outer_obj(g[1:], functional.coeffs[1:])
        return cls(functional.space, M, functional, function)

    @classmethod
    def zero(cls, space: MetricSpace) -> "LinearOperator":
        return cls(space, _num.zeros((space.n - 1, space.n - 1), space.mode))

    @classmethod
    def identity(cls, space: MetricSpace) -> "LinearOperator":
        M = _num.zeros((space.n - 1, space.n - 1), space.mode)
        for i in range(space.n - 1):
            M[i, i] = _num.one(space.mode)
        return cls(space, M)

    @property
    def is_rank1(self) -> bool:
        return self.functional is not None and self.function is not None

    def full_rows(self) -> np.ndarray:
        """n x n matrix R with (Tf)(p) = R[p] . f for every f (rows sum to 0)."""
        n, mode = self.space.n, self.space.mode
        R = _num.zeros((n, n), mode)
        R[1:, 1:] = self.matrix
        R[1:, 0] = -self.matrix.sum(axis=1) if n > 1 else R[1:, 0]
        return R

    def apply(self, f) -> LipFunction:
        vals = f.values if isinstance(f, LipFunction) else _num.asarray(f, self.space.mode)
        out = _num.zeros((self.space.n,), self.space.mode)
        out[1:] = self.matrix @ (vals[1:] - vals[0])
        return LipFunction(self.space, out)

    def scaled(self, c) -> "LinearOperator":
        c = _num.to_number(c, self.space.mode)
        if self.is_rank1:
            return LinearOperator.rank1(self.functional, self.function * c)
        return LinearOperator(self.space, self.matrix * c)

    def to_dict(self) -> dict:
        mode = self.space.mode
        if self.is_rank1:
            return {"kind": "rank1", "functional": _num.encode_array(self.functional.coeffs, mode),
                    "function": _num.encode_array(self.function.values, mode)}
        return {"kind": "matrix", "rows": _num.encode_array(self.matrix, mode)}

    @classmethod
    def from_dict(cls, space: MetricSpace, d: dict) -> "LinearOperator":
        kind = d.get("kind")
        if kind == "rank1":
            return cls.rank1(DualFunctional(space, d["functional"]), LipFunction(space, d["function"]))
        if kind == "matrix":
            rows = _num.asarray(d["rows"], space.mode)
            if rows.shape != (space.n - 1, space.n - 1):
                raise DaugavetError("BAD_OPERATOR", f"matrix must be {space.n - 1}x{space.n - 1}")
            return cls(space, rows)
        if kind in ("zero", "identity"):
            return getattr(cls, kind)(space)
        raise DaugavetError("BAD_OPERATOR", f"unknown operator kind {kind!r}")


def _outer_obj(a, b):
    out = np.empty((len(a), len(b)), dtype=object)
    for i, ai in enumerate(a):
        out[i] = ai * b
    return out


# ---------------------------------------------------------------- norms

def _transport_bound(K: MetricSpace, c: np.ndarray):
    # sum_i c_i f(i) = sum_i c_i (f(i) - f(o)) <= sum_i |c_i| d(i, o) for any o
    return (np.abs(c) @ K.dist).min()


def _max_over_pairs(K: MetricSpace, pair_coeffs, bounds: dict):
    """Largest dual norm among pair functionals, visiting pairs by falling bound.

    Returns ``(value, pair, f, lps)``.  Exact mode returns the lexicographically
    first maximising pair; float mode stops at the first pair whose bound does
    not beat the running best by more than TIE_TOL.
    """
    mode = K.mode
    exact = mode == EXACT
    order = sorted(bounds, key=lambda pq: (-(bounds[pq] if exact else round(float(bounds[pq]), 12)), pq))
    best, best_pair, best_f, lps = None, None, None, 0
    for pq in order:
        b = bounds[pq]
        if best is not None:
            if exact and b < best:
                break
            if not exact and b <= best + TIE_TOL:
                break
        c = pair_coeffs(pq)
        if not np.any(np.asarray(c != 0, dtype=bool)):
            val, f = _num.zero(mode), _num.zeros((K.n,), mode)
        else:
            val, f = dual_norm_witness(K, c, method="support")
            lps += 1
        if best is None or val > best + (0 if exact else TIE_TOL) or (exact and val == best and pq < best_pair):
            best, best_pair, best_f = val, pq, f
    return best, best_pair, best_f, lps


def _pair_dist(K: MetricSpace):
    I, J = np.triu_indices(K.n, 1)
    return I, J, K.dist[I, J]


def op_norm(T: LinearOperator):
    """Operator norm on Lip0(K): max over pairs of the norm of f -> ((Tf)(p) - (Tf)(q)) / d(p, q)."""
    K, mode = T.space, T.space.mode
    if K.n < 2:
        return _num.zero(mode)
    if T.is_rank1:
        # every pair functional is a multiple of x*, so one LP suffices
        g = T.function.values
        I, J, D = _pair_dist(K)
        kappa = np.abs(g[I] - g[J]) / D
        return _out(kappa.max() * dual_norm(K, T.functional, method="support"), mode)
    R = T.full_rows()
    coeffs = lambda pq: (R[pq[0]] - R[pq[1]]) / K.dist[pq]
    bounds = {pq: _transport_bound(K, coeffs(pq)) for pq in K.pairs()}
    val, *_ = _max_over_pairs(K, coeffs, bounds)
    return _out(val, mode)


@dataclass
class DaugavetReport:
    op_norm: object
    id_plus_norm: object
    defect: object
    pair: tuple | None
    extremal: np.ndarray | None
    mode: str
    method: str = "lp"
    lps: int = 0

    def to_dict(self) -> dict:
        m = self.mode
        return {
            "kind": "daugavet",
            "mode": m,
            "op_norm": _num.encode(self.op_norm, m),
            "id_plus_norm": _num.encode(self.id_plus_norm, m),
            "defect": _num.encode(self.defect, m),
            "pair": None if self.pair is None else list(self.pair),
            "extremal": None if self.extremal is None else _num.encode_array(self.extremal, m),
            "method": self.method,
        }


def _two_point(functional: DualFunctional):
    """(pos, neg, w) when x* = w (delta_pos - delta_neg) with w > 0, else None."""
    s = functional.support()
    if len(s) != 2:
        return None
    a, b = s
    c = functional.coeffs
    return (a, b, c[a]) if c[a] > 0 else (b, a, c[b])


def _closed_form_id_plus(T: LinearOperator):
    """Norms of all pair functionals of Id+T for T = (w(delta_u - delta_v)) (x) g.

    Each pair functional is a combination of two dipoles; its dual norm is the
    cost of the better of the two couplings between their ends.
    """
    K = T.space
    u, v, w = _two_point(T.functional)
    g = T.function.values
    I, J, D = _pair_dist(K)
    kappa = (g[I] - g[J]) / D
    alpha = 1 / D
    beta = np.abs(kappa) * w
    pos2 = np.where(kappa >= 0, u, v).astype(int)
    neg2 = np.where(kappa >= 0, v, u).astype(int)
    dist = K.dist
    cross = dist[I, neg2] + dist[pos2, J] - D - dist[pos2, neg2]
    zero = _num.zero(K.mode)
    cross = np.where(cross < zero, cross, zero)
    m = np.where(alpha < beta, alpha, beta)
    return I, J, 1 + beta * dist[u, v] + m * cross


def daugavet_check(T: LinearOperator) -> DaugavetReport:
    K, mode = T.space, T.space.mode
    if K.n < 2:
        raise DaugavetError("BAD_SPACE", "at least two points are required")
    norm_T = op_norm(T)
    lps = 0
    if T.is_rank1 and _two_point(T.functional) is not None:
        I, J, vals = _closed_form_id_plus(T)
        k = int(np.argmax(vals))
        value, pair, method = vals[k], (int(I[k]), int(J[k])), "closed_form"
        R = T.full_rows()
        c = _id_plus_coeffs(K, R, pair)
        check, f = dual_norm_witness(K, c, method="support")
        lps = 1
        if (mode == EXACT and check != value) or (mode == FLOAT and abs(check - value) > 1e-7 * max(1.0, abs(value))):
            raise NumericBreakdown(message=f"closed form {value} disagrees with LP {check} at {pair}")
    else:
        R = T.full_rows()
        coeffs = lambda pq: _id_plus_coeffs(K, R, pq)
        if T.is_rank1:
            xs = dual_norm(K, T.functional, method="support")
            lps += 1
            g = T.function.values
            bounds = {pq: 1 + abs(g[pq[0]] - g[pq[1]]) / K.dist[pq] * xs for pq in K.pairs()}
        else:
            bounds = {pq: _transport_bound(K, coeffs(pq)) for pq in K.pairs()}
        value, pair, f, n_lp = _max_over_pairs(K, coeffs, bounds)
        lps += n_lp
        method = "lp"
    value = _out(value, mode)
    defect = 1 + norm_T - value
    if mode == FLOAT and -1e-9 < defect < 0:
        defect = 0.0
    return DaugavetReport(norm_T, value, defect, pair, f, mode, method, lps)


def _id_plus_coeffs(K: MetricSpace, R: np.ndarray, pq):
    p, q = pq
    c = R[p] - R[q]
    c[p] += 1
    c[q] -= 1
    return c / K.dist[p, q]


# ------------------------------------------------------------ slice test

SAT = "SAT"
UNSAT = "UNSAT"


def _check_unit(value, what: str, mode: str):
    if mode == EXACT and value != 1 or mode == FLOAT and abs(float(value) - 1) > FLOAT_TOL:
        raise DaugavetError("NOT_NORMALIZED", f"{what} has norm {value}, expected 1", norm=value)


def _check_eps(eps, mode, hi=1):
    eps = _num.to_number(eps, mode)
    if not 0 < eps < hi:
        raise DaugavetError("BAD_EPS", f"eps must lie in (0, {hi})", eps=eps)
    return eps


def _ordered_pairs(n: int):
    return ((p, q) for p in range(n) for q in range(n) if p != q)


@dataclass
class SliceResult:
    status: str
    eps: object
    pair: tuple | None = None
    x: np.ndarray | None = None
    xstar_value: object = None
    sum_norm: object = None
    mode: str = FLOAT
    lps: int = 0

    @property
    def sat(self) -> bool:
        return self.status == SAT

    def to_dict(self) -> dict:
        m = self.mode
        enc = lambda v: None if v is None else _num.encode(v, m)
        return {"kind": "slice", "status": self.status, "eps": enc(self.eps),
                "pair": None if self.pair is None else list(self.pair),
                "x": None if self.x is None else _num.encode_array(self.x, m),
                "xstar_value": enc(self.xstar_value), "sum_norm": enc(self.sum_norm), "mode": m}


def slice_test(y: LipFunction, xstar: DualFunctional, eps) -> SliceResult:
    """Look for x in the unit ball with x*(x) >= 1 - eps and ||x + y|| >= 2 - eps.

    Ordered pairs (p, q) are tried lexicographically; for each, one LP
    maximises x*(x) subject to (x + y)(p) - (x + y)(q) >= (2 - eps) d(p, q).
    """
    K, mode = y.space, y.space.mode
    eps = _check_eps(eps, mode)
    _check_unit(lip_norm(y)[0], "y", mode)
    _check_unit(dual_norm(K, xstar, method="support"), "x*", mode)
    tol = _tol(mode)
    yv = y.values
    lps = 0
    for p, q in _ordered_pairs(K.n):
        rho = K.dist[p, q]
        # ||x|| <= 1 caps (x(p) - x(q)) at rho, so y must nearly attain its norm here
        if yv[p] - yv[q] < (1 - eps) * rho - tol:
            continue
        a = _num.zeros((K.n,), mode)
        a[p] -= 1
        a[q] += 1
        sol, x = maximize_on_ball(K, xstar.coeffs, extra_ub=[(a, yv[p] - yv[q] - (2 - eps) * rho)])
        lps += 1
        if sol.status != OPTIMAL or sol.value < 1 - eps - tol:
            continue
        val = xstar(x)
        total = lip_norm(LipFunction(K, x + yv))[0]
        xn = lip_norm(LipFunction(K, x))[0]
        # independent re-check by direct evaluation
        if xn > 1 + tol or val < 1 - eps - tol or total < 2 - eps - tol:
            raise NumericBreakdown(message=f"slice witness for pair {(p, q)} failed re-verification")
        return SliceResult(SAT, eps, (p, q), x, _out(val, mode), total, mode, lps)
    return SliceResult(UNSAT, eps, mode=mode, lps=lps)


# ------------------------------------------------------ hull construction

@dataclass
class HullResult:
    eps: object
    radius: object
    centers: list
    pairs: list
    constants: list
    u: list
    u_norms: list
    sum_norms: list
    mean_distance: object
    bound: object
    mode: str

    @property
    def passed(self) -> bool:
        tol = _tol(self.mode)
        return (all(v <= 1 + self.eps + tol for v in self.u_norms)
                and all(v >= 2 - self.eps - tol for v in self.sum_norms)
                and self.mean_distance <= self.bound + tol)

    def to_dict(self) -> dict:
        m = self.mode
        enc = lambda v: _num.encode(v, m)
        return {"kind": "hull", "mode": m, "eps": enc(self.eps), "radius": enc(self.radius),
                "centers": list(self.centers), "pairs": [list(p) for p in self.pairs],
                "constants": [enc(v) for v in self.constants],
                "u_norms": [enc(v) for v in self.u_norms],
                "sum_norms": [enc(v) for v in self.sum_norms],
                "mean_distance": enc(self.mean_distance), "bound": enc(self.bound),
                "passed": self.passed,
                "u": [_num.encode_array(v, m) for v in self.u]}


def _center_candidate(K, f, g, s, radius, pair_radius, eps):
    """Best f-pair near ``s`` and the partial data for u; None if s does not qualify."""
    mode = K.mode
    near = np.nonzero(np.asarray(K.dist[s] <= pair_radius, dtype=bool))[0]
    fv = f.values
    best, pair = None, None
    for t in near:
        for tau in near:
            if t == tau:
                continue
            q = (fv[tau] - fv[t]) / K.dist[t, tau]
            if best is None or q > best:
                best, pair = q, (int(t), int(tau))
    if best is None or not best > 1 - eps / 2:
        return None
    t, tau = pair
    ball = np.asarray(K.dist[s] <= radius, dtype=bool)
    outside = np.nonzero(~ball)[0].tolist()
    subset = outside + [t, tau]
    vals = np.concatenate([g.values[outside], _num.asarray([g.values[t], g.values[t] + fv[tau] - fv[t]], mode)])
    # constant of the modified data: only quotients involving tau can exceed 1
    others = outside + [t]
    quot = np.abs(vals[-1] - vals[:-1]) / K.dist[tau, others]
    L = max(_num.one(mode), quot.max() if len(quot) else _num.one(mode))
    if mode == FLOAT:
        L = float(L)
    if L > 1 + eps:
        return None
    return best, pair, ball, subset, vals, L


def hull_construction(f: LipFunction, g: LipFunction, eps, n: int, radius=None,
                      pair_radius=None, centers=None) -> HullResult:
    """Build u_1..u_n close to g with each f + u_i nearly diametral.

    Each u_i equals g off the ball U_i = B(s_i, radius), is bumped along f on a
    near pair (t_i, tau_i) inside U_i, and is completed by McShane's formula.
    Centers are chosen greedily by falling local quotient of f unless given.
    """
    K, mode = f.space, f.space.mode
    eps = _num.to_number(eps, mode)
    if not 0 < eps <= Fraction(1, 4):
        raise DaugavetError("BAD_EPS", "eps must lie in (0, 1/4]", eps=eps)
    if n < 1:
        raise DaugavetError("BAD_N", "n must be positive")
    _check_unit(lip_norm(f)[0], "f", mode)
    _check_unit(lip_norm(g)[0], "g", mode)
    radius = eps if radius is None else _num.to_number(radius, mode)
    pair_radius = K.min_positive_distance() if pair_radius is None else _num.to_number(pair_radius, mode)

    if centers is not None:
        centers = [int(c) for c in centers]
        if len(centers) != n:
            raise DaugavetError("BAD_CENTERS", "exactly n centers are required")
        chosen = []
        for s in centers:
            cand = _center_candidate(K, f, g, s, radius, pair_radius, eps)
            if cand is None:
                raise DaugavetError("NOT_ENOUGH_EPOINTS", f"center {s} does not qualify",
                                    found=len(chosen), center=s)
            for other, oc in chosen:
                if np.any(cand[2] & oc[2]):
                    raise DaugavetError("BALL_OVERLAP", f"balls at {other} and {s} intersect",
                                        centers=[other, s])
            chosen.append((s, cand))
    else:
        cands = []
        for s in range(K.n):
            cand = _center_candidate(K, f, g, s, radius, pair_radius, eps)
            if cand is not None:
                cands.append((s, cand))
        cands.sort(key=lambda sc: (-sc[1][0], sc[0]))
        chosen = []
        taken = np.zeros(K.n, dtype=bool)
        for s, cand in cands:
            if not np.any(cand[2] & taken):
                chosen.append((s, cand))
                taken |= cand[2]
                if len(chosen) == n:
                    break
        if len(chosen) < n:
            raise DaugavetError("NOT_ENOUGH_EPOINTS", f"only {len(chosen)} qualifying centers",
                                found=len(chosen))

    us, pairs, consts, u_norms, sum_norms = [], [], [], [], []
    for s, (_, pair, ball, subset, vals, L) in chosen:
        u = mcshane_upper(K, subset, vals, L)
        u[subset] = vals
        us.append(u)
        pairs.append(pair)
        consts.append(L)
        u_norms.append(lip_norm(LipFunction(K, u))[0])
        sum_norms.append(lip_norm(LipFunction(K, f.values + u))[0])
    mean = sum(us[1:], us[0].copy()) / n
    dist = lip_norm(LipFunction(K, g.values - mean))[0]
    bound = (4 + 2 * eps) / n
    return HullResult(eps, radius, [s for s, _ in chosen], pairs, consts, us, u_norms, sum_norms,
                      dist, bound, mode)


# -------------------------------------------------- local pair extraction

SUCCESS = "SUCCESS"
FAILURE = "FAILURE"


def distance_coefficient(eps):
    """eps / ((1 - eps)(2 - eps)): bound on d(tau1, tau2) / d(t1, t2)."""
    return eps / ((1 - eps) * (2 - eps))


@dataclass
class LocalPairWitness:
    t1: int
    t2: int
    tau1: int
    tau2: int
    eps: object
    x: np.ndarray
    xstar_value: object
    diff_norm: object
    slack_f: object
    slack_t1: object
    slack_t2: object
    bound_slack: object
    mode: str
    status: str = SUCCESS

    @property
    def success(self) -> bool:
        return True

    @property
    def holds(self) -> bool:
        return min(self.slack_f, self.slack_t1, self.slack_t2, self.bound_slack) >= -_tol(self.mode)

    def to_dict(self) -> dict:
        m = self.mode
        enc = lambda v: _num.encode(v, m)
        return {"kind": "localpair", "status": self.status, "mode": m, "eps": enc(self.eps),
                "t1": self.t1, "t2": self.t2, "tau1": self.tau1, "tau2": self.tau2,
                "x": _num.encode_array(self.x, m), "xstar_value": enc(self.xstar_value),
                "diff_norm": enc(self.diff_norm), "slack_f": enc(self.slack_f),
                "slack_t1": enc(self.slack_t1), "slack_t2": enc(self.slack_t2),
                "bound_slack": enc(self.bound_slack), "holds": self.holds}


@dataclass
class LocalPairFailure:
    t1: int
    t2: int
    eps: object
    best_diff_norm: object
    best_pair: tuple | None
    target: object
    mode: str
    status: str = FAILURE

    @property
    def success(self) -> bool:
        return False

    def to_dict(self) -> dict:
        m = self.mode
        enc = lambda v: _num.encode(v, m)
        return {"kind": "localpair", "status": self.status, "mode": m, "eps": enc(self.eps),
                "t1": self.t1, "t2": self.t2, "best_diff_norm": enc(self.best_diff_norm),
                "best_pair": None if self.best_pair is None else list(self.best_pair),
                "target": enc(self.target)}


def best_pair_gap(K: MetricSpace, t1: int, t2: int, eps) -> np.ndarray:
    """Matrix G[i, j] = max of x(i) - x(j) over ||x|| <= 1 with x(t2) - x(t1) >= (1 - eps) d(t1, t2).

    By difference-constraint duality the maximum is the shortest of the direct
    route and the route through the extra constraint.
    """
    D = K.dist
    a = D[t1, t2]
    via = D[:, t1][:, None] + D[t2, :][None, :] - (1 - eps) * a
    return np.where(via < D, via, D)


def _attaining_pair(f: LipFunction, t1, t2):
    K, mode = f.space, f.space.mode
    norm, pair = lip_norm(f)
    if pair is None:
        raise DaugavetError("NOT_NORM_ATTAINING", "f is constant")
    tol = _tol(mode)
    if t1 is None or t2 is None:
        i, j = pair
        t1, t2 = (i, j) if f.values[j] >= f.values[i] else (j, i)
    if abs(norm - 1) > tol or t1 == t2 or abs(f.values[t2] - f.values[t1] - K.dist[t1, t2]) > tol:
        raise DaugavetError("NOT_NORM_ATTAINING", "f must have norm 1 attained at (t1, t2)")
    return int(t1), int(t2)


def extract_local_pair(f: LipFunction, eps, t1: int | None = None, t2: int | None = None):
    """Search for x with x*(x) >= 1 - eps and ||x - y|| >= 2 - eps/3, then read off a close pair.

    y = (f + d(t1, .) - d(t2, .)) / 3 and x* is the evaluation functional of
    (t1, t2).  Returns a :class:`LocalPairWitness` or a :class:`LocalPairFailure`
    carrying the largest achievable ||x - y||.
    """
    K, mode = f.space, f.space.mode
    eps = _check_eps(eps, mode)
    t1, t2 = _attaining_pair(f, t1, t2)
    tol = _tol(mode)
    D = K.dist
    a = D[t1, t2]
    y = (f.values + D[t1] - D[t2]) / 3
    xstar = eval_functional(K, t1, t2)
    target = 2 - eps / 3
    G = best_pair_gap(K, t1, t2, eps)
    n = K.n
    off = ~np.eye(n, dtype=bool)
    Dsafe = np.where(off, D, 1)
    score = np.where(off, (G + y[None, :] - y[:, None]) / Dsafe, -target)
    for i, j in zip(*np.nonzero(np.asarray(score >= target - tol, dtype=bool))):
        i, j = int(i), int(j)
        rho = D[i, j]
        row = _num.zeros((n,), mode)
        row[i] -= 1
        row[j] += 1
        sol, x = maximize_on_ball(K, xstar.coeffs,
                                  extra_ub=[(row, -(target * rho) - (y[i] - y[j]))])
        if sol.status != OPTIMAL or sol.value < 1 - eps - tol:
            continue
        xval = xstar(x)
        h = LipFunction(K, x - y)
        dn, hp = lip_norm(h)
        xn = lip_norm(LipFunction(K, x))[0]
        if xn > 1 + tol or xval < 1 - eps - tol or dn < target - tol:
            raise NumericBreakdown(message=f"local-pair witness for {(i, j)} failed re-verification")
        p, q = hp
        tau1, tau2 = (p, q) if h.values[p] >= h.values[q] else (q, p)
        r12 = D[tau1, tau2]
        fv = f.values
        return LocalPairWitness(
            t1, t2, tau1, tau2, eps, x, _out(xval, mode), _out(dn, mode),
            slack_f=_out(fv[tau2] - fv[tau1] - (1 - eps) * r12, mode),
            slack_t1=_out(D[t1, tau2] - D[t1, tau1] - (1 - eps) * r12, mode),
            slack_t2=_out(D[t2, tau1] - D[t2, tau2] - (1 - eps) * r12, mode),
            bound_slack=_out(distance_coefficient(eps) * a - r12, mode),
            mode=mode)
    k = int(np.argmax(score))
    i, j = divmod(k, n)
    return LocalPairFailure(t1, t2, eps, _out(score[i, j], mode), (i, j), target, mode)
