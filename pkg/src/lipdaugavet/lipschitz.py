"""Lipschitz functions on finite metric spaces."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _num
from ._num import EXACT, FLOAT
from .errors import ConstantTooSmall, DaugavetError, PreconditionFailed, SetupViolation
from .metric import MetricSpace


@dataclass(eq=False)
class LipFunction:
    space: MetricSpace
    values: np.ndarray

    def __post_init__(self):
        self.values = _num.asarray(self.values, self.space.mode).ravel()
        if self.values.shape[0] != self.space.n:
            raise DaugavetError("BAD_FUNCTION", "one value per point is required")
        if self.space.mode == FLOAT and not np.all(np.isfinite(self.values)):
            raise DaugavetError("BAD_FUNCTION", "values must be finite")

    def canonical(self) -> "LipFunction":
        return LipFunction(self.space, self.values - self.values[0])

    def __add__(self, other):
        o = other.values if isinstance(other, LipFunction) else other
        return LipFunction(self.space, self.values + o)

    def __sub__(self, other):
        o = other.values if isinstance(other, LipFunction) else other
        return LipFunction(self.space, self.values - o)

    def __mul__(self, c):
        return LipFunction(self.space, self.values * _num.to_number(c, self.space.mode))

    __rmul__ = __mul__

    def __neg__(self):
        return LipFunction(self.space, -self.values)

    def __getitem__(self, i):
        return self.values[i]

    def to_dict(self) -> dict:
        return {"space": self.space.to_dict(), "values": _num.encode_array(self.values, self.space.mode)}


@dataclass(eq=False)
class PartialFunction:
    space: MetricSpace
    subset: list
    values: np.ndarray
    L: object

    def __post_init__(self):
        mode = self.space.mode
        self.subset = [int(i) for i in self.subset]
        self.values = _num.asarray(self.values, mode).ravel()
        self.L = _num.to_number(self.L, mode)
        if len(self.subset) != self.values.shape[0] or len(set(self.subset)) != len(self.subset):
            raise DaugavetError("BAD_FUNCTION", "subset and values must match, without repeats")
        if not self.subset:
            raise DaugavetError("BAD_FUNCTION", "subset must be nonempty")

    def max_quotient(self):
        sub = self.space.subspace(self.subset)
        return lip_norm(LipFunction(sub, self.values))[0]


def _quotients(D: np.ndarray, vals: np.ndarray):
    diff = vals[:, None] - vals[None, :]
    n = len(vals)
    iu = np.triu_indices(n, 1)
    num = np.abs(diff[iu])
    return num / D[iu], iu


def lip_norm(f: LipFunction):
    """Return ``(value, pair)``; pair is the lexicographically first maximiser."""
    K = f.space
    q, (I, J) = _quotients(K.dist, f.values)
    if len(q) == 0:
        return _num.zero(K.mode), None
    k = int(np.argmax(q))
    best = q[k]
    if best == 0:
        return _num.zero(K.mode), None
    return (best if K.mode == EXACT else float(best)), (int(I[k]), int(J[k]))


def lip_norm_on(K: MetricSpace, subset: Sequence[int], values) -> object:
    sub = K.subspace(list(subset))
    return lip_norm(LipFunction(sub, values))[0]


def mcshane_upper(K: MetricSpace, subset, vals, L) -> np.ndarray:
    """x -> min over m of vals[m] + L * d(x, m)."""
    D = K.dist[:, list(subset)]
    return (vals[None, :] + L * D).min(axis=1)


def mcshane_lower(K: MetricSpace, subset, vals, L) -> np.ndarray:
    D = K.dist[:, list(subset)]
    return (vals[None, :] - L * D).max(axis=1)


def mcshane_envelopes(partial: PartialFunction):
    """Largest and smallest L-Lipschitz extensions ``(F_plus, F_minus)``."""
    K = partial.space
    q = partial.max_quotient()
    slack = 0 if K.mode == EXACT else 1e-12 * max(1.0, abs(float(partial.L)))
    if q > partial.L + slack:
        raise ConstantTooSmall(message=f"quotient {q} on the subset exceeds L = {partial.L}",
                               quotient=q, L=partial.L)
    up = mcshane_upper(K, partial.subset, partial.values, partial.L)
    lo = mcshane_lower(K, partial.subset, partial.values, partial.L)
    # on the subset both formulas reproduce f; assign exactly to avoid float drift
    up[partial.subset] = partial.values
    lo[partial.subset] = partial.values
    return LipFunction(K, up), LipFunction(K, lo)


# ----------------------------------------------------------------- locality

@dataclass
class LocalityReport:
    scale: object
    margin: object
    best_quotient: object
    best_pair: tuple | None
    norm: object
    norm_pair: tuple | None
    deficiency: object
    witness: LipFunction | None = None
    note: str | None = None

    @property
    def is_local(self) -> bool:
        """Whether some close pair comes within ``margin`` (relative) of the norm."""
        if self.best_pair is None:
            return False
        return self.best_quotient > self.norm * (1 - self.margin)

    def to_dict(self, mode: str = FLOAT) -> dict:
        enc = lambda v: None if v is None else _num.encode(v, mode)
        return {
            "kind": "locality",
            "scale": enc(self.scale),
            "margin": enc(self.margin),
            "best_quotient": enc(self.best_quotient),
            "best_pair": list(self.best_pair) if self.best_pair else None,
            "norm": enc(self.norm),
            "norm_pair": list(self.norm_pair) if self.norm_pair else None,
            "deficiency": enc(self.deficiency),
            "is_local": self.is_local,
            "witness": None if self.witness is None else _num.encode_array(self.witness.values, mode),
            "note": self.note,
        }


def _orient(f: LipFunction, pair):
    if pair is None:
        return None
    i, j = pair
    return (i, j) if f.values[j] >= f.values[i] else (j, i)


def locality_profile(f: LipFunction, scale, margin=None) -> LocalityReport:
    """Best difference quotient of ``f`` over pairs closer than ``scale``."""
    K = f.space
    mode = K.mode
    scale = _num.to_number(scale, mode)
    if not scale > 0:
        raise DaugavetError("BAD_SCALE", "scale must be positive")
    margin = scale if margin is None else _num.to_number(margin, mode)
    norm, norm_pair = lip_norm(f)
    q, (I, J) = _quotients(K.dist, f.values)
    close = np.asarray(K.dist[I, J] < scale, dtype=bool)
    if not close.any():
        return LocalityReport(scale, margin, _num.zero(mode), None, norm, _orient(f, norm_pair),
                              _num.one(mode), note="NO_CLOSE_PAIR")
    qc = np.where(close, q, -1)
    k = int(np.argmax(qc))
    best = qc[k] if mode == EXACT else float(qc[k])
    if norm == 0:
        deficiency = _num.zero(mode)
    else:
        deficiency = (norm - best) / norm
    return LocalityReport(scale, margin, best, _orient(f, (int(I[k]), int(J[k]))),
                          norm, _orient(f, norm_pair), deficiency)


def _close_path_lengths(K: MetricSpace, scale) -> np.ndarray:
    from scipy.sparse.csgraph import shortest_path

    D = np.asarray(K.dist, dtype=float)
    W = np.where((D < float(scale)) & (D > 0), D, 0.0)
    return shortest_path(W, method="D", directed=False)


def nonlocality_witness(K: MetricSpace, scale) -> LocalityReport:
    """Largest margin m such that some norm-one f attaining its norm at a pair
    at distance >= scale has every quotient below ``1 - m`` on closer pairs.

    One LP per candidate pair; pairs are visited by decreasing path bound
    ``1 - d(p,q)/L(p,q)`` (L = shortest chain of close steps) and the search
    stops once no remaining bound can beat the incumbent.
    """
    from .lp import OPTIMAL, LpProblem, solve_lp

    mode = K.mode
    scale = _num.to_number(scale, mode)
    if not scale > 0:
        raise DaugavetError("BAD_SCALE", "scale must be positive")
    n = K.n
    far = [(p, q) for p, q in K.pairs() if K.dist[p, q] >= scale]
    if not far:
        return LocalityReport(scale, scale, _num.one(mode), None, _num.one(mode), None,
                              _num.zero(mode), note="NO_FAR_PAIR")
    L = _close_path_lengths(K, scale)
    bound = {}
    for p, q in far:
        bound[(p, q)] = 1.0 if not np.isfinite(L[p, q]) else 1.0 - float(K.dist[p, q]) / L[p, q]
    order = sorted(far, key=lambda pq: (-round(bound[pq], 12), pq))

    one = _num.one(mode)
    ess = K.essential_pairs()
    rows, rhs = [], []
    for u, v in ess:
        d = K.dist[u, v]
        for a, b in ((u, v), (v, u)):
            row = _num.zeros((n,), mode)  # columns: f_1..f_{n-1}, m
            if a:
                row[a - 1] = one
            if b:
                row[b - 1] = -one
            if d < scale:
                row[n - 1] = d
            rows.append(row)
            rhs.append(d)
    top = _num.zeros((n,), mode)
    top[n - 1] = one
    rows += [top, -top]
    rhs += [one, _num.zero(mode)]
    A = np.stack(rows)
    b = _num.asarray(rhs, mode) if mode == EXACT else np.asarray(rhs, dtype=float)
    c = top.copy()

    best, best_pair, best_f = None, None, None
    for p, q in order:
        if best is not None:
            # exact mode keeps going through ties so the lexicographic witness is exact
            if bound[(p, q)] < float(best) - 1e-9 or (mode == FLOAT and bound[(p, q)] <= best + 1e-12):
                break
        e = _num.zeros((n,), mode)
        if q:
            e[q - 1] = one
        if p:
            e[p - 1] = -one
        sol = solve_lp(LpProblem(c, A, b, e[None, :], [K.dist[p, q]], mode=mode))
        if sol.status != OPTIMAL:
            continue
        val = sol.value
        if best is None or val > best or (val == best and (p, q) < best_pair):
            best, best_pair = val, (p, q)
            best_f = _num.zeros((n,), mode)
            best_f[1:] = sol.x[: n - 1]
    f = LipFunction(K, best_f)
    prof = locality_profile(f, scale)
    if mode == FLOAT:
        best = float(best)
    return LocalityReport(scale, scale, prof.best_quotient, prof.best_pair, one, best_pair,
                          best, witness=f)


# --------------------------------------------------- adversarial function

def adversarial_z_function(K: MetricSpace, t0: int, tau0: int, eps) -> LipFunction:
    """Norm-one function that peaks only on pairs near (t0, tau0).

    Requires every point z to satisfy r + (1-2eps)s >= d or (1-2eps)r + s >= d,
    with r = d(z,t0), s = d(z,tau0), d = d(t0,tau0).
    """
    mode = K.mode
    eps = _num.to_number(eps, mode)
    if not 0 < eps < _num.one(mode) / 2:
        raise DaugavetError("BAD_EPS", "eps must lie in (0, 1/2)")
    if t0 == tau0:
        raise DaugavetError("SAME_POINT", "t0 and tau0 must differ")
    d = K.dist[t0, tau0]
    half = d / 2
    vals = _num.zeros((K.n,), mode)
    zero = _num.zero(mode)
    for z in range(K.n):
        r, s = K.dist[z, t0], K.dist[z, tau0]
        if r >= s and r + (1 - 2 * eps) * s >= d:
            vals[z] = max(half - (1 - eps) * s, zero)
        elif r <= s and (1 - 2 * eps) * r + s >= d:
            vals[z] = -max(half - (1 - eps) * r, zero)
        else:
            raise PreconditionFailed(message=f"point {z} ({K.labels[z]}) is covered by neither branch",
                                     point=z, label=K.labels[z])
    return LipFunction(K, vals)


# ------------------------------------------------------------- flat gluing

@dataclass(eq=False)
class GlueSetup:
    space: MetricSpace
    B: list
    C: list
    C_tilde: list
    r: object
    delta: object
    f: LipFunction | np.ndarray

    def values(self) -> np.ndarray:
        f = self.f.values if isinstance(self.f, LipFunction) else self.f
        return _num.asarray(f, self.space.mode).ravel()


@dataclass
class GlueResult:
    verified: bool
    worst_pair: tuple | None
    worst_quotient: object
    bound: object


def check_glue_setup(setup: GlueSetup) -> None:
    """Raise :class:`SetupViolation` naming the first failed hypothesis."""
    K = setup.space
    mode = K.mode
    D = K.dist
    r = _num.to_number(setup.r, mode)
    delta = _num.to_number(setup.delta, mode)
    B, C, Ct = list(setup.B), list(setup.C), list(setup.C_tilde)
    if not (0 < r <= _num.one(mode) / 4):
        raise SetupViolation("r", f"r = {r} is outside (0, 1/4]")
    if not (0 <= delta < r * r / 16):
        raise SetupViolation("delta", f"delta = {delta} is not below r^2/16 = {r * r / 16}")
    if (set(B) & set(C)) or sorted(B + C) != list(range(K.n)) or not set(Ct) <= set(C) or not Ct:
        raise SetupViolation("partition", "B and C must partition the space and C~ must be a nonempty subset of C")
    if B and C and not D[np.ix_(B, C)].min() > r:
        raise SetupViolation("separation", f"dist(B, C) = {D[np.ix_(B, C)].min()} is not above r")
    if not np.all(np.asarray(D[np.ix_(C, Ct)].min(axis=1) <= delta, dtype=bool)):
        bad = [C[i] for i, v in enumerate(D[np.ix_(C, Ct)].min(axis=1)) if not v <= delta]
        raise SetupViolation("net", f"points {bad} are farther than delta from C~", points=bad)
    for i, a in enumerate(Ct):
        for b in Ct[i + 1:]:
            if D[a, b] < r:
                raise SetupViolation("spacing", f"C~ points {a}, {b} are closer than r", points=[a, b])
    vals = setup.values()
    one = _num.one(mode)
    groups = [("B+C~", B + Ct)] + [(f"ball({t})", [int(x) for x in np.nonzero(np.asarray(D[t] <= delta, dtype=bool))[0]]) for t in Ct]
    for name, idx in groups:
        if len(idx) >= 2 and lip_norm_on(K, idx, vals[idx]) > one:
            raise SetupViolation("lipschitz", f"f is not 1-Lipschitz on {name}", group=name)


def glue_flat(setup: GlueSetup) -> GlueResult:
    """Check that f is (1 + r/2)-Lipschitz on the whole space."""
    check_glue_setup(setup)
    K = setup.space
    f = LipFunction(K, setup.values())
    worst, pair = lip_norm(f)
    bound = 1 + _num.to_number(setup.r, K.mode) / 2
    return GlueResult(bool(worst <= bound), pair, worst, bound)
