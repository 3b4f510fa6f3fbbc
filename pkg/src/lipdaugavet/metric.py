"""Finite metric spaces: validation, generators, property (Z) and midpoint chains."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _num
from ._num import EXACT, FLOAT
from .errors import BadSpec, DaugavetError, InvalidMetric

FLOAT_REL_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class MetricSpace:
    labels: tuple
    dist: np.ndarray
    mode: str = FLOAT
    coords: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.dist.setflags(write=False)

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def n(self) -> int:
        return len(self.labels)

    def index(self, label) -> int:
        if isinstance(label, (int, np.integer)) and not isinstance(label, bool):
            return int(label)
        return self.labels.index(label)

    def d(self, i: int, j: int):
        return self.dist[i, j]

    def subspace(self, idx: Sequence[int]) -> "MetricSpace":
        idx = list(idx)
        coords = None if self.coords is None else self.coords[idx]
        return MetricSpace(tuple(self.labels[i] for i in idx),
                           self.dist[np.ix_(idx, idx)].copy(), self.mode, coords)

    def scaled(self, c) -> "MetricSpace":
        c = _num.to_number(c, self.mode)
        return MetricSpace(self.labels, self.dist * c, self.mode, self.coords)

    def permuted(self, perm: Sequence[int]) -> "MetricSpace":
        return self.subspace(perm)

    def min_positive_distance(self):
        n = self.n
        off = self.dist[~np.eye(n, dtype=bool)]
        return min(off)

    def diameter(self):
        return self.dist.max()

    def pairs(self):
        """Unordered index pairs (i, j), i < j, in lexicographic order."""
        return itertools.combinations(range(self.n), 2)

    def to_dict(self) -> dict:
        return {"labels": [str(l) for l in self.labels],
                "dist": _num.encode_array(self.dist, self.mode),
                "mode": self.mode}

    def essential_pairs(self) -> list[tuple[int, int]]:
        """Unordered pairs with no third point metrically between them.

        Lipschitz constraints on the remaining pairs are implied by these.
        """
        cache = self.__dict__.get("_essential")
        if cache is None:
            cache = _essential_pairs(self)
            object.__setattr__(self, "_essential", cache)
        return cache


def _integer_form(dist: np.ndarray):
    """Scale an exact matrix to int64 when denominators allow it, else None."""
    dens = {int(x.denominator) for x in dist.ravel()}
    lcm = 1
    for q in dens:
        lcm = lcm * q // math.gcd(lcm, q)
        if lcm > 1 << 30:
            return None
    ints = np.array([int(x * lcm) for x in dist.ravel()], dtype=object)
    if max(abs(int(v)) for v in ints) * 4 >= 1 << 62:
        return None
    return ints.astype(np.int64).reshape(dist.shape)


def _numeric_view(dist: np.ndarray, mode: str):
    """Return (array, tol) suitable for vectorised comparisons."""
    if mode == EXACT:
        ints = _integer_form(dist)
        if ints is not None:
            return ints, 0
        return dist, 0
    return dist, FLOAT_REL_TOL * float(dist.max() if dist.size else 0.0)


def _essential_pairs(K: MetricSpace) -> list[tuple[int, int]]:
    D, tol = _numeric_view(K.dist, K.mode)
    n = K.n
    out = []
    idx = np.arange(n)
    for u in range(n):
        # through[w, v] = D[u, w] + D[w, v]
        through = D[u][:, None] + D
        for v in range(u + 1, n):
            col = through[:, v]
            mask = (idx != u) & (idx != v)
            if not np.any(col[mask] <= D[u, v] + tol):
                out.append((u, v))
    return out


def validate_metric(labels, matrix, mode: str = FLOAT, coords=None) -> MetricSpace:
    """Check the metric axioms and return a :class:`MetricSpace`.

    Every violated axiom is collected before raising :class:`InvalidMetric`.
    """
    _num.check_mode(mode)
    labels = tuple(labels) if labels is not None else None
    try:
        D = _num.asarray(matrix, mode)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise BadSpec(message=f"unreadable distance matrix: {exc}") from None
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise BadSpec(message="distance matrix must be square")
    n = D.shape[0]
    if labels is None:
        labels = tuple(range(n))
    if len(labels) != n:
        raise BadSpec(message="labels and matrix size differ")
    if mode == FLOAT and not np.all(np.isfinite(D)):
        raise BadSpec(message="distance matrix has non-finite entries")
    if n < 2:
        raise InvalidMetric([("SINGLETON",)])

    V, tol = _numeric_view(D, mode)
    violations: list[tuple] = []
    for i in range(n):
        if V[i, i] != 0:
            violations.append(("NONZERO_DIAGONAL", i))
    for i, j in itertools.combinations(range(n), 2):
        if abs(V[i, j] - V[j, i]) > tol:
            violations.append(("ASYMMETRY", i, j))
        if V[i, j] < 0 or V[j, i] < 0:
            violations.append(("NEGATIVE", i, j))
        elif V[i, j] <= tol or V[j, i] <= tol:
            violations.append(("ZERO_OFF_DIAGONAL", i, j))
    for j in range(n):
        # slack[i, k] = V[i, j] + V[j, k] - V[i, k]
        slack = V[:, j][:, None] + V[j, :][None, :] - V
        bad = np.argwhere(slack < -tol)
        for i, k in bad:
            i, k = int(i), int(k)
            if i != k and i != j and k != j:
                violations.append(("TRIANGLE_VIOLATION", i, j, k))
    if violations:
        violations.sort(key=lambda v: (v[0] != "ASYMMETRY", v[0], v[1:]))
        raise InvalidMetric(violations)
    if mode == FLOAT:
        D = (D + D.T) / 2
        np.fill_diagonal(D, 0.0)
    if coords is not None:
        coords = np.asarray(coords)
    return MetricSpace(labels, D, mode, coords)


# ---------------------------------------------------------------- generators

def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    return f"{x:g}"


def _grid(spec: dict, mode: str) -> MetricSpace:
    d = int(spec.get("d", 2))
    if d < 1:
        raise BadSpec(message="grid dimension must be >= 1")
    if "h" in spec:
        h = Fraction(str(spec["h"])) if not isinstance(spec["h"], float) else Fraction(spec["h"]).limit_denominator(10**6)
        if h <= 0 or (1 / h).denominator != 1:
            raise BadSpec(message="grid mesh h must be 1/N for a positive integer N")
        N = int(1 / h)
    elif "n" in spec:
        N = int(spec["n"]) - 1
        if N < 1:
            raise BadSpec(message="grid needs at least 2 points per axis")
    else:
        raise BadSpec(message="grid spec needs 'h' or 'n'")
    p = spec.get("p", 2)
    p = math.inf if str(p) in ("inf", "infinity", "Infinity") else float(p)
    if not p >= 1:
        raise BadSpec(message="grid ground metric needs 1 <= p <= inf")
    ticks = list(itertools.product(range(N + 1), repeat=d))
    steps = np.array(ticks, dtype=np.int64)
    diff = np.abs(steps[:, None, :] - steps[None, :, :])
    labels = tuple("(" + ",".join(_fmt(Fraction(k, N)) for k in t) + ")" for t in ticks)
    if mode == EXACT:
        if p == 1:
            ints = diff.sum(axis=2)
        elif p == math.inf:
            ints = diff.max(axis=2)
        elif d == 1:
            ints = diff[:, :, 0]
        else:
            raise BadSpec(message="exact grid distances need p in {1, inf} (or d = 1)")
        D = np.empty(ints.shape, dtype=object)
        D.ravel()[:] = [Fraction(int(v), N) for v in ints.ravel()]
        coords = np.empty(steps.shape, dtype=object)
        coords.ravel()[:] = [Fraction(int(v), N) for v in steps.ravel()]
    else:
        fd = diff.astype(float) / N
        if p == math.inf:
            D = fd.max(axis=2)
        elif p == 1:
            D = fd.sum(axis=2)
        elif p == 2:
            D = np.sqrt((fd ** 2).sum(axis=2))
        else:
            D = (fd ** p).sum(axis=2) ** (1.0 / p)
        coords = steps.astype(float) / N
    return validate_metric(labels, D, mode, coords)


def _circle(spec: dict, mode: str) -> MetricSpace:
    if mode == EXACT:
        raise BadSpec(message="circle distances are irrational; use float mode")
    n = int(spec.get("n", 0))
    if n < 2:
        raise BadSpec(message="circle needs n >= 2")
    metric = spec.get("metric", "chordal")
    theta = 2 * math.pi * np.arange(n) / n
    k = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])
    k = np.minimum(k, n - k)
    ang = 2 * math.pi * k / n
    if metric == "chordal":
        D = 2 * np.sin(ang / 2)
    elif metric == "geodesic":
        D = ang
    else:
        raise BadSpec(message=f"unknown circle metric {metric!r}")
    coords = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    labels = tuple(f"e^{{2pi i*{j}/{n}}}" for j in range(n))
    return validate_metric(labels, D, FLOAT, coords)


def _snowflake(spec: dict, mode: str) -> MetricSpace:
    alpha = float(Fraction(str(spec.get("alpha", "nan")))) if not isinstance(spec.get("alpha"), float) else spec["alpha"]
    if not 0 < alpha < 1:
        raise BadSpec(message="snowflake exponent alpha must lie in (0, 1)")
    if mode == EXACT:
        raise BadSpec(message="snowflake distances are irrational; use float mode")
    base = spec.get("base")
    if base is None:
        raise BadSpec(message="snowflake spec needs a 'base' space")
    K = base if isinstance(base, MetricSpace) else generate_space(dict(base, mode=FLOAT) if base.get("kind") != "explicit" else base)
    D = np.asarray(K.dist, dtype=float) ** alpha
    return validate_metric(K.labels, D, FLOAT, K.coords)


def _union(spec: dict, mode: str) -> MetricSpace:
    parts = [p if isinstance(p, MetricSpace) else generate_space(dict(p, mode=p.get("mode", mode))) for p in spec.get("parts", [])]
    if len(parts) < 2:
        raise BadSpec(message="union needs at least two parts")
    c = _num.to_number(spec.get("cross"), mode)
    sizes = [P.n for P in parts]
    n = sum(sizes)
    D = _num.zeros((n, n), mode)
    D[:, :] = c
    labels = []
    off = 0
    for k, P in enumerate(parts):
        if 2 * c < P.diameter() or c <= 0:
            raise BadSpec(message="cross-distance too small for the triangle inequality",
                          part=k, cross=str(c), diameter=str(P.diameter()))
        block = _num.asarray(P.dist, mode)
        D[off:off + P.n, off:off + P.n] = block
        labels.extend(f"{k}:{l}" for l in P.labels)
        off += P.n
    return validate_metric(labels, D, mode)


def _graph(spec: dict, mode: str) -> MetricSpace:
    nodes = spec.get("nodes")
    if nodes is None:
        nodes = list(range(int(spec.get("n", 0))))
    nodes = list(nodes)
    n = len(nodes)
    if n < 2:
        raise BadSpec(message="graph needs at least two nodes")
    pos = {v: i for i, v in enumerate(nodes)}
    INF = None
    D = [[_num.zero(mode) if i == j else INF for j in range(n)] for i in range(n)]
    for edge in spec.get("edges", []):
        u, v, w = edge
        w = _num.to_number(w, mode)
        if not w > 0:
            raise BadSpec(message="edge weights must be positive")
        i, j = pos[u], pos[v]
        if D[i][j] is None or w < D[i][j]:
            D[i][j] = D[j][i] = w
    for k in range(n):
        for i in range(n):
            if D[i][k] is None:
                continue
            for j in range(n):
                if D[k][j] is None:
                    continue
                alt = D[i][k] + D[k][j]
                if D[i][j] is None or alt < D[i][j]:
                    D[i][j] = alt
    if any(x is None for row in D for x in row):
        raise BadSpec(message="graph is disconnected")
    return validate_metric(tuple(nodes), D, mode)


def _explicit(spec: dict, mode: str) -> MetricSpace:
    return validate_metric(spec.get("labels"), spec["dist"], spec.get("mode", mode), spec.get("coords"))


_GENERATORS = {
    "grid": _grid,
    "circle": _circle,
    "snowflake": _snowflake,
    "union": _union,
    "graph": _graph,
    "explicit": _explicit,
}


def generate_space(spec: dict) -> MetricSpace:
    """Build a space from a generator description (see README for fields)."""
    if not isinstance(spec, dict) or spec.get("kind") not in _GENERATORS:
        raise BadSpec(message=f"unknown generator kind {spec.get('kind') if isinstance(spec, dict) else spec!r}")
    mode = spec.get("mode", FLOAT)
    try:
        _num.check_mode(mode)
    except ValueError as exc:
        raise BadSpec(message=str(exc)) from None
    return _GENERATORS[spec["kind"]](spec, mode)


def line_net(points, mode: str = FLOAT) -> MetricSpace:
    """Points on the real line with the absolute-value metric."""
    xs = [_num.to_number(p, mode) for p in points]
    D = [[abs(a - b) for b in xs] for a in xs]
    coords = np.array([[x] for x in xs], dtype=object if mode == EXACT else float)
    return validate_metric(tuple(_fmt(x) for x in xs), D, mode, coords)


# -------------------------------------------------------------- property (Z)

class _Infeasible:
    """Sentinel for pairs that admit no third point at all."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "INFEASIBLE"

    def __lt__(self, other):
        raise TypeError("INFEASIBLE is not comparable")

    __le__ = __gt__ = __ge__ = __lt__

    def __reduce__(self):
        return (_Infeasible, ())


INFEASIBLE = _Infeasible()


@dataclass
class ZReport:
    """Per-ordered-pair minimal (Z) level ``values[t][tau]`` and witnesses."""

    values: list
    witness: list
    mode: str
    arithmetic: str
    worst_pair: tuple | None
    worst_value: object

    def value(self, t: int, tau: int):
        return self.values[t][tau]

    def max_deficiency(self, dist: np.ndarray | None = None, min_distance=None):
        """Largest level over pairs, optionally only pairs at least ``min_distance`` apart."""
        best = None
        n = len(self.values)
        for t in range(n):
            for tau in range(n):
                if t == tau:
                    continue
                if min_distance is not None and dist[t, tau] < min_distance:
                    continue
                v = self.values[t][tau]
                if v is INFEASIBLE:
                    return INFEASIBLE
                if best is None or v > best:
                    best = v
        return best

    def holds(self, eps) -> bool:
        worst = self.worst_value
        return worst is not INFEASIBLE and worst is not None and worst <= eps

    def to_dict(self) -> dict:
        enc = lambda v: (None if v is None else "INFEASIBLE" if v is INFEASIBLE
                         else _num.encode(v, self.arithmetic))
        return {
            "kind": "z",
            "mode": self.mode,
            "arithmetic": self.arithmetic,
            "values": [[enc(v) for v in row] for row in self.values],
            "witness": self.witness,
            "worst_pair": list(self.worst_pair) if self.worst_pair else None,
            "worst_value": enc(self.worst_value),
        }


def z_deficiency(K: MetricSpace, mode: str = "Z") -> ZReport:
    """Smallest level at which each ordered pair satisfies property (Z) (or (Z'))."""
    if mode not in ("Z", "Z'"):
        raise ValueError("mode must be 'Z' or \"Z'\"")
    n = K.n
    D = K.dist
    exact = K.mode == EXACT
    idx = np.arange(n)
    values = [[None] * n for _ in range(n)]
    witness = [[None] * n for _ in range(n)]
    if exact:
        big = 4 * K.diameter() / K.min_positive_distance() + 1
    else:
        big = np.inf
    for t in range(n):
        # rows: tau, columns: z
        excess = D[t][None, :] + D - D[t][:, None]
        near = np.where(D[t][None, :] <= D, D[t][None, :], D)
        mask = (idx[None, :] != t) & (idx[None, :] != idx[:, None])
        if mode == "Z'":
            mask &= D <= D[t][None, :]
        safe = np.where(mask, near, big if exact else 1.0)
        ratio = excess / safe
        if not exact:
            ratio = np.maximum(ratio, 0.0)
        ratio = np.where(mask, ratio, big)
        for tau in range(n):
            if tau == t:
                continue
            if not mask[tau].any():
                values[t][tau] = INFEASIBLE
                continue
            z = int(np.argmin(ratio[tau]))
            values[t][tau] = ratio[tau, z] if exact else float(ratio[tau, z])
            witness[t][tau] = z
    worst_pair, worst_value = None, None
    for t in range(n):
        for tau in range(n):
            if t == tau:
                continue
            v = values[t][tau]
            if v is INFEASIBLE:
                if worst_value is not INFEASIBLE:
                    worst_pair, worst_value = (t, tau), INFEASIBLE
            elif worst_value is not INFEASIBLE and (worst_value is None or v > worst_value):
                worst_pair, worst_value = (t, tau), v
    return ZReport(values, witness, mode, K.mode, worst_pair, worst_value)


# ---------------------------------------------------------- midpoint chains

@dataclass
class GeodesicChain:
    points: list
    slack: object
    depth: int
    success: bool
    failed_level: int | None = None
    level_defects: list = field(default_factory=list)

    def to_dict(self, mode: str = FLOAT) -> dict:
        return {
            "kind": "chain",
            "points": self.points,
            "slack": _num.encode(self.slack, mode),
            "depth": self.depth,
            "success": self.success,
            "failed_level": self.failed_level,
            "level_defects": [_num.encode(v, mode) for v in self.level_defects],
        }


def best_midpoint(K: MetricSpace, u: int, v: int):
    """Point minimising max(|d(u,z) - d(u,v)/2|, |d(z,v) - d(u,v)/2|); ties by index."""
    D = K.dist
    half = D[u, v] / 2
    defect = np.maximum(np.abs(D[u] - half), np.abs(D[:, v] - half))
    z = int(np.argmin(defect))
    return z, defect[z]


def geodesic_chain(K: MetricSpace, t: int, tau: int, depth: int, slack) -> GeodesicChain:
    """Dyadic approximate-midpoint refinement between ``t`` and ``tau``.

    Fails at the first level whose worst segment has no midpoint within ``slack``.
    """
    if t == tau:
        raise DaugavetError("SAME_POINT", "geodesic_chain needs distinct endpoints")
    if depth < 1:
        raise DaugavetError("BAD_DEPTH", "depth must be >= 1")
    chain = [t, tau]
    worst = _num.zero(K.mode)
    level_defects = []
    for level in range(1, depth + 1):
        new = [chain[0]]
        level_best = _num.zero(K.mode)
        for a, b in zip(chain, chain[1:]):
            z, defect = best_midpoint(K, a, b)
            level_best = max(level_best, defect)
            new.extend([z, b])
        chain = new
        level_defects.append(level_best)
        worst = max(worst, level_best)
        if level_best > slack:
            return GeodesicChain(chain, level_best, depth, False, level, level_defects)
    return GeodesicChain(chain, worst, depth, True, None, level_defects)
