"""Seeded sampling of spaces, functions, operators and setups.

Every draw takes an explicit ``numpy.random.Generator``; :func:`stream`
derives independent Philox streams from ``(seed, *keys)`` so that case ``i``
of a suite does not depend on how many draws earlier cases made.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from . import _num
from ._num import EXACT
from .daugavet import DualFunctional, LinearOperator, eval_functional
from .lipschitz import GlueSetup, LipFunction, lip_norm, mcshane_lower, mcshane_upper
from .lp import dual_norm
from .metric import MetricSpace, validate_metric


def stream(seed: int, *keys: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, keys)])))


def _rational(rng, lo: int, hi: int, den: int) -> Fraction:
    return Fraction(int(rng.integers(lo, hi + 1)), den)


# ------------------------------------------------------------------ spaces

def random_rational_space(rng, n: int, den: int = 4, max_weight: int = 8) -> MetricSpace:
    """Shortest-path metric of a complete graph with random rational weights."""
    W = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            W[i][j] = W[j][i] = _rational(rng, 1, max_weight, den)
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if W[i][k] + W[k][j] < W[i][j]:
                    W[i][j] = W[i][k] + W[k][j]
    return validate_metric([str(i) for i in range(n)], W, EXACT)


def l1_space(points, mode: str = EXACT) -> MetricSpace:
    P = _num.asarray(points, mode)
    D = np.abs(P[:, None, :] - P[None, :, :]).sum(axis=2)
    labels = ["(" + ",".join(str(c) for c in p) + ")" for p in P]
    return validate_metric(labels, D, mode, coords=P)


# --------------------------------------------------------------- functions

def random_extension(K: MetricSpace, subset, values, L, rng, order=None) -> np.ndarray:
    """Extend an L-Lipschitz partial function one point at a time.

    Each new value is drawn from the McShane bracket of the points fixed so
    far (a rational grid of 9 positions in exact mode), so the result is
    L-Lipschitz on the whole space.
    """
    mode = K.mode
    L = _num.to_number(L, mode)
    fixed = [int(i) for i in subset]
    vals = list(_num.asarray(values, mode))
    rest = [i for i in range(K.n) if i not in set(fixed)]
    if order is None:
        rest = [rest[k] for k in rng.permutation(len(rest))]
    for z in rest:
        v = np.asarray(vals, dtype=object if mode == EXACT else float)
        hi = mcshane_upper(K, fixed, v, L)[z]
        lo = mcshane_lower(K, fixed, v, L)[z]
        lam = Fraction(int(rng.integers(0, 9)), 8) if mode == EXACT else float(rng.random())
        fixed.append(z)
        vals.append(lo + (hi - lo) * lam)
    out = _num.zeros((K.n,), mode)
    out[fixed] = vals
    return out


def normalized_anchor_function(K: MetricSpace, anchors, rng, den: int = 8) -> LipFunction:
    """Random values on ``anchors`` extended by McShane's upper formula, scaled to norm 1."""
    mode = K.mode
    anchors = [int(a) for a in anchors]
    while True:
        vals = _num.asarray([_rational(rng, -den, den, den) for _ in anchors], mode)
        if len(set(vals.tolist())) > 1:
            break
    sub = K.subspace(anchors)
    L = lip_norm(LipFunction(sub, vals))[0]
    g = mcshane_upper(K, anchors, vals, L)
    g[anchors] = vals
    return LipFunction(K, (g - g[0]) / L)


def random_functional(K: MetricSpace, rng, k: int = 4, den: int = 8) -> DualFunctional:
    """Zero-sum functional on ``k`` random points, scaled to dual norm 1."""
    mode = K.mode
    pts = [int(p) for p in rng.choice(K.n, size=min(k, K.n), replace=False)]
    while True:
        c = [_rational(rng, -den, den, den) for _ in pts]
        c[-1] = -sum(c[:-1])
        if any(c):
            break
    coeffs = _num.zeros((K.n,), mode)
    coeffs[pts] = _num.asarray(c, mode)
    x = DualFunctional(K, coeffs)
    return x * (_num.one(mode) / dual_norm(K, x, method="support"))


def rank1_on_anchors(K: MetricSpace, anchors, rng) -> LinearOperator:
    """x* = evaluation functional of two random anchors, g = normalized anchor function.

    Norm one.  The same seed gives the same operator data on every space that
    contains the anchors, which makes defects comparable across refinements.
    """
    anchors = [int(a) for a in anchors]
    i, j = rng.choice(len(anchors), size=2, replace=False)
    xs = eval_functional(K, anchors[int(i)], anchors[int(j)])
    g = normalized_anchor_function(K, anchors, rng)
    return LinearOperator.rank1(xs, g)


def label_coordinates(K: MetricSpace) -> list[tuple[Fraction, ...]]:
    return [tuple(Fraction(x) for x in str(lab).strip("()").split(",")) for lab in K.labels]


def rank1_interpolated(K: MetricSpace, rng, pieces=(1, 2, 4), den: int = 8) -> LinearOperator:
    """Signed rank-1 operator whose function is piecewise linear in the base coordinate.

    For nets of [0, 1] labelled by their base coordinate.  The number of
    pieces is drawn from ``pieces``; knots sit at multiples of 1/pieces and
    carry random values.  g is scaled to norm 1 in the space's own metric and
    x* is the evaluation functional of two knots.
    """
    mode = K.mode
    m = int(pieces[int(rng.integers(0, len(pieces)))])
    anchors = sorted(lattice_indices(K, Fraction(1, m)))
    pos = [c[0] for c in label_coordinates(K)]
    i, j = rng.choice(len(anchors), size=2, replace=False)
    while True:
        vals = [_rational(rng, -den, den, den) for _ in anchors]
        if len(set(vals)) > 1:
            break
    sign = 1 if rng.random() < 0.5 else -1
    xa = [float(pos[a]) for a in anchors]
    g = np.interp([float(p) for p in pos], xa, [float(v) for v in vals])
    if mode == EXACT:
        raise ValueError("interpolated operators are float-only")
    g = g - g[0]
    g = g / lip_norm(LipFunction(K, g))[0]
    return LinearOperator.rank1(eval_functional(K, anchors[int(i)], anchors[int(j)]), LipFunction(K, sign * g))


def random_matrix_operator(K: MetricSpace, rng, den: int = 4) -> LinearOperator:
    n = K.n - 1
    rows = [[_rational(rng, -den, den, den) for _ in range(n)] for _ in range(n)]
    return LinearOperator(K, _num.asarray(rows, K.mode) if n else _num.zeros((0, 0), K.mode))


def lattice_indices(K: MetricSpace, step) -> list[int]:
    """Indices of grid points whose coordinates are multiples of ``step``.

    Coordinates are read from the exact labels "(x,y,...)" that grid
    generators attach, so the answer does not depend on float rounding.
    """
    step = Fraction(step)
    out = []
    for i, lab in enumerate(K.labels):
        parts = [Fraction(x) for x in str(lab).strip("()").split(",")]
        if all((x / step).denominator == 1 for x in parts):
            out.append(i)
    return out


# ------------------------------------------------------------- glue setups

GLUE_HYPOTHESES = ("r", "delta", "partition", "separation", "net", "spacing", "lipschitz")


def random_glue_setup(rng, violate: str | None = None) -> GlueSetup:
    """Random setup for the flat gluing check in the exact l1 plane.

    With ``violate`` set, exactly that hypothesis is broken while every
    hypothesis checked before it still holds.
    """
    r = Fraction(1, int(rng.integers(4, 9)))
    dmax = r * r / 16
    delta = dmax * Fraction(int(rng.integers(1, 8)), 8)
    k = int(rng.integers(1, 4))
    gap = r + Fraction(int(rng.integers(0, 4)), 8) * r
    if violate == "spacing" and k == 1:
        k = 2
    centers = [(Fraction(2) + j * gap, Fraction(0)) for j in range(k)]
    if violate == "spacing":
        centers[1] = (centers[0][0] + r / 2, Fraction(0))

    def offset():
        return (delta * Fraction(int(rng.integers(-4, 5)), 8), delta * Fraction(int(rng.integers(-4, 5)), 8))

    cluster = []
    for j, (cx, cy) in enumerate(centers):
        for _ in range(int(rng.integers(0, 3))):
            dx, dy = offset()
            cluster.append((cx + dx, cy + dy, j))
    if violate == "net":
        cx, cy = centers[0]
        cluster.append((cx, cy + delta + r / 8, 0))
    nb = int(rng.integers(1, 5))
    bpts = [(_rational(rng, 0, 8, 8), _rational(rng, 0, 8, 8)) for _ in range(nb)]
    if violate == "separation":
        cx, cy = centers[0]
        bpts.append((cx - r / 2 - delta, cy))
    pts = bpts + list(centers) + [(x, y) for x, y, _ in cluster]
    # drop repeated points (they would make the space degenerate)
    seen, keep = set(), []
    for i, p in enumerate(pts):
        if p not in seen:
            seen.add(p)
            keep.append(i)
    nbp = len(bpts)
    B = [i for i in range(nbp) if i in keep]
    K = l1_space([pts[i] for i in keep], EXACT)
    pos = {old: new for new, old in enumerate(keep)}
    B = [pos[i] for i in B]
    Ct = [pos[nbp + j] for j in range(k)]
    C = [pos[i] for i in keep if i >= nbp]

    # f: random 1-Lipschitz on B + C~, then 1-Lipschitz inside each delta-ball
    base = B + Ct
    sub = K.subspace(base)
    fb = random_extension(sub, [0], [Fraction(0)], 1, rng)
    vals = _num.zeros((K.n,), EXACT)
    vals[base] = fb
    for t in Ct:
        ball = [int(i) for i in np.nonzero(np.asarray(K.dist[t] <= delta, dtype=bool))[0]]
        ball = [t] + [i for i in ball if i != t]
        bsub = K.subspace(ball)
        vals[ball] = random_extension(bsub, [0], [vals[t]], 1, rng, order="fixed")

    if violate == "r":
        r = Fraction(1, 4) + Fraction(1, int(rng.integers(8, 40)))
    elif violate == "delta":
        delta = dmax * Fraction(int(rng.integers(8, 17)), 8)
    elif violate == "partition":
        # either a point belongs to neither part, or C~ leaves C
        if rng.random() < 0.5:
            B = B[:-1]
        else:
            Ct = Ct + [B[0]]
    elif violate == "lipschitz":
        t = Ct[0]
        vals[B[0]] = vals[t] + 2 * K.dist[B[0], t]
    return GlueSetup(K, B, C, Ct, r, delta, LipFunction(K, vals))
