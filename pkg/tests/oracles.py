"""Independent brute-force oracles used only by the tests.

None of these call the LP code: the unit ball of Lip0(K) is enumerated
through its vertices, which for |K| = n are the functions obtained from a
spanning tree of the complete graph by making every tree edge tight with a
chosen sign.
"""

from __future__ import annotations

import itertools

def _spanning_trees(n: int):
    edges = list(itertools.combinations(range(n), 2))
    for tree in itertools.combinations(edges, n - 1):
        parent = list(range(n))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        ok = True
        for u, v in tree:
            ru, rv = find(u), find(v)
            if ru == rv:
                ok = False
                break
            parent[ru] = rv
        if ok:
            yield tree


def ball_vertices(dist) -> list[tuple]:
    """All vertices of {f : f(0) = 0, |f(i) - f(j)| <= d(i, j)} (exact when dist is rational)."""
    D = [[dist[i][j] for j in range(len(dist))] for i in range(len(dist))]
    n = len(D)
    out = set()
    for tree in _spanning_trees(n):
        adj = {i: [] for i in range(n)}
        for u, v in tree:
            adj[u].append(v)
            adj[v].append(u)
        for signs in itertools.product((1, -1), repeat=n - 1):
            sign = dict(zip(tree, signs))
            f = [None] * n
            f[0] = 0 * D[0][1]
            stack = [0]
            while stack:
                a = stack.pop()
                for b in adj[a]:
                    if f[b] is None:
                        s = sign[(a, b)] if (a, b) in sign else -sign[(b, a)]
                        f[b] = f[a] + s * D[a][b]
                        stack.append(b)
            if all(abs(f[i] - f[j]) <= D[i][j] for i in range(n) for j in range(i + 1, n)):
                out.add(tuple(f))
    return sorted(out)


def lip_seminorm(dist, f):
    n = len(f)
    return max(abs(f[i] - f[j]) / dist[i][j] for i in range(n) for j in range(i + 1, n))


def apply_operator(rows, f):
    """(Tf)(p) for base-pointed matrix rows acting on f - f(0)."""
    g = [f[i] - f[0] for i in range(1, len(f))]
    return [0 * f[0]] + [sum(r[j] * g[j] for j in range(len(g))) for r in rows]


def id_plus_norm(dist, rows):
    """max over ball vertices of ||f + Tf||; the map is convex so vertices suffice."""
    best = None
    for f in ball_vertices(dist):
        tf = apply_operator(rows, f)
        v = lip_seminorm(dist, [a + b for a, b in zip(f, tf)])
        best = v if best is None or v > best else best
    return best


def dual_norm(dist, coeffs):
    return max(sum(c * x for c, x in zip(coeffs, f)) for f in ball_vertices(dist))


def z_level(dist, t, tau, variant="Z"):
    """Direct loop over z; None when no admissible z exists."""
    n = len(dist)
    best, arg = None, None
    for z in range(n):
        if z in (t, tau):
            continue
        if variant == "Z'" and not dist[z][tau] <= dist[z][t]:
            continue
        v = (dist[t][z] + dist[z][tau] - dist[t][tau]) / min(dist[z][t], dist[z][tau])
        if best is None or v < best:
            best, arg = v, z
    return best, arg


def as_lists(K):
    return [[K.dist[i, j] for j in range(K.n)] for i in range(K.n)]
