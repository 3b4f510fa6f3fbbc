import json
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from lipdaugavet import (ConstantTooSmall, GlueSetup, LipFunction, PartialFunction,
                         PreconditionFailed, SetupViolation, adversarial_z_function,
                         generate_space, glue_flat, lip_norm, line_net, locality_profile,
                         mcshane_envelopes, nonlocality_witness)
from lipdaugavet.sampling import (GLUE_HYPOTHESES, random_extension, random_glue_setup,
                                  random_rational_space, stream)

from conftest import GOLDEN


def snowflake(h, alpha=0.5):
    return generate_space({"kind": "snowflake", "alpha": alpha, "base": {"kind": "grid", "d": 1, "h": h}})


# ------------------------------------------------------------------ lip_norm

def test_distance_function_has_norm_one():
    K = random_rational_space(stream(31, 0), 5)
    value, pair = lip_norm(LipFunction(K, K.dist[2]))
    assert value == 1 and pair == (0, 2)


def test_constant_function():
    K = line_net([0, 1, 2], "exact")
    assert lip_norm(LipFunction(K, [5, 5, 5])) == (0, None)


def test_first_coordinate_on_grid():
    G = generate_space({"kind": "grid", "d": 2, "h": "1/2", "p": 2})
    f = LipFunction(G, [float(c[0]) for c in G.coords])
    value, (i, j) = lip_norm(f)
    assert math.isclose(value, 1.0)
    assert G.coords[i][1] == G.coords[j][1] and math.isclose(G.d(i, j), 0.5)


# ------------------------------------------------------------------ McShane

def test_mcshane_forced_extension():
    K = line_net([0, 1, 2], "exact")
    up, lo = mcshane_envelopes(PartialFunction(K, [0, 2], [0, 2], 1))
    assert up[1] == lo[1] == 1


def test_mcshane_open_bracket():
    K = line_net([0, 1, 2], "exact")
    up, lo = mcshane_envelopes(PartialFunction(K, [0, 2], [0, 0], 1))
    assert (up[1], lo[1]) == (1, -1)


def test_mcshane_total_function():
    K = random_rational_space(stream(32, 0), 5)
    vals = K.dist[3] / 2
    up, lo = mcshane_envelopes(PartialFunction(K, range(5), vals, 1))
    assert list(up.values) == list(vals) == list(lo.values)


def test_mcshane_rejects_small_constant():
    K = line_net([0, 1, 2], "exact")
    with pytest.raises(ConstantTooSmall):
        mcshane_envelopes(PartialFunction(K, [0, 2], [0, 3], 1))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_mcshane_bracket_invariants(seed):
    rng = stream(33, seed)
    K = random_rational_space(rng, int(rng.integers(3, 7)))
    m = int(rng.integers(1, K.n))
    subset = [int(i) for i in rng.choice(K.n, size=m, replace=False)]
    L = Fraction(int(rng.integers(1, 9)), 4)
    vals = random_extension(K.subspace(subset), [0], [Fraction(0)], L, rng)
    up, lo = mcshane_envelopes(PartialFunction(K, subset, vals, L))
    assert all(a <= b for a, b in zip(lo.values, up.values))
    assert lip_norm(up)[0] <= L and lip_norm(lo)[0] <= L
    assert list(up.values[subset]) == list(vals) == list(lo.values[subset])
    for _ in range(3):
        g = random_extension(K, subset, vals, L, rng)
        assert lip_norm(LipFunction(K, g))[0] <= L
        assert all(lo.values <= g) and all(g <= up.values)


# ----------------------------------------------------------------- locality

def test_locality_plain_line():
    K = generate_space({"kind": "grid", "d": 1, "h": "1/256", "mode": "exact"})
    f = LipFunction(K, [c[0] for c in K.coords])
    rep = locality_profile(f, Fraction(1, 256) * 2)
    assert rep.deficiency == 0 and rep.is_local


def test_locality_snowflake_257():
    S = snowflake("1/256")
    rep = locality_profile(LipFunction(S, [float(c[0]) for c in S.coords]), 0.25)
    assert math.isclose(rep.best_quotient, math.sqrt(15 / 256), rel_tol=1e-12)
    assert math.isclose(rep.norm, 1.0, rel_tol=1e-12)
    assert abs(rep.deficiency - (1 - math.sqrt(15 / 256))) < 1e-12
    # exhaustive pair sweep
    x = [float(c[0]) for c in S.coords]
    sweep = max(abs(x[i] - x[j]) / S.d(i, j) for i in range(S.n) for j in range(i + 1, S.n) if S.d(i, j) < 0.25)
    assert math.isclose(sweep, rep.best_quotient, rel_tol=1e-12)


def test_locality_below_min_distance():
    K = line_net([0, 1, 3], "exact")
    rep = locality_profile(LipFunction(K, [0, 1, 2]), Fraction(1, 2))
    assert rep.deficiency == 1 and rep.best_pair is None and rep.note == "NO_CLOSE_PAIR"


def test_nonlocality_two_points():
    K = line_net([0, 1], "exact")
    rep = nonlocality_witness(K, Fraction(1, 2))
    assert rep.deficiency == 1
    f = rep.witness.values
    assert abs(f[1] - f[0]) == 1


def test_nonlocality_snowflake_65():
    S = snowflake("1/64")
    rep = nonlocality_witness(S, 0.25)
    assert rep.deficiency >= 0.75
    x = LipFunction(S, [float(c[0]) for c in S.coords])
    assert 1 - locality_profile(x, 0.25).best_quotient >= 0.75


def test_nonlocality_grid9_golden():
    G = generate_space({"kind": "grid", "d": 2, "n": 9, "p": 2})
    rep = nonlocality_witness(G, 0.5)
    gold = json.loads((GOLDEN / "nonlocality_grid9_scale_half.json").read_text())
    assert rep.deficiency <= 0.1
    assert abs(rep.deficiency - gold["deficiency"]) < 1e-9
    assert list(rep.norm_pair) == gold["pair"]
    assert lip_norm(rep.witness)[0] <= 1 + 1e-9


def _nonlocality_bruteforce(K, scale):
    # every pair tried, no pruning
    from lipdaugavet.lp import OPTIMAL, LpProblem, solve_lp
    n, best = K.n, None
    for p, q in K.pairs():
        if K.dist[p, q] < scale:
            continue
        rows, rhs = [], []
        for u in range(n):
            for v in range(n):
                if u == v:
                    continue
                row = [Fraction(0)] * n
                if u:
                    row[u - 1] += 1
                if v:
                    row[v - 1] -= 1
                if K.dist[u, v] < scale:
                    row[n - 1] = K.dist[u, v]
                rows.append(row)
                rhs.append(K.dist[u, v])
        e = [Fraction(0)] * n
        if q:
            e[q - 1] += 1
        if p:
            e[p - 1] -= 1
        c = [0] * (n - 1) + [1]
        rows.append(c)
        rhs.append(1)
        sol = solve_lp(LpProblem(c, rows, rhs, [e], [K.dist[p, q]], mode="exact"))
        if sol.status == OPTIMAL and (best is None or sol.value > best):
            best = sol.value
    return best


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10**6), c=st.fractions(Fraction(1, 4), 4))
def test_nonlocality_scale_invariant_and_exhaustive(seed, c):
    rng = stream(34, seed)
    K = random_rational_space(rng, 5)
    scale = K.min_positive_distance() * Fraction(int(rng.integers(5, 13)), 4)
    a = nonlocality_witness(K, scale)
    b = nonlocality_witness(K.scaled(c), scale * c)
    assert a.deficiency == b.deficiency
    if a.norm_pair is not None:
        assert a.deficiency == _nonlocality_bruteforce(K, scale)


# -------------------------------------------------------------- adversarial

def test_adversarial_two_points():
    K = line_net([0, 1], "exact")
    f = adversarial_z_function(K, 0, 1, Fraction(1, 10))
    assert list(f.values) == [Fraction(-1, 2), Fraction(1, 2)]
    assert lip_norm(f)[0] == 1


def test_adversarial_precondition_failure():
    K = line_net([0, Fraction(1, 2), 1], "exact")
    with pytest.raises(PreconditionFailed) as exc:
        adversarial_z_function(K, 0, 2, Fraction(1, 10))
    assert exc.value.details["point"] == 1


def test_adversarial_circle32():
    C = generate_space({"kind": "circle", "n": 32})
    f = adversarial_z_function(C, 0, 16, 0.05)
    assert math.isclose(lip_norm(f)[0], 1.0, rel_tol=1e-12)
    ties = 0
    for i in range(32):
        for j in range(i + 1, 32):
            q = abs(f[i] - f[j]) / C.d(i, j)
            # pairs next to an endpoint have quotient exactly 1 - eps; rounding may lift it
            if abs(q - 0.95) <= 1e-9:
                ties += 1
            elif q > 0.95:
                assert C.d(i, j) > 1.0


# --------------------------------------------------------------------- glue

def _line_glue(mode, delta="3/1000"):
    K = line_net(["0", "1", "1003/1000", "3/2"], mode)
    f = ["0", "9/10", "902/1000", "13/10"]
    return GlueSetup(K, [0], [1, 2, 3], [1, 3], "1/4", delta, LipFunction(K, f))


@pytest.mark.parametrize("mode", ["exact", "float"])
def test_glue_line_example(mode):
    res = glue_flat(_line_glue(mode))
    assert res.verified
    K = line_net(["0", "1", "1003/1000", "3/2"], "exact")
    f = [Fraction(0), Fraction(9, 10), Fraction(902, 1000), Fraction(13, 10)]
    sweep = max(abs(f[i] - f[j]) / K.d(i, j) for i in range(4) for j in range(i + 1, 4))
    assert res.worst_quotient == sweep if mode == "exact" else math.isclose(res.worst_quotient, sweep)
    assert sweep <= Fraction(9, 8)


def test_glue_delta_boundary():
    with pytest.raises(SetupViolation) as exc:
        glue_flat(_line_glue("exact", delta="1/256"))
    assert exc.value.hypothesis == "delta"


def test_glue_globally_lipschitz():
    K = line_net(["0", "1", "1003/1000", "3/2"], "exact")
    res = glue_flat(GlueSetup(K, [0], [1, 2, 3], [1, 3], "1/4", "3/1000", LipFunction(K, K.dist[0] / 2)))
    assert res.verified and res.worst_quotient <= 1


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_glue_random_valid(seed):
    res = glue_flat(random_glue_setup(stream(35, seed)))
    assert res.verified and res.worst_quotient <= res.bound


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), which=st.sampled_from(GLUE_HYPOTHESES))
def test_glue_random_invalid(seed, which):
    with pytest.raises(SetupViolation) as exc:
        glue_flat(random_glue_setup(stream(36, seed), violate=which))
    assert exc.value.hypothesis == which
