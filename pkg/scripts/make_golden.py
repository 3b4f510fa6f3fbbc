"""Regenerate the committed golden files under tests/golden.

Run from the repository root:  python scripts/make_golden.py
Every value is produced by the library itself (exact LPs where the metric is
rational); the tests then pin future runs to these numbers.
"""

from __future__ import annotations

import sys
from pathlib import Path

from lipdaugavet.cli import sweep_csv, sweep_rows
from lipdaugavet.daugavet import LinearOperator, daugavet_check, eval_functional
from lipdaugavet.io import dumps
from lipdaugavet.lipschitz import LipFunction, nonlocality_witness
from lipdaugavet.metric import generate_space

GOLDEN = Path(__file__).resolve().parent.parent / "tests" / "golden"
SEED = 0
COUNT = 100

SWEEPS = {
    "sweep_grid_h4_l2.csv": ({"kind": "grid", "d": 2, "h": "1/4", "p": 2, "mode": "float"}, "anchors"),
    "sweep_grid_h8_l2.csv": ({"kind": "grid", "d": 2, "h": "1/8", "p": 2, "mode": "float"}, "anchors"),
    "sweep_grid_h16_l2.csv": ({"kind": "grid", "d": 2, "h": "1/16", "p": 2, "mode": "float"}, "anchors"),
    "sweep_grid_h4_l1_exact.csv": ({"kind": "grid", "d": 2, "h": "1/4", "p": 1, "mode": "exact"}, "anchors"),
    "sweep_snowflake65.csv": ({"kind": "snowflake", "alpha": 0.5,
                               "base": {"kind": "grid", "d": 1, "h": "1/64"}}, "interpolated"),
}


def corner_report(p: int, mode: str) -> dict:
    G = generate_space({"kind": "grid", "d": 2, "n": 5, "p": p, "mode": mode})
    t1, t2 = G.index("(0,0)"), G.index("(1,1)")
    g = LipFunction(G, G.dist[t1])
    T = LinearOperator.rank1(eval_functional(G, t1, t2), g)
    out = daugavet_check(T).to_dict()
    out["space"] = {"kind": "grid", "d": 2, "n": 5, "p": p, "mode": mode}
    return out


def main() -> int:
    GOLDEN.mkdir(parents=True, exist_ok=True)
    for name, (spec, family) in SWEEPS.items():
        K = generate_space(spec)
        rows = sweep_rows(K, family, SEED, COUNT)
        (GOLDEN / name).write_text(sweep_csv(rows, K.mode))
        print(name, max(r["defect"] for r in rows), file=sys.stderr)
    (GOLDEN / "daugavet_corner_grid5_l2.json").write_text(dumps(corner_report(2, "float")))
    (GOLDEN / "daugavet_corner_grid5_l1_exact.json").write_text(dumps(corner_report(1, "exact")))
    G = generate_space({"kind": "grid", "d": 2, "n": 9, "p": 2, "mode": "float"})
    rep = nonlocality_witness(G, 0.5)
    (GOLDEN / "nonlocality_grid9_scale_half.json").write_text(dumps(
        {"deficiency": float(rep.deficiency), "pair": list(rep.norm_pair)}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
