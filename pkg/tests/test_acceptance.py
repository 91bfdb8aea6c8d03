"""The twelve acceptance criteria, evaluated on the full grid.

Every criterion prints one PASS/FAIL line with its worst threshold ratio so
that the log of a plain ``pytest -v`` run doubles as the acceptance record.
"""

import pytest

from akenmotsu.selftest import CRITERIA, Grid, grid_params, run_criterion


@pytest.fixture(scope="module")
def grid():
    return Grid(samples=20, seed=42)


def _worst_ratio(rows):
    ratios = []
    for r in rows:
        c = r.check
        if c.above:
            ratios.append(c.threshold / c.residual if c.residual else float("inf"))
        else:
            ratios.append(c.residual / c.threshold)
    return max(ratios)


def test_grid_covers_every_dimension():
    params = grid_params()
    assert {p.n for p in params} == {1, 2, 3}
    assert {p.alpha for p in params} == {0.5, 1.0, 2.0}
    assert (1.0, 2.0) in {p.lambdas for p in params}


@pytest.mark.parametrize("k", sorted(CRITERIA), ids=[f"{k:02d}-{v}" for k, v in sorted(CRITERIA.items())])
def test_criterion(k, grid, capsys):
    rows = run_criterion(k, grid)
    assert rows, "criterion produced no rows"
    failed = [r for r in rows if not r.passed]
    with capsys.disabled():
        state = "PASS" if not failed else "FAIL"
        print(
            f"\ncriterion {k:2d} {CRITERIA[k]:<18} {state}  "
            f"rows={len(rows)} worst residual/threshold={_worst_ratio(rows):.2e}"
        )
    detail = "; ".join(
        f"{r.model} {r.check.name}: {r.check.residual:.3e} vs {r.check.threshold:.1e}"
        for r in failed[:5]
    )
    assert not failed, detail
