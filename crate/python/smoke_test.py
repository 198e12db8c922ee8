"""Smoke test for the rzchart extension module.

Build the module first, e.g. `maturin develop -m crates/py/Cargo.toml`, or
copy target/release/librzchart.so next to this file as rzchart.so.
"""

import csv
import io
import json
import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

import rzchart

DATA = Path(__file__).resolve().parent.parent / "crates" / "core" / "tests" / "data"


def check_distribution():
    dist = rzchart.RatioDistribution(0.02, 0.01, 2.0, 0.8)
    median = dist.omega * dist.gamma_y / dist.gamma_x
    assert abs(dist.cdf(median) - 0.5) < 1e-12
    for p in (1e-4, 0.1, 0.5, 0.9, 1 - 1e-4):
        assert abs(dist.cdf(dist.idf(p)) - p) < 1e-9
    assert dist.pdf(median) > 0


def check_design():
    chart = rzchart.Chart.design("upper", 5, 0.02, 0.01, 0.8, 15)
    assert abs(chart.ucl - 1.01421) < 5e-4, chart.ucl
    assert chart.lcl == 0.0
    assert abs(rzchart.tarl(chart.alpha0, 15) - 15) < 1e-9
    assert abs(chart.tarl1(1.0) - 15) < 1e-9
    assert chart.tarl1(1.05) < chart.tarl1(1.01) < 15
    again = rzchart.Chart.from_json(chart.to_json())
    assert again.ucl == chart.ucl
    lower = rzchart.Chart.design("lower", 5, 0.2, 0.2, 0.4, 10)
    assert math.isinf(lower.ucl)
    assert abs(rzchart.solve_alpha_for_tarl0(10) - 0.0192520621926166) < 1e-12
    return chart


def check_errors():
    for bad in (lambda: rzchart.Chart.design("upper", 5, 0.02, 0.01, 1.0, 15),
                lambda: rzchart.Chart.design("sideways", 5, 0.02, 0.01, 0.8, 15),
                lambda: rzchart.tarl(1.5, 10)):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")
    try:
        rzchart.Chart.design("upper", 1, 0.5, 0.5, 0.0, 1000)
    except rzchart.DomainError:
        pass
    else:
        raise AssertionError("expected DomainError")


def check_monitor(chart):
    rows = list(csv.DictReader(open(DATA / "muesli_run.csv")))
    run = rzchart.Monitor(chart)
    for k in range(1, 16):
        unit = [r for r in rows if int(r["inspection"]) == k]
        run.ingest([float(r["x"]) for r in unit], [float(r["y"]) for r in unit], label=unit[0]["label"])
    assert run.status == "completed", run.status
    assert run.remaining == 0
    assert run.signals == [11, 12], run.signals
    assert [r.index for r in run.records if r.signal] == [11, 12]
    try:
        run.ingest([1.0] * 5, [1.0] * 5)
    except rzchart.RunCompletedError:
        pass
    else:
        raise AssertionError("expected RunCompletedError")
    restored = rzchart.Monitor.from_json(run.to_json())
    assert restored.signals == run.signals
    fresh = run.reset()
    assert fresh.remaining == 15 and fresh.id != run.id
    assert json.loads(fresh.to_json())["parent_id"] == run.id


def check_tables_and_simulation(chart):
    limits = list(csv.DictReader(io.StringIO(rzchart.limits_table([10]))))
    assert len(limits) == 100
    shift = list(csv.DictReader(io.StringIO(rzchart.tarl_table([10], correlation_shift=True))))
    assert {r["chart"] for r in shift} == {"lower", "upper"}
    mean, se = chart.simulate(1.01, replications=20000, seed=5)
    assert abs(mean - chart.tarl1(1.01)) <= 3 * se, (mean, se)
    assert chart.simulate(1.01, replications=20000, seed=5) == (mean, se)


def main():
    check_distribution()
    chart = check_design()
    check_errors()
    check_monitor(chart)
    check_tables_and_simulation(chart)
    print(f"rzchart {rzchart.__version__}: python smoke test passed")


if __name__ == "__main__":
    main()
