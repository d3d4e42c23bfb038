"""Exercise the Python bindings.

    pip install -e . --no-build-isolation
    python3 python/smoke_test.py
"""

import math
import os

import minegrid

HERE = os.path.dirname(os.path.abspath(__file__))
SCENARIO = os.path.join(HERE, "..", "crates", "core", "data", "period1_like", "scenario.json")
GOLDEN = os.path.join(HERE, "..", "crates", "core", "data", "period1_like", "golden", "report.json")
START = 1438387200  # 2015-08-01T00:00:00Z


def close(a, b, rel=1e-9):
    return math.isclose(a, b, rel_tol=rel)


def main():
    snap = minegrid.NetworkSnapshot(START, 3.5e8, 4.889e10, 250.0, 25.0, 0.3)
    rig = minegrid.MinerRig(7)
    assert rig.hashrate_ghs == 7 * 4730.0
    assert close(rig.total_power_kw, 10.01)

    daily = minegrid.revenue_per_day(rig, snap)
    assert close(24 * minegrid.revenue_per_hour(rig, snap), daily)
    blocks = minegrid.expected_blocks_per_day(rig.hashrate_ghs, snap.difficulty)
    assert close(blocks * snap.block_value_usd(), daily)
    assert close(minegrid.cost_per_hour(10.0, 0.1), 1.0)

    tou = minegrid.Tariff.time_of_use([(22, 8, 0.1), (8, 12, 0.3), (12, 22, 0.5)], -300)
    assert tou.price_at(START) == 0.5  # 19:00 local
    profit = minegrid.hourly_profit(rig, snap, tou, START)
    assert close(profit, minegrid.revenue_per_hour(rig, snap) - 10.01 * 0.5)

    profits = [1.0, -0.5, 2.0, -3.0, 0.25, -0.1]
    greedy = minegrid.greedy_schedule(profits)
    assert greedy == [p > 0 for p in profits]
    constrained = minegrid.constrained_schedule(profits, 2, 2)
    assert minegrid.schedule_profit(profits, constrained) <= minegrid.schedule_profit(profits, greedy)
    assert minegrid.duty_cycle(greedy) == 0.5

    result = minegrid.clear_day_ahead([("A", 100, 20), ("B", 50, 35), ("C", 80, 50)], 170)
    assert result["clearing_price"] == 50
    assert result["dispatched"] == [["A", 100], ["B", 50], ["C", 20]]

    assert minegrid.classify(10.0) == "hobbyist"
    assert minegrid.classify(10.01) == "semi_professional"
    assert minegrid.unit_price(30) == 995.0
    capex = minegrid.capex("hobbyist", 7)
    assert capex["total"] == 9000
    assert abs(capex["non_asic_fraction"] - 0.222) < 1e-3

    plan = minegrid.fleet_plan(0.05, 1e9, 3e4, "hobbyist")
    assert plan["miner_count"] == 1667
    assert close(minegrid.network_share(5e7, 1e9), 0.05)
    assert minegrid.roi_days(9000, 0.0) is None
    assert minegrid.roi_days(9000, 100.0) == 90.0

    report = minegrid.backtest(SCENARIO)
    assert report["hours"] == 1224
    with open(GOLDEN) as f:
        assert minegrid.backtest_json(SCENARIO) == f.read()

    for call, exc in [
        (lambda: minegrid.MinerRig(0), ValueError),
        (lambda: minegrid.Tariff.fixed(-1.0), ValueError),
        (lambda: minegrid.capex("hobbyist", 8), ValueError),
        (lambda: minegrid.clear_day_ahead([("A", 1, 1)], 5), ValueError),
        (lambda: minegrid.backtest("no/such/config.json"), OSError),
    ]:
        try:
            call()
        except exc:
            pass
        else:
            raise AssertionError(f"expected {exc.__name__}")

    print(f"ok: multiplier {report['multiplier']:.3f}, duty {report['duty_cycle']:.3f}")


if __name__ == "__main__":
    main()
