"""Independent per-hour oracle for the bundled period-1-like scenario.

Writes the scenario inputs (network CSV, TOU tariff, scenario config) and
the expected backtest report into crates/core/data/period1_like/. The
report values are computed hour by hour here, without the Rust crate, and
serialized in the same canonical JSON form the CLI emits (sorted keys,
two-space indent, 9 significant digits).

    python3 python/golden_oracle.py
"""

import json
import os
from datetime import datetime, timedelta, timezone

OUT = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "data", "period1_like")

NAME = "period1-like-hobbyist"
H0_GHS = 3.5e8
# difficulty matching H0 at ten-minute blocks, rounded
DIFFICULTY = 4.889e10
PRICE_USD = 250.0
REWARD_BTC = 25.0
FEES_BTC = 0.3
UNIT_GHS = 4730.0
UNIT_KW = 1.43
UNITS = 1
TZ_OFFSET_MIN = -300
BANDS = [
    {"start": 22, "end": 8, "usd_per_kwh": 0.10},
    {"start": 8, "end": 12, "usd_per_kwh": 0.30},
    {"start": 12, "end": 22, "usd_per_kwh": 0.50},
]
DAYS = 51  # 2015-08-01 through 2015-09-20 inclusive
LOCAL = timezone(timedelta(minutes=TZ_OFFSET_MIN))
START = datetime(2015, 8, 1, tzinfo=LOCAL)

CAPEX = {
    "asic_units": 1000.0 * UNITS,
    "smart_meter": 2000.0,
    "racks_networking": 0.0,
    "infrastructure": 0.0,
    "step_down": 0.0,
}
CAPEX["total"] = sum(CAPEX.values())


def band_price(local_hour, scale=1.0):
    for b in BANDS:
        s, e = b["start"], b["end"]
        inside = s <= local_hour < e if s < e else (local_hour >= s or local_hour < e)
        if inside:
            return b["usd_per_kwh"] * scale
    raise ValueError(local_hour)


def hour_rows(scale=1.0):
    """(price, revenue, cost, profit) for every hour of the window."""
    x = UNITS * UNIT_GHS
    # blocks the rig alone finds per hour
    blocks_per_hour = x * 1e9 * 3600.0 / (DIFFICULTY * 2.0**32)
    revenue = blocks_per_hour * PRICE_USD * (REWARD_BTC + FEES_BTC)
    rows = []
    for h in range(DAYS * 24):
        local = START + timedelta(hours=h)
        price = band_price(local.hour, scale)
        cost = UNITS * UNIT_KW * price
        rows.append((price, revenue, cost, revenue - cost))
    return rows


def sig9(x):
    if x == 0:
        return "0"
    mant, exp = f"{x:.8e}".split("e")
    exp = int(exp)
    neg = mant.startswith("-")
    digits = "".join(c for c in mant if c.isdigit()).rstrip("0") or "0"
    sign = "-" if neg else ""
    if not -6 <= exp <= 15:
        head, tail = digits[0], digits[1:]
        return f"{sign}{head}.{tail}e{exp}" if tail else f"{sign}{head}e{exp}"
    if exp < 0:
        return sign + "0." + "0" * (-exp - 1) + digits
    int_len = exp + 1
    if len(digits) <= int_len:
        return sign + digits + "0" * (int_len - len(digits))
    return sign + digits[:int_len] + "." + digits[int_len:]


def emit(v, indent=0):
    pad = "  " * (indent + 1)
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return sig9(v)
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, dict):
        if not v:
            return "{}"
        items = [pad + json.dumps(k) + ": " + emit(v[k], indent + 1) for k in sorted(v)]
        return "{\n" + ",\n".join(items) + "\n" + "  " * indent + "}"
    raise TypeError(type(v))


def report():
    rows = hour_rows()
    halved = hour_rows(0.5)
    n = len(rows)
    always = 0.0
    for r in rows:
        always += r[3]
    smart = 0.0
    on_prices = []
    for r in rows:
        if r[3] > 0:
            smart += r[3]
            on_prices.append(r[0])
    always_halved = 0.0
    for r in halved:
        always_halved += r[3]
    days = n / 24.0
    mean_smart = smart / days
    avg_all = sum(r[0] for r in rows) / n
    return {
        "name": NAME,
        "segment": "hobbyist",
        "hours": n,
        "profit_always_on": always,
        "profit_smart": smart,
        "multiplier": smart / always if always > 0 else None,
        "duty_cycle": len(on_prices) / n,
        "avg_effective_price": sum(on_prices) / len(on_prices) if on_prices else avg_all,
        "avg_effective_price_always_on": avg_all,
        "capex": CAPEX,
        "non_asic_fraction": (CAPEX["total"] - CAPEX["asic_units"]) / CAPEX["total"],
        "roi_days": CAPEX["total"] / mean_smart if mean_smart > 0 else None,
        "margin_increase_halved_electricity": (always_halved - always) / abs(always)
        if always != 0
        else None,
    }


def main():
    os.makedirs(os.path.join(OUT, "golden"), exist_ok=True)
    with open(os.path.join(OUT, "network.csv"), "w") as f:
        f.write("timestamp,hashrate_ghs,difficulty,price_usd,block_reward_btc,fees_btc_per_block\n")
        for d in range(DAYS):
            ts = (START + timedelta(days=d)).isoformat()
            f.write(f"{ts},{H0_GHS:.0f},{DIFFICULTY:.0f},{PRICE_USD:g},{REWARD_BTC:g},{FEES_BTC:g}\n")
    with open(os.path.join(OUT, "tariff.json"), "w") as f:
        json.dump({"kind": "tou", "tz_offset_minutes": TZ_OFFSET_MIN, "bands": BANDS}, f, indent=2)
        f.write("\n")
    scenario = {
        "name": NAME,
        "network_csv": "network.csv",
        "tariff": "tariff.json",
        "rig": {"unit_count": UNITS, "unit_hashrate_ghs": UNIT_GHS, "unit_power_kw": UNIT_KW},
        "segment": "hobbyist",
        "dwell": {"min_on_hours": 1, "min_off_hours": 1},
    }
    with open(os.path.join(OUT, "scenario.json"), "w") as f:
        json.dump(scenario, f, indent=2)
        f.write("\n")
    rep = report()
    with open(os.path.join(OUT, "golden", "report.json"), "w") as f:
        f.write(emit(rep) + "\n")
    on = round(rep["duty_cycle"] * rep["hours"])
    print(f"{rep['hours']} hours, {on} on, duty {rep['duty_cycle']:.6f}")


if __name__ == "__main__":
    main()
