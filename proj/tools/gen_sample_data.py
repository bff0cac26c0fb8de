#!/usr/bin/env python3
"""Writes the synthetic East/West sample CSVs under data/.

The series are generated, not measured: a daily cosine price curve with small
day-to-day noise and a half-sine PV curve scaled by a per-day cloud factor.
"""
import argparse
import csv
import math
import random
from datetime import datetime, timedelta
from pathlib import Path

REGIONS = {
    "east": dict(stations=3, base=0.09, amp=0.035, peak_hour=17, pv=[30.0, 25.0, 20.0], seed=11),
    "west": dict(stations=2, base=0.11, amp=0.045, peak_hour=19, pv=[35.0, 25.0], seed=23),
}


def write_region(outdir, name, spec, start, days):
    rng = random.Random(spec["seed"])
    hours = days * 24
    stamps = [start + timedelta(hours=h) for h in range(hours)]
    day_shift = [rng.gauss(0.0, 0.004) for _ in range(days)]
    clouds = [[rng.uniform(0.55, 1.0) for _ in range(spec["stations"])] for _ in range(days)]

    with open(outdir / f"{name}_price.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["timestamp", "price_usd_per_kwh"])
        for h, ts in enumerate(stamps):
            hod = ts.hour
            p = spec["base"] + spec["amp"] * math.cos(2 * math.pi * (hod - spec["peak_hour"]) / 24)
            p += day_shift[h // 24] + rng.gauss(0.0, 0.002)
            w.writerow([ts.strftime("%Y-%m-%dT%H:%M"), f"{max(p, 0.01):.5f}"])

    with open(outdir / f"{name}_pv.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["timestamp", "station_id", "kwh"])
        for h, ts in enumerate(stamps):
            hod = ts.hour
            shape = math.sin(math.pi * (hod - 6) / 12) if 6 < hod < 18 else 0.0
            for i, peak in enumerate(spec["pv"]):
                kwh = peak * shape * clouds[h // 24][i]
                w.writerow([ts.strftime("%Y-%m-%dT%H:%M"), i, f"{kwh:.4f}"])


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data"))
    ap.add_argument("--days", type=int, default=30)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    start = datetime(2023, 6, 1)
    for name, spec in REGIONS.items():
        write_region(out, name, spec, start, args.days)


if __name__ == "__main__":
    main()
