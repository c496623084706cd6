#!/usr/bin/env python3
"""Writes the synthetic fixture data set under fixtures/.

The data are invented: 800 entities in 1985, consolidated by preferential
acquisition through 2013, with balance sheets that grow with a GDP index plus
whatever they absorb. Deterministic for a given --seed.
"""

import argparse
import datetime as dt
import math
import random
from pathlib import Path

FIRST_YEAR = 1985
LAST_YEAR = 2013
PANEL_FIRST = 1992


def generate(seed: int, entities: int):
    rng = random.Random(seed)
    ids = [f"B{i:04d}" for i in range(entities)]
    live = {i: 0 for i in ids}  # id -> ancestor count
    balance = {i: math.exp(rng.gauss(6.0, 1.4)) for i in ids}
    gdp = {}
    level = 100.0
    events = []
    panel = []
    for year in range(FIRST_YEAR, LAST_YEAR + 1):
        growth = 1.0 + rng.gauss(0.045, 0.015)
        level *= growth
        gdp[year] = level
        for i in live:
            balance[i] *= growth * math.exp(rng.gauss(0.0, 0.05))
        # Acquirers drawn with weight (1 + ancestry)^1.5, targets uniformly.
        n_mergers = max(0, int(rng.gauss(0.035, 0.01) * len(live)))
        days = sorted(rng.randrange(365) for _ in range(n_mergers))
        for offset in days:
            if len(live) < 2:
                break
            pool = list(live)
            weights = [(1 + live[i]) ** 1.5 for i in pool]
            acquirer = rng.choices(pool, weights)[0]
            target = rng.choice(pool)
            while target == acquirer:
                target = rng.choice(pool)
            day = dt.date(year, 1, 1) + dt.timedelta(days=offset)
            events.append((day.isoformat(), acquirer, target))
            live[acquirer] += live.pop(target) + 1
            balance[acquirer] += balance.pop(target)
        if year >= PANEL_FIRST:
            for i in sorted(live):
                panel.append((i, year, balance[i]))
    events.sort()
    return events, panel, gdp, live


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=1985)
    ap.add_argument("--entities", type=int, default=800)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "fixtures")
    args = ap.parse_args()

    events, panel, gdp, live = generate(args.seed, args.entities)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)

    # Two acquirers appear under a former name; aliases.csv maps them back.
    renamed = {"B0007": "Old Seventh Savings", "B0042": "Forty-Two Trust"}
    with open(out / "events.csv", "w", newline="\n") as f:
        f.write("date,acquirer_id,target_id\n")
        for date, acquirer, target in events:
            if acquirer in renamed and date < "1995-01-01":
                acquirer = renamed[acquirer]
            f.write(f"{date},{acquirer},{target}\n")
    with open(out / "aliases.csv", "w", newline="\n") as f:
        f.write("alias,canonical\n")
        for canonical, alias in sorted(renamed.items()):
            f.write(f"{alias},{canonical}\n")
    with open(out / "panel.csv", "w", newline="\n") as f:
        f.write("entity_id,year,balance\n")
        for entity, year, value in panel:
            f.write(f"{entity},{year},{value:.6g}\n")
    with open(out / "gdp.csv", "w", newline="\n") as f:
        f.write("year,gdp\n")
        for year, value in sorted(gdp.items()):
            f.write(f"{year},{value:.6g}\n")
    with open(out / "counts.csv", "w", newline="\n") as f:
        f.write("entity_id,ancestry\n")
        for entity in sorted(live):
            f.write(f"{entity},{live[entity]}\n")
    print(f"{len(events)} events, {len(panel)} panel rows, {len(live)} survivors -> {out}")


if __name__ == "__main__":
    main()
