#!/usr/bin/env python3
"""Desk-scale standalone-sale experiments.

Writes plot-ready CSVs: the optimum itself, a reservation-wage sweep, a
customer-base sweep, and a fixed-privacy sweep, all for the sentiment
service parameterization.
"""
import argparse
import csv
import os

from privmarket import (
    MarketSpec,
    QualityParams,
    SeparateScenario,
    ServiceSpec,
    gross_profit_separate,
    optimal_fee_fixed_privacy,
    optimize_separate,
)

S1 = QualityParams(0.822, 0.004, 2.813)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    print(f"wrote {path} ({len(rows)} rows)")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results", help="output directory")
    parser.add_argument("--points", type=int, default=50, help="sweep resolution")
    args = parser.parse_args()
    os.makedirs(args.out, exist_ok=True)

    base = SeparateScenario(service=ServiceSpec(quality=S1, n=100, c=0.2), market=MarketSpec(m=1000))
    opt = optimize_separate(base)
    write_csv(
        os.path.join(args.out, "standalone_optimum.csv"),
        ["r_star", "p_star", "profit", "interior"],
        [[opt.r_star, opt.p_star, opt.profit, opt.interior]],
    )

    rows = []
    for i in range(args.points):
        c = 0.01 + (0.5 - 0.01) * i / (args.points - 1)
        opt = optimize_separate(
            SeparateScenario(service=ServiceSpec(quality=S1, n=100, c=c), market=base.market)
        )
        cost = 100 * c * (1 - opt.r_star)
        rows.append([c, opt.r_star, opt.p_star, opt.profit, cost])
    write_csv(
        os.path.join(args.out, "wage_sweep.csv"),
        ["c", "r_star", "p_star", "profit", "data_cost"],
        rows,
    )

    rows = []
    for i in range(args.points):
        m = int(100 + (5000 - 100) * i / (args.points - 1))
        opt = optimize_separate(SeparateScenario(service=base.service, market=MarketSpec(m=m)))
        cost = 100 * 0.2 * (1 - opt.r_star)
        rows.append([m, opt.r_star, opt.p_star, opt.profit, cost])
    write_csv(
        os.path.join(args.out, "customer_sweep.csv"),
        ["M", "r_star", "p_star", "profit", "data_cost"],
        rows,
    )

    rows = []
    for i in range(args.points):
        r = i / (args.points - 1)
        fee = optimal_fee_fixed_privacy(base, r)
        profit = gross_profit_separate(base, r, fee)
        cost = 100 * 0.2 * (1 - r)
        rows.append([r, fee, profit, profit + cost, cost])
    write_csv(
        os.path.join(args.out, "fixed_privacy_sweep.csv"),
        ["r", "p_star", "profit", "revenue", "data_cost"],
        rows,
    )


if __name__ == "__main__":
    main()
