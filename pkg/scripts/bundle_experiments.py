#!/usr/bin/env python3
"""Desk-scale bundling experiments.

Covers the complement bundle (sentiment + activity) and the substitute
bundle (two sentiment engines): contingency sweeps, the wage sweep with
Shapley splits, and the bundle-vs-separate decisions.
"""
import argparse
import csv
import os

from privmarket import (
    BundleSpec,
    COMPLEMENT,
    CharacteristicFunction,
    MarketSpec,
    QualityParams,
    SUBSTITUTE,
    ServiceSpec,
    bundling_decision,
    optimize_bundle,
    shapley_allocation,
)

S1 = QualityParams(0.822, 0.004, 2.813)
S2 = QualityParams(0.856, 0.013, 1.861)
S3 = QualityParams(0.867, 0.001, 4.2)
MARKET = MarketSpec(m=1000)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    print(f"wrote {path} ({len(rows)} rows)")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results", help="output directory")
    parser.add_argument("--points", type=int, default=40, help="sweep resolution")
    args = parser.parse_args()
    os.makedirs(args.out, exist_ok=True)

    sentiment = ServiceSpec(quality=S1, n=100, c=0.2)
    sentiment_alt = ServiceSpec(quality=S2, n=100, c=0.2)
    activity = ServiceSpec(quality=S3, n=100, c=0.1)

    rows = []
    for i in range(args.points):
        gamma = 0.5 * i / (args.points - 1)
        bundle = BundleSpec(s1=sentiment, s2=activity, market=MARKET, gamma=gamma, kind=COMPLEMENT)
        opt = optimize_bundle(bundle)
        cost = 100 * (0.2 * (1 - opt.r1_star) + 0.1 * (1 - opt.r2_star))
        rows.append([gamma, opt.r1_star, opt.r2_star, opt.p_b_star, opt.profit, cost])
    write_csv(
        os.path.join(args.out, "complement_contingency_sweep.csv"),
        ["gamma", "r1_star", "r2_star", "p_b_star", "profit", "data_cost"],
        rows,
    )

    rows = []
    for i in range(args.points):
        gamma = -0.4 + (0.35) * i / (args.points - 1)
        bundle = BundleSpec(s1=sentiment, s2=sentiment_alt, market=MARKET, gamma=gamma, kind=SUBSTITUTE)
        opt = optimize_bundle(bundle)
        cost = 100 * (0.2 * (1 - opt.r1_star) + 0.2 * (1 - opt.r2_star))
        rows.append([gamma, opt.r1_star, opt.r2_star, opt.p_b_star, opt.profit, cost])
    write_csv(
        os.path.join(args.out, "substitute_contingency_sweep.csv"),
        ["gamma", "r1_star", "r2_star", "p_b_star", "profit", "data_cost"],
        rows,
    )

    rows = []
    for i in range(args.points):
        c1 = 0.05 + (0.4 - 0.05) * i / (args.points - 1)
        svc = ServiceSpec(quality=S1, n=100, c=c1)
        bundle = BundleSpec(s1=svc, s2=activity, market=MARKET, gamma=0.1, kind=COMPLEMENT)
        decision = bundling_decision(bundle)
        game = CharacteristicFunction.from_two_player(
            decision.separate_profits[0], decision.separate_profits[1],
            decision.bundle_profit, names=("S1", "S3"),
        )
        alloc = shapley_allocation(game)
        rows.append([
            c1,
            decision.separate_profits[0], decision.separate_profits[1],
            decision.bundle_profit, alloc["S1"], alloc["S3"],
        ])
    write_csv(
        os.path.join(args.out, "wage_sweep_sharing.csv"),
        ["c1", "alone_1", "alone_2", "bundle_profit", "shapley_1", "shapley_2"],
        rows,
    )

    rows = []
    for label, bundle in (
        ("complements", BundleSpec(s1=sentiment, s2=activity, market=MARKET, gamma=0.1, kind=COMPLEMENT)),
        ("substitutes", BundleSpec(s1=sentiment, s2=sentiment_alt, market=MARKET, gamma=-0.1, kind=SUBSTITUTE)),
    ):
        decision = bundling_decision(bundle)
        rows.append([
            label, decision.bundle_profit,
            decision.separate_profits[0], decision.separate_profits[1],
            decision.recommend_bundle,
        ])
    write_csv(
        os.path.join(args.out, "bundling_decisions.csv"),
        ["bundle", "bundle_profit", "alone_1", "alone_2", "recommend_bundle"],
        rows,
    )


if __name__ == "__main__":
    main()
