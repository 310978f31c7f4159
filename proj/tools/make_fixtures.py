#!/usr/bin/env python3
"""Regenerates the synthetic datasets under data/.

fixture/       40 trading days, 6 assets in two sectors plus one macro series.
supply_chain/  a hub supplier feeding a 4-asset sector cluster, 2 bystanders.
"""
import json
import pathlib

import numpy as np

ROOT = pathlib.Path(__file__).resolve().parent.parent / "data"


def business_days(start, n):
    days = []
    d = np.datetime64(start)
    while len(days) < n:
        if np.is_busday(d):
            days.append(str(d))
        d += np.timedelta64(1, "D")
    return days


def write_prices(path, days, closes, volumes):
    with open(path, "w") as f:
        f.write("date,ticker,close,volume\n")
        for i, day in enumerate(days):
            for t in sorted(closes):
                f.write(f"{day},{t},{closes[t][i]:.4f},{volumes[t][i]}\n")


def simulate(rng, loadings, n, vol):
    # loadings: ticker -> {factor: beta}; factor returns are iid normal.
    factors = sorted({f for b in loadings.values() for f in b})
    fr = {f: rng.normal(0.0, 0.012, n) for f in factors}
    closes, volumes = {}, {}
    for t, betas in loadings.items():
        r = sum(b * fr[f] for f, b in betas.items()) + rng.normal(0.0, vol, n)
        r[0] = 0.0
        closes[t] = 100.0 * np.exp(np.cumsum(r))
        volumes[t] = rng.integers(800_000, 1_200_000, n)
    return closes, volumes


def fixture():
    out = ROOT / "fixture"
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(20240102)
    n = 40
    days = business_days("2024-01-02", n)
    loadings = {
        "AAA": {"mkt": 0.5, "tech": 1.0},
        "BBB": {"mkt": 0.5, "tech": 0.9},
        "CCC": {"mkt": 0.5, "tech": 0.7},
        "DDD": {"mkt": 0.5, "energy": 1.0},
        "EEE": {"mkt": 0.5, "energy": 0.8},
        "FFF": {"mkt": 0.4, "energy": 0.6, "tech": 0.3},
    }
    closes, volumes = simulate(rng, loadings, n, 0.006)
    write_prices(out / "prices.csv", days, closes, volumes)

    with open(out / "sentiment.csv", "w") as f:
        f.write("date,ticker,polarity\n")
        for i, day in enumerate(days):
            for t in sorted(loadings):
                if rng.random() < 0.5:
                    f.write(f"{day},{t},{rng.uniform(-0.6, 0.8):.3f}\n")

    rate = 4.0 + np.cumsum(rng.normal(0.0, 0.02, n))
    with open(out / "macro.csv", "w") as f:
        f.write("date,indicator_id,value\n")
        for i, day in enumerate(days):
            f.write(f"{day},RATE,{rate[i]:.4f}\n")

    with open(out / "knowledge.csv", "w") as f:
        f.write("src,dst,relation,weight,valid_from,valid_to\n")
        f.write("AAA,BBB,supplier_of,0.8,,\n")
        f.write("DDD,EEE,partner_of,0.6,,\n")
        f.write("OPEC,DDD,affects,0.7,,\n")
        f.write("OPEC,EEE,affects,0.5,2024-01-15,\n")
        f.write("CCC,FFF,competitor_of,0.4,,2024-01-31\n")

    emb = {
        "AAA": [0.9, 0.1, 0.0, 0.2],
        "BBB": [0.8, 0.2, 0.1, 0.1],
        "CCC": [0.7, 0.0, 0.3, 0.2],
        "DDD": [0.1, 0.9, 0.1, 0.0],
        "EEE": [0.0, 0.8, 0.2, 0.1],
        "FFF": [0.3, 0.6, 0.2, 0.3],
        "OPEC": [0.0, 0.7, 0.6, 0.0],
    }
    with open(out / "embeddings.txt", "w") as f:
        for k in sorted(emb):
            f.write(k + " " + " ".join(f"{x:.2f}" for x in emb[k]) + "\n")

    with open(out / "comentions.csv", "w") as f:
        f.write("date,entity_a,entity_b\n")
        pairs = [("AAA", "BBB"), ("DDD", "OPEC"), ("EEE", "OPEC"), ("CCC", "FFF"), ("BBB", "CCC")]
        for i, day in enumerate(days):
            a, b = pairs[i % len(pairs)]
            f.write(f"{day},{a},{b}\n")

    config = {
        "run_name": "fixture",
        "data": {
            "prices": "prices.csv",
            "sentiment": "sentiment.csv",
            "macro": "macro.csv",
            "knowledge": "knowledge.csv",
            "embeddings": "embeddings.txt",
            "comentions": "comentions.csv",
        },
        "history_window": 31,
        "k": 5,
        "eval": {"trials": 20, "seed": 7},
    }
    (out / "config.json").write_text(json.dumps(config, indent=2) + "\n")


def supply_chain():
    out = ROOT / "supply_chain"
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(77)
    n = 40
    days = business_days("2024-03-01", n)
    # HUB drives the sector through its own factor; the cluster members also
    # share a weaker sector factor. OUT1/OUT2 are unrelated bystanders.
    loadings = {
        "HUB": {"hub": 1.0, "mkt": 0.2},
        "SC1": {"hub": 0.8, "sector": 0.4, "mkt": 0.2},
        "SC2": {"hub": 0.7, "sector": 0.5, "mkt": 0.2},
        "SC3": {"hub": 0.6, "sector": 0.6, "mkt": 0.2},
        "SC4": {"hub": 0.5, "sector": 0.7, "mkt": 0.2},
        "OUT1": {"other": 1.0, "mkt": 0.2},
        "OUT2": {"other": 0.8, "mkt": 0.2},
    }
    closes, volumes = simulate(rng, loadings, n, 0.004)
    write_prices(out / "prices.csv", days, closes, volumes)
    with open(out / "knowledge.csv", "w") as f:
        f.write("src,dst,relation,weight\n")
        for t in ("SC1", "SC2", "SC3", "SC4"):
            f.write(f"HUB,{t},supplier_of,0.9\n")
    config = {
        "run_name": "supply_chain",
        "data": {"prices": "prices.csv", "knowledge": "knowledge.csv"},
        "history_window": 31,
        "graph_top_k": 2,
        "k": 5,
        "eval": {"trials": 20, "seed": 11, "shock": {"targets": ["HUB"]}},
    }
    (out / "config.json").write_text(json.dumps(config, indent=2) + "\n")


if __name__ == "__main__":
    fixture()
    supply_chain()
