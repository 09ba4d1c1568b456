"""Smoke test for the pytrunctail extension module.

Build and install first:  maturin build --release -m crates/py/Cargo.toml && pip install target/wheels/pytrunctail-*.whl
Run:  python python/smoke_test.py
"""

import json
import math
import os
import tempfile

import pytrunctail as tt


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b}"


def main():
    # three pairs, k = 1: log(4/2)
    s = tt.Sample([1.0, 2.0, 4.0], [2.0, 4.0, 8.0])
    est = tt.estimate(s, k=1)
    close(est.gamma1_hat, math.log(2.0), 1e-12)

    # untruncated data reduce to Hill under Lynden-Bell
    s = tt.Sample.complete([1.0, 2.0, 4.0, 8.0])
    close(tt.estimate(s, variant="lynden-bell", k=2).gamma1_hat, 1.5 * math.log(2.0), 1e-12)
    close(tt.hill([1.0, 2.0, 4.0, 8.0], 2), 1.5 * math.log(2.0), 1e-12)

    close(tt.asymptotic_variance(0.6, 1.4), 1.598625, 1e-9)

    model = tt.TruncationModel.burr_pair(0.25, 0.6, 1.4)
    assert 0.5 < model.p < 1.0
    sample = model.sample(1000, 7)
    assert len(sample) > 500 and all(x <= y for x, y in zip(sample.x, sample.y))
    est = tt.estimate(sample)
    assert est.ci is not None and est.ci[1] < est.gamma1_hat < est.ci[2]
    assert json.loads(est.json)["k"] == est.k

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "s.csv")
        sample.write_csv(path)
        again = tt.Sample.read_csv(path)
        assert again.x == sample.x and again.y == sample.y

    fit = tt.ProductLimit(sample)
    xs, c, df = fit.atoms()
    assert xs == sorted(xs) and df[-1] == 1.0 and all(v > 0 for v in c)

    d = tt.delta_moments(0.7)
    assert len(d) == 6 and d[0] > 0

    rows = tt.run_study(
        json.dumps({"cells": [{"p": 0.9, "gamma1": 0.6, "N": [300]}], "replicates": 40, "master_seed": 3}),
        threads=2,
    )
    assert len(rows) == 1 and rows[0]["completed"] > 0

    try:
        tt.mc_variance(0.6, 0.5, 1000, 64, 1)
    except tt.ModelViolation:
        pass
    else:
        raise AssertionError("expected ModelViolation")

    try:
        tt.Sample([5.0], [4.0])
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError")

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
