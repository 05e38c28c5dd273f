"""Regenerate the golden fixtures for the Node bindings.

Runs the installed CLI exactly the way the bindings do (records
document written to a scratch file) and freezes each case's inputs
together with the full expected output into
frontend/tests/fixtures/golden.json.  The binding tests replay the
inputs and compare with strict equality, so rerun this after any
change that moves numbers.

    python scripts/make_binding_fixtures.py
    BENCHVAR_CLI=/some/other/benchvar python scripts/make_binding_fixtures.py
"""

import argparse
import json
import os
import pathlib
import random
import subprocess
import tempfile

# Fixture option keys use the binding's camelCase names; this table maps
# them onto CLI flags so the generator and the binding build identical
# invocations.
FLAGS = {
    "seed": "--seed",
    "gamma": "--gamma",
    "delta": "--delta",
    "ciLevel": "--ci-level",
    "resamples": "--resamples",
    "tiePolicy": "--tie-policy",
    "alpha": "--alpha",
    "beta": "--beta",
    "level": "--level",
}


def run_records(cli, subcommand, args, workdir):
    out_path = pathlib.Path(workdir) / "out.json"
    argv = [cli, subcommand, *args, "--format", "records", "--out", str(out_path)]
    proc = subprocess.run(argv, capture_output=True, text=True)
    if proc.returncode != 0:
        raise SystemExit(f"{' '.join(argv)} failed:\n{proc.stderr}")
    with open(out_path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def option_args(options):
    args = []
    for key, value in options.items():
        if isinstance(value, str):
            rendered = value
        elif key in ("seed", "resamples"):
            rendered = str(int(value))
        else:
            rendered = repr(float(value))
        args.extend([FLAGS[key], rendered])
    return args


def write_csv(workdir, name, header, rows):
    path = pathlib.Path(workdir) / name
    lines = [header] + rows + [""]
    path.write_text("\n".join(lines), encoding="utf-8")
    return str(path)


def expect(condition, message):
    if not condition:
        raise SystemExit(f"fixture sanity check failed: {message}")


def compare_row(cli, workdir, pairs, options):
    csv_path = write_csv(workdir, "pairs.csv", "value_a,value_b",
                         [f"{a!r},{b!r}" for a, b in pairs])
    doc = run_records(cli, "compare", ["--pairs", csv_path, *option_args(options)], workdir)
    (row,) = doc["rows"]
    return row


def bootstrap_row(cli, workdir, values, options):
    csv_path = write_csv(workdir, "values.csv", "value", [repr(v) for v in values])
    doc = run_records(cli, "bootstrap-ci", ["--values", csv_path, *option_args(options)], workdir)
    (row,) = doc["rows"]
    return row


def make_cases(cli, workdir):
    rng = random.Random(20240823)
    cases = []

    # Paired scores with overlap: the interesting middle of the verdict range.
    interleaved = [
        (round(rng.normalvariate(0.78, 0.020), 6), round(rng.normalvariate(0.75, 0.025), 6))
        for _ in range(24)
    ]
    row = compare_row(cli, workdir, interleaved, {"seed": 9})
    cases.append({"name": "compare-interleaved-defaults", "fn": "comparePab",
                  "pairs": [list(p) for p in interleaved],
                  "options": {"seed": 9}, "expected": row})

    prob = compare_row(cli, workdir, interleaved, {"seed": 0})["p_a_beats_b"]
    cases.append({"name": "prob-outperform-default-seed", "fn": "probOutperform",
                  "pairs": [list(p) for p in interleaved],
                  "options": {}, "expected": prob})

    # Near-tied race with every comparison option overridden at once.
    tight = [
        (round(0.71 + rng.normalvariate(0, 0.004), 6),
         round(0.71 + rng.normalvariate(0, 0.004), 6))
        for _ in range(16)
    ]
    overrides = {"seed": 123, "gamma": 0.6, "delta": 0.005, "ciLevel": 0.9,
                 "resamples": 500, "tiePolicy": "strict"}
    row = compare_row(cli, workdir, tight, overrides)
    cases.append({"name": "compare-tight-race-overrides", "fn": "comparePab",
                  "pairs": [list(p) for p in tight],
                  "options": overrides, "expected": row})

    # Fully separated scores: the verdict everyone hopes to report.
    clear = [
        (round(rng.normalvariate(0.90, 0.010), 6), round(rng.normalvariate(0.60, 0.015), 6))
        for _ in range(30)
    ]
    row = compare_row(cli, workdir, clear, {"seed": 7})
    expect(row["verdict"] == "significant_and_meaningful",
           f"clear-win verdict was {row['verdict']}")
    cases.append({"name": "compare-clear-win-30", "fn": "comparePab",
                  "pairs": [list(p) for p in clear],
                  "options": {"seed": 7}, "expected": row})

    # 28 wins in 40 with a demanding gamma: certain but not meaningful,
    # the third verdict the bindings must round-trip.
    solid = []
    for i in range(40):
        a, b = (0.8, 0.6) if i % 10 < 7 else (0.6, 0.8)
        solid.append((round(a + rng.normalvariate(0, 0.01), 6),
                      round(b + rng.normalvariate(0, 0.01), 6)))
    row = compare_row(cli, workdir, solid, {"seed": 31, "gamma": 0.9})
    expect(row["verdict"] == "significant_not_meaningful",
           f"solid-not-meaningful verdict was {row['verdict']}")
    cases.append({"name": "compare-solid-not-meaningful", "fn": "comparePab",
                  "pairs": [list(p) for p in solid],
                  "options": {"seed": 31, "gamma": 0.9}, "expected": row})

    # Exact ties stress the tie policy; strict scores them as losses for A.
    tied = [(0.5, 0.5), (0.6, 0.5), (0.5, 0.5), (0.7, 0.6), (0.5, 0.6), (0.4, 0.4)]
    prob = compare_row(cli, workdir, tied, {"seed": 4, "tiePolicy": "strict"})["p_a_beats_b"]
    cases.append({"name": "prob-outperform-strict-ties", "fn": "probOutperform",
                  "pairs": [list(p) for p in tied],
                  "options": {"seed": 4, "tiePolicy": "strict"}, "expected": prob})

    for name, gamma, options in [
        ("sample-size-headline", 0.75, {}),
        ("sample-size-loose-rates", 0.6, {"alpha": 0.1, "beta": 0.1}),
        ("sample-size-easy-effect", 0.95, {}),
    ]:
        doc = run_records(cli, "sample-size",
                          ["--gamma", repr(float(gamma)), *option_args(options)], workdir)
        (row,) = doc["rows"]
        cases.append({"name": name, "fn": "noetherSampleSize", "gamma": gamma,
                      "options": options, "expected": row["replicates"]})
    expect(cases[-3]["expected"] == 29, "headline sample size drifted from 29")

    values = [round(rng.normalvariate(0.72, 0.05), 6) for _ in range(40)]
    row = bootstrap_row(cli, workdir, values, {"seed": 11})
    cases.append({"name": "bootstrap-ci-defaults", "fn": "percentileBootstrapCi",
                  "values": values, "options": {"seed": 11}, "expected": row})
    row = bootstrap_row(cli, workdir, values, {"seed": 2, "level": 0.9, "resamples": 250})
    cases.append({"name": "bootstrap-ci-level-90", "fn": "percentileBootstrapCi",
                  "values": values, "options": {"seed": 2, "level": 0.9, "resamples": 250},
                  "expected": row})

    for name, source, train, test, seed in [
        ("oob-split-square", 50, 50, 10, 7),
        ("oob-split-oversampled", 120, 80, 25, 3),
    ]:
        doc = run_records(cli, "oob-split",
                          ["--source-size", str(source), "--train-size", str(train),
                           "--test-size", str(test), "--seed", str(seed)], workdir)
        (row,) = doc["rows"]
        expect(not set(row["train_indices"]) & set(row["test_indices"]),
               f"{name}: train and test overlap")
        cases.append({"name": name, "fn": "oobSplit", "sourceSize": source,
                      "trainSize": train, "testSize": test, "seed": seed,
                      "expected": row})

    return cases


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=pathlib.Path,
                        default=pathlib.Path(__file__).resolve().parent.parent
                        / "frontend" / "tests" / "fixtures" / "golden.json")
    parser.add_argument("--cli", default=os.environ.get("BENCHVAR_CLI", "benchvar"))
    args = parser.parse_args()

    with tempfile.TemporaryDirectory(prefix="benchvar-fixtures-") as workdir:
        cases = make_cases(args.cli, workdir)

    document = {
        "note": "Generated by scripts/make_binding_fixtures.py; the binding "
                "tests replay these inputs and require exact equality.",
        "cases": cases,
    }
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(document, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {args.out} ({len(cases)} cases)")


if __name__ == "__main__":
    main()
