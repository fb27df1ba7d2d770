#!/usr/bin/env python3
"""Run every recipe in recipes.json and check its JSON summary."""
import argparse
import json
import pathlib
import subprocess
import sys
import time


def lookup(doc, path):
    for key in path.split("."):
        doc = doc[key]
    return doc


def holds(value, op, *ref):
    if op == "eq":
        return value == ref[0]
    if op == "near":
        return abs(value - ref[0]) <= ref[1]
    if op == "lt":
        return value < ref[0]
    if op == "gt":
        return value > ref[0]
    raise ValueError(f"unknown operator {op}")


def main():
    here = pathlib.Path(__file__).resolve().parent
    ap = argparse.ArgumentParser()
    ap.add_argument("--bin", default=str(here.parent / "build" / "xbound"))
    ap.add_argument("--out", default="recipe_output")
    ap.add_argument("only", nargs="*", help="recipe names (default: all)")
    args = ap.parse_args()

    recipes = json.loads((here / "recipes.json").read_text())
    failed = 0
    for r in recipes:
        if args.only and r["name"] not in args.only:
            continue
        cmd = [args.bin, *r["args"], "--out", args.out, "--tag", r["name"]]
        t0 = time.monotonic()
        rc = subprocess.run(cmd, stdout=subprocess.DEVNULL).returncode
        elapsed = time.monotonic() - t0
        summary = json.loads((pathlib.Path(args.out) / f"{r['name']}.json").read_text()) if rc == 0 else {}
        bad = [] if rc == 0 else [f"exit {rc}"]
        for path, op, *ref in r["expect"] if rc == 0 else []:
            value = lookup(summary, path)
            if not holds(value, op, *ref):
                bad.append(f"{path}={value} !{op} {ref}")
        failed += bool(bad)
        print(f"{'PASS' if not bad else 'FAIL'} {r['name']} [{elapsed:.1f} s]" + ("" if not bad else ": " + "; ".join(bad)))
    sys.exit(1 if failed else 0)


if __name__ == "__main__":
    main()
