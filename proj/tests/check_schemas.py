"""Runs every drh command that emits JSON and validates the output against schemas/<kind>.schema.json."""
import json
import os
import pathlib
import subprocess
import sys

import jsonschema

drh, schema_dir, work = sys.argv[1], pathlib.Path(sys.argv[2]), pathlib.Path(sys.argv[3])
work.mkdir(parents=True, exist_ok=True)
env = dict(os.environ, DRH_CACHE_DIR=str(work / "cache"))

runs = {
    "sieve": ["sieve", "--limit", "100000"],
    "product": ["product", "--spec", "zeta", "--s", "0.5", "--limit", "100000"],
    "drh-verify": ["drh-verify", "--spec", "dirichlet:q=4:idx=1", "--s", "0.5", "--limit", "1e6"],
    "race": ["race", "--q", "4", "--b", "3", "--a", "1", "--limit", "1e5"],
    "tau-bias": ["tau-bias", "--limit", "100000", "--checkpoints", "16"],
    "bsd": ["bsd", "--a", "-1", "--b", "0", "--limit", "100000", "--expect-rank", "0"],
    "ff-verify": ["ff-verify", "--q", "3", "--modulus", "1,0,1", "--char", "1", "--dmax", "8"],
    "ff-trace": ["ff-trace", "--q", "3", "--modulus", "1,0,1", "--char", "1", "--lmax", "8"],
}

failures = 0
written = []
for name, args in runs.items():
    out_json, out_csv = work / f"{name}.json", work / f"{name}.csv"
    proc = subprocess.run([drh, *args, "--json", str(out_json), "--out", str(out_csv)], env=env, capture_output=True, text=True)
    if proc.returncode not in (0, 2):
        print(f"FAIL {name}: exit {proc.returncode}: {proc.stderr.strip()}")
        failures += 1
        continue
    doc = json.loads(out_json.read_text())
    schema = json.loads((schema_dir / f"{doc['kind']}.schema.json").read_text())
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as e:
        print(f"FAIL {name}: {e.message} at {list(e.absolute_path)}")
        failures += 1
        continue
    raw = out_csv.read_bytes()
    if b"\r" in raw or not raw.endswith(b"\n") or b";" in raw:
        print(f"FAIL {name}: CSV is not LF-terminated comma-separated text")
        failures += 1
        continue
    lines = raw.decode().splitlines()
    width = len(lines[0].split(","))
    if any(len(l.split(",")) != width for l in lines[1:]) or not lines[0][0].isalpha():
        print(f"FAIL {name}: CSV header or row width mismatch")
        failures += 1
        continue
    written.append(str(out_json))
    print(f"ok   {name} ({doc['kind']})")

summary = work / "summary.json"
proc = subprocess.run([drh, "report", "--json", str(summary), *sum((["--in", p] for p in written), [])],
                      env=env, capture_output=True, text=True)
if proc.returncode not in (0, 2):
    print(f"FAIL report: exit {proc.returncode}: {proc.stderr.strip()}")
    failures += 1
else:
    doc = json.loads(summary.read_text())
    jsonschema.validate(doc, json.loads((schema_dir / "summary.schema.json").read_text()))
    print("ok   report (summary)")

sys.exit(1 if failures else 0)
