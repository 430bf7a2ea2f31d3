#!/usr/bin/env python3
"""Runs the CLI end to end and validates every report it writes against the JSON schema."""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

try:
    import jsonschema
except ImportError:
    print("jsonschema not installed; skipping")
    sys.exit(0)


def main() -> int:
    dgm, schema_path = sys.argv[1], sys.argv[2]
    schema = json.loads(Path(schema_path).read_text())
    validator = jsonschema.Draft202012Validator(schema)
    failures = 0
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        subprocess.run([dgm, "synth", "--scenario", "shrinkage", "--seed", "3", "--out", str(tmp / "syn"),
                        "--n-train", "400", "--n-test", "400", "--n-gen", "400"], check=True)
        syn = tmp / "syn"
        roles = ["--real", syn / "test.dgme", "--gen", syn / "gen.dgme",
                 "--train", syn / "train.dgme", "--test", syn / "test.dgme"]
        runs = {
            "all": ["--metrics", "fd,fd_inf,kd,prdc,rarity,vendi,authpct,ct,ct_mod,fls,fls_pog,mem_ratio,asw",
                    "--tau", "0.3"],
            # k above the set size: every entry carries an error
            "failing": ["--metrics", "prdc", "--prdc-k", "5000"],
        }
        for name, extra in runs.items():
            out = tmp / f"{name}.json"
            proc = subprocess.run([dgm, "compute", *map(str, roles), *extra, "--model-id", "m",
                                   "--dataset-id", "d", "--out", str(out)])
            if not out.exists():
                print(f"{name}: no report written (exit {proc.returncode})")
                failures += 1
                continue
            report = json.loads(out.read_text())
            errors = sorted(validator.iter_errors(report), key=lambda e: list(e.path))
            for e in errors:
                print(f"{name}: {'/'.join(map(str, e.path))}: {e.message}")
            failures += len(errors)
            print(f"{name}: exit {proc.returncode}, {len(report['metrics'])} entries, {len(errors)} schema errors")
        if json.loads((tmp / "failing.json").read_text())["metrics"]["precision"]["value"] is not None:
            print("failing run unexpectedly produced a value")
            failures += 1
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
