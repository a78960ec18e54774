"""End-to-end checks of the coinsieve CLI: exit codes, schema, reproducibility."""

import json
import os
import subprocess
import sys
import tempfile

import jsonschema

CLI, SCHEMA = sys.argv[1], sys.argv[2]
schema = json.load(open(SCHEMA))
failures = []


def run(*args, env=None):
    return subprocess.run([CLI, *args], capture_output=True, text=True, env=env)


def check(name, cond, extra=""):
    print(("ok   " if cond else "FAIL ") + name + (f" ({extra})" if extra and not cond else ""))
    if not cond:
        failures.append(name)


def report(*args, code=0):
    p = run(*args)
    check(f"exit {code}: {' '.join(args)}", p.returncode == code, p.stderr.strip())
    try:
        doc = json.loads(p.stdout)
    except json.JSONDecodeError:
        check(f"json parses: {' '.join(args)}", False, p.stdout[:200])
        return None
    try:
        jsonschema.validate(doc, schema)
        check(f"schema: {args[0]}", True)
    except jsonschema.ValidationError as e:
        check(f"schema: {args[0]}", False, e.message)
    return doc


# Every subcommand, small and fast.
commands = [
    ["mass", "--rho", "3/4", "--m", "3", "--n", "5"],
    ["mass", "--rho", "0.75", "--m", "3", "--n", "5"],
    ["sample", "--rho", "3/4", "--m", "20", "--count", "5", "--seed", "4"],
    ["rq", "--q", "3", "--m", "2", "--rho", "1/2"],
    ["sweep", "--rho", "0.75", "--m", "32", "--q-max", "99"],
    ["exponent", "--rho", "1/2", "--m", "12,16", "--epsilon", "0.1"],
    ["pseudoprimes", "--rho", "3/5", "--m", "16", "--r", "1,2"],
    ["legendre", "--rho", "3/4", "--m", "12", "--z", "7", "--exact"],
    ["lemmas", "--samples", "2000"],
    ["integral312", "--h", "6", "--delta", "0.1"],
    ["chain", "--rho", "3/4", "--delta", "0.05", "--Q", "8"],
    ["entropy", "--c", "1/sqrt3"],
    ["rate", "--t", "0.75", "--r", "5", "--form", "two-term"],
    ["claim", "--m", "12", "--B", "5"],
    ["mc-squares", "--m", "6", "--B", "2", "--k-max", "5", "--samples", "20000"],
]
docs = {}
for cmd in commands:
    docs[cmd[0] + ("-f" if cmd[2:3] == ["0.75"] and cmd[0] == "mass" else "")] = report(*cmd)

rq = docs["rq"]["result"]
check("rq exact 1/6", rq["exact"] == "1/6")
check("rq float 0.1666...", rq["value_text"].startswith("0.16666666666"))
check("mass exact 3/64", docs["mass"]["result"]["mass_exact"] == "3/64")
check("decimal rho has no exact field", "mass_exact" not in docs["mass-f"]["result"])
check("sweep rows = odd squarefree count", len(docs["sweep"]["result"]["rows"]) == 40)
check("claim fields", all(k in docs["claim"]["result"]
                          for k in ["B", "r", "per_digit_rate", "total_bound", "exact_union", "k_cutoff"]))
check("entropy root printed", docs["entropy"]["result"]["t_text"] == "0.7615332364259191")

# CSV shape.
# Raw bytes: text mode would fold the CRLF line endings.
raw = subprocess.run([CLI, "sweep", "--rho", "0.75", "--m", "32", "--q-max", "99", "--format", "csv"],
                     capture_output=True).stdout.decode()
lines = raw.split("\r\n")
check("csv lines end in CRLF", raw.endswith("\r\n") and "\n" not in raw.replace("\r\n", ""))
check("csv header", lines[0] == "q,ord2,squarefree,abs_Rq,error_bound,cumulative")
check("csv row count", len([l for l in lines[1:] if l]) == 40)

# Exit codes.
check("no subcommand -> 1", run().returncode == 1)
check("unknown subcommand -> 1", run("frobnicate").returncode == 1)
check("unknown flag -> 1", run("rq", "--nope", "3").returncode == 1)
check("even q -> 2", run("rq", "--q", "4").returncode == 2)
check("bad rho -> 2", run("rq", "--rho", "1/3").returncode == 2)
check("garbage rho -> 2", run("mass", "--rho", "abc").returncode == 2)
check("entropy c out of range -> 2", run("entropy", "--c", "0.3").returncode == 2)
budget = report("sweep", "--rho", "3/4", "--m", "16", "--q-max", "999", "--work-budget", "500", code=3)
check("budget partial marker", budget is not None and budget["partial"] is True)
check("budget keeps rows", budget is not None and len(budget["result"]["rows"]) > 0)
claim_budget = report("claim", "--m", "20", "--B", "40", "--max-modulus", "2000", code=3)
check("claim partial cutoff", claim_budget is not None and claim_budget["result"]["k_cutoff"] == 44)

# Reproducibility regardless of threads.
for cmd in (["sweep", "--rho", "3/5", "--m", "24", "--q-max", "199"],
            ["mc-squares", "--m", "10", "--B", "2", "--samples", "150000", "--seed", "9"],
            ["pseudoprimes", "--rho", "0.6", "--m", "40", "--r", "1,2", "--samples", "140000", "--seed", "2"],
            ["lemmas", "--samples", "140000", "--seed", "5"]):
    outs = [run(*cmd, "--threads", t).stdout for t in ("1", "1", "3")]
    check(f"byte-identical across threads: {cmd[0]}", outs[0] == outs[1] == outs[2] and outs[0] != "")

# --out, --config, timestamp sources.
with tempfile.TemporaryDirectory() as tmp:
    out = os.path.join(tmp, "r.json")
    check("--out writes file", run("entropy", "--c", "0.9", "--out", out).returncode == 0 and
          json.load(open(out))["result"]["t"] > 0.5)
    cfg = os.path.join(tmp, "run.toml")
    with open(cfg, "w") as f:
        f.write('seed = 11\n[rq]\nq = 5\nm = 6\nrho = "3/5"\n')
    p = run("--config", cfg, "rq")
    doc = json.loads(p.stdout) if p.returncode == 0 else {}
    check("config file", doc.get("result", {}).get("q") == 5 and doc.get("config", {}).get("seed") == 11,
          p.stderr)
env = dict(os.environ, SOURCE_DATE_EPOCH="86400")
check("SOURCE_DATE_EPOCH timestamp",
      json.loads(run("entropy", env=env).stdout)["timestamp"] == "1970-01-02T00:00:00Z")
check("--timestamp flag",
      json.loads(run("entropy", "--timestamp", "2001-02-03T04:05:06Z").stdout)["timestamp"] == "2001-02-03T04:05:06Z")

print(f"{len(failures)} failure(s)")
sys.exit(1 if failures else 0)
