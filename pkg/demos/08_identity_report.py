"""Run two identity suites and print the deterministic report, as ``superbethe check`` would."""

import json

from superbethe.suites import SuiteConfig, run_suites

cfg = SuiteConfig.from_dict({"suites": ["kernels", "morphisms"], "draws": 1, "seed": 42})
report = run_suites(cfg)
for row in report["results"]:
    print(f"{row['identity']:40s} {row['max_residual']:>6}  {row['anchor']}")
print("all passed:", report["passed"])

# Injecting a sign fault makes exactly that identity fail
bad = SuiteConfig.from_dict({"suites": ["bv-equalities"], "draws": 1, "corrupt": "bv-equalities/rec-v"})
print(json.dumps([r["identity"] for r in run_suites(bad)["results"] if not r["passed"]]))
