"""Run every verification suite on the reference charts and summarize the residuals."""

from __future__ import annotations

import argparse
import json
import time
from dataclasses import asdict, dataclass

from multicontact.distribution import classify
from multicontact.expr import SamplingPolicy
from multicontact.fixtures import FIXTURES, chart_irregular
from multicontact.linfty import HypothesisError, LinftyContext
from multicontact.suites import homogeneity_suite, homotopy_suite, linfty_suite, kernel_rank_suite
from multicontact.symplectization import build_symplectization


@dataclass
class Config:
    seed: int = 0xC0FFEE
    samples: int = 32
    tol: float = 1e-8
    kernel_check_points: int = 100
    forms_per_degree: int = 5
    tuples: int = 5


def run(cfg: Config) -> dict:
    policy = SamplingPolicy(seed=cfg.seed, num_samples=cfg.samples, abs_tol=cfg.tol, rel_tol=cfg.tol)
    summary = {"config": asdict(cfg), "charts": {}}
    for name, make in sorted(FIXTURES.items()) + [("irregular", chart_irregular)]:
        chart = make()
        row = {"classification": str(classify(chart, policy))}
        start = time.perf_counter()
        if row["classification"] != "irregular":
            h = build_symplectization(chart, policy)
            checks = kernel_rank_suite(h, policy, cfg.kernel_check_points)
            checks += homogeneity_suite(h, policy) + homotopy_suite(h, policy, cfg.forms_per_degree)
            try:
                checks += linfty_suite(LinftyContext(h, policy), policy, cfg.tuples)
            except HypothesisError as err:
                row["note"] = str(err)
            row["checks"] = len(checks)
            row["failed"] = [c.name for c in checks if not c.passed]
            row["max_residual"] = max(c.max_residual for c in checks)
        row["seconds"] = round(time.perf_counter() - start, 3)
        summary["charts"][name] = row
    return summary


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    for field, default in asdict(Config()).items():
        parser.add_argument(f"--{field.replace('_', '-')}", type=type(default), default=default)
    parser.add_argument("--out", help="write the summary JSON here")
    args = parser.parse_args()
    cfg = Config(**{k: getattr(args, k) for k in asdict(Config())})
    summary = run(cfg)
    for name, row in summary["charts"].items():
        if "checks" in row:
            status = "ok" if not row["failed"] else f"FAILED {row['failed']}"
            print(f"{name:10s} {row['classification']:34s} checks={row['checks']:3d} "
                  f"max_residual={row['max_residual']:.2e} {row['seconds']:.2f}s {status}")
        else:
            print(f"{name:10s} {row['classification']:34s} (no constant-rank suites)")
        if "note" in row:
            print(f"{'':10s} note: {row['note']}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)


if __name__ == "__main__":
    main()
