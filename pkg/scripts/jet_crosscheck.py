"""Sweep jet specs: closed-form brackets against the generic lambda_l, with timings."""

from __future__ import annotations

import argparse
import random
import time
from dataclasses import dataclass, field

from multicontact.expr import SamplingPolicy
from multicontact.fixtures import random_point_field
from multicontact.forms import max_residual
from multicontact.jet import closed_form_jet_bracket, build_jet_chart, jet_omega_tilde, prolong
from multicontact.linfty import LinftyContext, element_from_symmetry, lambda_ell
from multicontact.symplectization import build_symplectization


@dataclass
class Config:
    specs: list = field(default_factory=lambda: [(1, 2, 1), (2, 2, 1), (2, 1, 2), (1, 1, 2), (3, 1, 1)])
    max_ell: int = 4
    tuples: int = 5
    seed: int = 0xC0FFEE
    samples: int = 32


def sweep(cfg: Config):
    policy = SamplingPolicy(seed=cfg.seed, num_samples=cfg.samples)
    rng = random.Random(cfg.seed)
    for m, n, k in cfg.specs:
        chart = build_jet_chart(m, n, k)
        h = build_symplectization(chart.adapted, policy)
        omega_res = max_residual(jet_omega_tilde(chart, h, policy) - h.omega_tilde, policy)
        ctx = LinftyContext(h, policy)
        for ell in range(2, min(cfg.max_ell, h.n + 1) + 1):
            worst, start = 0.0, time.perf_counter()
            for _ in range(cfg.tuples):
                prs = [prolong(chart, *random_point_field(rng, m, n)) for _ in range(ell)]
                elems = [element_from_symmetry(ctx, pr.X_a, pr.X_i, check=False) for pr in prs]
                worst = max(worst, max_residual(closed_form_jet_bracket(chart, h, prs) - lambda_ell(ctx, elems).form,
                                                policy))
            yield (m, n, k), len(chart.coords), omega_res, ell, worst, time.perf_counter() - start


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--spec", action="append", metavar="M,N,K", help="repeatable; default sweeps five specs")
    parser.add_argument("--max-ell", type=int, default=Config.max_ell)
    parser.add_argument("--tuples", type=int, default=Config.tuples)
    parser.add_argument("--seed", type=lambda s: int(s, 0), default=Config.seed)
    args = parser.parse_args()
    cfg = Config(max_ell=args.max_ell, tuples=args.tuples, seed=args.seed)
    if args.spec:
        cfg.specs = [tuple(int(v) for v in s.split(",")) for s in args.spec]
    print(f"{'spec':10s} {'coords':>6s} {'omega res':>10s} {'l':>2s} {'bracket res':>12s} {'seconds':>8s}")
    for spec, coords, omega_res, ell, worst, secs in sweep(cfg):
        print(f"{str(spec):10s} {coords:6d} {omega_res:10.2e} {ell:2d} {worst:12.2e} {secs:8.2f}")


if __name__ == "__main__":
    main()
