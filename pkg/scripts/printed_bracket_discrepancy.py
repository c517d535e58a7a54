"""How far the literal closed-form bracket (no pair terms, no (-1)^l on the du/dx
single-slot terms) is from lambda_l, for horizontal and for purely vertical fields.

The corrected formula is printed alongside as a control.
"""

from __future__ import annotations

import argparse
import random
from dataclasses import dataclass

from multicontact.expr import SamplingPolicy
from multicontact.fixtures import random_point_field
from multicontact.forms import max_residual
from multicontact.jet import closed_form_jet_bracket, build_jet_chart, prolong
from multicontact.linfty import LinftyContext, element_from_symmetry, lambda_ell
from multicontact.symplectization import build_symplectization


@dataclass
class Config:
    m: int = 2
    n: int = 2
    k: int = 1
    tuples: int = 5
    seed: int = 0xC0FFEE


def measure(cfg: Config) -> list:
    policy = SamplingPolicy(seed=cfg.seed)
    chart = build_jet_chart(cfg.m, cfg.n, cfg.k)
    h = build_symplectization(chart.adapted, policy)
    ctx = LinftyContext(h, policy)
    rng = random.Random(cfg.seed)
    rows = []
    for vertical in (False, True):
        for ell in range(2, h.n + 2):
            literal = corrected = 0.0
            for _ in range(cfg.tuples):
                prs = []
                for _ in range(ell):
                    X_i, X_alpha = random_point_field(rng, cfg.m, cfg.n)
                    prs.append(prolong(chart, [0] * cfg.m if vertical else X_i, X_alpha))
                elems = [element_from_symmetry(ctx, pr.X_a, pr.X_i, check=False) for pr in prs]
                generic = lambda_ell(ctx, elems).form
                literal = max(literal, max_residual(closed_form_jet_bracket(chart, h, prs, as_displayed=True) - generic,
                                                    policy))
                corrected = max(corrected, max_residual(closed_form_jet_bracket(chart, h, prs) - generic, policy))
            rows.append(("vertical" if vertical else "general", ell, literal, corrected))
    return rows


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--m", type=int, default=Config.m)
    parser.add_argument("--n", type=int, default=Config.n)
    parser.add_argument("--k", type=int, default=Config.k)
    parser.add_argument("--tuples", type=int, default=Config.tuples)
    parser.add_argument("--seed", type=lambda s: int(s, 0), default=Config.seed)
    cfg = Config(**vars(parser.parse_args()))
    print(f"J^{cfg.k}, m={cfg.m}, n={cfg.n}: max |formula - lambda_l| over {cfg.tuples} tuples")
    print(f"{'fields':9s} {'l':>2s} {'literal':>10s} {'corrected':>10s}")
    for kind, ell, literal, corrected in measure(cfg):
        print(f"{kind:9s} {ell:2d} {literal:10.3g} {corrected:10.3g}")


if __name__ == "__main__":
    main()
