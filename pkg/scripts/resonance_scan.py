"""Resonant sites and edges of the golden-rotation environment per block, at eps = L^(-alpha/gamma)."""

import argparse
import csv
import sys

import numpy as np

from qpperc import golden_environment
from qpperc.environment import scan_resonances
from qpperc.schedule import suggest


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scales", type=int, nargs="+", default=[100, 1000, 10_000])
    ap.add_argument("--blocks", type=int, default=20)
    ap.add_argument("--seed", type=int, default=4)
    ap.add_argument("--exponent", type=float, default=0.9)
    args = ap.parse_args()

    spec = golden_environment(exponent=args.exponent)
    params = suggest(1, 1, spec.zeta, spec.sigma, spec.R)
    centers = np.random.default_rng(args.seed).integers(-10 ** 6, 10 ** 6, size=args.blocks)
    w = csv.writer(sys.stdout)
    w.writerow(["L", "epsilon", "center", "sites", "edges", "min_death_rate", "max_bond_rate"])
    for L in args.scales:
        eps = float(L) ** (-params.alpha / params.gamma)
        for c in centers:
            rep = scan_resonances(spec, (int(c),), L, eps)
            w.writerow([L, f"{eps:.3g}", int(c), len(rep.resonant_sites), len(rep.resonant_edges),
                        f"{min(rep.site_rates, default=float('nan')):.3g}",
                        f"{max(rep.edge_rates, default=float('nan')):.3g}"])


if __name__ == "__main__":
    main()
