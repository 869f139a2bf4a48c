"""Lower bound on the best sup error any even polynomial of a given degree can reach.

Solves the discrete minimax problem ``min_c max_i |sum_k c_k T_2k(x_i) - g(x_i)|``
on a grid of [0, 1] as a linear program.  The optimum on a finite grid can
only be smaller than the continuous optimum, so the printed value bounds from
below the error of every degree-``d`` even polynomial, including any QSP
response of that degree.

    python scripts/minimax_bound.py --degree 200 --kappa 37.018 --t-over-kappa 10

The LP grows with the degree; a few hundred solves in seconds, 800 takes
minutes and much larger degrees become ill-conditioned.
"""
import argparse

import numpy as np
from numpy.polynomial import chebyshev as cheb
from scipy.optimize import linprog

from qgfa.approx import TargetFunction, eval_target
from qgfa.softabs import solve_epsilon_pair


def minimax_lower_bound(target: TargetFunction, degree: int, grid: int = 2000) -> float:
    x = np.linspace(0.0, 1.0, grid)
    g = eval_target(target, x)
    ks = np.arange(0, degree + 1, 2)
    A = np.stack([cheb.chebval(x, np.eye(degree + 1)[k]) for k in ks], axis=1)
    n = A.shape[1]
    # variables (c, delta); minimize delta s.t. |A c - g| <= delta
    obj = np.zeros(n + 1)
    obj[-1] = 1.0
    ones = np.ones((grid, 1))
    A_ub = np.block([[A, -ones], [-A, -ones]])
    b_ub = np.concatenate([g, -g])
    bounds = [(None, None)] * n + [(0, None)]
    res = linprog(obj, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if not res.success:
        raise RuntimeError(res.message)
    return float(res.x[-1])


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--degree", type=int, default=200)
    ap.add_argument("--kappa", type=float, default=37.018)
    ap.add_argument("--t-over-kappa", type=float, default=10.0)
    ap.add_argument("--eta", type=float, default=1e-6)
    ap.add_argument("--grid", type=int, default=2000)
    args = ap.parse_args()

    t = args.t_over_kappa * args.kappa
    eps = solve_epsilon_pair(args.kappa, t, args.eta)
    print(f"kappa={args.kappa} t={t:.6g} epsilon_smooth={eps:.6g} degree={args.degree}")
    for name, target in (("g1", TargetFunction.g1(t, eps)), ("g2tilde", TargetFunction.g2tilde(t, eps))):
        bound = minimax_lower_bound(target, args.degree, args.grid)
        print(f"{name:8s} minimax lower bound on [0,1] grid: {bound:.6e}")


if __name__ == "__main__":
    main()
