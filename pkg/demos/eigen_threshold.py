"""The principal eigenvalue and the critical radius L_star.

Linearizing the model around u = 0 on a fixed ball of radius L gives an
integral operator whose principal eigenvalue lambda1(L) decides whether
a small population on that ball can grow.  lambda1 increases from
a - d (tiny ball) to a (huge ball); when d > a the zero crossing L_star
is the smallest range that supports growth, and it is exactly the
threshold radius separating vanishing from possible spreading.
"""

import numpy as np

from nlfb import (EigenProblem, KernelTables, find_L_star, lambda1,
                  lambda1_sweep, logistic, steady_state, uniform_kernel)


def main():
    kernel = uniform_kernel(2)
    tables = KernelTables(kernel, 0.05)
    d, a = 1.0, 0.5

    print(f"== lambda1(L) for d={d}, a={a} (limits: {a - d} and {a}) ==")
    Ls = [0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 40.0]
    for L, res in zip(Ls, lambda1_sweep(d, a, Ls, tables)):
        bar = "#" * int(40 * (res.lambda1 - (a - d)) / d)
        print(f"L={L:6.2f}  lambda1={res.lambda1:+.6f}  {bar}")

    L_star, bracket = find_L_star(d, a, tables)
    print(f"\nL_star = {L_star:.4f} (bracket [{bracket[0]:.4f}, "
          f"{bracket[1]:.4f}])")
    lam = lambda1(EigenProblem(d=d, a=a, L=L_star, tables=tables)).lambda1
    print(f"lambda1 at L_star: {lam:+.2e} (should be ~ 0)")

    # steadily larger habitats support steadily denser equilibria
    print("\n== positive steady states on fixed balls (logistic f) ==")
    f = logistic()
    for L in (2.0, 4.0, 8.0):
        nodes, u = steady_state(L, 2.0, f, tables)
        print(f"L={L}: u(0)={u[0]:.4f}, u(L-)={u[-1]:.4f}, "
              f"max={u.max():.4f}")
    print("(d=2 > f'(0)=1 here, so small balls would admit only u = 0)")


if __name__ == "__main__":
    main()
