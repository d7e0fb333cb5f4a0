"""Accelerated spreading under fat-tailed dispersal.

When the kernel decays like r^(-beta) with beta <= N + 1, its N-th
moment diverges, the spreading speed is infinite, and the boundary
grows super-linearly: h ~ t^(1/(beta-N)) for beta in (N, N+1) and
h ~ t ln t at the borderline beta = N + 1.  Finite-time fits overshoot
the limiting exponent, so the run starts from a saturated state to
suppress the early transient.
"""

import numpy as np

from nlfb import (RunConfig, estimate_power, estimate_t_log_t, logistic,
                  power_tail_kernel, run)


def saturated(r):
    # u ~ 1 across the initial range, tapering only at the edge
    return 1.0 - (r / 20.0) ** 8


def main():
    f = logistic()
    common = dict(d=1.0, mu=1.0, reaction=f, h0=20.0, u0=saturated, dr=0.25)

    beta = 2.8
    print(f"== beta = {beta}: power law, limiting exponent "
          f"1/(beta-2) = {1.0 / (beta - 2.0):.4f} ==")
    traj = run(RunConfig(kernel=power_tail_kernel(2, beta), t_end=100.0,
                         **common))
    print(f"h: {traj.h[0]:.0f} -> {traj.h[-1]:.0f} over t <= 100")
    fit = estimate_power(traj)
    print(f"fit window t in [{fit.window[0]:.0f}, {fit.window[1]:.0f}]: "
          f"h ~ t^{fit.params['exponent']:.4f} (R2 = {fit.r2:.4f})")
    print("(the local exponent still drifts toward 1.25 from above: the "
          "power law is an asymptotic statement)")

    beta = 3.0
    print(f"\n== beta = {beta}: borderline case h ~ t ln t ==")
    traj = run(RunConfig(kernel=power_tail_kernel(2, beta), t_end=120.0,
                         **common))
    print(f"h: {traj.h[0]:.0f} -> {traj.h[-1]:.0f} over t <= 120")
    fit = estimate_t_log_t(traj)
    p = fit.params
    print(f"fit window t in [{fit.window[0]:.0f}, {fit.window[1]:.0f}]: "
          f"h ~ {p['coefficient']:.4f} t ln t")
    print(f"ratio h/(t ln t): mean {p['ratio_mean']:.4f}, "
          f"spread {p['ratio_spread']:.3f} (R2 = {fit.r2:.4f})")

    # the same fit applied to the wrong law shows why the diagnostics matter
    wrong = estimate_power(traj)
    print(f"\nas a pure power law the same data would read "
          f"h ~ t^{wrong.params['exponent']:.3f}; the t ln t ratio being "
          f"flat is what identifies the borderline regime")


if __name__ == "__main__":
    main()
