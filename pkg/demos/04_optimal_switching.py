"""Letting the optimizer rediscover the quarter-period rule.

For a two-level frequency band the control problem is bang-bang: the
trap sits at one of the two frequencies and the only decision is when to
jump.  This script frees the hold durations on a narrow band, lets the
ascent find the best three-jump schedule, and then audits the result
with the switching function sigma(t): jumps must land on its zeros, and
its sign must match the active frequency everywhere in between.
"""

import math
import pathlib

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from squeeze_forge import (
    ControlProblem,
    costate_propagate,
    propagate,
    solve_bangbang,
    switching_function,
    verify_stationarity,
)

OUT = pathlib.Path(__file__).resolve().parent / "output"
OMEGA_LOW = 1.0
OMEGA_HIGH = 1.3


def main():
    problem = ControlProblem(OMEGA_LOW, OMEGA_HIGH, horizon=None)
    result = solve_bangbang(problem, n_switches=3, init="multi", seed=0)
    protocol = result.protocol
    tau = protocol.total_duration

    print(f"free-horizon band {OMEGA_LOW} .. {OMEGA_HIGH}, three jumps\n")
    print(f"converged            {result.converged}")
    print(f"first-order residual {result.first_order_residual:.3e}")
    print(f"terminal Q*          {result.qstar:.12f}")
    print(f"terminal r           {result.r:.12f}")
    law = ((OMEGA_HIGH / OMEGA_LOW) ** 3 + (OMEGA_LOW / OMEGA_HIGH) ** 3) / 2.0
    print(f"quarter-period law   {law:.12f}")

    print("\nhold durations against quarter periods:")
    quarter_low = math.pi / (2.0 * OMEGA_LOW)
    quarter_high = math.pi / (2.0 * OMEGA_HIGH)
    for j, seg in enumerate(protocol.segments):
        omega = seg.shape.omega
        quarter = quarter_low if omega == OMEGA_LOW else quarter_high
        note = "(free: only rotates the vacuum)" if j == 0 else \
            f"(quarter period {quarter:.6f})"
        print(f"  hold {j} at omega = {omega:<4} for {seg.duration:.6f} {note}")

    audit = verify_stationarity(protocol,
                                ControlProblem(OMEGA_LOW, OMEGA_HIGH,
                                               horizon=tau))
    print(f"\nstationarity audit: ok = {audit.ok}, "
          f"max |sigma| at switches = {audit.switch_sigma_max:.3e}")

    times = np.linspace(0.0, tau, 800)
    states = propagate(protocol, times)
    sigma = switching_function(states, costate_propagate(protocol, states))
    omegas = protocol.omega_at(times)

    OUT.mkdir(exist_ok=True)
    fig, (ax_w, ax_s) = plt.subplots(2, 1, sharex=True, figsize=(7.0, 5.2))
    ax_w.step(times, omegas, where="post")
    ax_w.set_ylabel("omega(t)")
    ax_w.set_title("Optimal two-level schedule and its switching function")
    ax_s.plot(times, sigma)
    ax_s.axhline(0.0, color="k", lw=0.6)
    for j, seg_start in enumerate(protocol.segment_starts[1:], start=1):
        ax_s.axvline(seg_start, color="gray", lw=0.6, ls=":")
    ax_s.set_xlabel("time")
    ax_s.set_ylabel("sigma(t)")
    fig.tight_layout()
    target = OUT / "optimal_switching.png"
    fig.savefig(target, dpi=150)
    print(f"\nwrote {target}")
    print("\nThe ascent reproduces the quarter-period rule on its own: the")
    print("first hold length is arbitrary (it only rotates the vacuum) and")
    print("every later hold is a quarter period of its frequency.")


if __name__ == "__main__":
    main()
