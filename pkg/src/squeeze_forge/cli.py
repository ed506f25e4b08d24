"""Command-line interface: simulate, optimize, estimate, sweep.

Every subcommand reads an optional JSON config (``--config``), lets explicit
flags override config values, and writes its outputs into ``--out``
(created on demand).  Runs are deterministic: the same config and seed
produce byte-identical output files.  Errors are reported as a single JSON
object ``{"error": <type>, "message": <text>}`` on stderr with exit code 2
for configuration problems and 3 for numerical failures; a solver that
merely fails to converge still exits 0 and says so in ``result.json``.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .dynamics import covariance, propagate, write_trajectory_csv
from .errors import (
    ContractError,
    NotPureError,
    PropagationError,
    ProtocolError,
    TruncationError,
)
from .optimize import ControlProblem, result_to_dict, solve_bangbang
from .protocols import (
    build_constant,
    build_janszky_adam,
    build_linear_ramp,
    build_sinusoidal,
    protocol_from_dict,
    save_protocol,
)
from .squeezing import (
    FockDistribution,
    bootstrap_stderr,
    decompose,
    estimate_r,
    fock_populations,
    sample_populations,
    wirr_from_r,
    write_populations_csv,
)
from .thermo import qstar_from_cov, trajectory_records, write_thermo_csv

__all__ = ["main"]

_PROBLEM_PRESETS = {"wide": (1.0, 2.0), "narrow": (1.0, 1.3)}


def _pick(*values):
    """First value that is not None."""
    for v in values:
        if v is not None:
            return v
    return None


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError("config file must contain a JSON object")
    return data


def _write_json(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ===================== simulate =====================


def _resolve_protocol(args, cfg: dict):
    preset = _pick(getattr(args, "preset", None), cfg.get("preset"))
    proto_dict = cfg.get("protocol")
    if preset is not None and proto_dict is not None:
        raise ValueError(
            "exactly one protocol source: drop either the preset or the "
            'config "protocol" entry'
        )
    if proto_dict is not None:
        return protocol_from_dict(proto_dict)
    if preset is None:
        raise ValueError(
            'no protocol: pass --preset or put a "protocol" object in the config'
        )

    omega0 = float(_pick(args.omega0, cfg.get("omega0"), 1.0))
    omega1 = float(_pick(args.omega1, cfg.get("omega1"), 2.0))
    if preset == "ja":
        cycles = int(_pick(args.cycles, cfg.get("cycles"), 1))
        return build_janszky_adam(omega0, omega1, cycles)
    if preset == "sinusoid":
        periods = float(_pick(args.periods, cfg.get("periods"), 1.0))
        return build_sinusoidal(omega0, omega1, periods)
    if preset == "ramp":
        tau = float(_pick(args.tau, cfg.get("tau"), 10.0))
        return build_linear_ramp(omega0, omega1, tau)
    if preset == "constant":
        tau = float(_pick(args.tau, cfg.get("tau"), 10.0))
        return build_constant(omega0, tau)
    raise ValueError(f"unknown preset {preset!r}")


def _write_squeezing_csv(path: Path, protocol, states) -> None:
    omega0 = protocol.omega_start
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("t,omega,r,theta,qstar,irr_work\n")
        for s in states:
            w = float(protocol.omega_at(s.t))
            cov = covariance(s, omega0)
            dec = decompose(cov, w)
            qstar = qstar_from_cov(cov, w)
            row = (s.t, w, dec.r, dec.theta, qstar, wirr_from_r(dec.r, w))
            fh.write(",".join("%.17g" % v for v in row) + "\n")


def _cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    out = _out_dir(args)
    protocol = _resolve_protocol(args, cfg)
    grid_n = int(_pick(args.grid, cfg.get("grid"), 2000))
    if grid_n < 2:
        raise ValueError("grid must have at least 2 points")
    times = np.linspace(0.0, protocol.total_duration, grid_n)
    states = propagate(protocol, times)
    write_trajectory_csv(out / "trajectory.csv", protocol, states)
    write_thermo_csv(out / "thermo.csv", trajectory_records(protocol, states))
    _write_squeezing_csv(out / "squeezing.csv", protocol, states)
    return 0


# ===================== optimize =====================


def _resolve_band(args, cfg: dict) -> tuple[float, float]:
    preset = _pick(args.preset, cfg.get("preset"))
    if preset is not None:
        if preset not in _PROBLEM_PRESETS:
            raise ValueError(
                f"unknown problem preset {preset!r}; "
                f"choices: {sorted(_PROBLEM_PRESETS)}"
            )
        lo, hi = _PROBLEM_PRESETS[preset]
    else:
        lo, hi = 1.0, 2.0
    lo = float(_pick(args.omega0, cfg.get("omega0"), lo))
    hi = float(_pick(args.omega1, cfg.get("omega1"), hi))
    return lo, hi


def _cmd_optimize(args) -> int:
    cfg = _load_config(args.config)
    out = _out_dir(args)
    lo, hi = _resolve_band(args, cfg)
    switches = int(_pick(args.switches, cfg.get("switches"), 3))
    horizon_raw = _pick(args.horizon, cfg.get("horizon"))
    cycles = _pick(args.cycles, cfg.get("cycles"))
    if horizon_raw is None:
        # default horizon: the quarter-period pattern with `cycles` jumps
        # (or as many jumps as requested switches)
        n_ref = int(cycles) if cycles is not None else switches
        horizon = build_janszky_adam(lo, hi, n_ref).total_duration
    elif str(horizon_raw).lower() == "free":
        horizon = None
    else:
        horizon = float(horizon_raw)
    init = _pick(args.init, cfg.get("init"), "multi")
    if isinstance(init, list):
        init = np.asarray(init, dtype=float)
    seed = int(_pick(args.seed, cfg.get("seed"), 0))

    problem = ControlProblem(omega_low=lo, omega_high=hi, horizon=horizon)
    result = solve_bangbang(problem, switches, init=init, seed=seed)

    _write_json(out / "result.json", result_to_dict(result))
    save_protocol(out / "protocol.json", result.protocol)
    with open(out / "convergence.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write("iteration,objective,residual\n")
        for it, obj, res in result.history:
            fh.write("%d,%.17g,%.17g\n" % (it, obj, res))
    return 0


# ===================== estimate =====================


def _read_populations_csv(path: str, omega: float) -> FockDistribution:
    levels = []
    probs = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["n", "P"]:
            raise ValueError(f"{path}: expected a CSV with header 'n,P'")
        for row in reader:
            if not row:
                continue
            levels.append(int(row[0]))
            probs.append(float(row[1]))
    if levels != list(range(len(levels))):
        raise ValueError(f"{path}: Fock levels must be 0,1,2,... without gaps")
    return FockDistribution(omega=omega, populations=np.asarray(probs))


def _cmd_estimate(args) -> int:
    cfg = _load_config(args.config)
    out = _out_dir(args)
    omega = float(_pick(args.omega, cfg.get("omega"), 1.0))
    r_true = _pick(args.r, cfg.get("r"))
    pop_path = _pick(args.populations, cfg.get("populations"))
    if (r_true is None) == (pop_path is None):
        raise ValueError("exactly one input source: --r or --populations")

    shots = _pick(args.shots, cfg.get("shots"))
    if pop_path is not None:
        dist = _read_populations_csv(str(pop_path), omega)
    else:
        dist = fock_populations(float(r_true), omega=omega)

    report: dict
    if shots is not None:
        shots = int(shots)
        seed = int(_pick(args.seed, cfg.get("seed"), 0))
        rng = np.random.default_rng(seed)
        sampled = sample_populations(dist, shots, rng=rng)
        est = estimate_r(sampled)
        report = est.to_dict()
        report["shots"] = shots
        report["stderr"] = bootstrap_stderr(sampled, shots, rng=rng)
        write_populations_csv(out / "populations.csv", sampled)
    else:
        est = estimate_r(dist)
        report = est.to_dict()
        write_populations_csv(out / "populations.csv", dist)

    _write_json(out / "report.json", report)
    return 0


# ===================== sweep =====================


def _sweep_worker(command: str, cfg: dict, run_dir: str) -> int:
    """Run one fanned-out CLI invocation in its own output directory."""
    path = Path(run_dir)
    path.mkdir(parents=True, exist_ok=True)
    cfg_path = path / "config.json"
    with open(cfg_path, "w", encoding="utf-8") as fh:
        json.dump(cfg, fh, indent=2)
        fh.write("\n")
    return main([command, "--config", str(cfg_path), "--out", str(path)])


def _format_value(v) -> str:
    if isinstance(v, float):
        return ("%g" % v)
    return str(v)


def _run_outputs(command: str, run_dir: Path) -> dict:
    """Pull the headline numbers out of a finished run, if present."""
    extras: dict = {}
    if command == "optimize":
        f = run_dir / "result.json"
        if f.exists():
            with open(f, "r", encoding="utf-8") as fh:
                res = json.load(fh)
            extras = {k: res[k] for k in ("qstar", "r", "converged") if k in res}
    elif command == "estimate":
        f = run_dir / "report.json"
        if f.exists():
            with open(f, "r", encoding="utf-8") as fh:
                rep = json.load(fh)
            extras = {k: rep[k] for k in ("qstar", "r") if k in rep}
    elif command == "simulate":
        f = run_dir / "squeezing.csv"
        if f.exists():
            with open(f, "r", encoding="utf-8") as fh:
                last = fh.readlines()[-1].split(",")
            extras = {"r": float(last[2]), "qstar": float(last[4])}
    return extras


def _cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    out = _out_dir(args)
    command = cfg.get("command")
    if command not in ("simulate", "optimize", "estimate"):
        raise ValueError('sweep config needs "command": simulate|optimize|estimate')
    base = cfg.get("base", {})
    if not isinstance(base, dict):
        raise ValueError('sweep "base" must be an object')
    sweep = cfg.get("sweep")
    if not isinstance(sweep, dict) or not sweep:
        raise ValueError('sweep config needs a non-empty "sweep" object of lists')
    for key, values in sweep.items():
        if not isinstance(values, list) or not values:
            raise ValueError(f'sweep parameter "{key}" must map to a non-empty list')

    params = sorted(sweep)
    combos = list(itertools.product(*(sweep[p] for p in params)))
    runs = []
    for combo in combos:
        overrides = dict(zip(params, combo))
        name = ",".join(
            f"{p}={_format_value(v)}" for p, v in overrides.items()
        )
        run_cfg = {**base, **overrides}
        runs.append((name, overrides, run_cfg))

    threads = int(os.environ.get("SQUEEZE_FORGE_THREADS", os.cpu_count() or 1))
    threads = max(1, min(threads, len(runs)))
    if threads == 1:
        codes = [_sweep_worker(command, rc, str(out / name))
                 for name, _, rc in runs]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(_sweep_worker, command, rc, str(out / name))
                for name, _, rc in runs
            ]
            codes = [f.result() for f in futures]

    summary = []
    for (name, overrides, _), code in zip(runs, codes):
        entry = {"name": name, "params": overrides, "exit_code": code}
        if code == 0:
            entry.update(_run_outputs(command, out / name))
        summary.append(entry)
    _write_json(out / "sweep_summary.json", {"command": command, "runs": summary})
    return max(codes, default=0)


# ===================== parser and entry point =====================


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="squeeze-forge",
        description=(
            "Simulate, analyze and optimize vacuum squeezing produced by "
            "frequency modulation of a harmonic oscillator."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON config file; flags override it")
        p.add_argument("--out", default=".", help="output directory (default .)")

    sim = sub.add_parser(
        "simulate", help="propagate a protocol and write trajectory/thermo/squeezing CSVs"
    )
    add_common(sim)
    sim.add_argument("--preset", choices=["ja", "sinusoid", "ramp", "constant"],
                     help="built-in protocol family")
    sim.add_argument("--omega0", type=float, help="start frequency (default 1)")
    sim.add_argument("--omega1", type=float, help="target frequency (default 2)")
    sim.add_argument("--cycles", type=int,
                     help="jump count for the ja preset (default 1)")
    sim.add_argument("--periods", type=float,
                     help="drive periods for the sinusoid preset (default 1)")
    sim.add_argument("--tau", type=float,
                     help="duration for the ramp/constant presets (default 10)")
    sim.add_argument("--grid", type=int,
                     help="number of output times (default 2000)")

    opt = sub.add_parser(
        "optimize", help="search bang-bang protocols for maximal terminal squeezing"
    )
    add_common(opt)
    opt.add_argument("--preset", choices=sorted(_PROBLEM_PRESETS),
                     help="frequency band: wide=(1,2), narrow=(1,1.3)")
    opt.add_argument("--omega0", type=float, help="lower frequency bound")
    opt.add_argument("--omega1", type=float, help="upper frequency bound")
    opt.add_argument("--switches", type=int,
                     help="number of jumps, odd (default 3)")
    opt.add_argument("--cycles", type=int,
                     help="horizon = duration of the n-jump quarter-period pattern")
    opt.add_argument("--horizon",
                     help="total duration, or 'free' to optimize durations too")
    opt.add_argument("--init",
                     help="start: multi|uniform|ja|random (default multi)")
    opt.add_argument("--seed", type=int, help="seed for random starts (default 0)")

    est = sub.add_parser(
        "estimate", help="invert Fock populations (exact or sampled) to a squeezing r"
    )
    add_common(est)
    est.add_argument("--r", type=float,
                     help="true squeezing parameter for a synthetic distribution")
    est.add_argument("--populations",
                     help="CSV file with header n,P holding measured populations")
    est.add_argument("--omega", type=float,
                     help="oscillator frequency of the distribution (default 1)")
    est.add_argument("--shots", type=int,
                     help="simulate this many projective measurements")
    est.add_argument("--seed", type=int, help="sampling seed (default 0)")

    swp = sub.add_parser(
        "sweep", help="fan a config over parameter lists, one subdirectory per run"
    )
    add_common(swp)

    return parser


def _fail(code: int, exc: BaseException) -> int:
    payload = {"error": type(exc).__name__, "message": str(exc)}
    print(json.dumps(payload), file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "sweep" and args.config is None:
        return _fail(2, ValueError("sweep requires --config"))
    handlers = {
        "simulate": _cmd_simulate,
        "optimize": _cmd_optimize,
        "estimate": _cmd_estimate,
        "sweep": _cmd_sweep,
    }
    try:
        return handlers[args.command](args)
    except ProtocolError as exc:
        return _fail(2, exc)
    except (PropagationError, TruncationError, NotPureError, ContractError) as exc:
        return _fail(3, exc)
    except (ValueError, KeyError, TypeError, OSError) as exc:
        return _fail(2, exc)


if __name__ == "__main__":
    sys.exit(main())
