"""Command-line surface.

Subcommands: simulate, filter, predict, discrete, oracle, compare.
Output directory resolution: --out flag, else the ANTHRAFILTER_OUT
environment variable, else the current directory.

Exit codes: 0 success, 1 validation error (bad config or flags),
2 numerical failure (filter collapse).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, ScenarioConfig, load_config
from .grid import FilterCollapseError, build_grid
from .io import run_compare, run_scenario_method, write_run_csv, _simulate_cell, scenario_seed
from .predictor import PredictionRequest, predict
from .zakai import run_grid_filter

OUT_ENV_VAR = "ANTHRAFILTER_OUT"

_EPILOG = """\
exit codes:
  0  success
  1  validation error (unreadable/invalid config, bad flag values)
  2  numerical failure (the filter density lost all mass)
"""


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with the validation code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="anthrafilter",
        description="Nonlinear filtering for the inhibition-rate model.",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=Path, help="flat key=value config file")
        p.add_argument("--seed", type=int, help="override the master seed")
        p.add_argument("--out", type=Path, help=f"output directory (default ${OUT_ENV_VAR} or .)")

    p = sub.add_parser("simulate", help="simulate truth and observations", epilog=_EPILOG)
    common(p)

    p = sub.add_parser("filter", help="run the continuous-time grid filter", epilog=_EPILOG)
    common(p)
    p.add_argument("--method", choices=("zakai", "ks"), default="zakai")

    p = sub.add_parser("predict", help="evolve the posterior past an anchor time", epilog=_EPILOG)
    common(p)
    p.add_argument("--tau", type=float, help="anchor time (default from config)")
    p.add_argument("--horizon", type=float, help="prediction horizon (default from config)")

    p = sub.add_parser("discrete", help="run the discrete-time filter", epilog=_EPILOG)
    common(p)
    p.add_argument("--dtau", type=float, help="observation spacing (default from config)")
    p.add_argument("--vartheta", type=float, help="scheme blend in [0, 1]")

    p = sub.add_parser("oracle", help="run the particle-filter cross-check", epilog=_EPILOG)
    common(p)
    p.add_argument("--particles", type=int, help="ensemble size (default from config)")

    p = sub.add_parser("compare", help="run the full scenario-by-method matrix", epilog=_EPILOG)
    common(p)
    return parser


def _resolve(args) -> tuple[ScenarioConfig, Path]:
    config = load_config(args.config) if args.config else ScenarioConfig()
    if args.seed is not None:
        config.seed = args.seed
    out = args.out or Path(os.environ.get(OUT_ENV_VAR, "."))
    out.mkdir(parents=True, exist_ok=True)
    return config, out


def _first_cell(config: ScenarioConfig):
    theta0, v0, rho0 = config.scenarios()[0]
    seed = scenario_seed(config.seed, 0)
    return _simulate_cell(config, theta0, v0, rho0, seed)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config, out = _resolve(args)
        if args.command == "simulate":
            truth, obs = _first_cell(config)
            nan = np.full(len(truth.times), math.nan)
            write_run_csv(out / "run_00_simulate.csv", truth, obs, nan, nan, nan)
            print(out / "run_00_simulate.csv")
        elif args.command in ("filter", "discrete", "oracle"):
            if args.command == "filter":
                method = args.method
            elif args.command == "discrete":
                method = "discrete"
                if args.dtau is not None:
                    config.dtau = args.dtau
                if args.vartheta is not None:
                    config.vartheta = args.vartheta
            else:
                method = "oracle"
                if args.particles is not None:
                    config.particles = args.particles
            truth, obs = _first_cell(config)
            res = run_scenario_method(config, truth, obs, method)
            path = out / f"run_00_{method}.csv"
            write_run_csv(path, res.truth, res.obs, res.post_mean, res.post_var, res.zeta)
            print(path)
        elif args.command == "predict":
            if args.tau is not None:
                config.tau = args.tau
            if args.horizon is not None:
                config.horizon = args.horizon
            if not 0.0 <= config.tau < config.t_end:
                raise ConfigError("invalid value for 'tau': must lie in [0, t_end)")
            truth, obs = _first_cell(config)
            n_tau = int(round(config.tau / (config.dt * config.record_stride)))
            from .simulate import ObsPath

            clipped = ObsPath(
                times=obs.times[: n_tau + 1],
                Xbar=obs.Xbar[: n_tau + 1],
                Ybar=obs.Ybar[: n_tau + 1],
                X=obs.X[: n_tau + 1],
                Y=obs.Y[: n_tau + 1],
                dX=obs.dX[:n_tau],
                dY=obs.dY[:n_tau],
            )
            grid = build_grid(config.x_min, config.x_max, config.dx)
            trace = run_grid_filter(
                clipped, config.params, grid=grid, mean_mode=config.mean_mode,
                store_densities=True,
            )
            from .grid import GridDensity

            anchor = GridDensity(grid, trace.densities[-1], kind="normalized")
            request = PredictionRequest(tau=config.tau, horizon=config.horizon, dt=config.dt)
            predicted = predict(anchor, request, config.params)
            path = out / "prediction.csv"
            with open(path, "w", newline="") as fh:
                fh.write("x,density\n")
                for x, d in zip(grid.nodes, predicted.values):
                    fh.write(f"{x:.17g},{d:.17g}\n")
            print(path)
        elif args.command == "compare":
            run_compare(config, out)
            print(out / "summary.csv")
        return 0
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FilterCollapseError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
