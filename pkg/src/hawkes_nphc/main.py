#!/usr/bin/env python3
"""
hawkes-nphc - non-parametric Hawkes causality estimation from integrated cumulants

Simulate benchmark datasets, estimate integrated cumulants, recover the
kernel-integral matrix G by cumulant matching and score the result.
"""

import argparse
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
from loguru import logger

from . import __version__
from .config import (
    ExperimentConfig,
    boundary_mode_from,
    cumulant_config_from,
    resolve_values,
    solve_config_from,
)
from .cumulants import BoundaryMode, IntegratedCumulants, estimate_cumulants, h_grid_table
from .errors import ConfigError, NPHCError
from .estimation import SolveConfig, SolveResult, solve, threshold_matrix
from .evaluation import mean_rank_corr, rel_err
from .io import (
    ingest_events,
    read_manifest,
    read_matrix_csv,
    read_vector_csv,
    side_by_side,
    write_events_csv,
    write_loss_trace,
    write_manifest,
    write_matrix_csv,
    write_vector_csv,
)
from .model import EventSequences, HawkesModel
from .simulation import RNG_ALGORITHM, SimulationResult, run_seeds, simulate

MODEL_KEYS = ("preset", "d", "shape", "alpha", "gamma", "beta0", "mu")
SIMULATION_KEYS = ("horizon", "events_per_node", "seed", "max_events", "power_law_engine")
CUMULANT_KEYS = ("h", "boundary_mode", "symmetrize", "workers")
SOLVER_KEYS = ("max_iters", "learning_rate", "adagrad_epsilon", "grad_tol", "kappa",
               "trace_stride", "seed")


@dataclass
class SeedOutcome:
    """Result of one end-to-end run of the experiment command."""
    seed: int
    n_events: int
    truncated: bool
    rel_err: float
    mean_rank_corr: Optional[float]
    final_loss: float
    converged: bool
    G_hat: np.ndarray
    simulate_seconds: float
    cumulants_seconds: float
    solve_seconds: float


def _metrics(G_true: np.ndarray, G_hat: np.ndarray) -> Dict[str, Optional[float]]:
    return {
        "rel_err": rel_err(G_true, G_hat),
        # rank correlation is undefined for a single node
        "mean_rank_corr": mean_rank_corr(G_true, G_hat) if G_true.shape[0] >= 2 else None,
    }


def _parse_h_grid(raw: str) -> List[float]:
    try:
        values = [float(v) for v in raw.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--h-grid expects comma-separated numbers, got {raw!r}")
    if not values:
        raise ConfigError("--h-grid is empty")
    return values


def write_simulation(result: SimulationResult, model: HawkesModel, out: Path):
    out.mkdir(parents=True, exist_ok=True)
    write_events_csv(result.events, out / "events.csv")
    write_matrix_csv(model.integral_matrix(), out / "G.csv")
    write_manifest({
        "model": model.to_dict(),
        "horizon_T": result.events.horizon_T,
        "seed": result.seed,
        "rng_algorithm": RNG_ALGORITHM,
        "n_events": result.events.counts().tolist(),
        "n_candidates": result.n_candidates,
        "truncated": result.truncated,
    }, out / "model.json")


def write_cumulants(cum: IntegratedCumulants, out: Path):
    out.mkdir(parents=True, exist_ok=True)
    write_vector_csv(cum.Lambda, out / "Lambda.csv")
    write_matrix_csv(cum.C, out / "C.csv")
    write_matrix_csv(cum.Kc, out / "Kc.csv")
    write_manifest(cum.manifest(), out / "cumulants.json")


def read_cumulants(directory: Path) -> IntegratedCumulants:
    manifest_path = directory / "cumulants.json"
    manifest = read_manifest(manifest_path) if manifest_path.exists() else {}
    mode = manifest.get("boundary_mode")
    return IntegratedCumulants(
        Lambda=read_vector_csv(directory / "Lambda.csv"),
        C=read_matrix_csv(directory / "C.csv"),
        Kc=read_matrix_csv(directory / "Kc.csv"),
        H_used=float(manifest.get("H") or 0.0),
        T_used=float(manifest.get("T") or 0.0),
        boundary_mode=BoundaryMode(mode) if mode else None,
        symmetrized=bool(manifest.get("symmetrized", False)),
    )


def write_fit(result: SolveResult, cum: IntegratedCumulants, cfg: SolveConfig, out: Path,
              threshold: Optional[float] = None):
    out.mkdir(parents=True, exist_ok=True)
    write_matrix_csv(result.G_hat, out / "G_hat.csv")
    write_matrix_csv(result.R_hat, out / "R_hat.csv")
    write_vector_csv(result.mu_hat, out / "mu_hat.csv")
    write_loss_trace(result.loss_trace, out / "loss_trace.csv")
    if threshold is not None:
        write_matrix_csv(threshold_matrix(result.G_hat, threshold), out / "G_hat_thresholded.csv")
    manifest = result.manifest()
    manifest.update({"solver": cfg.to_dict(), "threshold": threshold,
                     "cumulants": cum.manifest()})
    write_manifest(manifest, out / "fit.json")


class NPHCApp:
    """Main application class."""

    def __init__(self, quiet: bool = False):
        self.quiet = quiet

    def say(self, message: str = ""):
        if not self.quiet:
            print(message)

    # commands

    def cmd_simulate(self, args):
        values = resolve_values(args, MODEL_KEYS + SIMULATION_KEYS + CUMULANT_KEYS)
        config = ExperimentConfig.from_values(values)
        model = config.build_model()
        sim_cfg = config.simulation_config()
        self.say(f"Simulating {config.preset} (d={model.d}) on [0, {sim_cfg.horizon_T:g}] "
                 f"with seed {sim_cfg.seed}...")
        result = simulate(model, sim_cfg)
        out = Path(args.output_dir)
        write_simulation(result, model, out)
        if result.truncated:
            self.say(f"⚠️  Stopped at the {sim_cfg.max_events} event cap")
        self.say(f"✅ Wrote {result.events.total_events} events to {out / 'events.csv'}")
        self.say(f"ℹ️  Use --horizon {sim_cfg.horizon_T!r} --nodes {model.d} to read them back")

    def _load_events(self, args) -> EventSequences:
        return ingest_events(args.events, args.format, horizon=args.horizon, nodes=args.nodes)

    def cmd_cumulants(self, args):
        values = resolve_values(args, CUMULANT_KEYS)
        events = self._load_events(args)
        out = Path(args.output_dir)
        if args.h_grid:
            grid = _parse_h_grid(args.h_grid)
            mode = boundary_mode_from(values)
            rows = h_grid_table(events, grid, mode, values.get("workers"))
            out.mkdir(parents=True, exist_ok=True)
            with open(out / "h_grid.csv", "w", encoding="utf-8") as f:
                f.write("H,frobenius_C,trace_C\n")
                for row in rows:
                    f.write(f"{row['H']!r},{row['frobenius_C']!r},{row['trace_C']!r}\n")
            self.say("📊 H grid (look for the plateau):")
            for row in rows:
                self.say(f"   H={row['H']:<10g} |C|_F={row['frobenius_C']:.6g}  "
                         f"tr(C)={row['trace_C']:.6g}")
            return
        cfg = cumulant_config_from(values)
        cum = estimate_cumulants(events, cfg)
        write_cumulants(cum, out)
        self.say(f"✅ Cumulants for d={cum.d} (H={cfg.H:g}, {cfg.boundary_mode.value}) "
                 f"written to {out}")

    def cmd_fit(self, args):
        values = resolve_values(args, SOLVER_KEYS + ("threshold",))
        cfg = solve_config_from(values)
        threshold = values.get("threshold")
        if threshold is not None and threshold < 0:
            raise ConfigError(f"threshold must be >= 0, got {threshold}")
        cum = read_cumulants(Path(args.cumulants_dir))
        self.say(f"Fitting d={cum.d} with AdaGrad (lr={cfg.learning_rate:g}, "
                 f"max_iters={cfg.max_iters})...")
        result = solve(cum, cfg)
        out = Path(args.output_dir)
        write_fit(result, cum, cfg, out, threshold)
        status = "✅ Converged" if result.converged else "ℹ️  Stopped at max_iters"
        self.say(f"{status} after {result.iterations_used} iterations "
                 f"(loss {result.final_loss:.6g}, kappa {result.kappa:.4f})")
        if result.clipped_eigenvalues:
            self.say(f"⚠️  Clipped {result.clipped_eigenvalues} negative eigenvalue(s) of C")
        self.say(f"✅ Results written to {out}")

    def cmd_eval(self, args):
        started = time.perf_counter()
        truth = read_matrix_csv(args.truth)
        estimate = read_matrix_csv(args.estimate)
        record: Dict[str, Any] = _metrics(truth, estimate)
        record["runtime_seconds"] = time.perf_counter() - started
        print(json.dumps(record))

    def _run_seed(self, config: ExperimentConfig, model: HawkesModel,
                  result: SimulationResult) -> SeedOutcome:
        started = time.perf_counter()
        cum = estimate_cumulants(result.events, config.cumulants)
        cumulants_seconds = time.perf_counter() - started
        started = time.perf_counter()
        fit = solve(cum, config.solve)
        solve_seconds = time.perf_counter() - started

        if config.output_dir:
            out = Path(config.output_dir) / f"seed_{result.seed}"
            write_simulation(result, model, out)
            write_cumulants(cum, out)
            write_fit(fit, cum, config.solve, out, config.threshold)

        scores = _metrics(model.integral_matrix(), fit.G_hat)
        return SeedOutcome(
            seed=result.seed,
            n_events=result.events.total_events,
            truncated=result.truncated,
            rel_err=scores["rel_err"],
            mean_rank_corr=scores["mean_rank_corr"],
            final_loss=fit.final_loss,
            converged=fit.converged,
            G_hat=fit.G_hat,
            simulate_seconds=result.elapsed_seconds,
            cumulants_seconds=cumulants_seconds,
            solve_seconds=solve_seconds,
        )

    def cmd_experiment(self, args):
        start_time = time.time()
        values = resolve_values(
            args, MODEL_KEYS + SIMULATION_KEYS + CUMULANT_KEYS + SOLVER_KEYS
            + ("n_seeds", "threshold", "output_dir"))
        config = ExperimentConfig.from_values(values)
        config.require_cumulants()
        model = config.build_model()
        self.say(f"📊 Experiment {config.preset}: d={model.d}, T={config.horizon_T:g}, "
                 f"H={config.cumulants.H:g}, seeds {config.seeds}")

        sim_cfg = config.simulation_config()
        if len(config.seeds) == 1:
            simulations = [simulate(model, sim_cfg)]
        else:
            simulations = run_seeds(model, sim_cfg, config.seeds, workers=config.workers,
                                    progress=not self.quiet)
        outcomes = [self._run_seed(config, model, result) for result in simulations]

        if config.output_dir:
            write_manifest({
                "config": config.to_dict(),
                "runs": [{"seed": o.seed, "n_events": o.n_events, "truncated": o.truncated,
                          "rel_err": o.rel_err, "mean_rank_corr": o.mean_rank_corr,
                          "final_loss": o.final_loss, "converged": o.converged}
                         for o in outcomes],
            }, Path(config.output_dir) / "experiment.json")
            with open(Path(config.output_dir) / "heatmap.txt", "w", encoding="utf-8") as f:
                f.write(side_by_side(model.integral_matrix(), outcomes[0].G_hat) + "\n")

        self._print_summary(config, model, outcomes, time.time() - start_time)

    def _print_summary(self, config: ExperimentConfig, model: HawkesModel,
                       outcomes: List[SeedOutcome], total_time: float):
        """Print summary report with per-seed scores and a heatmap of the first seed."""
        self.say(f"\n{'='*60}")
        self.say("SUMMARY REPORT")
        self.say(f"{'='*60}")
        self.say(f"Preset: {config.preset}  d={model.d}  T={config.horizon_T:g}  "
                 f"H={config.cumulants.H:g}  ({config.cumulants.boundary_mode.value})")
        self.say(f"{'seed':>6} {'events':>10} {'RelErr':>9} {'MRankCorr':>10} "
                 f"{'loss':>11} {'sim s':>7} {'cum s':>7} {'fit s':>7}")
        for o in outcomes:
            rank = f"{o.mean_rank_corr:10.4f}" if o.mean_rank_corr is not None else f"{'n/a':>10}"
            self.say(f"{o.seed:>6} {o.n_events:>10} {o.rel_err:9.4f} {rank} "
                     f"{o.final_loss:11.4g} {o.simulate_seconds:7.1f} "
                     f"{o.cumulants_seconds:7.1f} {o.solve_seconds:7.1f}")
        if len(outcomes) > 1:
            self.say(f"Median RelErr: {np.median([o.rel_err for o in outcomes]):.4f}")
            ranks = [o.mean_rank_corr for o in outcomes if o.mean_rank_corr is not None]
            if ranks:
                self.say(f"Median MRankCorr: {np.median(ranks):.4f}")
        self.say(f"Total time taken: {total_time:.2f} seconds")

        if any(o.truncated for o in outcomes):
            self.say("⚠️  Some simulations hit the event cap; results are on truncated data")
        if not all(o.converged for o in outcomes):
            self.say("ℹ️  Solver stopped at max_iters for some seeds")

        self.say(f"\nG vs G_hat (seed {outcomes[0].seed}):")
        self.say(side_by_side(model.integral_matrix(), outcomes[0].G_hat))

    def run(self, args):
        """Dispatch a parsed command line; errors exit with their code and a JSON record."""
        commands = {
            "simulate": self.cmd_simulate,
            "cumulants": self.cmd_cumulants,
            "fit": self.cmd_fit,
            "eval": self.cmd_eval,
            "experiment": self.cmd_experiment,
        }
        try:
            commands[args.command](args)
        except NPHCError as e:
            print(json.dumps(e.to_record(), default=str), file=sys.stderr)
            sys.exit(e.exit_code)
        except OSError as e:
            print(json.dumps({"error": type(e).__name__, "message": str(e)}), file=sys.stderr)
            sys.exit(4)


def configure_logging(debug: bool):
    logger.remove()
    logger.add(sys.stderr, level="DEBUG" if debug else "WARNING")
    logger.enable("hawkes_nphc")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='Config file with key = value lines')
    common.add_argument('--debug', action='store_true', help='Verbose logging on stderr')
    common.add_argument('--quiet', action='store_true', help='Suppress status lines')
    common.add_argument('--workers', type=int,
                        help='Worker count (capped by NPHC_THREADS)')

    model_opts = argparse.ArgumentParser(add_help=False)
    model_opts.add_argument('--preset',
                            help='rect10, plaw10, exp10, exp100 or custom (default: rect10)')
    model_opts.add_argument('--d', type=int, help='Number of nodes (custom preset)')
    model_opts.add_argument('--shape',
                            choices=['exponential', 'rectangular', 'power_law'],
                            help='Kernel shape (custom preset)')
    model_opts.add_argument('--alpha', type=float, help='Kernel integral on the blocks')
    model_opts.add_argument('--gamma', type=float, help='Delay or power-law exponent')
    model_opts.add_argument('--beta0', type=float,
                            help='Slowest time scale; the others are 10x and 100x')
    model_opts.add_argument('--mu', type=float,
                            help='Uniform baseline (default: scaled to the preset mean rate)')
    model_opts.add_argument('--horizon', type=float, help='Simulation horizon T')
    model_opts.add_argument('--events-per-node', type=float,
                            help='Target events per node; sets T when --horizon is absent')
    model_opts.add_argument('--max-events', type=int, help='Event cap per simulation')
    model_opts.add_argument('--power-law-engine', choices=['mixture', 'exact'],
                            help='Power-law kernel evaluation (default: mixture)')

    seed_opts = argparse.ArgumentParser(add_help=False)
    seed_opts.add_argument('--seed', type=int, help='Random seed (default: 0)')

    cumulant_opts = argparse.ArgumentParser(add_help=False)
    cumulant_opts.add_argument('--h', type=float, help='Window half-width H')
    cumulant_opts.add_argument('--boundary-mode', choices=['trimmed', 'paper_exact'],
                               help='Boundary handling (default: trimmed)')
    cumulant_opts.add_argument('--symmetrize', choices=['true', 'false'],
                               help='Symmetrize C and Kc (default: true)')

    solver_opts = argparse.ArgumentParser(add_help=False)
    solver_opts.add_argument('--max-iters', type=int, help='AdaGrad iterations (default: 20000)')
    solver_opts.add_argument('--learning-rate', type=float, help='AdaGrad step (default: 0.1)')
    solver_opts.add_argument('--adagrad-epsilon', type=float, help='AdaGrad epsilon (default: 1e-8)')
    solver_opts.add_argument('--grad-tol', type=float,
                             help='Stop when the gradient norm drops below this (default: 1e-8)')
    solver_opts.add_argument('--kappa', type=float, help='Override the data-driven kappa')
    solver_opts.add_argument('--trace-stride', type=int,
                             help='Record the loss every n iterations (default: 10)')
    solver_opts.add_argument('--threshold', type=float,
                             help='Also write G_hat with |entries| below this set to 0')

    parser = argparse.ArgumentParser(
        prog="hawkes-nphc",
        description="Non-parametric Hawkes causality estimation from integrated cumulants"
    )
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser('simulate', parents=[common, model_opts, seed_opts, cumulant_opts],
                       help='Simulate a benchmark dataset')
    p.add_argument('--output-dir', required=True, help='Directory for events.csv, G.csv, model.json')

    events_opts = argparse.ArgumentParser(add_help=False)
    events_opts.add_argument('--events', required=True, help='Event file')
    events_opts.add_argument('--format', choices=['csv', 'jsonl'], default='csv',
                             help='Event file format (default: csv)')
    events_opts.add_argument('--horizon', type=float,
                             help='Observation horizon T (default: last timestamp)')
    events_opts.add_argument('--nodes', type=int,
                             help='Number of nodes (default: largest node id + 1)')

    p = sub.add_parser('cumulants', parents=[common, events_opts, cumulant_opts],
                       help='Estimate integrated cumulants from events')
    p.add_argument('--h-grid', help='Comma-separated H values to tabulate instead')
    p.add_argument('--output-dir', required=True, help='Directory for Lambda/C/Kc CSV files')

    p = sub.add_parser('fit', parents=[common, solver_opts, seed_opts],
                       help='Recover G from estimated cumulants')
    p.add_argument('--cumulants-dir', required=True, help='Output directory of `cumulants`')
    p.add_argument('--output-dir', required=True, help='Directory for G_hat, mu_hat, R_hat')

    p = sub.add_parser('eval', parents=[common], help='Score an estimate against the truth')
    p.add_argument('--truth', required=True, help='Ground-truth G CSV')
    p.add_argument('--estimate', required=True, help='Estimated G CSV')

    p = sub.add_parser('experiment',
                       parents=[common, model_opts, seed_opts, cumulant_opts, solver_opts],
                       help='Simulate, estimate, fit and score a preset end to end')
    p.add_argument('--n-seeds', type=int, help='Number of consecutive seeds (default: 1)')
    p.add_argument('--output-dir', help='Optional directory for every intermediate file')
    return parser


def main(argv: Optional[List[str]] = None):
    """CLI entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.debug)
    app = NPHCApp(quiet=args.quiet or args.command == "eval")
    app.run(args)


if __name__ == '__main__':
    main()
