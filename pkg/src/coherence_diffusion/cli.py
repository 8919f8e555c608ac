"""Command-line front end.

Verbs: generate, calibrate, run, sweep, compare, validate-tables.  Failures
print one line ``error: <kind>: <message>`` to stderr and exit nonzero
(2 for usage and config problems, 1 for everything else).

The output directory is ``--out`` if given, else ``$COHERENCE_DIFFUSION_OUT``,
else the config's ``output.dir``, else ``./out``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .calibration import (DEFAULT_BUDGET, DEFAULT_TOLERANCE,
                          CalibrationWarning, calibrate_profiles)
from .config import ConfigError, load_config
from .engine import (DEFAULT_SWEEP, EMPIRICAL, ScenarioConfig, ScenarioError,
                     compare_scenarios, parse_mu_setting, read_averaged_csv,
                     run_scenario, run_sweep, write_averaged_csv,
                     write_delta_csv, write_manifest, write_series_csv,
                     write_sweep_csv, PopulationSpec)
from .influence import InfluenceTables
from .population import (PopulationError, generate_population, load_profiles,
                         save_population, save_profiles, tally_shares)
from .profiles import CALIBRATION_SEED, DEFAULT_N
from .socialnet import build_graph

OUT_ENV = "COHERENCE_DIFFUSION_OUT"

log = logging.getLogger("coherence_diffusion")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _out_dir(args, cfg_out=None) -> Path:
    out = (args.out or os.environ.get(OUT_ENV)
           or (cfg_out or {}).get("dir") or "out")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _profiles(spec: str):
    spec = spec or "calibrated"
    return PopulationSpec(profiles=spec).profile_list()


def _scenario(args) -> ScenarioConfig:
    cfg, out = load_config(args.scenario)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.steps is not None:
        changes["steps"] = args.steps
        if cfg.campaign is not None:
            camp = replace(cfg.campaign, schedule=frozenset(
                s for s in cfg.campaign.schedule if s < args.steps))
            changes["campaign"] = camp
    if args.replicates is not None:
        changes["replicates"] = args.replicates
    if args.population is not None:
        if not Path(args.population).is_file():
            raise FileNotFoundError(f"population file {args.population}")
        changes["population"] = PopulationSpec(path=args.population)
    elif args.profiles is not None:
        changes["population"] = replace(cfg.population, profiles=args.profiles)
    if getattr(args, "mu_override", None) is not None:
        changes["mu"] = parse_mu_setting(args.mu_override)
    if changes:
        cfg = ScenarioConfig(**{**cfg.__dict__, **changes})
    return cfg, out


def cmd_generate(args) -> int:
    profiles = _profiles(args.profiles)
    seed = CALIBRATION_SEED if args.seed is None else args.seed
    pop = generate_population(args.n, profiles, seed)
    out = _out_dir(args)
    save_population(pop, out / "population.json")
    graph = build_graph(pop, np.random.default_rng(seed))
    graph.write_edge_list(out / "edges.txt")
    shares = tally_shares(pop, by_type=True)
    (out / "generate_manifest.json").write_text(json.dumps(
        {"package": "coherence_diffusion", "version": __version__,
         "seed": seed, "n": args.n, "profiles": args.profiles,
         "edges": graph.n_edges,
         "type_shares": {str(t): s.shares.tolist() for t, s in shares.items()}},
        indent=1, sort_keys=True) + "\n")
    print(f"generated {len(pop)} agents, {graph.n_edges} ties -> {out}")
    return 0


def cmd_calibrate(args) -> int:
    profiles = _profiles(args.profiles or "default")
    seed = CALIBRATION_SEED if args.seed is None else args.seed
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", CalibrationWarning)
        res = calibrate_profiles(profiles, seed=seed, budget=args.budget,
                                 n=args.n, tolerance=args.tolerance)
    out = _out_dir(args)
    save_profiles(res.profiles, out / "profiles.json")
    (out / "calibration.json").write_text(json.dumps(
        {"seed": seed, "n": args.n, "budget": args.budget,
         "tolerance": args.tolerance, "error": res.error,
         "type_errors": {str(k): v for k, v in res.type_errors.items()},
         "iterations": res.iterations, "converged": res.converged},
        indent=1, sort_keys=True) + "\n")
    for w in caught:
        print(f"warning: calibration: {w.message}", file=sys.stderr)
    print(f"calibration error {res.error:.4f} after {res.iterations} rounds "
          f"({'converged' if res.converged else 'NOT converged'}) -> {out}")
    return 0


def cmd_run(args) -> int:
    cfg, cfg_out = _scenario(args)
    out = _out_dir(args, cfg_out)
    res = run_scenario(cfg, workers=args.parallel_replicates)
    stem = cfg.name
    write_series_csv(res.series, out / f"{stem}.series.csv")
    write_averaged_csv(res.averaged, out / f"{stem}.averaged.csv")
    write_manifest(cfg, out / f"{stem}.manifest.json",
                   {"isolated_turns": res.isolated_turns,
                    "media_events": res.media_events})
    ev = res.averaged.share("ALL", "EV")
    print(f"{stem}: EV share {ev[0]:.3f} at t=1, {ev[-1]:.3f} at "
          f"t={cfg.steps} -> {out}")
    return 0


def cmd_sweep(args) -> int:
    cfg, cfg_out = _scenario(args)
    settings = ([parse_mu_setting(s) for s in args.mu.split(",")]
                if args.mu else list(DEFAULT_SWEEP))
    reps = args.replicates if args.replicates is not None else 1
    out = _out_dir(args, cfg_out)
    res = run_sweep(cfg, settings, replicates=reps,
                    workers=args.parallel_replicates)
    stem = cfg.name
    write_sweep_csv(res, out / f"{stem}.sweep.csv")
    write_manifest(cfg, out / f"{stem}.sweep.manifest.json",
                   {"settings": [s if s == EMPIRICAL else s
                                 for s in settings],
                    "sweep_replicates": reps})
    for s, m in zip(settings, res.mean()):
        print(f"mu={s}: final EV share {m:.3f}")
    return 0


def _series_name(path: Path) -> str:
    name = path.name
    for suffix in (".averaged.csv", ".csv"):
        if name.endswith(suffix):
            return name[: -len(suffix)]
    return name


def cmd_compare(args) -> int:
    if len(args.files) < 2:
        raise UsageError("compare needs at least two averaged CSV files")
    series = []
    for f in args.files:
        p = Path(f)
        if not p.is_file():
            raise FileNotFoundError(f"averaged series {f}")
        series.append((_series_name(p), read_averaged_csv(p)))
    names = [n for n, _ in series]
    if len(set(names)) != len(names):
        raise UsageError("compare inputs must have distinct file names")
    report = compare_scenarios(series, reference=names[0])
    out = _out_dir(args)
    write_delta_csv(report, out / "compare.csv")
    for name, d in report.deltas.items():
        print(f"{name}: EV {d[-1, 0]:+.1f} pp vs {report.reference} at "
              f"t={d.shape[0]}")
    return 0


def _print_table(name, m):
    print(f"{name}:")
    for row, label in zip(m, ("sender +", "sender -")):
        print(f"  {label}  " + "  ".join(f"{x:+6.2f}" for x in row))


def cmd_validate_tables(args) -> int:
    ref = InfluenceTables()
    _print_table("pi", ref.pi)
    _print_table("alpha", ref.alpha)
    if not args.scenario:
        print("tables: embedded defaults")
        return 0
    cfg, _ = load_config(args.scenario)
    diff = ref.differences(cfg.tables)
    for line in diff:
        print(f"override {line}")
    if diff:
        print(f"tables: {len(diff)} override(s) differ from defaults")
        return 1
    print("tables: config matches defaults")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="coherence-diffusion", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    def common(sp, scenario=True):
        if scenario:
            sp.add_argument("--scenario", required=True,
                            help="scenario config file (JSON)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", help="output directory")

    g = sub.add_parser("generate", help="synthesize a population")
    common(g, scenario=False)
    g.add_argument("--profiles", default="calibrated",
                   help="'calibrated', 'default' or a profiles file")
    g.add_argument("--n", type=int, default=DEFAULT_N)

    c = sub.add_parser("calibrate", help="fit profile means to target splits")
    common(c, scenario=False)
    c.add_argument("--profiles", default="default")
    c.add_argument("--n", type=int, default=DEFAULT_N)
    c.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    c.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE)

    for verb, helptext in (("run", "run a scenario"),
                           ("sweep", "policy-impact sensitivity sweep")):
        r = sub.add_parser(verb, help=helptext)
        common(r)
        r.add_argument("--population", help="population file")
        r.add_argument("--profiles", help="profiles for the generator")
        r.add_argument("--steps", type=int)
        r.add_argument("--replicates", type=int)
        r.add_argument("--parallel-replicates", type=int, default=1)
        if verb == "run":
            r.add_argument("--mu", dest="mu_override",
                           help="'empirical' or a fixed policy impact")
        else:
            r.add_argument("--mu", help="comma-separated settings")

    cp = sub.add_parser("compare", help="EV deltas vs the first series")
    cp.add_argument("files", nargs="+")
    cp.add_argument("--out")

    v = sub.add_parser("validate-tables", help="print/check persuasion tables")
    v.add_argument("--scenario")
    return p


COMMANDS = {"generate": cmd_generate, "calibrate": cmd_calibrate,
            "run": cmd_run, "sweep": cmd_sweep, "compare": cmd_compare,
            "validate-tables": cmd_validate_tables}


def _fail(kind: str, message, code: int) -> int:
    text = " ".join(str(message).split())
    print(f"error: {kind}: {text}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        return _fail("usage", e, 2)
    logging.basicConfig(level=logging.INFO if args.verbose else
                        logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.verb](args)
    except UsageError as e:
        return _fail("usage", e, 2)
    except ConfigError as e:
        return _fail("config", e, 2)
    except FileNotFoundError as e:
        return _fail("missing-file", e, 1)
    except (PopulationError, ScenarioError, ValueError) as e:
        return _fail("invalid", e, 1)


if __name__ == "__main__":
    sys.exit(main())
