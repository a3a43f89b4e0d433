"""``bench`` command line: experiments, acceptance suites, instance generation, exact optima, service."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from ..instances.adversarial import gen_adversarial
from ..instances.io import InstanceParseError, read_instance, write_instance
from ..instances.stochastic import StochasticConfig, gen_stochastic
from ..instances.tiny import random_tiny
from ..model import ConfigurationError
from ..oracles.analytic import FAMILIES
from ..oracles.bruteforce import StateSpaceOverflow, bruteforce_opt
from ..rng import stream

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    from .acceptance import SUITES
    from .experiments import EXPERIMENTS

    p = argparse.ArgumentParser(prog="bench", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment sweep and write CSV files")
    run.add_argument("--experiment", required=True, choices=EXPERIMENTS)
    run.add_argument("--config", help="JSON file with ExperimentConfig fields")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--replications", type=int)
    run.add_argument("--seed", type=int, help="base seed")
    run.add_argument("--full-scale", action="store_true")
    run.add_argument("--no-timing", action="store_true", help="omit timing columns so output is byte-reproducible")
    run.add_argument("--workers", type=int)

    acc = sub.add_parser("accept", help="run acceptance criteria")
    acc.add_argument("--suite", default="all", choices=SUITES)
    acc.add_argument("--report", help="write a JSON report here")

    gen = sub.add_parser("gen", help="write instance files")
    gen.add_argument("--family", required=True, choices=FAMILIES + ("stochastic", "tiny"))
    gen.add_argument("--params", default="{}", help="JSON object of family parameters")
    gen.add_argument("--seed", type=int, default=0, help="seed for stochastic and tiny families")
    gen.add_argument("--out", required=True)

    opt = sub.add_parser("opt", help="exact offline optimum by exhaustive search")
    opt.add_argument("--instance", required=True)
    opt.add_argument("--max-states", type=int, default=10**7)

    srv = sub.add_parser("serve", help="run the decision service")
    srv.add_argument("--socket", help="listen on this Unix socket instead of stdin/stdout")
    srv.add_argument("--journal", help="append every request and response to this JSON-lines file")
    srv.add_argument("--replay", help="rebuild sessions from an existing journal before serving")
    return p


def _cmd_run(args) -> int:
    from .experiments import ExperimentConfig, run_experiment

    data = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config file is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigurationError("config file must hold a JSON object")
    data["experiment"] = args.experiment
    data["out_dir"] = args.out
    if args.replications is not None:
        data["replications"] = args.replications
    if args.seed is not None:
        data["base_seed"] = args.seed
    if args.full_scale:
        data["full_scale"] = True
    if args.no_timing:
        data["timing"] = False
    if args.workers is not None:
        data["workers"] = args.workers
    result = run_experiment(ExperimentConfig.from_dict(data))
    print(f"rows: {result.rows_path}")
    print(f"aggregate: {result.aggregate_path}")
    if result.failures:
        print(f"{result.failures} policy runs failed; see the status column", file=sys.stderr)
    return EXIT_OK


def _cmd_accept(args) -> int:
    from .acceptance import run_acceptance

    results = run_acceptance(args.suite, echo=lambda line: print(line, flush=True))
    if args.report:
        Path(args.report).write_text(json.dumps([r.to_json() for r in results], indent=1, default=str) + "\n")
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    return EXIT_OK if passed == len(results) else EXIT_FAILED


def _cmd_gen(args) -> int:
    try:
        params = json.loads(args.params)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"--params is not valid JSON: {exc}") from None
    if not isinstance(params, dict):
        raise ConfigurationError("--params must be a JSON object")
    if args.family == "stochastic":
        instances = [gen_stochastic(StochasticConfig().replace(**params), args.seed)]
    elif args.family == "tiny":
        instances = [random_tiny(stream(args.seed, "instance"), **params)]
    else:
        instances = gen_adversarial(args.family, **params)
    out = Path(args.out)
    if len(instances) == 1:
        paths = [out]
    else:
        paths = [out.with_name(f"{out.stem}-{inst.meta['member']}{out.suffix or '.json'}") for inst in instances]
    for inst, path in zip(instances, paths):
        path.parent.mkdir(parents=True, exist_ok=True)
        write_instance(inst, path)
        print(path)
    return EXIT_OK


def _cmd_opt(args) -> int:
    inst = read_instance(args.instance)
    try:
        res = bruteforce_opt(inst, max_states=args.max_states)
    except StateSpaceOverflow as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = {
        "opt_cost": res.opt_cost,
        "method": res.method,
        "search_stats": res.search_stats,
        "opt_plan": None if res.opt_plan is None else [p.tolist() for p in res.opt_plan],
    }
    print(json.dumps(out, default=str))
    return EXIT_OK


def _cmd_serve(args) -> int:
    from ..service import SessionStore, serve_socket, serve_stdio

    if args.replay:
        store = SessionStore.replay(args.replay, resume_journal=args.journal)
    else:
        store = SessionStore(journal=args.journal)
    if args.socket:
        serve_socket(store, args.socket)
    else:
        serve_stdio(store)
    return EXIT_OK


COMMANDS = {"run": _cmd_run, "accept": _cmd_accept, "gen": _cmd_gen, "opt": _cmd_opt, "serve": _cmd_serve}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigurationError, InstanceParseError, FileNotFoundError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
