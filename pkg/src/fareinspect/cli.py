"""Command-line front end: solve, follower, generate, bench.

Every option can also come from an ``FP_<OPTION>`` environment variable
(``--ls-config`` reads ``FP_LS_CONFIG``); explicit flags win.
Exit codes: 0 success, 1 input error, 2 solver failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .bench import ALGORITHMS, SweepSettings, run_suite, suite_files, write_outputs
from .followers import (ADAPTIVE, OracleGuardError, brute_force_oracle,
                        follower_model, solve_adaptive, solve_nonadaptive_exact,
                        solve_nonadaptive_fptas)
from .generator import (GeneratorConfig, SIZE_CLASSES, default_budgets, generate_instance,
                        instance_filename)
from .leader import RelaxationError, VariantId, round_relaxation, solve_relaxation
from .localsearch import LocalSearchConfig, local_search, support_set
from .multicut import multicut_start
from .network import InstanceError, dump_instance, load_strategy, read_instance
from .seriesparallel import NotSeriesParallel, solve_nonadaptive_sp

EXIT_OK, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2


class InputError(Exception):
    pass


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fareinspect", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="relaxation, start strategy and local search")
    p.add_argument("--instance", required=True, type=Path)
    p.add_argument("--variant", required=True, choices=["fix-n", "fix-a", "flex-n", "flex-a"])
    p.add_argument("--start", default="lp", choices=["lp", "multicut"])
    p.add_argument("--epsilon", type=float, help="answer non-adaptive followers approximately")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ls-config", type=Path, help="JSON file with local-search settings")
    p.add_argument("--lp-method", default="highs", choices=["highs", "supergradient"])
    p.add_argument("--out", type=Path, help="where to write the solution JSON")

    p = sub.add_parser("follower", help="best response of one commodity")
    p.add_argument("--instance", required=True, type=Path)
    p.add_argument("--strategy", required=True, type=Path)
    p.add_argument("--commodity", required=True, type=int)
    p.add_argument("--variant", required=True, choices=["n", "a"])
    p.add_argument("--algo", default="exact", choices=["exact", "fptas", "sp", "oracle"])
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--out", type=Path)

    p = sub.add_parser("generate", help="random planar instances")
    p.add_argument("--nodes", required=True, type=int)
    p.add_argument("--commodities", required=True, type=int)
    p.add_argument("--count", required=True, type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True, type=Path)
    p.add_argument("--tag", help="file name prefix (default: size class or 'rand')")
    p.add_argument("--budget", type=float, default=1.0)
    p.add_argument("--base-price", type=float, default=1.0)
    p.add_argument("--price-slope", type=float, default=2.0)
    p.add_argument("--fine", type=float, default=6.0)

    p = sub.add_parser("bench", help="budget sweeps over an instance suite")
    p.add_argument("--suite", required=True, type=Path)
    p.add_argument("--variants", default="fix-n,fix-a,flex-n,flex-a")
    p.add_argument("--algorithms", default="lp,lp+ls,mc,mc+ls")
    p.add_argument("--budgets", default="default",
                   help="'default' (20 values from 0.2 to 25), 'file', or a comma list")
    p.add_argument("--parallel", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ls-config", type=Path)
    p.add_argument("--lp-method", default="highs", choices=["highs", "supergradient"])
    p.add_argument("--out-dir", type=Path, default=Path("bench-out"))
    p.add_argument("--omit-timing", action="store_true",
                   help="write wall_time_ms as 0 so reruns are byte-identical")
    return parser


def _apply_env(parser: argparse.ArgumentParser, argv: list[str], environ) -> None:
    """Fill option defaults from FP_* variables for the chosen subcommand."""
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    chosen = next((x for x in argv if x in sub.choices), None)
    if chosen is None:
        return
    for action in sub.choices[chosen]._actions:
        if not action.option_strings or action.dest == "help":
            continue
        key = "FP_" + action.dest.upper()
        if key not in environ:
            continue
        raw = environ[key]
        if isinstance(action, argparse._StoreTrueAction):
            value = raw.strip().lower() in ("1", "true", "yes", "on")
        else:
            value = action.type(raw) if action.type else raw
            if action.choices is not None and value not in action.choices:
                raise InputError(f"{key}={raw!r} is not one of {sorted(action.choices)}")
        action.default = value
        action.required = False


def _ls_config(path: Path | None, seed: int) -> LocalSearchConfig:
    if path is None:
        return LocalSearchConfig(seed=seed)
    data = json.loads(Path(path).read_text())
    data.setdefault("seed", seed)
    return LocalSearchConfig.from_dict(data)


def _write(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)


def cmd_solve(args) -> int:
    inst = read_instance(args.instance)
    variant = VariantId.parse(args.variant)
    config = _ls_config(args.ls_config, args.seed)
    rel = solve_relaxation(inst, args.lp_method, fares=variant.fares)
    if args.start == "lp":
        start, support = round_relaxation(inst, rel, variant).strategy, support_set(rel)
    else:
        start = multicut_start(inst)
        support = support_set(start)
    sol = local_search(inst, variant, start, support, config, upper_bound=rel.bound,
                       start_name=args.start, epsilon=args.epsilon)
    payload = sol.to_dict()
    payload["relaxation"] = {"method": rel.method, "objective": rel.objective,
                             "bound": rel.bound, "fares": rel.fares}
    text = json.dumps(payload, indent=2) + "\n"
    if args.out is not None:
        _write(text, args.out)
    print(f"{sol.profit:.6f} / {sol.upper_bound:.6f} / {sol.gap:.6f}")
    return EXIT_OK


def cmd_follower(args) -> int:
    inst = read_instance(args.instance)
    p = load_strategy(Path(args.strategy).read_text(), inst)
    k = args.commodity
    if not 0 <= k < len(inst.commodities):
        raise InputError(f"commodity index {k} out of range (0..{len(inst.commodities) - 1})")
    model = follower_model(args.variant)
    if args.algo == "oracle":
        res = brute_force_oracle(inst, p, k, model)
    elif model == ADAPTIVE:
        if args.algo != "exact":
            raise InputError(f"--algo {args.algo} applies to non-adaptive followers only")
        res = solve_adaptive(inst, p, k)
    elif args.algo == "exact":
        res = solve_nonadaptive_exact(inst, p, k)
    elif args.algo == "fptas":
        res = solve_nonadaptive_fptas(inst, p, k, args.epsilon)
    else:
        res = solve_nonadaptive_sp(inst, p, k)
    payload = {"commodity": k, "variant": res.variant, "algo": args.algo,
               "path": list(res.path), "value": res.value,
               "label": {"cost": res.label.cost, "survival": res.label.survival}}
    if res.frontier:
        payload["frontier"] = [{"cost": lab.cost, "survival": lab.survival,
                                "path": list(lab.path)} for lab in res.frontier]
    _write(json.dumps(payload, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_generate(args) -> int:
    if args.count < 0:
        raise InputError("--count must be nonnegative")
    tag = args.tag or next((name for name, n in SIZE_CLASSES.items() if n == args.nodes), "rand")
    args.out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for j in range(args.count):
        config = GeneratorConfig(n_nodes=args.nodes, n_commodities=args.commodities,
                                 base_price=args.base_price, price_slope=args.price_slope,
                                 fine=args.fine, seed=args.seed + j)
        inst = generate_instance(config, budget=args.budget)
        name = instance_filename(tag, config, args.budget)
        (args.out_dir / name).write_text(dump_instance(inst))
        entries.append({"file": name, "seed": config.seed, "nodes": inst.network.n_nodes,
                        "edges": inst.network.n_edges, "commodities": len(inst.commodities)})
    manifest = {"tag": tag, "nodes": args.nodes, "commodities": args.commodities,
                "fine": args.fine, "base_price": args.base_price,
                "price_slope": args.price_slope, "instances": entries}
    (args.out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {len(entries)} instance(s) to {args.out_dir}")
    return EXIT_OK


def cmd_bench(args) -> int:
    variants = tuple(VariantId.parse(v.strip()).code for v in args.variants.split(",") if v.strip())
    algorithms = tuple(a.strip() for a in args.algorithms.split(",") if a.strip())
    unknown = [a for a in algorithms if a not in ALGORITHMS]
    if unknown:
        raise InputError(f"unknown algorithm(s) {unknown}; choose from {list(ALGORITHMS)}")
    if args.budgets == "default":
        budgets = tuple(default_budgets())
    elif args.budgets == "file":
        budgets = None
    else:
        budgets = tuple(sorted(_float_list(args.budgets)))
        if not budgets or min(budgets) < 0:
            raise InputError("--budgets needs nonnegative values")
    settings = SweepSettings(variants, algorithms, budgets, _ls_config(args.ls_config, args.seed),
                             args.lp_method, omit_timing=args.omit_timing)
    records = run_suite(suite_files(args.suite), args.seed, settings, max(1, args.parallel))
    paths = write_outputs(records, args.out_dir)
    failed = sum(r.status != "ok" for r in records)
    print(f"{len(records)} runs, {failed} failed; results in {paths['runs']}")
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "follower": cmd_follower, "generate": cmd_generate,
            "bench": cmd_bench}


def main(argv=None, environ=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    environ = os.environ if environ is None else environ
    parser = build_parser()
    try:
        _apply_env(parser, argv, environ)
        args = parser.parse_args(argv)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except (RelaxationError, OracleGuardError, RuntimeError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except NotSeriesParallel as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InputError, InstanceError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
