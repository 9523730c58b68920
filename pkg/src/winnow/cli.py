"""Command line: cluster, optimize, explain, synth, serve.

Every artifact starts with its fully resolved configuration as `# key =
value` lines, and any artifact can be replayed byte-identically by passing
it back through --config (explicit flags still win). Summaries go to
stderr so artifacts on stdout stay clean.

Exit codes: 0 success, 1 usage error, 2 data error, 3 budget truncation.
"""

from __future__ import annotations

import argparse
import json
import math
import statistics
import sys
from pathlib import Path

from .cluster import ClusterConfig, cluster, leaf_sizes, tree_to_text
from .data import ConfigError, Dataset, EvaluationError, IngestionError, d2h, parse_csv, to_csv
from .explain import Rule, contrast_rules, pick_desired_current
from .optimize import ObjectiveOracle, greedy_descend, non_greedy, random_search
from .synth import gen_synthetic

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_TRUNCATED = 3

# field order defines the header; every subcommand echoes all of its fields
FIELDS = {
    "cluster": ["data", "seed", "min_leaf", "out"],
    "optimize": ["data", "seed", "budget", "min_leaf", "algo", "repeats", "out"],
    "explain": ["data", "seed", "min_leaf", "top_n", "desired", "current", "out"],
    "synth": ["family", "n", "k", "seed", "inject_optimum", "out"],
    "serve": ["data", "seed", "budget", "top_n", "serve", "ui"],
}

DEFAULTS = {
    "data": "",
    "seed": "0",
    "budget": "auto",
    "min_leaf": "auto",
    "top_n": "10",
    "algo": "greedy",
    "repeats": "1",
    "out": "-",
    "desired": "",
    "current": "",
    "family": "sphere",
    "n": "256",
    "k": "5",
    "inject_optimum": "0",
    "serve": "127.0.0.1:8173",
    "ui": "",
}


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def read_config_header(path: str) -> dict[str, str]:
    """Pull `# key = value` lines off the top of any artifact (or a plain
    key = value file)."""
    out: dict[str, str] = {}
    for line in Path(path).read_text().splitlines():
        text = line[1:].strip() if line.startswith("#") else line.strip()
        if not text:
            if out:
                break
            continue
        if "=" not in text:
            break
        key, _, value = text.partition("=")
        key = key.strip()
        if not key or " " in key:
            break
        out[key] = value.strip()
    return out


def resolve(subcommand: str, args: argparse.Namespace) -> dict[str, str]:
    cfg = {k: DEFAULTS[k] for k in FIELDS[subcommand]}
    if getattr(args, "config", None):
        header = read_config_header(args.config)
        for k, v in header.items():
            if k in cfg:
                cfg[k] = v
    for k in FIELDS[subcommand]:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = str(v)
    return cfg


def header_lines(subcommand: str, cfg: dict[str, str]) -> list[str]:
    lines = [f"# subcommand = {subcommand}"]
    lines += [f"# {k} = {cfg[k]}" for k in FIELDS[subcommand]]
    return lines


def int_or_auto(value: str, auto, name: str):
    if value == "auto":
        return auto
    try:
        return int(value)
    except ValueError:
        raise CliError(f"{name} must be an integer or 'auto', got {value!r}", EXIT_USAGE)


def load_dataset(cfg: dict[str, str]) -> Dataset:
    path = cfg.get("data") or ""
    if not path:
        raise CliError("--data is required", EXIT_USAGE)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_csv(fh)
    except FileNotFoundError:
        raise CliError(f"cannot read {path!r}: no such file", EXIT_DATA)
    except IngestionError as exc:
        raise CliError(f"{path}: {exc}", EXIT_DATA)


def write_artifact(cfg: dict[str, str], text: str) -> None:
    if cfg.get("out", "-") == "-":
        sys.stdout.write(text)
    else:
        Path(cfg["out"]).write_text(text, encoding="utf-8")


def auto_budget(n: int) -> int:
    return 2 * math.ceil(math.log2(max(2, n)))


# -- subcommands -------------------------------------------------------------


def cmd_cluster(args) -> int:
    cfg = resolve("cluster", args)
    ds = load_dataset(cfg)
    min_leaf = int_or_auto(cfg["min_leaf"], None, "min_leaf")
    tree = cluster(ds, ClusterConfig(min_leaf=min_leaf, seed=int(cfg["seed"])))
    body = tree_to_text(tree)
    write_artifact(cfg, "\n".join(header_lines("cluster", cfg)) + "\n" + body)

    sizes = leaf_sizes(tree)
    print(f"rows = {len(ds.rows)}", file=sys.stderr)
    print(f"leaves = {len(sizes)}", file=sys.stderr)
    for size in sorted(set(sizes)):
        print(f"leaf_size {size} x {sizes.count(size)}", file=sys.stderr)
    return EXIT_OK


def _one_search(ds, algo, seed, budget, min_leaf):
    oracle = ObjectiveOracle(ds, budget)
    ccfg = ClusterConfig(min_leaf=min_leaf, seed=seed)
    if algo == "greedy":
        return greedy_descend(ds, ccfg, oracle)
    if algo == "nongreedy":
        return non_greedy(ds, ccfg, oracle)
    if algo == "random":
        return random_search(ds, oracle, budget, seed=seed)
    raise CliError(f"unknown algo {algo!r}", EXIT_USAGE)


def cmd_optimize(args) -> int:
    cfg = resolve("optimize", args)
    ds = load_dataset(cfg)
    n = len(ds.rows)
    budget = int_or_auto(cfg["budget"], auto_budget(n), "budget")
    min_leaf = int_or_auto(cfg["min_leaf"], None, "min_leaf")
    repeats = int(cfg["repeats"])
    seed0 = int(cfg["seed"])

    lines = header_lines("optimize", cfg)
    lines.append(f"n = {n}")
    lines.append(f"budget_resolved = {budget}")
    best_scores = []
    truncated_any = False
    try:
        for i in range(repeats):
            seed = seed0 + i
            res = _one_search(ds, cfg["algo"], seed, budget, min_leaf)
            score = d2h(res.best_row, ds) if res.best_row is not None else math.inf
            best_scores.append(score)
            truncated_any = truncated_any or res.truncated
            best_id = res.best_row.id if res.best_row is not None else -1
            lines.append(
                f"run seed={seed} evals={res.evals} truncated={int(res.truncated)} "
                f"best_id={best_id} d2h={score!r}"
            )
            if res.best_row is not None:
                cells = ", ".join(
                    f"{c.name}={_fmt(v)}" for c, v in zip(ds.columns, res.best_row.cells)
                )
                lines.append(f"best_row seed={seed}: {cells}")
            lines.append(
                "trace seed=%d: %s" % (seed, " ".join(f"{a}v{b}={w}" for a, b, w in res.trace))
            )
    except (EvaluationError, ConfigError) as exc:
        raise CliError(str(exc), EXIT_DATA)
    lines.append(f"median_d2h = {statistics.median(best_scores)!r}")
    iqr = 0.0
    if len(best_scores) >= 2:
        qs = statistics.quantiles(best_scores, n=4, method="inclusive")
        iqr = qs[2] - qs[0]
    lines.append(f"iqr_d2h = {iqr!r}")
    write_artifact(cfg, "\n".join(lines) + "\n")
    print(f"median_d2h = {statistics.median(best_scores)!r}", file=sys.stderr)
    return EXIT_TRUNCATED if truncated_any else EXIT_OK


def _fmt(v) -> str:
    if v is None:
        return "?"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _rule_json(rule: Rule) -> str:
    clauses = []
    for col, ranges in sorted(rule.clauses.items()):
        if ranges[0].is_numeric:
            spans = [
                [None if math.isinf(r.lo) else r.lo, None if math.isinf(r.hi) else r.hi]
                for r in ranges
            ]
            clauses.append({"column": col, "spans": spans})
        else:
            tokens = sorted(set().union(*(r.symbols for r in ranges)))
            clauses.append({"column": col, "symbols": tokens})
    record = {
        "clauses": clauses,
        "score": rule.score,
        "x": rule.x_freq,
        "y": rule.y_freq,
        "size": rule.size,
    }
    return json.dumps(record, sort_keys=True)


def cmd_explain(args) -> int:
    cfg = resolve("explain", args)
    ds = load_dataset(cfg)
    min_leaf = int_or_auto(cfg["min_leaf"], None, "min_leaf")
    tree = cluster(ds, ClusterConfig(min_leaf=min_leaf, seed=int(cfg["seed"])))
    desired_id = int(cfg["desired"]) if cfg["desired"] else None
    current_id = int(cfg["current"]) if cfg["current"] else None
    try:
        desired, current = pick_desired_current(tree, ds, desired_id, current_id)
        d_rows = [ds.row(i) for i in desired.row_ids]
        c_rows = [ds.row(i) for i in current.row_ids]
        rules = contrast_rules(ds, d_rows, c_rows, top_n=int(cfg["top_n"]))
    except (EvaluationError, ConfigError, ValueError) as exc:
        raise CliError(str(exc), EXIT_DATA)

    lines = header_lines("explain", cfg)
    lines.append(f"n = {len(ds.rows)}")
    lines.append(f"desired_leaf = {desired.node_id} size={len(desired.row_ids)}")
    lines.append(f"current_leaf = {current.node_id} size={len(current.row_ids)}")
    if rules:
        best = rules[0]
        lines.append(f"rule = {best.render()}")
        lines.append(f"score = {best.score!r}")
        lines.append(f"x = {best.x_freq!r}")
        lines.append(f"y = {best.y_freq!r}")
        lines.append(f"json = {_rule_json(best)}")
    else:
        lines.append("rule =")
        lines.append("score = 0.0")
    write_artifact(cfg, "\n".join(lines) + "\n")
    if rules:
        print(f"rule = {rules[0].render()}", file=sys.stderr)
    return EXIT_OK


def cmd_synth(args) -> int:
    cfg = resolve("synth", args)
    try:
        ds = gen_synthetic(
            cfg["family"],
            int(cfg["n"]),
            k=int(cfg["k"]),
            seed=int(cfg["seed"]),
            inject_optimum=cfg["inject_optimum"] not in ("0", "", "False", "false"),
        )
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE)
    write_artifact(cfg, "\n".join(header_lines("synth", cfg)) + "\n" + to_csv(ds))
    print(f"rows = {len(ds.rows)}", file=sys.stderr)
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    raw_data = args.data  # append action: a list when given on the command line
    args.data = None
    cfg = resolve("serve", args)
    if raw_data:
        cfg["data"] = ";".join(raw_data)
    paths = [p for p in (cfg["data"] or "").split(";") if p]
    if not paths:
        raise CliError("--data is required", EXIT_USAGE)
    datasets = {}
    for path in paths:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                datasets[Path(path).stem] = parse_csv(fh)
        except FileNotFoundError:
            raise CliError(f"cannot read {path!r}: no such file", EXIT_DATA)
        except IngestionError as exc:
            raise CliError(f"{path}: {exc}", EXIT_DATA)
    budget = None if cfg["budget"] == "auto" else int(cfg["budget"])
    addr, _, port = cfg["serve"].rpartition(":")
    if not addr or not port.isdigit():
        raise CliError(f"--serve wants ADDR:PORT, got {cfg['serve']!r}", EXIT_USAGE)
    static_dir = cfg["ui"] or None
    if static_dir is None and Path("frontend/dist").is_dir():
        static_dir = "frontend/dist"
    app = create_app(
        datasets,
        default_seed=int(cfg["seed"]),
        budget=budget,
        top_n=int(cfg["top_n"]),
        static_dir=static_dir,
    )
    print(f"serving {sorted(datasets)} on http://{addr}:{port}", file=sys.stderr)
    uvicorn.run(app, host=addr, port=int(port), log_level="warning")
    return EXIT_OK


def build_parser() -> Parser:
    parser = Parser(prog="winnow", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, fields):
        p.add_argument("--config", help="replay a previous artifact's header")
        if "data" in fields:
            p.add_argument("--data", help="input CSV")
        if "seed" in fields:
            p.add_argument("--seed", type=int)
        if "budget" in fields:
            p.add_argument("--budget", help="evaluation budget, integer or 'auto'")
        if "min_leaf" in fields:
            p.add_argument("--min-leaf", dest="min_leaf", help="leaf size, integer or 'auto'")
        if "top_n" in fields:
            p.add_argument("--top-n", dest="top_n", type=int)
        if "out" in fields:
            p.add_argument("--out", help="artifact path, '-' for stdout")

    p = sub.add_parser("cluster", help="build and print the bi-cluster tree")
    common(p, FIELDS["cluster"])
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("optimize", help="search under a budget")
    common(p, FIELDS["optimize"])
    p.add_argument("--algo", choices=["greedy", "nongreedy", "random"])
    p.add_argument("--repeats", type=int)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("explain", help="contrast rule between best and worst leaves")
    common(p, FIELDS["explain"])
    p.add_argument("--desired", help="leaf node id override")
    p.add_argument("--current", help="leaf node id override")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("synth", help="generate a synthetic benchmark CSV")
    common(p, FIELDS["synth"])
    p.add_argument("--family", choices=["sphere", "tradeoff"])
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--inject-optimum", dest="inject_optimum", action="store_const", const="1")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("serve", help="run the review-session service")
    p.add_argument("--config", help="replay a previous artifact's header")
    p.add_argument("--data", action="append", help="dataset CSV (repeatable)")
    p.add_argument("--seed", type=int)
    p.add_argument("--budget")
    p.add_argument("--top-n", dest="top_n", type=int)
    p.add_argument("--serve", dest="serve", help="ADDR:PORT")
    p.add_argument("--ui", help="static UI bundle directory")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: "list[str] | None" = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"winnow: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
