"""Command-line entry point: ``c2clink <command> ...``.

Exit codes: 0 ok, 1 I/O error, 2 schema error, 3 unknown user, 4 bad config.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import fields

from .config import ConfigError, RunConfig, make_config, parse_value, read_config_file
from .evaluation import run_experiment
from .graph import (
    SchemaError,
    build_graph,
    graph_stats,
    load_snapshot,
    parse_csv,
    save_snapshot,
    write_csv,
)
from .items import build_recommendations, mine_rules, write_rules
from .scoring import cold_start_candidates, rank_candidates
from .similarity import compute_simrank, dump_similarity, load_similarity
from .synthetic import GeneratorSpec, generate_synthetic

_log = logging.getLogger("c2clink")

EXIT_OK, EXIT_IO, EXIT_SCHEMA, EXIT_LOOKUP, EXIT_CONFIG = 0, 1, 2, 3, 4

_FLAG_HELP = {
    "damping": "SimRank damping factor C",
    "max_iters": "maximum SimRank sweeps",
    "tol": "SimRank convergence tolerance",
    "n_similar": "size n of each user's similar-user list",
    "alpha": "category score weight",
    "beta": "rating score weight",
    "gamma": "reputation score weight",
    "item_method": "best_selling, random or rules",
    "min_support": "apriori minimum support (fraction of baskets)",
    "min_count": "apriori minimum support (absolute basket count)",
    "min_confidence": "minimum rule confidence",
    "folds": "number of cross-validation folds",
    "samples": "target users sampled per fold",
    "list_sizes": 'prediction-list sizes, e.g. "1-25" or "1,5,10"',
    "mode": "user-level series to run: both, M1 or M2",
    "max_target_links": "only sample targets with at most this many held-out sellers (0 = no cap)",
    "top": "number of sellers to recommend",
    "seed": "global random seed",
    "rating_min": "lowest value of the raw rating scale",
    "rating_max": "highest value of the raw rating scale",
    "threads": "worker threads for evaluation (does not change results)",
}


class _Typed(argparse.Action):
    def __call__(self, parser, namespace, values, option_string=None):
        setattr(namespace, self.dest, parse_value(self.dest, values))


def _add_run_flags(p: argparse.ArgumentParser, keys=None):
    g = p.add_argument_group("run configuration (flags override --config)")
    g.add_argument("--config", help="key = value config file")
    for f in fields(RunConfig):
        if keys is not None and f.name not in keys:
            continue
        g.add_argument("--" + f.name.replace("_", "-"), dest=f.name, action=_Typed,
                       default=None, help=_FLAG_HELP.get(f.name))


def _config(args) -> RunConfig:
    file_values = read_config_file(args.config) if getattr(args, "config", None) else {}
    overrides = {f.name: getattr(args, f.name, None) for f in fields(RunConfig)}
    return make_config(file_values, overrides)


def _load_graph(path, cfg: RunConfig):
    """Graph from a snapshot written by ``ingest`` or straight from a CSV."""
    if str(path).endswith(".json"):
        return load_snapshot(path)
    txns, rejected = parse_csv(path, cfg.rating_scale)
    if rejected:
        _log.warning("%d rows rejected while reading %s", len(rejected), path)
    return build_graph(txns)


def _write_or_print(text: str, path):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _print_stats(g, out=None):
    s = graph_stats(g)
    print(
        f"users={s.users} edges={s.edges} density={s.density:.6f} "
        f"average_degree={s.average_degree:.3f} max_in_degree={s.max_in_degree} "
        f"max_out_degree={s.max_out_degree}",
        file=out or sys.stdout,
    )


def cmd_ingest(args) -> int:
    cfg = _config(args)
    txns, rejected = parse_csv(args.input, cfg.rating_scale)
    g = build_graph(txns)
    if args.output:
        save_snapshot(g, args.output)
    print(f"{len(txns)} rows accepted, {len(rejected)} rows rejected")
    for err in rejected[: args.show_rejected]:
        print(f"  rejected {err}")
    _print_stats(g)
    return EXIT_OK


def _r6(x):
    return None if x is None else round(float(x), 6)


def cmd_recommend(args) -> int:
    cfg = _config(args)
    g = _load_graph(args.graph, cfg)
    u = args.user
    if u not in g and not args.new_user:
        print(f"unknown user {u!r}", file=sys.stderr)
        return EXIT_LOOKUP

    ranked = []
    if u in g and g.sellers_of(u):
        if args.similarity_cache and os.path.exists(args.similarity_cache):
            table = load_similarity(args.similarity_cache, g)
        else:
            table = compute_simrank(g, cfg.damping, cfg.max_iters, cfg.tol)
            if args.similarity_cache:
                dump_similarity(table, args.similarity_cache)
        ranked = rank_candidates(g, table, u, cfg.n_similar, cfg.alpha, cfg.beta, cfg.gamma, cfg.top)

    rules = None
    if cfg.item_method == "rules":
        rules = mine_rules(g, cfg.min_support, cfg.min_confidence, cfg.min_count)
    if ranked:
        rec = build_recommendations(g, ranked, u, cfg.item_method, cfg.seed, rules)
        by_seller = {c.seller: c for c in ranked}
    else:
        sellers = cold_start_candidates(g, u, cfg.top)
        rec = build_recommendations(g, sellers, u, cfg.item_method, cfg.seed, rules, source="cold_start")
        by_seller = {}

    out = []
    for e in rec.entries:
        c = by_seller.get(e.seller)
        n = c.normalized if c else None
        out.append({
            "seller": e.seller,
            "cat": _r6(n.cat) if n else None,
            "rep": _r6(n.rep) if n else None,
            "rat": _r6(n.rat) if n else None,
            "total": _r6(e.total_score),
            "item": e.item,
            "method": e.selection_method,
        })
    doc = {
        "target": u,
        "source": rec.source,
        "coefficients": {"alpha": _r6(cfg.alpha), "beta": _r6(cfg.beta), "gamma": _r6(cfg.gamma)},
        "candidates": out,
    }
    _write_or_print(json.dumps(doc, indent=1) + "\n", args.output)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    cfg = _config(args)
    g = _load_graph(args.input, cfg)
    report = run_experiment(g.transactions, cfg)
    _write_or_print(report.to_json(), args.output)
    if args.csv:
        _write_or_print(report.to_csv(), args.csv)
    print(report.table())
    return EXIT_OK


_SPEC_FLAGS = {
    "transactions": "n_transactions",
    "buyers": "n_buyers",
    "sellers": "n_sellers",
    "categories": "n_categories",
    "items_per_seller": "items_per_seller",
    "affinity": "affinity",
    "item_skew": "item_skew",
    "seller_skew": "seller_skew",
    "buyer_skew": "buyer_skew",
    "quality_strength": "quality_strength",
    "rating_noise": "rating_noise",
    "repeat_rate": "repeat_rate",
    "dual_role": "dual_role",
}


def cmd_synth(args) -> int:
    cfg = _config(args)
    overrides = {field: getattr(args, flag) for flag, field in _SPEC_FLAGS.items()
                 if getattr(args, flag) is not None}
    try:
        spec = GeneratorSpec.sparse(**overrides) if args.sparse else GeneratorSpec(**overrides)
    except TypeError as err:
        raise ConfigError(str(err)) from None
    txns = generate_synthetic(spec, cfg.seed, cfg.rating_scale)
    write_csv(txns, args.output, cfg.rating_scale)
    print(f"wrote {len(txns)} transactions to {args.output}")
    _print_stats(build_graph(txns))
    return EXIT_OK


def cmd_mine_rules(args) -> int:
    cfg = _config(args)
    g = _load_graph(args.input, cfg)
    rules = mine_rules(g, cfg.min_support, cfg.min_confidence, cfg.min_count)
    if args.output:
        write_rules(rules, args.output)
        print(f"{len(rules)} rules written to {args.output}")
    else:
        for r in rules:
            print(r.to_json())
    return EXIT_OK


def cmd_stats(args) -> int:
    cfg = _config(args)
    _print_stats(_load_graph(args.input, cfg))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="c2clink", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a transaction CSV and cache the graph")
    p.add_argument("input")
    p.add_argument("-o", "--output", help="graph snapshot (JSON) to write")
    p.add_argument("--show-rejected", type=int, default=20, metavar="N")
    _add_run_flags(p, {"rating_min", "rating_max"})
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("recommend", help="recommend sellers and items to one user")
    p.add_argument("graph", help="graph snapshot or transaction CSV")
    p.add_argument("user")
    p.add_argument("-o", "--output")
    p.add_argument("--similarity-cache", help="read (or create) a SimRank dump here")
    p.add_argument("--new-user", action="store_true", help="treat an unknown user as a cold start")
    _add_run_flags(p)
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("evaluate", help="k-fold cross-validated evaluation")
    p.add_argument("input", help="graph snapshot or transaction CSV")
    p.add_argument("-o", "--output", required=True, help="JSON report path")
    p.add_argument("--csv", help="also write the metric table as CSV")
    _add_run_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth", help="write a synthetic transaction CSV")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--sparse", action="store_true",
                   help="sparse preset: about 1,400 users, average degree about 1.3")
    for flag, field in _SPEC_FLAGS.items():
        kind = type(getattr(GeneratorSpec(), field))
        p.add_argument("--" + flag.replace("_", "-"), dest=flag, type=kind, default=None)
    _add_run_flags(p, {"seed", "rating_min", "rating_max"})
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("mine-rules", help="mine association rules over purchase baskets")
    p.add_argument("input")
    p.add_argument("-o", "--output", help="JSON-lines output")
    _add_run_flags(p, {"min_support", "min_confidence", "min_count", "rating_min", "rating_max"})
    p.set_defaults(func=cmd_mine_rules)

    p = sub.add_parser("stats", help="print graph size and degree statistics")
    p.add_argument("input")
    _add_run_flags(p, {"rating_min", "rating_max"})
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except SchemaError as err:
        print(f"schema error: {err}", file=sys.stderr)
        return EXIT_SCHEMA
    except OSError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
