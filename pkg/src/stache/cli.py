"""Command-line surface: train, explain, sweep, verify, render.

All artifacts (JSON, CSV, SVG) are written with fixed key order, fixed state
ordering, and no timestamps, so identical inputs and seeds reproduce byte
identical files.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import logging
import os
import sys
from pathlib import Path

from .envs import BUILTIN_ENVS, make_env
from .errors import StacheError
from .factored_space import hybrid_distance
from .oracle import ComponentLabeling, oracle_min_counterfactuals
from .policies import (
    evaluate_policy,
    external_policy,
    load_policy_table,
    q_learning_with_checkpoints,
    save_policy_table,
    value_iteration,
)
from .render import render_svg, render_text
from .search import (
    MODE_CUTOFF,
    MODE_EXACT,
    SearchConfig,
    stache_cutoff,
    stache_exact,
)

log = logging.getLogger("stache")


def _coerce(raw: str):
    try:
        return int(raw)
    except ValueError:
        return raw


def parse_state_literal(text: str, f) -> tuple:
    """Parse ``0,0,0,2`` or ``row=0,col=0,P=0,D=2`` into a validated state."""
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if any("=" in p for p in parts):
        by_name = {}
        for part in parts:
            name, sep, raw = part.partition("=")
            if not sep or not name.strip():
                raise ValueError(f"bad state component {part!r}")
            by_name[name.strip()] = _coerce(raw.strip())
        missing = [n for n in f.names if n not in by_name]
        extra = [n for n in by_name if n not in f.names]
        if missing or extra:
            raise ValueError(
                f"state names do not match factorization "
                f"(missing {missing}, unknown {extra})"
            )
        values = tuple(by_name[n] for n in f.names)
    else:
        if len(parts) != len(f.factors):
            raise ValueError(
                f"expected {len(f.factors)} comma-separated values, got {len(parts)}"
            )
        values = tuple(_coerce(p) for p in parts)
    f.validate_state(values)
    return values


def parse_state_list(text: str, f) -> list:
    """Semicolon-separated list of state literals; empty string is empty."""
    return [parse_state_literal(p, f) for p in text.split(";") if p.strip()]


def open_policy(endpoint: str, f, n_actions, stack: contextlib.ExitStack):
    """File path, ``exec:CMD`` or ``tcp:HOST:PORT`` endpoint to a Policy."""
    if endpoint.startswith(("exec:", "tcp:")):
        log.info("connecting external policy %s", endpoint)
        pol = external_policy(endpoint, f, n_actions=n_actions)
        stack.callback(pol.close)
        return pol
    return load_policy_table(endpoint, expect_factorization=f)


def _write_text(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    log.info("wrote %s", path)


def _json_text(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


# -- train --------------------------------------------------------------


def cmd_train(args) -> int:
    model = make_env(args.env)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.algo == "vi":
        policy = value_iteration(model)
        path = out / "vi.json"
        save_policy_table(policy, path)
        ret = evaluate_policy(model, policy, episodes=args.eval_episodes,
                              seed=args.seed_rng)
        print(f"trained value iteration on {model.name}: "
              f"policy {path}, eval return {ret:.3f}")
        return 0

    tags = tuple(float(t) for t in args.checkpoints.split(","))
    cs = q_learning_with_checkpoints(
        model, episodes=args.episodes, checkpoints=tags, seed=args.seed_rng
    )
    manifest = {
        "schema": "stache-training/1",
        "env": model.name,
        "algorithm": "q_learning",
        "seed": cs.seed,
        "hyperparameters": cs.hyperparameters,
        "checkpoints": [],
    }
    for tag, policy in cs.checkpoints:
        path = out / f"q_{int(round(tag * 100)):03d}.json"
        save_policy_table(policy, path)
        ret = evaluate_policy(model, policy, episodes=args.eval_episodes,
                              seed=args.seed_rng)
        manifest["checkpoints"].append(
            {"tag": tag, "file": path.name, "eval_return": ret}
        )
        print(f"checkpoint {tag:g}: policy {path}, eval return {ret:.3f}")
    _write_text(out / "training.json", _json_text(manifest))
    return 0


# -- explain ------------------------------------------------------------


def cmd_explain(args) -> int:
    model = make_env(args.env)
    f = model.factorization
    seed = parse_state_literal(args.state, f)
    config = SearchConfig(max_region=args.max_region, batch=args.batch)
    search = {MODE_EXACT: stache_exact, MODE_CUTOFF: stache_cutoff}[args.mode]
    with contextlib.ExitStack() as stack:
        policy = open_policy(args.policy, f, model.n_actions, stack)
        expl = search(f, policy, seed, config)
    text = expl.to_json(action_names=model.action_names)
    if args.out:
        _write_text(args.out, text)
    else:
        sys.stdout.write(text)
    if args.render:
        doc = expl.to_dict(action_names=model.action_names)
        if args.render.endswith(".svg"):
            _write_text(args.render, render_svg(doc))
        else:
            _write_text(args.render, render_text(doc))
    return 0


# -- sweep --------------------------------------------------------------


def _checkpoint_label(policy, endpoint: str) -> str:
    meta = getattr(policy, "metadata", None) or {}
    tag = meta.get("checkpoint")
    if tag:
        return str(tag)
    name = endpoint.rsplit("/", 1)[-1]
    return name[:-5] if name.endswith(".json") else name


def _changed_factors(f, seed, members):
    """Factor names touched by any minimal counterfactual, factor order."""
    touched = set()
    for s, _ in members:
        for name, a, b in zip(f.names, seed, s):
            if a != b:
                touched.add(name)
    return [n for n in f.names if n in touched]


def _sweep_rows(model, policies, seeds, max_region):
    f = model.factorization
    rows = []
    for seed in seeds:
        for label, policy in policies:
            expl = stache_exact(f, policy, seed,
                                SearchConfig(max_region=max_region))
            cf = expl.counterfactuals
            rows.append({
                "checkpoint": label,
                "seed": ",".join(str(v) for v in seed),
                "action_name": model.action_names[expl.seed_action],
                "rr_size": expl.region.size,
                "cf_min_distance": cf.min_distance,
                "cf_count": len(cf.states),
                "cf_changed_factors": _changed_factors(f, seed, cf.states),
            })
    return rows


def _sweep_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["checkpoint", "seed", "action_name", "rr_size",
                "cf_min_distance", "cf_count", "cf_changed_factors"])
    for r in rows:
        w.writerow([
            r["checkpoint"], r["seed"], r["action_name"], r["rr_size"],
            "" if r["cf_min_distance"] is None else r["cf_min_distance"],
            r["cf_count"], ";".join(r["cf_changed_factors"]),
        ])
    return buf.getvalue()


def _cf_logic(row) -> str:
    if row["cf_min_distance"] is None:
        return "no counterfactuals"
    return (f"{row['cf_count']} CFs at distance {row['cf_min_distance']} "
            f"changing {','.join(row['cf_changed_factors'])}")


def _sweep_table(rows) -> str:
    """Action / RR Size / CF Logic table, one block per seed state."""
    lines = []
    seeds = []
    for r in rows:
        if r["seed"] not in seeds:
            seeds.append(r["seed"])
    for seed in seeds:
        block = [r for r in rows if r["seed"] == seed]
        table = [("Policy", "Action", "RR Size", "CF Logic")]
        for r in block:
            label = r["checkpoint"]
            if label.endswith("%"):
                label = "pi" + label
            table.append((label, r["action_name"], str(r["rr_size"]),
                          _cf_logic(r)))
        widths = [max(len(row[i]) for row in table) for i in range(3)]
        lines.append(f"Seed ({seed})")
        for row in table:
            lines.append("  ".join(
                [row[i].ljust(widths[i]) for i in range(3)] + [row[3]]
            ).rstrip())
        lines.append("")
    return "\n".join(lines)


def cmd_sweep(args) -> int:
    model = make_env(args.env)
    f = model.factorization
    seeds = parse_state_list(args.states, f)
    endpoints = [p.strip() for p in args.policies.split(",") if p.strip()]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with contextlib.ExitStack() as stack:
        policies = [
            (None, open_policy(e, f, model.n_actions, stack)) for e in endpoints
        ]
        policies = [
            (_checkpoint_label(p, e), p)
            for (_, p), e in zip(policies, endpoints)
        ]
        rows = _sweep_rows(model, policies, seeds, args.max_region)
    doc = {
        "schema": "stache-sweep/1",
        "env": model.name,
        "checkpoints": [label for label, _ in policies],
        "rows": rows,
    }
    _write_text(out / "sweep.json", _json_text(doc))
    _write_text(out / "sweep.csv", _sweep_csv(rows))
    table = _sweep_table(rows)
    _write_text(out / "table.txt", table)
    sys.stdout.write(table)
    return 0


# -- verify -------------------------------------------------------------


def cmd_verify(args) -> int:
    model = make_env(args.env)
    f = model.factorization
    states = list(f.state_from_index(i) for i in range(f.size()))
    if args.sample is not None:
        import random

        states = random.Random(args.seed_rng).sample(states, args.sample)
    endpoints = [p.strip() for p in args.policies.split(",") if p.strip()]
    failures = 0
    with contextlib.ExitStack() as stack:
        for endpoint in endpoints:
            policy = open_policy(endpoint, f, model.n_actions, stack)
            labeling = ComponentLabeling(f, policy)
            for seed in states:
                expl = stache_exact(f, policy, seed)
                if expl.region.states != labeling.region_of(seed):
                    failures += 1
                    print(f"region mismatch: {endpoint} seed {seed}")
                    continue
                cut = stache_cutoff(f, policy, seed)
                dist, members = oracle_min_counterfactuals(f, policy, seed)
                got = frozenset(s for s, _ in cut.counterfactuals.states)
                if (cut.counterfactuals.min_distance, got) != (dist, members):
                    failures += 1
                    print(f"counterfactual mismatch: {endpoint} seed {seed}")
            print(f"{endpoint}: verified {len(states)} seeds against the oracle")
    if failures:
        print(f"{failures} mismatches")
        return 1
    print("all searches match the oracle")
    return 0


# -- render -------------------------------------------------------------


def cmd_render(args) -> int:
    doc = json.loads(Path(args.explanation).read_text())
    names = make_env(args.env).action_names if args.env else None
    text = (render_svg(doc, action_names=names) if args.format == "svg"
            else render_text(doc, action_names=names))
    if args.out:
        _write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


# -- parser -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stache",
        description="Exact robustness regions and minimal counterfactuals "
                    "for deterministic policies on factored state spaces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_env(p):
        p.add_argument("--env", required=True, choices=sorted(BUILTIN_ENVS),
                       help="built-in environment model")

    p = sub.add_parser("train", help="train tabular policies and save tables")
    add_env(p)
    p.add_argument("--algo", choices=["vi", "q"], default="q")
    p.add_argument("--episodes", type=int, default=2000)
    p.add_argument("--checkpoints", default="0,0.5,1.0",
                   help="comma-separated training fractions for --algo q")
    p.add_argument("--seed-rng", type=int, default=0)
    p.add_argument("--eval-episodes", type=int, default=200)
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("explain", help="explain one policy decision")
    add_env(p)
    p.add_argument("--policy", required=True,
                   help="policy table path, exec:CMD, or tcp:HOST:PORT")
    p.add_argument("--state", required=True,
                   help="factor values, e.g. 0,0,0,2 or row=0,col=0,P=0,D=2")
    p.add_argument("--mode", choices=[MODE_EXACT, MODE_CUTOFF],
                   default=MODE_EXACT)
    p.add_argument("--max-region", type=int, default=None)
    p.add_argument("--batch", action="store_true",
                   help="query the policy one BFS layer at a time")
    p.add_argument("--out", default=None, help="explanation JSON path")
    p.add_argument("--render", default=None,
                   help="also render to this path (.svg or text)")
    p.set_defaults(fn=cmd_explain)

    p = sub.add_parser("sweep", help="explanation evolution across checkpoints")
    add_env(p)
    p.add_argument("--policies", required=True,
                   help="comma-separated policy endpoints, checkpoint order")
    p.add_argument("--states", required=True,
                   help="semicolon-separated state literals")
    p.add_argument("--max-region", type=int, default=None)
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("verify", help="check searches against the brute oracle")
    add_env(p)
    p.add_argument("--policies", required=True,
                   help="comma-separated policy endpoints")
    p.add_argument("--sample", type=int, default=None,
                   help="verify a random sample instead of every state")
    p.add_argument("--seed-rng", type=int, default=0)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("render", help="render an explanation JSON file")
    p.add_argument("--explanation", required=True)
    p.add_argument("--env", default=None, choices=sorted(BUILTIN_ENVS),
                   help="supply action names when absent from the file")
    p.add_argument("--format", choices=["svg", "text"], default="svg")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_render)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=getattr(logging, os.environ.get("STACHE_LOG", "WARNING").upper(),
                      logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (StacheError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
