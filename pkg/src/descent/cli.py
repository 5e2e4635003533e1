"""``descent`` command line: train, tournament, play, verify, export.

Exit codes: 0 success, 1 usage or configuration error, 2 failed check,
aborted episode or aborted match.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .config import DOCS, ConfigError, build_game, build_terminal, config_text, load_config, parse_config
from .evaluation import NetworkEvaluator, TableEvaluator, load_evaluator
from .games import FIRST, RulesError
from .harness import (CheckpointRegistry, GreedyPlayer, SearchPlayer, emit_curves, play_match, round_robin,
                      run_schedule)
from .nnet import CheckpointError
from .search import SearchBudget, SearchTable, Searcher

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2

log = logging.getLogger("descent")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _keys_epilog() -> str:
    width = max(map(len, DOCS))
    lines = ["config keys (key = value per line, '#' starts a comment):"]
    lines += [f"  {k:<{width}}  {v}" for k, v in DOCS.items()]
    return "\n".join(lines)


def _overrides(pairs) -> dict:
    out = {}
    for item in pairs or ():
        if "=" not in item:
            raise UsageError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _config(args):
    over = _overrides(args.set)
    if getattr(args, "episodes", None) is not None:
        over["episodes"] = str(args.episodes)
    if args.seed is not None:
        over["seed"] = str(args.seed)
    if args.config:
        return load_config(args.config, over)
    return parse_config("", over)


class _TraceWriter:
    def __init__(self, path):
        self.fh = open(path, "w") if path else None
        self.move = 0

    def __call__(self, record):
        self.fh.write(json.dumps(record, sort_keys=True) + "\n")

    def close(self):
        if self.fh:
            self.fh.close()

    @property
    def hook(self):
        return self if self.fh else None


# -- train -------------------------------------------------------------------------------


def cmd_train(args) -> int:
    from .config import build_trainer

    cfg = _config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(config_text(cfg))
    registry = CheckpointRegistry(out / "checkpoints")
    trace = _TraceWriter(args.trace)
    trainer = build_trainer(cfg, trace=trace.hook)
    snapshot = {"config": config_text(cfg)}

    def save(ckpt):
        cid = registry.save(ckpt.data, {**snapshot, "episode": ckpt.episode})
        print(f"checkpoint episode={ckpt.episode} id={cid}")

    try:
        trainer.train(cfg.episodes, on_checkpoint=save)
    finally:
        trace.close()
        with open(out / "train_log.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("episode", "plies", "outcome", "pairs", "trained", "mse", "aborted", "searches", "nodes"))
            for e in trainer.log:
                w.writerow((e.episode, e.plies, e.outcome, e.pairs, e.trained, f"{e.mse:.6g}", int(e.aborted),
                            e.searches, e.nodes))
    aborted = sum(e.aborted for e in trainer.log)
    if aborted:
        print(f"{aborted} episode(s) aborted at the ply cap", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# -- tournament ------------------------------------------------------------------------


def _parse_combo(text):
    name, _, rest = text.partition(":")
    if not name:
        raise UsageError(f"--combo expects name:key=value,..., got {text!r}")
    return name, _overrides([p for p in rest.split(",") if p])


def cmd_tournament(args) -> int:
    from .experiment import greedy_schedule, train_combination

    cfg = _config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(config_text(cfg))
    game = build_game(cfg)
    if args.registry:
        registry = CheckpointRegistry(args.registry)
        ids = args.ids.split(",") if args.ids else registry.list()
        ids = list(dict.fromkeys(ids))
        f_t = build_terminal(cfg, game)
        players = {}
        for cid in ids:
            ev = load_evaluator(registry.load(cid), game)
            if args.mode == "greedy":
                players[cid] = GreedyPlayer(ev, f_t, name=cid)
            else:
                s = Searcher(cfg.search, game, ev, f_t, SearchBudget.parse(cfg.budget), cfg.completion, cfg.uct_c)
                players[cid] = SearchPlayer(s, name=cid)
        standings, records = round_robin(players, game, args.games, seed=cfg.seed, ply_cap=cfg.ply_cap,
                                         opening=args.opening)
        with open(out / "standings.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("player", "win_pct", "ci95", "matches"))
            for s in standings:
                w.writerow((s.name, f"{s.win_pct:.4f}", f"{s.ci95:.4f}", s.matches))
                print(f"{s.name}  {s.win_pct:6.2f}% +- {s.ci95:.2f}  ({s.matches} matches)")
        return EXIT_FAIL if any(r.aborted or r.illegal for r in records) else EXIT_OK
    if not args.combo or len(args.combo) < 2:
        raise UsageError("a tournament needs --registry or at least two --combo definitions")
    combos = dict(_parse_combo(c) for c in args.combo)
    trained = []
    for name, over in sorted(combos.items()):
        c = parse_config(config_text(cfg), over)
        print(f"training {name} ({c.episodes} episodes)")
        trained.append(train_combination(name, c, args.mark_every))
    rows = run_schedule(greedy_schedule(trained, args.games, args.opening), game, seed=cfg.seed)
    emit_curves(rows, out / "curves.csv")
    for r in rows:
        print(f"mark={r.mark:<6} {r.combination:<20} {r.win_pct:6.2f}% +- {r.ci95:.2f}")
    return EXIT_FAIL if any(t.aborted for t in trained) else EXIT_OK


# -- play --------------------------------------------------------------------------------


def _engine(args, cfg, game, f_t):
    if args.checkpoint:
        path = Path(args.checkpoint)
        if path.exists():
            data = path.read_bytes()
        else:
            reg, _, cid = args.checkpoint.rpartition(":")
            data = CheckpointRegistry(reg or ".").load(cid)
        ev = load_evaluator(data, game)
    else:
        ev = TableEvaluator() if cfg.evaluator == "table" else NetworkEvaluator(game, output_tanh=cfg.heuristic == "classic")
    return ev


def cmd_play(args) -> int:
    cfg = _config(args)
    game = build_game(cfg)
    f_t = build_terminal(cfg, game)
    try:
        ev = _engine(args, cfg, game, f_t)
    except CheckpointError as exc:
        print(f"cannot load checkpoint: {exc}", file=sys.stderr)
        return EXIT_USAGE
    trace = _TraceWriter(args.trace)
    searcher = Searcher(cfg.search, game, ev, f_t, SearchBudget.parse(cfg.budget), cfg.completion, cfg.uct_c,
                        trace=trace.hook)
    rng = np.random.default_rng(cfg.seed)
    out = sys.stdout
    if args.auto:
        a, b = SearchPlayer(searcher, "engine-1"), SearchPlayer(searcher, "engine-2")
        rec = play_match(a, b, game, seed=cfg.seed, ply_cap=cfg.ply_cap)
        trace.close()
        print(" ".join(rec.moves), file=out)
        print(f"result {rec.result:+d} after {rec.plies} plies", file=out)
        return EXIT_FAIL if rec.aborted or rec.illegal else EXIT_OK
    human_first = args.human == "first"
    engine = SearchPlayer(searcher, "engine")
    engine.reset(game)
    state = game.initial_state()
    from .evaluation import MatchContext

    ctx = MatchContext()
    inp = args.input or sys.stdin
    while state.outcome is None:
        print(game.render(state), file=out)
        legal = game.legal_actions(state)
        if (state.to_move == FIRST) == human_first:
            print("your move: ", end="", file=out, flush=True)
            line = inp.readline()
            if not line:
                print("\nend of input", file=out)
                return EXIT_USAGE
            try:
                action = game.parse_action(line.strip())
                if action not in legal:
                    raise RulesError(f"illegal move {line.strip()!r}")
            except (ValueError, RulesError) as exc:
                print(f"{exc}; try again", file=out)
                continue
        else:
            action = engine.choose(state, ctx, rng)
            print(f"engine plays {game.action_to_str(action)}", file=out)
        ctx = ctx.after_turn(state.to_move, len(legal))
        state = game.apply(state, action)
    trace.close()
    print(game.render(state), file=out)
    word = {1: "first player wins", -1: "second player wins", 0: "draw"}[state.outcome]
    print(f"result {state.outcome:+d} ({word})", file=out)
    return EXIT_OK


# -- verify / export ---------------------------------------------------------------------


def cmd_verify(args) -> int:
    from .verify import SUITES, run_suite

    suites = SUITES if args.suite == "all" else (args.suite,)
    failed = []
    for name in suites:
        print(f"== {name}")
        for check in run_suite(name):
            print(check.line())
            if not check.passed:
                failed.append(f"{name}: {check.name}")
    if failed:
        print(f"{len(failed)} failed:", *failed, sep="\n  ")
        return EXIT_FAIL
    print("all checks passed")
    return EXIT_OK


def cmd_export(args) -> int:
    registry = CheckpointRegistry(args.registry)
    data = registry.load(args.id)
    ev = load_evaluator(data)
    out = Path(args.out)
    if isinstance(ev, TableEvaluator):
        keys = np.array(sorted(ev.table_), dtype=np.uint64)
        np.savez(out, keys=keys, values=np.array([ev.table_[int(k)] for k in keys]))
        meta = {"descriptor": "table", "entries": len(keys)}
    else:
        net = ev.net_
        arrays = {f"layer{i}_{j}": v for i, vs in enumerate(net.views) for j, v in enumerate(vs)}
        np.savez(out, theta=net.theta, **arrays)
        meta = {"descriptor": net.descriptor(), "parameters": int(net.n_params), "step": int(net.step)}
    meta["id"] = args.id
    meta["config"] = registry.config(args.id)
    Path(str(out) + ".json").write_text(json.dumps(meta, indent=1, sort_keys=True))
    print(f"exported {args.id} to {out}")
    return EXIT_OK


# -- entry point -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="descent", description="Self-play search and learning engine.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--config", help="key = value config file")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key (repeatable)")
        sp.add_argument("--seed", type=int, help="master seed (overrides the config)")

    fmt = argparse.RawDescriptionHelpFormatter
    t = sub.add_parser("train", help="self-play training", epilog=_keys_epilog(), formatter_class=fmt)
    common(t)
    t.add_argument("--episodes", type=int)
    t.add_argument("--out", required=True, help="output directory")
    t.add_argument("--trace", help="write per-iteration search records (JSON lines) here")
    t.set_defaults(func=cmd_train)

    r = sub.add_parser("tournament", help="train combinations and evaluate them, or rank saved checkpoints",
                       epilog=_keys_epilog(), formatter_class=fmt)
    common(r)
    r.add_argument("--episodes", type=int)
    r.add_argument("--combo", action="append", help="name:key=value,key=value (repeat, >= 2)")
    r.add_argument("--mark-every", type=int, default=50, help="episodes between evaluation marks")
    r.add_argument("--registry", help="rank checkpoints from this registry instead of training")
    r.add_argument("--ids", help="comma-separated checkpoint ids (default: all)")
    r.add_argument("--mode", choices=("greedy", "search"), default="greedy")
    r.add_argument("--games", type=int, default=1, help="matches per pairing and seat")
    r.add_argument("--opening", type=int, default=0, help="random opening plies per match (same for both seats)")
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_tournament)

    pl = sub.add_parser("play", help="play against the engine in the terminal", epilog=_keys_epilog(),
                        formatter_class=fmt)
    common(pl)
    pl.add_argument("--checkpoint", help="checkpoint file, or REGISTRY_DIR:ID")
    pl.add_argument("--human", choices=("first", "second"), default="first")
    pl.add_argument("--auto", action="store_true", help="engine plays both sides")
    pl.add_argument("--trace", help="write per-iteration search records (JSON lines) here")
    pl.set_defaults(func=cmd_play, input=None)

    v = sub.add_parser("verify", help="run the self-check suites")
    v.add_argument("--suite", choices=("oracle", "gradcheck", "distributions", "completion", "all"), default="all")
    v.add_argument("--seed", type=int)
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("export", help="export a checkpoint's parameters to .npz")
    e.add_argument("--registry", required=True)
    e.add_argument("--id", required=True)
    e.add_argument("--out", required=True)
    e.add_argument("--seed", type=int)
    e.set_defaults(func=cmd_export)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        parser.print_usage(sys.stderr)
        print(f"descent: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CheckpointError as exc:
        print(f"descent: checkpoint error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
