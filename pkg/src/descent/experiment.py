"""Desk-scale experiment protocol: train combinations, snapshot them at episode
marks, evaluate snapshots with greedy depth-1 players and write the curves.
"""

from __future__ import annotations

from dataclasses import dataclass

from .config import Config, build_adaptive, build_game, build_terminal, build_trainer, replace
from .evaluation import load_evaluator
from .harness import (ExperimentSchedule, GreedyPlayer, Player, SearchPlayer, binomial_ci, emit_curves,
                      play_match, run_schedule)
from .search import SearchBudget, Searcher


@dataclass
class Trained:
    name: str
    cfg: Config
    snapshots: list  # (mark, evaluator)
    aborted: int


def train_combination(name: str, cfg: Config, mark_every: int, on_checkpoint=None) -> Trained:
    trainer = build_trainer(replace(cfg, checkpoint_every=mark_every))
    game = trainer.game
    checkpoints = trainer.train(cfg.episodes, on_checkpoint=on_checkpoint)
    snaps = [(c.episode, load_evaluator(c.data, game)) for c in checkpoints]
    aborted = sum(1 for e in trainer.log if e.aborted)
    return Trained(name, cfg, snaps, aborted)


def greedy_schedule(trained: list[Trained], games_per_color: int, opening: int = 0) -> ExperimentSchedule:
    snaps = {}
    for t in trained:
        game = build_game(t.cfg)
        f_t = build_terminal(t.cfg, game)
        snaps[t.name] = [(mark, GreedyPlayer(ev, f_t, name=f"{t.name}@{mark}")) for mark, ev in t.snapshots]
    return ExperimentSchedule(snaps, games_per_color, opening)


def run_experiment(base: Config, combos: dict, mark_every: int, games_per_color: int = 1, path=None,
                   opening: int = 0) -> tuple[str, list[Trained]]:
    """Train every combination (``name -> config overrides``), evaluate all
    marks against all final snapshots and return the curves CSV text.
    """
    trained = [train_combination(name, replace(base, **over), mark_every) for name, over in sorted(combos.items())]
    game = build_game(base)
    rows = run_schedule(greedy_schedule(trained, games_per_color, opening), game, seed=base.seed)
    return emit_curves(rows, path), trained


def head_to_head(a: Player, b: Player, game, games_per_color: int, seed: int = 0,
                 opening: int = 0) -> tuple[float, float, int]:
    """Score of ``a`` against ``b`` over balanced seats: (win %, 95% CI half-width, matches).

    Each opening is played twice, once with ``a`` in each seat.
    """
    score, n = 0.0, 0
    for k in range(games_per_color):
        for seat in (True, False):
            s = seed * 1_000_003 + k
            rec = play_match(a, b, game, s, opening=opening) if seat else play_match(b, a, game, s, opening=opening)
            score += rec.score_for(seat)
            n += 1
    p = score / n
    return 100.0 * p, 100.0 * binomial_ci(p, n), n


def search_player(cfg: Config, evaluator, algorithm: str, budget: str, name=None) -> SearchPlayer:
    game = build_game(cfg)
    f_t = build_terminal(cfg, game)
    return SearchPlayer(Searcher(algorithm, game, evaluator, f_t, SearchBudget.parse(budget)), name=name)


__all__ = ["Trained", "train_combination", "greedy_schedule", "run_experiment", "head_to_head", "search_player",
           "build_adaptive"]
