"""Line-oriented ``key = value`` experiment configuration and object builders."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path

from .evaluation import NetworkEvaluator, TableEvaluator, TerminalEvaluator
from .games import make_game
from .learning import ReplayBuffer, SelectionPolicy, SelfPlayTrainer
from .search import ALGORITHMS, SearchBudget, Searcher


class ConfigError(ValueError):
    pass


@dataclass
class Config:
    game: str = ""
    size: int = 0
    swap: bool = False
    search: str = "descent"
    budget: str = "100"
    completion: bool = False
    uct_c: float = 0.4
    data_mode: str = "tree"
    heuristic: str = "classic"
    normalize: bool = False
    policy: str = "epsilon_greedy"
    completed_policy: bool = False
    temperature: float = 1.0
    evaluator: str = "network"
    architecture: str = "desk"
    batch_size: int = 128
    l2: float = 0.001
    learning_rate: float = 0.001
    replay_capacity: int = 0
    replay_rate: float = 1.0
    replay_unit: str = "pairs"
    augment: bool = False
    episodes: int = 100
    checkpoint_every: int = 50
    ply_cap: int = 1000
    anneal: str = "episodes"
    time_limit: float = 0.0
    seed: int = 0


DOCS = {
    "game": "hex | othello | breakthrough | clobber | tictactoe (required)",
    "size": "board size; 0 picks the game default (hex 11, othello 8, breakthrough 8, clobber 6)",
    "swap": "enable the Hex swap rule",
    "search": "ubfm | descent | completed_descent | ubfm_s | alphabeta | mcts",
    "budget": "per-move search budget: N or Nit (iterations), Nn (evaluated nodes), Xs (seconds)",
    "completion": "use completion (r, v) ordering with ubfm or descent",
    "uct_c": "UCT exploration constant for mcts",
    "data_mode": "tree | root | terminal learning",
    "heuristic": "classic | depth_additive | depth_multiplicative | score | mobility | presence",
    "normalize": "divide terminal values by the heuristic's scale constant",
    "policy": "epsilon_greedy | softmax | ordinal self-play action selection",
    "completed_policy": "wrap the policy with completed selection",
    "temperature": "softmax temperature",
    "evaluator": "network | table",
    "architecture": "desk | large | explicit layer list, e.g. 'conv3x3x16 relu dense64 relu dense1'",
    "batch_size": "SGD batch size B",
    "l2": "L2 coefficient lambda",
    "learning_rate": "Adam step size",
    "replay_capacity": "replay memory size mu; 0 trains on each episode's data only",
    "replay_rate": "replay sampling rate sigma in (0, 1]",
    "replay_unit": "pairs | games: what replay_capacity counts",
    "augment": "add symmetric positions to the training data",
    "episodes": "number of self-play episodes",
    "checkpoint_every": "save a checkpoint every k episodes",
    "ply_cap": "abort a self-play episode past this many plies",
    "anneal": "episodes | wallclock: clock driving epsilon-greedy and ordinal annealing",
    "time_limit": "training time limit in seconds (wallclock annealing only)",
    "seed": "master seed",
}

_FIELDS = {f.name: f for f in fields(Config)}


def _coerce(key, text):
    kind = _FIELDS[key].type
    if kind == "bool":
        low = text.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {text!r}")
    try:
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
    except ValueError:
        raise ConfigError(f"{key}: expected {kind}, got {text!r}") from None
    return text


def parse_config(text: str, overrides: dict | None = None) -> Config:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _coerce(key, value)
    for key, value in (overrides or {}).items():
        if key not in _FIELDS:
            raise ConfigError(f"unknown key {key!r}")
        values[key] = _coerce(key, str(value)) if isinstance(value, str) else value
    cfg = Config(**values)
    validate(cfg)
    return cfg


def load_config(path, overrides=None) -> Config:
    return parse_config(Path(path).read_text(), overrides)


def config_text(cfg: Config) -> str:
    out = []
    for f in fields(Config):
        v = getattr(cfg, f.name)
        out.append(f"{f.name} = {str(v).lower() if isinstance(v, bool) else v}")
    return "\n".join(out) + "\n"


def validate(cfg: Config):
    if not cfg.game:
        raise ConfigError("missing required key 'game'")
    game = build_game(cfg)
    try:
        game.check_heuristic(cfg.heuristic)
        SearchBudget.parse(cfg.budget)
        SelectionPolicy(cfg.policy, cfg.temperature)
        if cfg.replay_capacity:
            ReplayBuffer(cfg.replay_capacity, cfg.replay_rate, cfg.replay_unit)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if cfg.search not in ALGORITHMS:
        raise ConfigError(f"search: expected one of {', '.join(ALGORITHMS)}, got {cfg.search!r}")
    if cfg.data_mode not in ("tree", "root", "terminal"):
        raise ConfigError(f"data_mode: expected tree, root or terminal, got {cfg.data_mode!r}")
    if cfg.evaluator not in ("network", "table"):
        raise ConfigError(f"evaluator: expected network or table, got {cfg.evaluator!r}")
    if cfg.anneal not in ("episodes", "wallclock"):
        raise ConfigError(f"anneal: expected episodes or wallclock, got {cfg.anneal!r}")
    if cfg.anneal == "wallclock" and cfg.time_limit <= 0:
        raise ConfigError("anneal = wallclock needs a positive time_limit")
    if cfg.episodes < 0:
        raise ConfigError("episodes must be >= 0")
    if cfg.checkpoint_every < 1:
        raise ConfigError("checkpoint_every must be >= 1")


# -- builders -----------------------------------------------------------------------------


def build_game(cfg: Config):
    try:
        return make_game(cfg.game, cfg.size or None, cfg.swap)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def build_terminal(cfg: Config, game) -> TerminalEvaluator:
    return TerminalEvaluator(game, cfg.heuristic, cfg.normalize)


def build_adaptive(cfg: Config, game):
    if cfg.evaluator == "table":
        return TableEvaluator()
    return NetworkEvaluator(game, architecture=cfg.architecture, output_tanh=cfg.heuristic == "classic",
                            batch_size=cfg.batch_size, l2=cfg.l2, learning_rate=cfg.learning_rate, seed=cfg.seed)


def build_searcher(cfg: Config, game, adaptive, f_t, trace=None) -> Searcher:
    return Searcher(cfg.search, game, adaptive, f_t, SearchBudget.parse(cfg.budget),
                    completion=cfg.completion, uct_c=cfg.uct_c, trace=trace)


def build_trainer(cfg: Config, trace=None, adaptive=None) -> SelfPlayTrainer:
    game = build_game(cfg)
    f_t = build_terminal(cfg, game)
    adaptive = adaptive if adaptive is not None else build_adaptive(cfg, game)
    searcher = build_searcher(cfg, game, adaptive, f_t, trace)
    policy = SelectionPolicy(cfg.policy, cfg.temperature, cfg.completed_policy)
    trainer = SelfPlayTrainer(game, searcher, adaptive, f_t, mode=cfg.data_mode, policy=policy,
                              augment=cfg.augment, checkpoint_every=cfg.checkpoint_every, ply_cap=cfg.ply_cap,
                              seed=cfg.seed, wall_clock=cfg.time_limit if cfg.anneal == "wallclock" else None)
    if cfg.replay_capacity:
        trainer.replay = ReplayBuffer(cfg.replay_capacity, cfg.replay_rate, cfg.replay_unit, rng=trainer.rng)
    return trainer


def replace(cfg: Config, **changes) -> Config:
    new = dataclasses.replace(cfg, **changes)
    validate(new)
    return new
