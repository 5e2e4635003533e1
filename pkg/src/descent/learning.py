"""Self-play learning: action selection, experience replay, episodes and the training loop."""

from __future__ import annotations

import math
import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .evaluation import MatchContext
from .games import FIRST, Game, GameState
from .nnet import NonFiniteLoss
from .search import SearchResult, SearchTable, Searcher

POLICIES = ("epsilon_greedy", "softmax", "ordinal")
DATA_MODES = ("tree", "root", "terminal")


# -- action selection -------------------------------------------------------------------
#
# Every selector takes the child values v'(s, a_i) aligned with the legal
# actions and returns an index into them. ``first`` says whether the player
# to move maximizes.


def _ranked(values, first: bool) -> list[int]:
    # stable: ties keep canonical action order
    return sorted(range(len(values)), key=lambda i: -values[i] if first else values[i])


def _argbest(values, first: bool) -> int:
    return _ranked(values, first)[0]


def epsilon_greedy_probs(values, first: bool, exploit: float) -> np.ndarray:
    n = len(values)
    p = np.full(n, (1.0 - exploit) / n)
    p[_argbest(values, first)] += exploit
    return p


def select_epsilon_greedy(values, first: bool, t: float, t_max: float, rng) -> int:
    """Best action with probability t/t_max, otherwise a uniformly random one."""
    if rng.random() < t / t_max:
        return _argbest(values, first)
    return int(rng.integers(len(values)))


def softmax_probs(values, first: bool, temperature: float) -> np.ndarray:
    if not temperature > 0:
        raise ValueError(f"softmax temperature must be positive, got {temperature}")
    z = np.asarray(values, dtype=np.float64) * (1.0 if first else -1.0) / temperature
    z -= z.max()
    e = np.exp(z)
    return e / e.sum()


def select_softmax(values, first: bool, temperature: float, rng) -> int:
    """Sample with P(a_i) proportional to exp(+-v'_i / temperature), hotter for the mover's better moves."""
    p = softmax_probs(values, first, temperature)
    return int(min(np.searchsorted(np.cumsum(p), rng.random(), side="right"), len(p) - 1))


def ordinal_probs(n: int, exploit: float) -> np.ndarray:
    """Closed form of the ordinal distribution over ranks 0..n-1 (0 = best)."""
    p = np.zeros(n)
    rest = 1.0
    for i in range(n):
        p[i] = (exploit + (1.0 - exploit) / (n - i)) * rest
        rest -= p[i]
    return p


def select_ordinal(values, first: bool, t: float, t_max: float, rng) -> int:
    """Rank-based sampling: walk children best-first, accepting the j-th with
    probability ((t/t_max)(n-j-1) + 1) / (n-j).
    """
    order = _ranked(values, first)
    n = len(order)
    e = t / t_max
    for j, i in enumerate(order):
        if j == n - 1 or rng.random() < (e * (n - j - 1) + 1) / (n - j):
            return i
    return order[-1]


@dataclass
class SelectionPolicy:
    """Action selection used during self-play.

    ``completed`` wraps the policy: a child proven won for the mover is
    always played, and children proven lost are skipped while any other
    child exists.
    """

    kind: str = "epsilon_greedy"
    temperature: float = 1.0
    completed: bool = False

    def __post_init__(self):
        if self.kind not in POLICIES:
            raise ValueError(f"unknown selection policy {self.kind!r}; choose from {POLICIES}")
        if self.kind == "softmax" and not self.temperature > 0:
            raise ValueError(f"softmax temperature must be positive, got {self.temperature}")

    def base(self, values, first, t, t_max, rng) -> int:
        if self.kind == "epsilon_greedy":
            return select_epsilon_greedy(values, first, t, t_max, rng)
        if self.kind == "softmax":
            return select_softmax(values, first, self.temperature, rng)
        return select_ordinal(values, first, t, t_max, rng)

    def probabilities(self, values, first, t, t_max) -> np.ndarray:
        if self.kind == "epsilon_greedy":
            return epsilon_greedy_probs(values, first, t / t_max)
        if self.kind == "softmax":
            return softmax_probs(values, first, self.temperature)
        p = np.zeros(len(values))
        p[_ranked(values, first)] = ordinal_probs(len(values), t / t_max)
        return p

    def select(self, state: GameState, result: SearchResult, t: float, t_max: float, rng) -> int:
        """Return the chosen action (not an index)."""
        first = state.to_move == FIRST
        if self.completed and result.child_r is not None:
            idx = completed_selection(self, result.child_values, result.child_r, first, t, t_max, rng)
        else:
            idx = self.base(result.child_values, first, t, t_max, rng)
        return result.actions[idx]


def completed_selection(policy: SelectionPolicy, values, child_r, first: bool, t, t_max, rng) -> int:
    win = 1 if first else -1
    for i, r in enumerate(child_r):
        if r == win:
            return i
    keep = [i for i, r in enumerate(child_r) if r != -win]
    if not keep or len(keep) == len(values):
        return policy.base(values, first, t, t_max, rng)
    return keep[policy.base([values[i] for i in keep], first, t, t_max, rng)]


# -- experience replay --------------------------------------------------------------------


class ReplayBuffer:
    """FIFO memory M of capacity ``capacity`` (mu) with sampling rate ``rate`` (sigma).

    With ``unit="pairs"`` mu counts (state, value) pairs. With ``unit="games"``
    mu counts whole episodes and the return-all threshold sigma*mu is in
    games too; above it a sigma fraction of the stored pairs is sampled.
    Every stored item carries an increasing sequence tag.
    """

    def __init__(self, capacity: int, rate: float = 1.0, unit: str = "pairs", rng=None):
        if capacity < 1:
            raise ValueError(f"replay capacity must be >= 1, got {capacity}")
        if not 0 < rate <= 1:
            raise ValueError(f"replay sampling rate must be in (0, 1], got {rate}")
        if unit not in ("pairs", "games"):
            raise ValueError(f"replay unit must be 'pairs' or 'games', got {unit!r}")
        self.capacity = capacity
        self.rate = rate
        self.unit = unit
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self._items: deque = deque()
        self._tag = 0

    def __len__(self):
        return len(self._items)

    def tags(self) -> list[int]:
        return [tag for tag, _ in self._items]

    def pairs(self) -> list:
        if self.unit == "pairs":
            return [item for _, item in self._items]
        return [p for _, game in self._items for p in game]

    def push(self, data) -> None:
        if self.unit == "pairs":
            for item in data:
                self._items.append((self._tag, item))
                self._tag += 1
        else:
            self._items.append((self._tag, list(data)))
            self._tag += 1
        while len(self._items) > self.capacity:
            self._items.popleft()

    def sample(self) -> list:
        limit = self.rate * self.capacity
        if len(self._items) <= limit:
            return self.pairs()
        pool = self.pairs()
        k = int(limit) if self.unit == "pairs" else max(1, int(round(self.rate * len(pool))))
        idx = np.sort(self.rng.choice(len(pool), size=k, replace=False))
        return [pool[i] for i in idx]

    def push_sample(self, data) -> list:
        self.push(data)
        return self.sample()


# -- episodes -----------------------------------------------------------------------------


def augment(game: Game, pairs) -> list:
    """Add the symmetric images of every pair (same value), dropping duplicates."""
    out = []
    for s, v in pairs:
        out.extend(game.symmetries(s, v))
    return out


def dedupe(pairs) -> list:
    """Keep the last value per state key, in first-seen order."""
    last: dict = {}
    for s, v in pairs:
        last[s.key] = (s, v) if s.key not in last else (last[s.key][0], v)
    return list(last.values())


@dataclass
class Episode:
    states: list
    actions: list
    pairs: list
    ctx: MatchContext
    outcome: int | None
    aborted: bool = False
    searches: int = 0
    nodes: int = 0


def run_episode(game: Game, searcher: Searcher, mode: str, policy: SelectionPolicy, f_t, rng,
                t: float = 0.0, t_max: float = 1.0, ply_cap: int = 1000) -> Episode:
    """Play one self-play game and harvest its training pairs."""
    if mode not in DATA_MODES:
        raise ValueError(f"unknown data mode {mode!r}; choose from {DATA_MODES}")
    state = game.initial_state()
    table = SearchTable()
    ctx = MatchContext()
    states, actions, root_pairs = [state], [], []
    mcts_pairs: dict = {}
    nodes = 0
    while state.outcome is None:
        if state.ply >= ply_cap:
            return Episode(states, actions, [], ctx, None, aborted=True, searches=len(actions), nodes=nodes)
        result = searcher(state, table, ctx)
        nodes += result.nodes
        if mode == "tree" and result.pairs:
            for s, v in result.pairs:
                mcts_pairs[s.key] = (s, v)
        action = policy.select(state, result, t, t_max, rng)
        root_pairs.append((state, result.value))
        ctx = ctx.after_turn(state.to_move, len(result.actions))
        state = game.apply(state, action)
        states.append(state)
        actions.append(action)
    final = f_t(state, ctx)
    if mode == "terminal":
        pairs = [(s, final) for s in states]
    elif mode == "root":
        pairs = root_pairs + [(state, final)]
    else:
        pairs = table.learning_pairs() if searcher.uses_table else list(mcts_pairs.values())
        if state.key not in {s.key for s, _ in pairs}:
            pairs.append((state, final))
    return Episode(states, actions, pairs, ctx, state.outcome, searches=len(actions), nodes=nodes)


# -- training loop ------------------------------------------------------------------------


@dataclass
class Checkpoint:
    episode: int
    data: bytes


@dataclass
class EpisodeLog:
    episode: int
    plies: int
    outcome: int
    pairs: int
    trained: int
    mse: float
    aborted: bool
    searches: int = 0
    nodes: int = 0


class TrainingAborted(RuntimeError):
    def __init__(self, message, checkpoint: Checkpoint | None):
        super().__init__(message)
        self.checkpoint = checkpoint


@dataclass
class SelfPlayTrainer:
    """Alternates self-play episodes, augmentation, replay and one SGD pass.

    The annealing clock t counts finished episodes and t_max is the episode
    budget, unless ``wall_clock`` is set (then both are seconds). Without a
    replay buffer each update sees exactly the episode's own data.
    """

    game: Game
    searcher: Searcher
    adaptive: object
    f_t: object
    mode: str = "tree"
    policy: SelectionPolicy = field(default_factory=SelectionPolicy)
    replay: ReplayBuffer | None = None
    augment: bool = False
    checkpoint_every: int = 100
    ply_cap: int = 1000
    seed: int = 0
    wall_clock: float | None = None

    def __post_init__(self):
        self.rng = np.random.default_rng(self.seed)
        self.log: list[EpisodeLog] = []

    def _clock(self, done, budget, start):
        if self.wall_clock:
            return min(time.perf_counter() - start, self.wall_clock), self.wall_clock
        return done, max(budget, 1)

    def train(self, episodes: int, on_checkpoint=None) -> list[Checkpoint]:
        checkpoints = [Checkpoint(0, self.adaptive.to_bytes())]
        if on_checkpoint:
            on_checkpoint(checkpoints[-1])
        start = time.perf_counter()
        done = 0
        while done < episodes:
            if self.wall_clock and time.perf_counter() - start >= self.wall_clock:
                break
            t, t_max = self._clock(done, episodes, start)
            ep = run_episode(self.game, self.searcher, self.mode, self.policy, self.f_t, self.rng,
                             t, t_max, self.ply_cap)
            done += 1
            mse, trained = math.nan, 0
            if not ep.aborted:
                data = dedupe(ep.pairs)
                if self.augment:
                    data = augment(self.game, data)
                batch = self.replay.push_sample(data) if self.replay is not None else data
                trained = len(batch)
                try:
                    stats = self.adaptive.update(batch)
                except NonFiniteLoss as exc:
                    raise TrainingAborted(f"episode {done}: {exc}", checkpoints[-1]) from exc
                if stats is not None:
                    mse = stats.mean_squared_error
            self.log.append(EpisodeLog(done, len(ep.actions), ep.outcome if ep.outcome is not None else 0,
                                       len(ep.pairs), trained, mse, ep.aborted, ep.searches, ep.nodes))
            if done % self.checkpoint_every == 0 or done == episodes:
                checkpoints.append(Checkpoint(done, self.adaptive.to_bytes()))
                if on_checkpoint:
                    on_checkpoint(checkpoints[-1])
        if checkpoints[-1].episode != done:
            checkpoints.append(Checkpoint(done, self.adaptive.to_bytes()))
            if on_checkpoint:
                on_checkpoint(checkpoints[-1])
        return checkpoints
