"""Terminal evaluations (reinforcement heuristics) and adaptive evaluators.

All values are from the first player's point of view. A terminal evaluation
maps an end-of-game state to a real number whose sign is the game gain and
which preserves the order win > draw > loss; the adaptive evaluators
(a value network or a lookup table) estimate non-terminal states and are
the thing self-play trains.
"""

from __future__ import annotations

import io
import struct
from typing import NamedTuple

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .games import FIRST, Game, GameState
from .nnet import CheckpointError, Network, TrainConfig, default_layers, pack_header, train_step, unpack_header


class MatchContext(NamedTuple):
    """Per-game mobility bookkeeping: summed legal-move counts and turn counts per player."""

    moves1: int = 0
    turns1: int = 0
    moves2: int = 0
    turns2: int = 0

    def after_turn(self, to_move: int, n_actions: int) -> "MatchContext":
        if to_move == FIRST:
            return MatchContext(self.moves1 + n_actions, self.turns1 + 1, self.moves2, self.turns2)
        return MatchContext(self.moves1, self.turns1, self.moves2 + n_actions, self.turns2 + 1)

    @property
    def m1(self) -> float:
        # a player who never had a turn counts as mean mobility 1
        return self.moves1 / self.turns1 if self.turns1 else 1.0

    @property
    def m2(self) -> float:
        return self.moves2 / self.turns2 if self.turns2 else 1.0


def depth_length(game: Game, ply: int, multiplicative: bool = False) -> float:
    if multiplicative:
        return game.approx_length / ply
    if game.exact_length is not None:
        return float(game.exact_length - ply + 1)
    return max(1.0, game.approx_length - ply)


def terminal_value(kind: str, game: Game, state: GameState, ctx: MatchContext = MatchContext()) -> float:
    """Raw (unnormalized) value of a terminal state under heuristic ``kind``."""
    g = game.gain(state)
    if g == 0:
        return 0.0
    if kind == "classic":
        return float(g)
    if kind == "depth_additive":
        return g * depth_length(game, state.ply)
    if kind == "depth_multiplicative":
        return g * depth_length(game, state.ply, multiplicative=True)
    if kind == "score":
        return float(game.score(state))
    if kind == "mobility":
        return ctx.m1 / ctx.m2 if g > 0 else -ctx.m2 / ctx.m1
    if kind == "presence":
        n1, n2 = game.piece_counts(state)
        return float(max(n1 - n2, 1) if g > 0 else min(n1 - n2, -1))
    raise ValueError(f"unknown heuristic {kind!r}")


def default_divisor(kind: str, game: Game) -> float:
    if kind == "depth_additive":
        return float(game.exact_length or game.approx_length)
    if kind in ("score", "presence"):
        return float(game.cells)
    return 1.0


class TerminalEvaluator:
    """Callable ``f(state, ctx)`` used by the searches for terminal states.

    With ``normalize`` the raw heuristic is divided by a positive constant
    (board size for score/presence, game length for the additive depth
    heuristic). The divisor is order preserving and is applied to every
    target, so the learned values simply live on the divided scale.
    """

    def __init__(self, game: Game, kind: str = "classic", normalize: bool = False):
        game.check_heuristic(kind)
        self.game = game
        self.kind = kind
        self.normalize = normalize
        self.scale = default_divisor(kind, game) if normalize else 1.0
        self.uses_context = kind == "mobility"

    def raw(self, state, ctx=MatchContext()):
        return terminal_value(self.kind, self.game, state, ctx)

    def __call__(self, state, ctx=MatchContext()) -> float:
        return terminal_value(self.kind, self.game, state, ctx) / self.scale

    def __repr__(self):
        return f"TerminalEvaluator({self.game.describe()!r}, {self.kind!r}, scale={self.scale})"


# -- adaptive evaluators -----------------------------------------------------------


class TableEvaluator(BaseEstimator, RegressorMixin):
    """Lookup table keyed by state key; unseen states are worth ``default``.

    ``fit``/``partial_fit``/``predict`` take arrays of 64-bit keys so the
    table composes with sklearn tooling; the search uses ``evaluate`` and
    ``update`` on states directly.
    """

    def __init__(self, default: float = 0.0):
        self.default = default

    def _ensure(self):
        if not hasattr(self, "table_"):
            self.table_ = {}
        return self.table_

    def fit(self, X, y):
        self.table_ = {}
        return self.partial_fit(X, y)

    def partial_fit(self, X, y):
        table = self._ensure()
        keys = np.asarray(X, dtype=np.uint64).reshape(-1)
        y = np.asarray(y, dtype=np.float64).reshape(-1)
        if keys.shape != y.shape:
            raise ValueError(f"{keys.size} keys for {y.size} values")
        for k, v in zip(keys.tolist(), y.tolist()):
            table[k] = v
        return self

    def predict(self, X):
        check_is_fitted(self, "table_")
        keys = np.asarray(X, dtype=np.uint64).reshape(-1)
        d = self.default
        return np.array([self.table_.get(k, d) for k in keys.tolist()], dtype=np.float64)

    def evaluate(self, states) -> np.ndarray:
        table = self._ensure()
        d = self.default
        return np.array([table.get(s.key, d) for s in states], dtype=np.float64)

    def update(self, pairs):
        table = self._ensure()
        for s, v in pairs:
            table[s.key] = float(v)
        return None

    def descriptor(self) -> str:
        return "table"

    def to_bytes(self) -> bytes:
        table = self._ensure()
        buf = io.BytesIO()
        buf.write(pack_header(self.descriptor()))
        buf.write(struct.pack("<dQ", self.default, len(table)))
        keys = sorted(table)
        buf.write(np.asarray(keys, dtype="<u8").tobytes())
        buf.write(np.asarray([table[k] for k in keys], dtype="<f8").tobytes())
        return buf.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes, expect: str | None = None) -> "TableEvaluator":
        descriptor, off = unpack_header(data)
        if descriptor != "table" or (expect is not None and expect != descriptor):
            raise CheckpointError(f"architecture mismatch: checkpoint has {descriptor!r}, expected {expect or 'table'!r}")
        if len(data) < off + 16:
            raise CheckpointError("truncated table checkpoint")
        default, count = struct.unpack_from("<dQ", data, off)
        off += 16
        if len(data) != off + 16 * count:
            raise CheckpointError(f"table checkpoint is {len(data)} bytes, expected {off + 16 * count}")
        keys = np.frombuffer(data, dtype="<u8", count=count, offset=off)
        vals = np.frombuffer(data, dtype="<f8", count=count, offset=off + 8 * count)
        ev = cls(default=default)
        ev.table_ = dict(zip(keys.tolist(), vals.tolist()))
        return ev


class NetworkEvaluator(BaseEstimator, RegressorMixin):
    """Value network over a game's plane encoding.

    ``architecture`` is ``"desk"``, ``"large"`` or an explicit space-separated
    layer list (``"conv3x3x16 relu dense64 relu dense1"``). ``output_tanh``
    should be set exactly when the terminal evaluation is the classic gain.
    ``fit`` trains a fresh network for ``epochs`` passes; ``partial_fit`` and
    ``update`` do a single pass (one Adam step per batch) on the current one.
    """

    def __init__(self, game: Game | None = None, architecture: str = "desk", output_tanh: bool = True,
                 batch_size: int = 128, l2: float = 0.001, learning_rate: float = 1e-3,
                 epochs: int = 1, seed: int = 0):
        self.game = game
        self.architecture = architecture
        self.output_tanh = output_tanh
        self.batch_size = batch_size
        self.l2 = l2
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.seed = seed

    def _input_shape(self, X=None):
        if self.game is not None:
            return self.game.plane_shape
        if X is None:
            raise ValueError("NetworkEvaluator needs a game or training data to infer its input shape")
        return tuple(np.shape(X)[1:])

    def _layers(self, shape):
        if self.architecture in ("desk", "large"):
            return default_layers(shape, self.output_tanh, self.architecture)
        return self.architecture.split()

    def _build(self, X=None):
        shape = self._input_shape(X)
        self.net_ = Network(shape, self._layers(shape), seed=self.seed)
        return self.net_

    @property
    def net(self) -> Network:
        if not hasattr(self, "net_"):
            self._build()
        return self.net_

    def train_config(self) -> TrainConfig:
        return TrainConfig(batch_size=self.batch_size, l2=self.l2, learning_rate=self.learning_rate)

    def fit(self, X, y):
        X = check_array(X, allow_nd=True, dtype=np.float32)
        self._build(X)
        for _ in range(self.epochs):
            self.last_stats_ = train_step(self.net_, (X, np.asarray(y, dtype=np.float64)), self.train_config())
        return self

    def partial_fit(self, X, y):
        X = check_array(X, allow_nd=True, dtype=np.float32)
        if not hasattr(self, "net_"):
            self._build(X)
        self.last_stats_ = train_step(self.net_, (X, np.asarray(y, dtype=np.float64)), self.train_config())
        return self

    def predict(self, X):
        check_is_fitted(self, "net_")
        X = check_array(X, allow_nd=True, dtype=np.float32)
        return self.net_.forward(X).astype(np.float64)

    def evaluate(self, states) -> np.ndarray:
        if not states:
            return np.zeros(0)
        return self.net.forward(self.game.encode_batch(states)).astype(np.float64)

    def update(self, pairs):
        if not pairs:
            return None
        x = self.game.encode_batch([s for s, _ in pairs])
        y = np.array([v for _, v in pairs], dtype=np.float64)
        self.last_stats_ = train_step(self.net, (x, y), self.train_config())
        return self.last_stats_

    def descriptor(self) -> str:
        return self.net.descriptor()

    def to_bytes(self) -> bytes:
        return self.net.to_bytes()

    def load_bytes(self, data: bytes) -> "NetworkEvaluator":
        expect = self.net.descriptor()
        self.net_ = Network.from_bytes(data, expect=expect)
        return self


def evaluate_children(adaptive, states) -> list[float]:
    """Batched evaluation of non-terminal states; same values as one-by-one calls."""
    if not states:
        return []
    return adaptive.evaluate(list(states)).tolist()


def load_evaluator(data: bytes, game: Game | None = None):
    """Rebuild an evaluator from checkpoint bytes (network or table)."""
    descriptor, _ = unpack_header(data)
    if descriptor == "table":
        return TableEvaluator.from_bytes(data)
    net = Network.from_bytes(data)
    if game is not None and tuple(game.plane_shape) != net.input_shape:
        raise CheckpointError(
            f"architecture mismatch: checkpoint input {net.input_shape} vs game planes {game.plane_shape}"
        )
    ev = NetworkEvaluator(game=game, architecture=" ".join(net.tokens), output_tanh=net.output_tanh)
    ev.net_ = net
    return ev
