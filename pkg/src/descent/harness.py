"""Match play, round-robin tournaments, learning curves and checkpoint storage."""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .evaluation import MatchContext
from .games import FIRST, Game, GameState
from .nnet import CheckpointError, unpack_header
from .search import SearchTable, Searcher, solve

log = logging.getLogger(__name__)

RESIGN = "resign"
CURVES_SCHEMA = "# schema: curves/1"
CURVE_COLUMNS = ("mark", "combination", "win_pct", "ci95", "matches", "sma6")


# -- players --------------------------------------------------------------------------


class Player:
    """Base player: ``choose`` returns a legal action, or RESIGN."""

    name = "player"

    def reset(self, game: Game):
        self.game = game

    def choose(self, state: GameState, ctx: MatchContext, rng) -> object:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r})"


class RandomPlayer(Player):
    name = "random"

    def choose(self, state, ctx, rng):
        actions = self.game.legal_actions(state)
        return actions[int(rng.integers(len(actions)))]


class ResignPlayer(Player):
    name = "resign"

    def choose(self, state, ctx, rng):
        return RESIGN


class GreedyPlayer(Player):
    """Depth-1 search over its own evaluator: best child by f_t (terminal) or f_theta."""

    def __init__(self, adaptive, f_t, name="greedy"):
        self.adaptive = adaptive
        self.f_t = f_t
        self.name = name

    def choose(self, state, ctx, rng):
        game = self.game
        actions = game.legal_actions(state)
        kids = [game.apply(state, a) for a in actions]
        kctx = ctx.after_turn(state.to_move, len(actions))
        values = [0.0] * len(kids)
        open_idx = [i for i, k in enumerate(kids) if k.outcome is None]
        for i, k in enumerate(kids):
            if k.outcome is not None:
                values[i] = self.f_t(k, kctx)
        if open_idx:
            for i, v in zip(open_idx, self.adaptive.evaluate([kids[i] for i in open_idx]).tolist()):
                values[i] = v
        first = state.to_move == FIRST
        best = 0
        for i in range(1, len(values)):
            if (values[i] > values[best]) if first else (values[i] < values[best]):
                best = i
        return actions[best]


class SearchPlayer(Player):
    """Full search per move; the table lives for one game."""

    def __init__(self, searcher: Searcher, name=None):
        self.searcher = searcher
        self.name = name or searcher.algorithm

    def reset(self, game):
        super().reset(game)
        self.table = SearchTable()

    def choose(self, state, ctx, rng):
        return self.searcher(state, self.table, ctx).action


class OptimalPlayer(Player):
    """Brute-force minimax player for small games; random among optimal moves."""

    name = "optimal"

    def __init__(self):
        self.memo: dict = {}

    def choose(self, state, ctx, rng):
        game = self.game
        actions = game.legal_actions(state)
        values = [solve(game, game.apply(state, a), self.memo) for a in actions]
        target = (max if state.to_move == FIRST else min)(values)
        best = [a for a, v in zip(actions, values) if v == target]
        return best[int(rng.integers(len(best)))]


# -- matches --------------------------------------------------------------------------


@dataclass
class MatchRecord:
    game: str
    first: str
    second: str
    seed: int
    result: int
    plies: int
    moves: list = field(default_factory=list)
    resigned: bool = False
    illegal: bool = False
    aborted: bool = False

    def score_for(self, first_seat: bool) -> float:
        """1 for a win, 0.5 for a draw, 0 for a loss, from one seat's view."""
        r = self.result if first_seat else -self.result
        return 1.0 if r > 0 else 0.5 if r == 0 else 0.0


def play_match(first: Player, second: Player, game: Game, seed: int = 0, ply_cap: int = 10_000,
               opening: int = 0) -> MatchRecord:
    """Alternate moves to the end of the game; deterministic given ``seed``.

    The first ``opening`` plies are uniformly random and drawn before either
    player is consulted, so a seed fixes the same opening whichever player
    takes which seat.
    """
    rng = np.random.default_rng(seed)
    first.reset(game)
    second.reset(game)
    state = game.initial_state()
    ctx = MatchContext()
    moves = []
    record = MatchRecord(game.describe(), first.name, second.name, seed, 0, 0, moves)
    while state.outcome is None:
        if state.ply >= ply_cap:
            record.aborted = True
            break
        player = first if state.to_move == FIRST else second
        if state.ply < opening:
            legal = game.legal_actions(state)
            action = legal[int(rng.integers(len(legal)))]
        else:
            action = player.choose(state, ctx, rng)
        loser = 1 if state.to_move == FIRST else -1
        if action == RESIGN:
            record.resigned = True
            record.result = -loser
            break
        legal = game.legal_actions(state)
        if action not in legal:
            log.error("illegal move %r by %s at %s", action, player.name, game.serialize(state))
            record.illegal = True
            record.result = -loser
            break
        ctx = ctx.after_turn(state.to_move, len(legal))
        moves.append(game.action_to_str(action))
        state = game.apply(state, action)
    else:
        record.result = state.outcome
    record.plies = len(moves)
    return record


# -- tournaments ----------------------------------------------------------------------


def binomial_ci(p: float, n: int) -> float:
    """95% normal-approximation half-width of a proportion over n matches."""
    return 1.96 * math.sqrt(p * (1.0 - p) / n) if n else 0.0


@dataclass
class Standing:
    name: str
    score: float
    matches: int

    @property
    def win_pct(self) -> float:
        return 100.0 * self.score / self.matches if self.matches else 0.0

    @property
    def ci95(self) -> float:
        return 100.0 * binomial_ci(self.score / self.matches, self.matches) if self.matches else 0.0


def round_robin(players: dict, game: Game, games_per_color: int = 1, seed: int = 0, ply_cap: int = 10_000,
                opening: int = 0) -> tuple[list[Standing], list[MatchRecord]]:
    """All-play-all: every pair plays ``games_per_color`` matches in each seat.

    Match seeds derive from ``seed`` and the pairing index, so results do not
    depend on the dict's iteration order beyond the names themselves. Both
    seat assignments of a pairing share a seed, hence the same opening.
    """
    if len(players) < 2:
        raise ValueError("a round robin needs at least two players")
    names = sorted(players)
    score = {n: 0.0 for n in names}
    count = {n: 0 for n in names}
    records = []
    for (i, a), (j, b) in itertools.combinations(enumerate(names), 2):
        for k in range(games_per_color):
            for swap in (False, True):
                x, y = (b, a) if swap else (a, b)
                s = seed * 1_000_003 + (i * len(names) + j) * 10_007 + k
                rec = play_match(players[x], players[y], game, seed=s, ply_cap=ply_cap, opening=opening)
                records.append(rec)
                score[x] += rec.score_for(True)
                score[y] += rec.score_for(False)
                count[x] += 1
                count[y] += 1
    return [Standing(n, score[n], count[n]) for n in names], records


@dataclass
class ExperimentSchedule:
    """Combination name -> list of (mark, player) snapshots, marks ascending.

    Every snapshot is evaluated against the final snapshot of every other
    combination, in both seats.
    """

    snapshots: dict
    games_per_color: int = 1
    opening: int = 0

    def final(self, name):
        return self.snapshots[name][-1][1]


@dataclass
class CurveRow:
    mark: int
    combination: str
    win_pct: float
    ci95: float
    matches: int


def run_schedule(schedule: ExperimentSchedule, game: Game, seed: int = 0) -> list[CurveRow]:
    names = sorted(schedule.snapshots)
    rows = []
    for ci, name in enumerate(names):
        for mark, player in schedule.snapshots[name]:
            score, n = 0.0, 0
            for oj, other in enumerate(names):
                if other == name:
                    continue
                opp = schedule.final(other)
                for k in range(schedule.games_per_color):
                    for seat in (True, False):
                        s = seed * 1_000_003 + mark * 7919 + ci * 101 + oj * 11 + k
                        op = schedule.opening
                        rec = (play_match(player, opp, game, s, opening=op) if seat
                               else play_match(opp, player, game, s, opening=op))
                        score += rec.score_for(seat)
                        n += 1
            p = score / n if n else 0.0
            rows.append(CurveRow(mark, name, 100.0 * p, 100.0 * binomial_ci(p, n), n))
    return rows


def emit_curves(rows, path=None, window: int = 6) -> str:
    """Write the curves CSV (returns its text). ``sma6`` averages the last
    ``window`` marks of the same combination, or all of them if fewer.
    """
    ordered = sorted(rows, key=lambda r: (r.combination, r.mark))
    history: dict = {}
    buf = io.StringIO()
    buf.write(CURVES_SCHEMA + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CURVE_COLUMNS)
    out = []
    for r in ordered:
        h = history.setdefault(r.combination, [])
        h.append(r.win_pct)
        sma = sum(h[-window:]) / len(h[-window:])
        out.append((r.mark, r.combination, f"{r.win_pct:.4f}", f"{r.ci95:.4f}", r.matches, f"{sma:.4f}"))
    for row in sorted(out, key=lambda x: (x[0], x[1])):
        w.writerow(row)
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def read_curves(text: str) -> list[dict]:
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


# -- checkpoints ----------------------------------------------------------------------


class CheckpointRegistry:
    """Content-addressed checkpoint store.

    ``<id>.ckpt`` holds the evaluator bytes and ``<id>.json`` the config
    snapshot; ``index.txt`` lists ids in save order. The id is the first 16
    hex digits of the SHA-256 of the checkpoint bytes.
    """

    def __init__(self, directory):
        self.dir = Path(directory)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.index = self.dir / "index.txt"

    def save(self, data: bytes, config: dict | None = None) -> str:
        unpack_header(data)  # refuse to store something that is not a checkpoint
        cid = hashlib.sha256(data).hexdigest()[:16]
        ckpt = self.dir / f"{cid}.ckpt"
        if not ckpt.exists():
            ckpt.write_bytes(data)
            (self.dir / f"{cid}.json").write_text(json.dumps(config or {}, sort_keys=True, indent=1))
        with self.index.open("a") as fh:
            fh.write(cid + "\n")
        return cid

    def list(self) -> list[str]:
        if not self.index.exists():
            return []
        return [ln for ln in self.index.read_text().split() if ln]

    def config(self, cid: str) -> dict:
        return json.loads((self.dir / f"{cid}.json").read_text())

    def load(self, cid: str, expect: str | None = None) -> bytes:
        path = self.dir / f"{cid}.ckpt"
        if not path.exists():
            raise CheckpointError(f"no checkpoint {cid!r} in {self.dir}")
        data = path.read_bytes()
        if hashlib.sha256(data).hexdigest()[:16] != cid:
            raise CheckpointError(f"checkpoint {cid} does not match its content hash (file modified)")
        descriptor, _ = unpack_header(data)
        if expect is not None and descriptor != expect:
            raise CheckpointError(f"architecture mismatch: checkpoint has {descriptor!r}, expected {expect!r}")
        return data
