"""Shared game-rules interface.

Every game is a stateless rules object; positions are immutable
:class:`GameState` values so search tables, replay buffers and worker
threads can hold them without copying.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

FIRST, SECOND = 0, 1

HEURISTICS = (
    "classic",
    "depth_additive",
    "depth_multiplicative",
    "score",
    "mobility",
    "presence",
)


class RulesError(ValueError):
    """An operation was called outside its contract (terminal state, illegal move)."""


class UnsupportedHeuristic(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GameState:
    """A position.

    ``board`` is a flat row-major tuple of small ints (0 empty, 1 first
    player's piece, 2 second player's piece). ``outcome`` is ``None`` while the
    game is running and the gain in {-1, 0, +1} once it is over. ``extra``
    carries game-specific bookkeeping (union-find forest for Hex, pass
    counter for Othello).
    """

    board: tuple
    to_move: int
    ply: int
    key: int
    outcome: int | None = None
    extra: Any = field(default=None)

    def __eq__(self, other):
        if not isinstance(other, GameState):
            return NotImplemented
        return (
            self.key == other.key
            and self.board == other.board
            and self.to_move == other.to_move
            and self.ply == other.ply
        )

    def __hash__(self):
        return hash(self.key)

    @property
    def first_to_move(self) -> bool:
        return self.to_move == FIRST


class Game:
    """Base class for the rules objects.

    Subclasses implement ``initial_state``, ``legal_actions``, ``_check``,
    ``_play``, ``make_state`` and the notation helpers. ``apply`` is the
    validated public entry point; search code goes through it as well, the
    check is O(1) per game.
    """

    name = "game"
    #: heuristics that make sense for this game (configuration-time check)
    heuristics: tuple = ("classic", "depth_additive", "depth_multiplicative", "mobility")
    #: exact maximum number of actions in a game, or None when only approximated
    exact_length: int | None = None
    #: approximate game length used by the depth heuristics
    approx_length: float = 1.0

    rows: int
    cols: int

    @property
    def cells(self) -> int:
        return self.rows * self.cols

    # -- rules --------------------------------------------------------------
    def initial_state(self) -> GameState:
        raise NotImplementedError

    def legal_actions(self, state: GameState) -> list:
        raise NotImplementedError

    def _check(self, state: GameState, action) -> bool:
        raise NotImplementedError

    def _play(self, state: GameState, action) -> GameState:
        raise NotImplementedError

    def make_state(self, board, to_move, ply, extra=None) -> GameState:
        """Build a fully consistent state (key, outcome, bookkeeping) from scratch."""
        raise NotImplementedError

    def apply(self, state: GameState, action) -> GameState:
        if state.outcome is not None:
            raise RulesError(f"apply on terminal state key={state.key:#018x}")
        if not self._check(state, action):
            raise RulesError(
                f"illegal action {self.action_to_str(action)!r} ({action!r}) "
                f"in state key={state.key:#018x}"
            )
        return self._play(state, action)

    def is_terminal(self, state: GameState) -> bool:
        return state.outcome is not None

    def gain(self, state: GameState) -> int:
        if state.outcome is None:
            raise RulesError(f"gain on non-terminal state key={state.key:#018x}")
        return state.outcome

    def piece_counts(self, state: GameState) -> tuple[int, int]:
        b = state.board
        return b.count(1), b.count(2)

    def score(self, state: GameState) -> int:
        if "score" not in self.heuristics:
            raise UnsupportedHeuristic(f"{self.name} has no score")
        if state.outcome is None:
            raise RulesError("score is only defined on terminal states")
        n1, n2 = self.piece_counts(state)
        return n1 - n2

    def check_heuristic(self, kind: str) -> None:
        if kind not in HEURISTICS:
            raise UnsupportedHeuristic(f"unknown heuristic {kind!r}")
        if kind not in self.heuristics:
            raise UnsupportedHeuristic(f"heuristic {kind!r} is not supported for {self.name}")

    def compute_key(self, state: GameState) -> int:
        return self.make_state(state.board, state.to_move, state.ply, state.extra).key

    # -- encodings ------------------------------------------------------------
    @property
    def plane_shape(self) -> tuple[int, int, int]:
        raise NotImplementedError

    def encode_planes(self, state: GameState) -> np.ndarray:
        raise NotImplementedError

    def encode_batch(self, states) -> np.ndarray:
        out = np.empty((len(states),) + self.plane_shape, dtype=np.float32)
        for i, s in enumerate(states):
            out[i] = self.encode_planes(s)
        return out

    def _piece_planes(self, state: GameState) -> np.ndarray:
        # first pieces, second pieces, player to move
        b = np.asarray(state.board, dtype=np.int8).reshape(self.rows, self.cols)
        planes = np.zeros((3, self.rows, self.cols), dtype=np.float32)
        planes[0] = b == 1
        planes[1] = b == 2
        if state.to_move == FIRST:
            planes[2] = 1.0
        return planes

    # -- symmetries -----------------------------------------------------------
    #: cell permutations (index -> index) of the symmetry group, identity first
    def cell_maps(self) -> list[tuple[int, ...]]:
        return [tuple(range(self.cells))]

    def map_action(self, action, cmap):
        return cmap[action]

    def symmetries(self, state: GameState, value):
        """Images of ``state`` under the game's symmetry group, deduplicated, same value."""
        out, seen = [], set()
        for cmap in self.cell_maps():
            board = [0] * self.cells
            for i, piece in enumerate(state.board):
                board[cmap[i]] = piece
            s2 = self.make_state(tuple(board), state.to_move, state.ply, self._map_extra(state, cmap))
            if s2.key not in seen:
                seen.add(s2.key)
                out.append((s2, value))
        return out

    def _map_extra(self, state, cmap):
        return state.extra

    # -- notation ------------------------------------------------------------
    def cell_name(self, idx: int) -> str:
        r, c = divmod(idx, self.cols)
        return f"{chr(ord('a') + c)}{r + 1}"

    def parse_cell(self, text: str) -> int:
        text = text.strip().lower()
        if len(text) < 2 or not text[0].isalpha() or not text[1:].isdigit():
            raise ValueError(f"bad cell {text!r}")
        c = ord(text[0]) - ord("a")
        r = int(text[1:]) - 1
        if not (0 <= r < self.rows and 0 <= c < self.cols):
            raise ValueError(f"cell {text!r} off the board")
        return r * self.cols + c

    def action_to_str(self, action) -> str:
        raise NotImplementedError

    def parse_action(self, text: str):
        raise NotImplementedError

    def serialize(self, state: GameState) -> str:
        raise NotImplementedError

    def deserialize(self, text: str) -> GameState:
        raise NotImplementedError

    def render(self, state: GameState) -> str:
        marks = ".XO"
        lines = []
        for r in range(self.rows - 1, -1, -1):
            row = state.board[r * self.cols:(r + 1) * self.cols]
            lines.append(f"{r + 1:>2} " + " ".join(marks[p] for p in row))
        lines.append("   " + " ".join(chr(ord("a") + c) for c in range(self.cols)))
        return "\n".join(lines)

    def describe(self) -> str:
        return f"{self.name}{self.rows}"

    # helpers shared by the board games' serializers
    def _board_str(self, board) -> str:
        marks = ".xo"
        return "/".join(
            "".join(marks[p] for p in board[r * self.cols:(r + 1) * self.cols])
            for r in range(self.rows)
        )

    def _parse_board(self, text: str) -> tuple:
        rows = text.split("/")
        if len(rows) != self.rows or any(len(r) != self.cols for r in rows):
            raise ValueError(f"board {text!r} does not fit {self.rows}x{self.cols}")
        lut = {".": 0, "x": 1, "o": 2}
        try:
            return tuple(lut[ch] for row in rows for ch in row)
        except KeyError as exc:
            raise ValueError(f"bad board character {exc}") from None


def dihedral_maps(n: int) -> dict[str, tuple[int, ...]]:
    """The eight square symmetries as cell permutations on an n x n board."""
    fns = {
        "identity": lambda r, c: (r, c),
        "rot90": lambda r, c: (c, n - 1 - r),
        "rot180": lambda r, c: (n - 1 - r, n - 1 - c),
        "rot270": lambda r, c: (n - 1 - c, r),
        "mirror": lambda r, c: (r, n - 1 - c),
        "flip": lambda r, c: (n - 1 - r, c),
        "transpose": lambda r, c: (c, r),
        "antitranspose": lambda r, c: (n - 1 - c, n - 1 - r),
    }
    out = {}
    for name, f in fns.items():
        m = [0] * (n * n)
        for r in range(n):
            for c in range(n):
                r2, c2 = f(r, c)
                m[r * n + c] = r2 * n + c2
        out[name] = tuple(m)
    return out


def stabilizer_maps(game: Game) -> list[tuple[int, ...]]:
    """Square symmetries that fix the game's initial position, identity first.

    The rules of the square-board games are invariant under these maps, and
    fixing the start position means reachable states map to reachable states.
    """
    start = game.initial_state().board
    maps = []
    for cmap in dihedral_maps(game.rows).values():
        image = [0] * game.cells
        for i, p in enumerate(start):
            image[cmap[i]] = p
        if tuple(image) == start:
            maps.append(cmap)
    return maps
