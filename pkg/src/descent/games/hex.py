"""Hex on an n x n rhombus, optional swap rule.

The first player (``x``) links the top and bottom rows, the second (``o``)
links the left and right columns. Connection is tracked incrementally with a
union-find forest over stones plus four virtual side nodes; each state owns
its own parent array (copied on write) so states stay immutable.

Swap is applied as board reflection plus color exchange: the opening stone at
(r, c) becomes an ``o`` stone at (c, r) and the first player moves again.
"""

from __future__ import annotations

import numpy as np

from .base import FIRST, SECOND, Game, GameState, RulesError
from .zobrist import Zobrist

NEIGHBORS = ((-1, 0), (1, 0), (0, -1), (0, 1), (-1, 1), (1, -1))


def _find(parent, i):
    root = i
    while parent[root] != root:
        root = parent[root]
    while parent[i] != root:
        parent[i], i = root, parent[i]
    return root


class Hex(Game):
    name = "hex"
    heuristics = ("classic", "depth_additive", "depth_multiplicative", "mobility")

    def __init__(self, size: int = 11, swap: bool = False):
        if not 2 <= size <= 13:
            raise ValueError(f"hex size must be in 2..13, got {size}")
        self.rows = self.cols = self.n = size
        self.swap = bool(swap)
        n2 = size * size
        self.SWAP = n2
        self.TOP, self.BOTTOM, self.LEFT, self.RIGHT = n2, n2 + 1, n2 + 2, n2 + 3
        # swap counts as one extra playable action
        self.exact_length = n2 + (1 if self.swap else 0)
        self.approx_length = float(self.exact_length)
        self._zob = Zobrist(f"hex{size}", n2)
        self._adj = []
        for idx in range(n2):
            r, c = divmod(idx, size)
            self._adj.append(tuple(
                (r + dr) * size + c + dc
                for dr, dc in NEIGHBORS
                if 0 <= r + dr < size and 0 <= c + dc < size
            ))
        self._rot180 = tuple(n2 - 1 - i for i in range(n2))
        self._initial = self.make_state((0,) * n2, FIRST, 0)

    def describe(self) -> str:
        return f"hex{self.n}" + ("s" if self.swap else "")

    def _swap_available(self, ply: int) -> bool:
        return self.swap and ply == 1

    # -- rules -----------------------------------------------------------------
    def initial_state(self) -> GameState:
        return self._initial

    def legal_actions(self, state: GameState) -> list:
        if state.outcome is not None:
            raise RulesError(f"legal_actions on terminal state key={state.key:#018x}")
        acts = [i for i, p in enumerate(state.board) if p == 0]
        if self._swap_available(state.ply):
            acts.append(self.SWAP)
        return acts

    def _check(self, state, action) -> bool:
        if action == self.SWAP:
            return self._swap_available(state.ply)
        return isinstance(action, int) and 0 <= action < self.SWAP and state.board[action] == 0

    def _play(self, state: GameState, action) -> GameState:
        if action == self.SWAP:
            (stone,) = [i for i, p in enumerate(state.board) if p]
            r, c = divmod(stone, self.n)
            board = [0] * self.SWAP
            board[c * self.n + r] = 2
            return self.make_state(tuple(board), FIRST, state.ply + 1)
        piece = 1 if state.to_move == FIRST else 2
        board = list(state.board)
        board[action] = piece
        parent = list(state.extra)
        self._link(parent, board, action, piece)
        key = state.key ^ self._zob.table[piece][action] ^ self._zob.side
        ply = state.ply + 1
        if self._swap_available(state.ply):
            key ^= self._zob.extras[0]
        if self._swap_available(ply):
            key ^= self._zob.extras[0]
        outcome = None
        if piece == 1 and _find(parent, self.TOP) == _find(parent, self.BOTTOM):
            outcome = 1
        elif piece == 2 and _find(parent, self.LEFT) == _find(parent, self.RIGHT):
            outcome = -1
        return GameState(tuple(board), 1 - state.to_move, ply, key, outcome, parent)

    def _link(self, parent, board, idx, piece):
        n = self.n
        root = _find(parent, idx)
        r, c = divmod(idx, n)
        sides = []
        if piece == 1:
            if r == 0:
                sides.append(self.TOP)
            if r == n - 1:
                sides.append(self.BOTTOM)
        else:
            if c == 0:
                sides.append(self.LEFT)
            if c == n - 1:
                sides.append(self.RIGHT)
        for j in self._adj[idx]:
            if board[j] == piece:
                sides.append(j)
        for j in sides:
            rj = _find(parent, j)
            if rj != root:
                parent[rj] = root

    def make_state(self, board, to_move, ply, extra=None) -> GameState:
        board = tuple(board)
        parent = list(range(self.SWAP + 4))
        for idx, piece in enumerate(board):
            if piece:
                self._link(parent, board, idx, piece)
        outcome = None
        if _find(parent, self.TOP) == _find(parent, self.BOTTOM):
            outcome = 1
        elif _find(parent, self.LEFT) == _find(parent, self.RIGHT):
            outcome = -1
        bits = (0,) if self._swap_available(ply) else ()
        key = self._zob.full(board, to_move, bits)
        return GameState(board, to_move, ply, key, outcome, parent)

    def compute_key(self, state: GameState) -> int:
        bits = (0,) if self._swap_available(state.ply) else ()
        return self._zob.full(state.board, state.to_move, bits)

    # -- encoding ----------------------------------------------------------------
    @property
    def plane_shape(self):
        return (2, self.n + 2, self.n + 2)

    def encode_planes(self, state: GameState) -> np.ndarray:
        """Two planes on the board padded by one line per side.

        Plane 0 holds first-player stones with the top and bottom border rows
        filled, plane 1 second-player stones with the left and right border
        columns filled. The side to move is implied by stone parity, so a
        placement changes exactly one cell of the encoding.
        """
        n = self.n
        planes = np.zeros((2, n + 2, n + 2), dtype=np.float32)
        b = np.asarray(state.board, dtype=np.int8).reshape(n, n)
        planes[0, 1:-1, 1:-1] = b == 1
        planes[1, 1:-1, 1:-1] = b == 2
        planes[0, 0, :] = planes[0, -1, :] = 1.0
        planes[1, :, 0] = planes[1, :, -1] = 1.0
        return planes

    def cell_maps(self):
        return [tuple(range(self.SWAP)), self._rot180]

    # -- notation ----------------------------------------------------------------
    def action_to_str(self, action) -> str:
        if action == self.SWAP:
            return "swap"
        return self.cell_name(action)

    def parse_action(self, text: str):
        if text.strip().lower() == "swap":
            return self.SWAP
        return self.parse_cell(text)

    def serialize(self, state: GameState) -> str:
        side = "x" if state.to_move == FIRST else "o"
        return f"{self.describe()} {self._board_str(state.board)} {side} {state.ply}"

    def deserialize(self, text: str) -> GameState:
        tag, board, side, ply = text.split()
        if tag != self.describe():
            raise ValueError(f"position is for {tag!r}, not {self.describe()!r}")
        return self.make_state(self._parse_board(board), FIRST if side == "x" else SECOND, int(ply))

    def render(self, state: GameState) -> str:
        marks = ".XO"
        n = self.n
        lines = ["   " + " ".join(chr(ord("a") + c) for c in range(n))]
        for r in range(n):
            row = state.board[r * n:(r + 1) * n]
            lines.append(" " * r + f"{r + 1:>2} " + " ".join(marks[p] for p in row))
        return "\n".join(lines)
