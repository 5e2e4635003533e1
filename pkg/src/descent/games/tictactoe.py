"""Tic-tac-toe: small enough to solve exhaustively, used as the oracle game."""

from __future__ import annotations

from .base import FIRST, SECOND, Game, GameState, RulesError, stabilizer_maps
from .zobrist import Zobrist

LINES = (
    (0, 1, 2), (3, 4, 5), (6, 7, 8),
    (0, 3, 6), (1, 4, 7), (2, 5, 8),
    (0, 4, 8), (2, 4, 6),
)


class TicTacToe(Game):
    name = "tictactoe"
    heuristics = ("classic", "depth_additive", "depth_multiplicative", "mobility")
    exact_length = 9
    approx_length = 9.0

    def __init__(self):
        self.rows = self.cols = 3
        self._zob = Zobrist("tictactoe", 9)
        self._initial = self.make_state((0,) * 9, FIRST, 0)
        self._maps = stabilizer_maps(self)

    def describe(self) -> str:
        return "tictactoe"

    def initial_state(self) -> GameState:
        return self._initial

    def legal_actions(self, state):
        if state.outcome is not None:
            raise RulesError(f"legal_actions on terminal state key={state.key:#018x}")
        return [i for i, p in enumerate(state.board) if p == 0]

    def _check(self, state, action):
        return isinstance(action, int) and 0 <= action < 9 and state.board[action] == 0

    @staticmethod
    def _outcome(board):
        for a, b, c in LINES:
            p = board[a]
            if p and p == board[b] == board[c]:
                return 1 if p == 1 else -1
        if 0 not in board:
            return 0
        return None

    def _play(self, state, action):
        piece = 1 if state.to_move == FIRST else 2
        board = list(state.board)
        board[action] = piece
        board = tuple(board)
        key = state.key ^ self._zob.table[piece][action] ^ self._zob.side
        return GameState(board, 1 - state.to_move, state.ply + 1, key, self._outcome(board))

    def make_state(self, board, to_move, ply, extra=None):
        board = tuple(board)
        return GameState(board, to_move, ply, self._zob.full(board, to_move), self._outcome(board))

    @property
    def plane_shape(self):
        return (3, 3, 3)

    def encode_planes(self, state):
        return self._piece_planes(state)

    def cell_maps(self):
        return self._maps

    def action_to_str(self, action):
        return self.cell_name(action)

    def parse_action(self, text):
        return self.parse_cell(text)

    def serialize(self, state):
        side = "x" if state.to_move == FIRST else "o"
        return f"tictactoe {self._board_str(state.board)} {side} {state.ply}"

    def deserialize(self, text):
        tag, board, side, ply = text.split()
        if tag != "tictactoe":
            raise ValueError(f"position is for {tag!r}, not 'tictactoe'")
        return self.make_state(self._parse_board(board), FIRST if side == "x" else SECOND, int(ply))

