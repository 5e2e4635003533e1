"""Breakthrough and Clobber: piece-moving games with ``from-to`` actions.

Actions are encoded as ``src * cells + dst``; the canonical order is
row-major on the source cell, then row-major on the destination.
In both games a player who has no legal move loses.
"""

from __future__ import annotations

from .base import FIRST, SECOND, Game, GameState, RulesError, stabilizer_maps
from .zobrist import Zobrist

# Mean length of uniformly random games, measured once over 1000 games per
# size (seed 0, see tests/test_games.py::test_random_game_length_constants).
BREAKTHROUGH_MEAN_LENGTH = {5: 16.1, 6: 27.7, 7: 44.6, 8: 63.6}
CLOBBER_MEAN_LENGTH = {2: 3.0, 3: 5.3, 4: 10.0, 5: 15.7, 6: 22.8, 7: 31.3, 8: 41.0}


class _MoveGame(Game):
    heuristics = ("classic", "depth_additive", "depth_multiplicative", "mobility", "presence")

    def _setup(self, label):
        n = self.n
        self._zob = Zobrist(label, n * n)
        self._initial = self.make_state(self._start_board(), FIRST, 0)
        self._maps = stabilizer_maps(self)

    def describe(self):
        return f"{self.name}{self.n}"

    def initial_state(self):
        return self._initial

    def legal_actions(self, state):
        if state.outcome is not None:
            raise RulesError(f"legal_actions on terminal state key={state.key:#018x}")
        return self._moves(state.board, state.to_move)

    def _any_move(self, board, to_move) -> bool:
        raise NotImplementedError

    def _check(self, state, action):
        if not isinstance(action, int):
            return False
        src, dst = divmod(action, self.cells)
        return 0 <= src < self.cells and dst in self._targets(state.board, src, state.to_move)

    def _play(self, state, action):
        src, dst = divmod(action, self.cells)
        board = list(state.board)
        piece = board[src]
        captured = board[dst]
        board[src] = 0
        board[dst] = piece
        board = tuple(board)
        z = self._zob
        key = state.key ^ z.side ^ z.table[piece][src] ^ z.table[piece][dst]
        if captured:
            key ^= z.table[captured][dst]
        to_move = 1 - state.to_move
        outcome = self._outcome_after(board, dst, piece, to_move)
        return GameState(board, to_move, state.ply + 1, key, outcome)

    def _outcome_after(self, board, dst, piece, to_move):
        if not self._any_move(board, to_move):
            return 1 if to_move == SECOND else -1
        return None

    def make_state(self, board, to_move, ply, extra=None):
        board = tuple(board)
        outcome = self._static_outcome(board, to_move)
        return GameState(board, to_move, ply, self._zob.full(board, to_move), outcome)

    def _static_outcome(self, board, to_move):
        if not self._any_move(board, to_move):
            return 1 if to_move == SECOND else -1
        return None

    @property
    def plane_shape(self):
        return (3, self.n, self.n)

    def encode_planes(self, state):
        return self._piece_planes(state)

    def cell_maps(self):
        return self._maps

    def action_to_str(self, action):
        src, dst = divmod(action, self.cells)
        return f"{self.cell_name(src)}-{self.cell_name(dst)}"

    def parse_action(self, text):
        try:
            a, b = text.strip().lower().split("-")
        except ValueError:
            raise ValueError(f"expected a move like 'a1-b2', got {text!r}") from None
        return self.parse_cell(a) * self.cells + self.parse_cell(b)

    def serialize(self, state):
        side = "x" if state.to_move == FIRST else "o"
        return f"{self.describe()} {self._board_str(state.board)} {side} {state.ply}"

    def deserialize(self, text):
        tag, board, side, ply = text.split()
        if tag != self.describe():
            raise ValueError(f"position is for {tag!r}, not {self.describe()!r}")
        return self.make_state(self._parse_board(board), FIRST if side == "x" else SECOND, int(ply))


class Breakthrough(_MoveGame):
    """First player (``x``) starts on rows 1-2 and moves toward row n.

    A piece steps one square forward, straight onto an empty square or
    diagonally onto an empty or enemy square (capture). Reaching the far
    row wins; so does leaving the opponent without a legal move (which
    includes capturing all their pieces).
    """

    name = "breakthrough"

    def __init__(self, size: int = 8):
        if not 5 <= size <= 8:
            raise ValueError(f"breakthrough size must be in 5..8, got {size}")
        self.rows = self.cols = self.n = size
        self.exact_length = None
        self.approx_length = BREAKTHROUGH_MEAN_LENGTH[size]
        n = size
        # per side: list over cells of (straight target, diagonal targets)
        self._steps = []
        for forward in (1, -1):
            table = []
            for idx in range(n * n):
                r, c = divmod(idx, n)
                rr = r + forward
                if not 0 <= rr < n:
                    table.append((None, ()))
                    continue
                diag = tuple(rr * n + cc for cc in (c - 1, c + 1) if 0 <= cc < n)
                table.append((rr * n + c, diag))
            self._steps.append(table)
        self._setup(f"breakthrough{size}")

    def _start_board(self):
        n = self.n
        board = [0] * (n * n)
        for c in range(n):
            board[c] = board[n + c] = 1
            board[(n - 1) * n + c] = board[(n - 2) * n + c] = 2
        return tuple(board)

    def _targets(self, board, src, to_move):
        me = 1 if to_move == FIRST else 2
        if board[src] != me:
            return ()
        straight, diag = self._steps[to_move][src]
        out = []
        if straight is None:
            return ()
        for d in sorted((straight,) + diag):
            if d == straight:
                if board[d] == 0:
                    out.append(d)
            elif board[d] != me:
                out.append(d)
        return out

    def _moves(self, board, to_move):
        me = 1 if to_move == FIRST else 2
        cells = self.cells
        out = []
        for src, p in enumerate(board):
            if p == me:
                out.extend(src * cells + d for d in self._targets(board, src, to_move))
        return out

    def _any_move(self, board, to_move):
        me = 1 if to_move == FIRST else 2
        steps = self._steps[to_move]
        for src, p in enumerate(board):
            if p == me:
                straight, diag = steps[src]
                if straight is not None and board[straight] == 0:
                    return True
                for d in diag:
                    if board[d] != me:
                        return True
        return False

    def _outcome_after(self, board, dst, piece, to_move):
        row = dst // self.n
        if piece == 1 and row == self.n - 1:
            return 1
        if piece == 2 and row == 0:
            return -1
        return super()._outcome_after(board, dst, piece, to_move)

    def _static_outcome(self, board, to_move):
        n = self.n
        if 1 in board[(n - 1) * n:]:
            return 1
        if 2 in board[:n]:
            return -1
        return super()._static_outcome(board, to_move)


class Clobber(_MoveGame):
    """Checkerboard start; a stone moves orthogonally onto an adjacent enemy stone
    and removes it. The player left without a capture loses.
    """

    name = "clobber"

    def __init__(self, size: int = 6):
        if not 2 <= size <= 8:
            raise ValueError(f"clobber size must be in 2..8, got {size}")
        self.rows = self.cols = self.n = size
        self.exact_length = None
        self.approx_length = CLOBBER_MEAN_LENGTH[size]
        n = size
        self._adj = []
        for idx in range(n * n):
            r, c = divmod(idx, n)
            self._adj.append(tuple(sorted(
                (r + dr) * n + c + dc
                for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1))
                if 0 <= r + dr < n and 0 <= c + dc < n
            )))
        self._setup(f"clobber{size}")

    def _start_board(self):
        n = self.n
        return tuple(1 if (r + c) % 2 == 0 else 2 for r in range(n) for c in range(n))

    def _targets(self, board, src, to_move):
        me, opp = (1, 2) if to_move == FIRST else (2, 1)
        if board[src] != me:
            return ()
        return [d for d in self._adj[src] if board[d] == opp]

    def _moves(self, board, to_move):
        me, opp = (1, 2) if to_move == FIRST else (2, 1)
        cells = self.cells
        out = []
        for src, p in enumerate(board):
            if p == me:
                out.extend(src * cells + d for d in self._adj[src] if board[d] == opp)
        return out

    def _any_move(self, board, to_move):
        me, opp = (1, 2) if to_move == FIRST else (2, 1)
        adj = self._adj
        for src, p in enumerate(board):
            if p == me:
                for d in adj[src]:
                    if board[d] == opp:
                        return True
        return False
