"""Othello on an even n x n board (4..8).

The first player is black (``x``). A player without a flanking placement
must play the explicit ``pass`` action; two consecutive passes end the game,
including the case of a full board. ``extra`` holds the consecutive-pass
count, which is also folded into the key.
"""

from __future__ import annotations

from .base import FIRST, SECOND, Game, GameState, RulesError, stabilizer_maps
from .zobrist import Zobrist

DIRECTIONS = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))


class Othello(Game):
    name = "othello"
    heuristics = ("classic", "depth_additive", "depth_multiplicative", "score", "mobility", "presence")

    def __init__(self, size: int = 8):
        if size % 2 or not 4 <= size <= 8:
            raise ValueError(f"othello size must be even and in 4..8, got {size}")
        self.rows = self.cols = self.n = size
        self.PASS = size * size
        # pass moves make the length unbounded in principle; the number of
        # placements is the usual approximation
        self.exact_length = None
        self.approx_length = float(size * size - 4)
        self._zob = Zobrist(f"othello{size}", size * size)
        n = size
        self._rays = []
        for idx in range(n * n):
            r, c = divmod(idx, n)
            rays = []
            for dr, dc in DIRECTIONS:
                ray = []
                rr, cc = r + dr, c + dc
                while 0 <= rr < n and 0 <= cc < n:
                    ray.append(rr * n + cc)
                    rr += dr
                    cc += dc
                if len(ray) >= 2:
                    rays.append(tuple(ray))
            self._rays.append(tuple(rays))
        m = n // 2
        board = [0] * (n * n)
        board[(m - 1) * n + m - 1] = board[m * n + m] = 2
        board[(m - 1) * n + m] = board[m * n + m - 1] = 1
        self._initial = self.make_state(tuple(board), FIRST, 0, 0)
        self._maps = stabilizer_maps(self)

    def describe(self):
        return f"othello{self.n}"

    def initial_state(self):
        return self._initial

    def _flips(self, board, idx, me, opp):
        flips = []
        for ray in self._rays[idx]:
            run = []
            for j in ray:
                p = board[j]
                if p == opp:
                    run.append(j)
                    continue
                if p == me and run:
                    flips.extend(run)
                break
        return flips

    def _flanks(self, board, idx, me, opp):
        for ray in self._rays[idx]:
            if board[ray[0]] != opp:
                continue
            for j in ray[1:]:
                q = board[j]
                if q == me:
                    return True
                if q != opp:
                    break
        return False

    def _placements(self, board, to_move):
        me, opp = (1, 2) if to_move == FIRST else (2, 1)
        return [i for i, p in enumerate(board) if p == 0 and self._flanks(board, i, me, opp)]

    def legal_actions(self, state):
        if state.outcome is not None:
            raise RulesError(f"legal_actions on terminal state key={state.key:#018x}")
        return self._placements(state.board, state.to_move) or [self.PASS]

    def _check(self, state, action):
        if action == self.PASS:
            return not self._placements(state.board, state.to_move)
        if not (isinstance(action, int) and 0 <= action < self.PASS) or state.board[action]:
            return False
        me, opp = (1, 2) if state.to_move == FIRST else (2, 1)
        return bool(self._flips(state.board, action, me, opp))

    def _play(self, state, action):
        z = self._zob
        key = state.key ^ z.side
        passes = state.extra
        if passes:
            key ^= z.extras[passes - 1]
        if action == self.PASS:
            passes += 1
            key ^= z.extras[passes - 1]
            board = state.board
        else:
            passes = 0
            me, opp = (1, 2) if state.to_move == FIRST else (2, 1)
            board = list(state.board)
            board[action] = me
            key ^= z.table[me][action]
            for j in self._flips(state.board, action, me, opp):
                board[j] = me
                key ^= z.table[opp][j] ^ z.table[me][j]
            board = tuple(board)
        outcome = self._outcome(board, passes)
        return GameState(board, 1 - state.to_move, state.ply + 1, key, outcome, passes)

    @staticmethod
    def _outcome(board, passes):
        if passes < 2:
            return None
        d = board.count(1) - board.count(2)
        return (d > 0) - (d < 0)

    def make_state(self, board, to_move, ply, extra=None):
        board = tuple(board)
        passes = int(extra or 0)
        bits = (passes - 1,) if passes else ()
        return GameState(board, to_move, ply, self._zob.full(board, to_move, bits),
                         self._outcome(board, passes), passes)

    @property
    def plane_shape(self):
        return (3, self.n, self.n)

    def encode_planes(self, state):
        return self._piece_planes(state)

    def cell_maps(self):
        return self._maps

    def action_to_str(self, action):
        return "pass" if action == self.PASS else self.cell_name(action)

    def parse_action(self, text):
        if text.strip().lower() == "pass":
            return self.PASS
        return self.parse_cell(text)

    def serialize(self, state):
        side = "x" if state.to_move == FIRST else "o"
        return f"{self.describe()} {self._board_str(state.board)} {side} {state.ply} {state.extra}"

    def deserialize(self, text):
        tag, board, side, ply, passes = text.split()
        if tag != self.describe():
            raise ValueError(f"position is for {tag!r}, not {self.describe()!r}")
        return self.make_state(self._parse_board(board), FIRST if side == "x" else SECOND,
                               int(ply), int(passes))
