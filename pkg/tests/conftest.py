import numpy as np
import pytest

from descent.games import Breakthrough, Clobber, Hex, Othello, TicTacToe

# acceptance lines collected during the run, echoed in the terminal summary
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])


ALL_GAMES = [
    TicTacToe(), Hex(3), Hex(5), Hex(4, swap=True), Othello(4), Othello(6),
    Breakthrough(5), Breakthrough(6), Clobber(4), Clobber(5),
]


@pytest.fixture(params=ALL_GAMES, ids=lambda g: g.describe())
def game(request):
    return request.param


def playout(game, rng, state=None, plies=None):
    """Uniformly random moves from ``state``; returns the visited states."""
    s = state or game.initial_state()
    out = [s]
    while s.outcome is None and (plies is None or len(out) <= plies):
        acts = game.legal_actions(s)
        s = game.apply(s, acts[int(rng.integers(len(acts)))])
        out.append(s)
    return out


def all_states(game):
    """Every reachable state of a small game, keyed by (board, to_move, ply)."""
    seen = {}
    stack = [game.initial_state()]
    while stack:
        s = stack.pop()
        k = (s.board, s.to_move, s.ply)
        if k in seen:
            continue
        seen[k] = s
        if s.outcome is None:
            stack.extend(game.apply(s, a) for a in game.legal_actions(s))
    return list(seen.values())


class TreeGame:
    """A fixed explicit game tree for hand-checked search examples.

    ``tree`` maps a node name to a list of child names or to a terminal gain
    (int). Node names double as actions. The first player moves at even depth.
    """

    name = "tree"
    heuristics = ("classic",)
    exact_length = 4
    approx_length = 4.0
    rows, cols = 1, 1
    cells = 1

    def __init__(self, tree, root="root"):
        self.tree = tree
        self.root = root
        self.depth = {root: 0}
        stack = [root]
        while stack:
            n = stack.pop()
            kids = tree[n]
            if isinstance(kids, list):
                for k in kids:
                    self.depth[k] = self.depth[n] + 1
                    stack.append(k)
        self._states = {}

    def _state(self, name):
        from descent.games import GameState

        if name not in self._states:
            d = self.depth[name]
            out = self.tree[name] if isinstance(self.tree[name], int) else None
            key = int.from_bytes(name.encode()[:8].ljust(8, b"\0"), "little") ^ (len(name) << 56)
            self._states[name] = GameState((name,), d % 2, d, key, out)
        return self._states[name]

    def initial_state(self):
        return self._state(self.root)

    def legal_actions(self, state):
        return list(self.tree[state.board[0]])

    def apply(self, state, action):
        assert action in self.tree[state.board[0]]
        return self._state(action)

    def describe(self):
        return "tree"

    def check_heuristic(self, kind):
        pass

    def gain(self, state):
        return state.outcome

    def action_to_str(self, a):
        return a

    def piece_counts(self, state):
        return 0, 0


class DictEvaluator:
    """Leaf values from a dict (by node name); counts evaluated states."""

    def __init__(self, values):
        self.values = values
        self.calls = 0

    def evaluate(self, states):
        self.calls += len(states)
        return np.array([self.values.get(s.board[0], 0.0) for s in states], dtype=float)
