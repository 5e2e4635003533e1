"""Self-check suites behind ``descent verify``.

Each suite returns a list of :class:`Check`; a suite passes when every
check does.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .evaluation import MatchContext, TableEvaluator, TerminalEvaluator
from .games import FIRST, Breakthrough, Clobber, Hex, Othello, TicTacToe, make_game
from .learning import epsilon_greedy_probs, ordinal_probs, select_epsilon_greedy, select_ordinal, select_softmax, softmax_probs
from .nnet import Network, default_layers, grad_check
from .search import SearchBudget, SearchTable, Searcher, alphabeta_value, completed_descent, solve

EXHAUSTIVE = SearchBudget.iterations(10**7)
SUITES = ("oracle", "gradcheck", "distributions", "completion")


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}  {self.detail}".rstrip()


def minimax_depth(game, state, depth, f_theta, f_t, ctx=MatchContext()) -> float:
    """Plain depth-limited minimax (no pruning), the oracle for alpha-beta."""
    if state.outcome is not None:
        return f_t(state, ctx)
    if depth == 0:
        return float(f_theta.evaluate([state])[0])
    actions = game.legal_actions(state)
    kctx = ctx.after_turn(state.to_move, len(actions))
    vals = [minimax_depth(game, game.apply(state, a), depth - 1, f_theta, f_t, kctx) for a in actions]
    return max(vals) if state.to_move == FIRST else min(vals)


def random_positions(game, count, rng, max_plies=None):
    out = []
    while len(out) < count:
        s = game.initial_state()
        stop = int(rng.integers(0, max_plies or game.cells))
        for _ in range(stop):
            if s.outcome is not None:
                break
            acts = game.legal_actions(s)
            s = game.apply(s, acts[int(rng.integers(len(acts)))])
        if s.outcome is None:
            out.append(s)
    return out


class _HashEvaluator:
    """Deterministic pseudo-random leaf values in (-1, 1), for oracle comparisons."""

    def evaluate(self, states):
        return np.array([((s.key * 0x9E3779B97F4A7C15) % 2**64) / 2**63 - 1.0 for s in states])


def oracle_suite(positions: int = 100) -> list[Check]:
    checks = []
    zero = TableEvaluator()
    for game in (TicTacToe(), Hex(3)):
        root = game.initial_state()
        truth = solve(game, root)
        f_t = TerminalEvaluator(game)
        for algo in ("ubfm", "descent", "completed_descent", "ubfm_s", "alphabeta"):
            res = Searcher(algo, game, zero, f_t, EXHAUSTIVE)(root, SearchTable())
            checks.append(Check(f"{game.describe()} {algo} root value", res.value == truth,
                                f"got {res.value}, minimax {truth}"))
    rng = np.random.default_rng(0)
    game = Hex(4)
    f_t = TerminalEvaluator(game)
    hv = _HashEvaluator()
    worst = 0.0
    ok = True
    for i, s in enumerate(random_positions(game, positions, rng)):
        depth = 1 + i % 3
        a = alphabeta_value(game, s, depth, hv, f_t)
        b = minimax_depth(game, s, depth, hv, f_t)
        worst = max(worst, abs(a - b))
        ok &= a == b
    checks.append(Check(f"alpha-beta equals minimax at depth 1-3 on {positions} hex4 positions", ok,
                        f"max |diff| {worst:g}"))
    return checks


def default_architectures():
    games = [Hex(3), Hex(5), TicTacToe(), Othello(4), Othello(6), Breakthrough(5), Clobber(4)]
    for game in games:
        for tanh in (True, False):
            yield game, Network(game.plane_shape, default_layers(game.plane_shape, tanh), seed=1)


def gradcheck_suite(tol: float = 1e-4) -> list[Check]:
    checks = []
    rng = np.random.default_rng(0)
    for game, net in default_architectures():
        states = random_positions(game, 8, rng)
        x = game.encode_batch(states)
        y = rng.uniform(-1, 1, size=len(states))
        err = grad_check(net, x, y, l2=0.001, n_params=100, seed=1)
        checks.append(Check(f"gradcheck {game.describe()} {net.descriptor()}", err < tol, f"max rel err {err:.2e}"))
    return checks


def _chi2(counts, probs, n):
    exp = probs * n
    mask = exp > 0
    return float(((counts[mask] - exp[mask]) ** 2 / exp[mask]).sum())


def distribution_grid(draws: int = 10_000, seed: int = 0):
    """Yield (label, empirical counts, closed-form probabilities) over the
    grid n in {2, 3, 5} x e' in {0, 0.25, 0.5, 0.75, 1}; softmax (which has no
    e') is sampled once per n at temperature 1. The player to move maximizes.
    """
    rng = np.random.default_rng(seed)
    for n in (2, 3, 5):
        values = list(rng.permutation(n).astype(float))
        for e in (0.0, 0.25, 0.5, 0.75, 1.0):
            c = np.bincount([select_epsilon_greedy(values, True, e, 1.0, rng) for _ in range(draws)], minlength=n)
            yield f"epsilon_greedy n={n} e'={e}", c, epsilon_greedy_probs(values, True, e)
            c = np.bincount([select_ordinal(values, True, e, 1.0, rng) for _ in range(draws)], minlength=n)
            p = np.zeros(n)
            p[sorted(range(n), key=lambda i: -values[i])] = ordinal_probs(n, e)
            yield f"ordinal n={n} e'={e}", c, p
        c = np.bincount([select_softmax(values, True, 1.0, rng) for _ in range(draws)], minlength=n)
        yield f"softmax n={n} T=1", c, softmax_probs(values, True, 1.0)


def within_3_sigma(counts, probs, draws) -> bool:
    sd = np.sqrt(draws * probs * (1 - probs))
    return bool(np.all(np.abs(counts - draws * probs) <= 3 * sd + 1e-9))


def distributions_suite(draws: int = 10_000) -> list[Check]:
    checks = []
    for label, counts, probs in distribution_grid(draws):
        ok = within_3_sigma(counts, probs, draws)
        checks.append(Check(label, ok, f"chi2={_chi2(counts, probs, draws):.2f} df={int((probs > 0).sum()) - 1}"))
    exact = ordinal_probs(3, 0.5)
    checks.append(Check("ordinal closed form n=3 e'=0.5 is (2/3, 1/4, 1/12)",
                        bool(np.allclose(exact, [2 / 3, 1 / 4, 1 / 12], atol=1e-15, rtol=0)), str(exact.round(6))))
    return checks


def resolved_engine_games(game, games: int, seed: int = 0):
    """Play the completed-descent engine from the root against random and optimal opponents.

    The engine plays the seat(s) where the root is proven non-losing for it.
    A game is unconverted when the engine stood on a position proven won for
    it and still did not win. Returns (losses, unconverted, games that reached a
    proven win, games, root result).
    """
    from .harness import OptimalPlayer, Player, RandomPlayer, play_match

    zero = TableEvaluator()
    f_t = TerminalEvaluator(game)
    table = SearchTable()
    root = completed_descent(game, game.initial_state(), table, zero, f_t, EXHAUSTIVE)

    class Engine(Player):
        name = "completed"

        def reset(self, g):
            self.game = g
            self.won = False

        def choose(self, state, ctx, rng):
            # the table is shared across games: resolved subtrees stay resolved
            res = completed_descent(self.game, state, table, zero, f_t, EXHAUSTIVE, ctx)
            self.won |= res.resolved and res.r == (1 if state.to_move == FIRST else -1)
            return res.action

    seats = [True] if root.r == 1 else [False] if root.r == -1 else [True, False]
    engine = Engine()
    losses, unconverted, reached, played = 0, 0, 0, 0
    opponents = [RandomPlayer(), OptimalPlayer()]
    for k in range(games):
        opp = opponents[k % 2]
        seat = seats[(k // 2) % len(seats)]
        rec = play_match(engine, opp, game, seed + k) if seat else play_match(opp, engine, game, seed + k)
        played += 1
        score = rec.score_for(seat)
        losses += score == 0.0
        unconverted += engine.won and score != 1.0
        reached += engine.won
    return losses, unconverted, reached, played, root


def completion_suite(games: int = 200) -> list[Check]:
    checks = []
    for game in (TicTacToe(), Hex(3)):
        losses, unconverted, reached, played, root = resolved_engine_games(game, games)
        checks.append(Check(f"{game.describe()} root resolved", root.resolved, f"r={root.r}"))
        checks.append(Check(f"{game.describe()} resolved engine never loses", losses == 0,
                            f"{losses} losses in {played} games"))
        checks.append(Check(f"{game.describe()} proven wins are converted", unconverted == 0,
                            f"{unconverted} unconverted of {reached} games reaching a proven win"))
    return checks


def run_suite(name: str) -> list[Check]:
    if name == "oracle":
        return oracle_suite()
    if name == "gradcheck":
        return gradcheck_suite()
    if name == "distributions":
        return distributions_suite()
    if name == "completion":
        return completion_suite()
    raise ValueError(f"unknown suite {name!r}; choose from {SUITES}")


__all__ = ["Check", "SUITES", "run_suite", "oracle_suite", "gradcheck_suite", "distributions_suite",
           "completion_suite", "minimax_depth", "random_positions", "resolved_engine_games", "distribution_grid",
           "within_3_sigma", "default_architectures", "make_game"]
