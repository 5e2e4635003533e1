import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone

from conftest import playout
from descent.evaluation import (MatchContext, NetworkEvaluator, TableEvaluator, TerminalEvaluator, evaluate_children,
                                load_evaluator, terminal_value)
from descent.games import FIRST, HEURISTICS, SECOND, Breakthrough, Clobber, Hex, Othello, TicTacToe
from descent.nnet import CheckpointError


def context_of(game, states):
    ctx = MatchContext()
    for s in states[:-1]:
        ctx = ctx.after_turn(s.to_move, len(game.legal_actions(s)))
    return ctx


# -- examples -------------------------------------------------------------------------------


def test_hex3_depth_additive_first_win_at_ply5():
    g = Hex(3)
    s = g.make_state((1, 2, 0, 1, 2, 0, 1, 0, 0), SECOND, 5)
    assert g.gain(s) == 1
    empty = s.board.count(0)
    assert terminal_value("depth_additive", g, s) == 5.0 == empty + 1


def test_depth_multiplicative():
    g = Hex(3)
    s = g.make_state((1, 2, 0, 1, 2, 0, 1, 0, 0), SECOND, 5)
    assert terminal_value("depth_multiplicative", g, s) == pytest.approx(9 / 5)


def test_depth_additive_uses_approximation_when_length_unbounded():
    g = Clobber(4)
    s = playout(g, np.random.default_rng(0))[-1]
    v = terminal_value("depth_additive", g, s)
    assert abs(v) == max(1.0, g.approx_length - s.ply)


def test_draw_is_zero_for_every_kind():
    g = Othello(4)
    s = g.make_state([1, 2] * 8, FIRST, 20, 2)
    for kind in HEURISTICS:
        assert terminal_value(kind, g, s, MatchContext(5, 2, 9, 3)) == 0.0
    t = TicTacToe()
    draw = t.make_state((1, 2, 1, 1, 2, 2, 2, 1, 1), SECOND, 9)
    assert TerminalEvaluator(t, "depth_additive")(draw) == 0.0


def test_presence_clamped():
    g = Breakthrough(5)
    board = [0] * 25
    for i in (0, 1, 2, 3, 4, 5, 6, 24):
        board[i] = 1
    for i in (10, 11, 12):
        board[i] = 2
    s = g.make_state(board, SECOND, 30)
    assert g.gain(s) == 1
    assert terminal_value("presence", g, s) == 5.0
    board = [0] * 25
    board[24] = 1
    board[10] = board[11] = board[12] = 2
    s = g.make_state(board, SECOND, 30)
    assert g.gain(s) == 1 and terminal_value("presence", g, s) == 1.0


def test_mobility_ratio():
    g = TicTacToe()
    ctx = MatchContext(moves1=12, turns1=2, moves2=6, turns2=2)  # M1 = 6, M2 = 3
    win = g.make_state((1, 1, 1, 2, 2, 0, 0, 0, 0), SECOND, 5)
    loss = g.make_state((2, 2, 2, 1, 1, 0, 1, 0, 0), FIRST, 6)
    assert terminal_value("mobility", g, win, ctx) == 2.0
    assert terminal_value("mobility", g, loss, ctx) == -0.5


def test_mobility_context_defaults_to_one():
    assert MatchContext().m1 == 1.0 and MatchContext().m2 == 1.0
    ctx = MatchContext().after_turn(FIRST, 9).after_turn(SECOND, 8).after_turn(FIRST, 7)
    assert ctx.m1 == 8.0 and ctx.m2 == 8.0


def test_score_heuristic_on_othello():
    g = Othello(4)
    s = g.make_state([1] * 10 + [2] * 6, FIRST, 20, 2)
    assert TerminalEvaluator(g, "score")(s) == 4.0
    assert TerminalEvaluator(g, "score", normalize=True)(s) == 4.0 / 16


def test_unsupported_heuristic_rejected_at_construction():
    with pytest.raises(ValueError, match="score"):
        TerminalEvaluator(Hex(5), "score")
    with pytest.raises(ValueError):
        TerminalEvaluator(TicTacToe(), "presence")


def test_normalization_divisors():
    assert TerminalEvaluator(Hex(5), "depth_additive", normalize=True).scale == 25
    assert TerminalEvaluator(Hex(5), "classic", normalize=True).scale == 1
    assert TerminalEvaluator(Clobber(4), "presence", normalize=True).scale == 16


# -- properties over random games ----------------------------------------------------------


GAMES = [TicTacToe(), Hex(4), Othello(4), Breakthrough(5), Clobber(4)]


@pytest.mark.parametrize("game", GAMES, ids=lambda g: g.describe())
def test_sign_matches_gain_on_random_games(game):
    rng = np.random.default_rng(0)
    evaluators = [TerminalEvaluator(game, k) for k in game.heuristics]
    seen = set()
    for _ in range(10_000):
        states = playout(game, rng)
        end = states[-1]
        ctx = context_of(game, states)
        g = game.gain(end)
        seen.add(g)
        for f in evaluators:
            assert np.sign(f(end, ctx)) == g, f.kind
    assert {1, -1} <= seen


@pytest.mark.parametrize("game", GAMES, ids=lambda g: g.describe())
def test_order_preserved_pairwise(game):
    rng = np.random.default_rng(1)
    ends = []
    for _ in range(300):
        states = playout(game, rng)
        ends.append((states[-1], context_of(game, states)))
    for kind in game.heuristics:
        f = TerminalEvaluator(game, kind)
        vals = [(game.gain(s), f(s, c)) for s, c in ends]
        for ga, va in vals:
            for gb, vb in vals:
                if ga < gb:
                    assert va < vb, kind


def test_depth_additive_decreases_with_ply():
    g = Hex(5)
    f = TerminalEvaluator(g, "depth_additive")
    # first player owns column a; k second-player stones in column c make the win later
    values = []
    for k in range(5):
        board = [0] * 25
        for r in range(5):
            board[r * 5] = 1
        for r in range(k):
            board[r * 5 + 2] = 2
        s = g.make_state(board, SECOND, 5 + k)
        assert g.gain(s) == 1
        values.append(f(s))
    assert values == [21.0, 20.0, 19.0, 18.0, 17.0]


# -- adaptive evaluators ---------------------------------------------------------------------


def test_table_round_trip_exact():
    g = TicTacToe()
    states = playout(g, np.random.default_rng(2))[:-1]
    t = TableEvaluator()
    t.update([(s, 0.1 * i) for i, s in enumerate(states)])
    assert t.evaluate(states).tolist() == [0.1 * i for i in range(len(states))]
    unseen = g.apply(states[-1], g.legal_actions(states[-1])[0])
    assert t.evaluate([unseen])[0] == 0.0


def test_table_update_overwrites():
    s = TicTacToe().initial_state()
    t = TableEvaluator()
    t.update([(s, 1.0), (s, -0.25)])
    assert t.evaluate([s])[0] == -0.25


def test_table_sklearn_api():
    t = TableEvaluator(default=0.5).fit(np.array([1, 2, 3], dtype=np.uint64), [0.1, 0.2, 0.3])
    assert t.predict([3, 4]).tolist() == [0.3, 0.5]
    assert t.partial_fit([4], [1.0]).predict([4]).tolist() == [1.0]
    assert clone(t).get_params() == {"default": 0.5}
    with pytest.raises(ValueError):
        t.fit([1, 2], [1.0])


def test_table_checkpoint_round_trip():
    t = TableEvaluator(default=0.25).fit(np.array([2**63 + 5, 7], dtype=np.uint64), [0.5, -1.0])
    back = load_evaluator(t.to_bytes())
    assert back.default == 0.25 and back.table_ == t.table_
    with pytest.raises(CheckpointError):
        TableEvaluator.from_bytes(t.to_bytes()[:-1])


@settings(max_examples=30, deadline=None)
@given(pairs=st.dictionaries(st.integers(0, 2**64 - 1), st.floats(-1e6, 1e6), max_size=40))
def test_table_fit_predict_property(pairs):
    keys = np.array(list(pairs), dtype=np.uint64)
    vals = list(pairs.values())
    t = TableEvaluator().fit(keys, vals)
    assert t.predict(keys).tolist() == vals
    assert TableEvaluator.from_bytes(t.to_bytes()).table_ == t.table_


def test_network_evaluator_batching_is_pure():
    g = Hex(4)
    ev = NetworkEvaluator(g, seed=3)
    states = playout(g, np.random.default_rng(3))[:-1]
    batch = evaluate_children(ev, states)
    singles = [evaluate_children(ev, [s])[0] for s in states]
    assert batch == singles
    assert evaluate_children(ev, []) == []
    assert ev.evaluate(states[:1]).tolist() == ev.evaluate(states[:1]).tolist()


def test_network_evaluator_sklearn_api():
    g = TicTacToe()
    states = playout(g, np.random.default_rng(4))
    X = g.encode_batch(states)
    y = np.linspace(-0.5, 0.5, len(states))
    ev = NetworkEvaluator(g, batch_size=4, epochs=3, seed=1).fit(X, y)
    assert ev.net_.step == 3 * -(-len(states) // 4)
    assert ev.predict(X).shape == (len(states),)
    assert clone(ev).get_params()["epochs"] == 3
    free = NetworkEvaluator(architecture="dense8 relu dense1").fit(X, y)
    assert free.net_.input_shape == (3, 3, 3)


def test_network_evaluator_update_and_checkpoint():
    g = Hex(3)
    ev = NetworkEvaluator(g, seed=2)
    states = playout(g, np.random.default_rng(5))
    stats = ev.update([(s, 0.5) for s in states])
    assert stats.samples == len(states)
    back = load_evaluator(ev.to_bytes(), g)
    assert back.evaluate(states).tolist() == ev.evaluate(states).tolist()
    with pytest.raises(CheckpointError):
        load_evaluator(ev.to_bytes(), Hex(4))
    with pytest.raises(CheckpointError):
        NetworkEvaluator(g, output_tanh=False).load_bytes(ev.to_bytes())


def test_tanh_attached_iff_requested():
    assert NetworkEvaluator(Hex(3), output_tanh=True).net.output_tanh
    assert not NetworkEvaluator(Hex(3), output_tanh=False).net.output_tanh
