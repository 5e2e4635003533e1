import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import all_states, playout
from descent.games import FIRST, SECOND, Breakthrough, Clobber, Hex, Othello, RulesError, TicTacToe, make_game
from descent.games.moves import BREAKTHROUGH_MEAN_LENGTH, CLOBBER_MEAN_LENGTH


# -- legal actions / apply examples ------------------------------------------------------


def test_hex3_empty_has_nine_actions():
    g = Hex(3)
    assert g.legal_actions(g.initial_state()) == list(range(9))


def test_hex3_swap_offered_only_on_second_players_first_move():
    g = Hex(3, swap=True)
    s0 = g.initial_state()
    assert g.SWAP not in g.legal_actions(s0)
    s1 = g.apply(s0, 0)
    acts = g.legal_actions(s1)
    assert len(acts) == 9 and acts[-1] == g.SWAP and acts[:-1] == list(range(1, 9))
    s2 = g.apply(s1, 4)
    assert g.SWAP not in g.legal_actions(s2)
    with pytest.raises(RulesError):
        g.apply(s2, g.SWAP)


def test_hex_swap_reflects_and_exchanges_colors():
    g = Hex(3, swap=True)
    s = g.apply(g.apply(g.initial_state(), 1), g.SWAP)  # x at b1 = (0, 1)
    assert s.board == (0, 0, 0, 2, 0, 0, 0, 0, 0)  # o at (1, 0)
    assert s.to_move == FIRST and s.ply == 2
    assert s.key == g.compute_key(s)


def test_othello4_opening_has_four_moves():
    g = Othello(4)
    acts = g.legal_actions(g.initial_state())
    assert len(acts) == 4
    # brute force: an empty cell is legal iff placing there flips something
    s = g.initial_state()
    brute = [i for i in range(16) if s.board[i] == 0 and g._flips(s.board, i, 1, 2)]
    assert acts == brute


def test_othello_pass_only_when_no_placement():
    g = Othello(4)
    # x cannot move anywhere: the only x stone is surrounded by nothing to flank
    board = [0] * 16
    board[0], board[1] = 2, 2
    board[15] = 1
    s = g.make_state(board, FIRST, 10, 0)
    assert g.legal_actions(s) == [g.PASS]
    s2 = g.apply(s, g.PASS)
    assert s2.outcome is None and s2.extra == 1


def test_tictactoe_center_move():
    g = TicTacToe()
    s = g.apply(g.initial_state(), 4)
    assert s.board == (0, 0, 0, 0, 1, 0, 0, 0, 0)
    assert s.to_move == SECOND and s.ply == 1


def test_clobber_2x2_every_move_captures():
    g = Clobber(2)
    s0 = g.initial_state()
    assert s0.board == (1, 2, 2, 1)
    acts = g.legal_actions(s0)
    # each x stone has two orthogonal o neighbours
    assert sorted(g.action_to_str(a) for a in acts) == ["a1-a2", "a1-b1", "b2-a2", "b2-b1"]
    for a in acts:
        src, dst = divmod(a, 4)
        s = g.apply(s0, a)
        assert s.board[src] == 0 and s.board[dst] == 1
        assert s.board.count(2) == 1 and s.board.count(1) == 2


def test_apply_is_pure(game):
    s = game.initial_state()
    before = (s.board, s.to_move, s.ply, s.key)
    game.apply(s, game.legal_actions(s)[0])
    assert (s.board, s.to_move, s.ply, s.key) == before


def test_illegal_action_names_action_and_key():
    g = TicTacToe()
    s = g.apply(g.initial_state(), 4)
    with pytest.raises(RulesError, match=r"'b2'.*key=0x"):
        g.apply(s, 4)


def test_terminal_contracts(game):
    s = playout(game, np.random.default_rng(0))[-1]
    assert game.is_terminal(s)
    with pytest.raises(RulesError):
        game.legal_actions(s)
    with pytest.raises(RulesError):
        game.apply(s, 0)
    with pytest.raises(RulesError):
        game.gain(game.initial_state())


# -- terminal detection -------------------------------------------------------------------


def test_hex_first_player_connection_wins():
    g = Hex(3)
    s = g.make_state((1, 0, 0, 1, 0, 0, 1, 0, 0), SECOND, 3)
    assert g.is_terminal(s) and g.gain(s) == 1
    s = g.make_state((2, 2, 2, 0, 0, 0, 0, 0, 0), FIRST, 3)
    assert g.gain(s) == -1


def test_tictactoe_full_board_draw():
    g = TicTacToe()
    s = g.make_state((1, 2, 1, 1, 2, 2, 2, 1, 1), SECOND, 9)
    assert g.is_terminal(s) and g.gain(s) == 0


def test_breakthrough_reaching_last_rank_wins():
    g = Breakthrough(5)
    board = [0] * 25
    board[15] = 1  # a4
    board[9] = 2
    s = g.make_state(board, FIRST, 10)
    s2 = g.apply(s, g.parse_action("a4-a5"))
    assert g.gain(s2) == 1


@pytest.mark.parametrize("board,score,gain", [
    ([1] * 10 + [2] * 6, 4, 1),
    ([1] * 16, 16, 1),
    ([1, 2] * 8, 0, 0),
])
def test_othello_score(board, score, gain):
    g = Othello(4)
    s = g.make_state(board, FIRST, 20, 2)
    assert g.score(s) == score and g.gain(s) == gain


def test_score_unsupported_for_hex_at_configuration():
    from descent.games import UnsupportedHeuristic

    with pytest.raises(UnsupportedHeuristic):
        Hex(3).check_heuristic("score")


# -- hashing ------------------------------------------------------------------------------


def test_incremental_key_matches_recomputation(game):
    rng = np.random.default_rng(1)
    plies = 0
    while plies < 10_000:
        states = playout(game, rng)
        for s in states:
            assert s.key == game.compute_key(s)
            assert s == game.make_state(s.board, s.to_move, s.ply, s.extra)
        for a, b in zip(states, states[1:]):
            assert b.ply == a.ply + 1
        plies += len(states) - 1


def test_tictactoe_no_hash_collisions():
    g = TicTacToe()
    states = all_states(g)
    assert len(states) == 5478
    keys = {}
    for s in states:
        ident = (s.board, s.to_move)
        assert keys.setdefault(s.key, ident) == ident


def test_legal_actions_deterministic(game):
    for s in playout(game, np.random.default_rng(2))[:-1]:
        twin = game.make_state(s.board, s.to_move, s.ply, s.extra)
        assert game.legal_actions(s) == game.legal_actions(twin)


# -- hex no-draw ---------------------------------------------------------------------------


def test_hex3_every_full_board_is_decided():
    import itertools

    g = Hex(3)
    for board in itertools.product((1, 2), repeat=9):
        s = g.make_state(board, FIRST, 9)
        assert s.outcome in (1, -1)


@pytest.mark.parametrize("n", [4, 5, 6, 7])
def test_hex_sampled_full_boards_are_decided(n):
    g = Hex(n)
    rng = np.random.default_rng(n)
    for _ in range(300):
        s = g.make_state(tuple(rng.integers(1, 3, n * n)), FIRST, n * n)
        assert s.outcome in (1, -1)


def test_hex_random_games_never_draw():
    rng = np.random.default_rng(3)
    for n in (4, 5, 6, 7):
        for _ in range(20):
            assert playout(Hex(n), rng)[-1].outcome in (1, -1)


# -- encodings ----------------------------------------------------------------------------


def test_hex3_empty_encoding_has_filled_borders():
    g = Hex(3)
    x = g.encode_planes(g.initial_state())
    assert x.shape == (2, 5, 5)
    assert x[0, 0].all() and x[0, -1].all() and x[0, 1:-1, 1:-1].sum() == 0
    assert x[1, :, 0].all() and x[1, :, -1].all()


def test_hex_placement_changes_one_cell():
    g = Hex(5)
    rng = np.random.default_rng(4)
    states = playout(g, rng)
    for a, b in zip(states, states[1:]):
        assert (g.encode_planes(a) != g.encode_planes(b)).sum() == 1


def test_hex_encoding_commutes_with_rotation():
    g = Hex(5)
    rng = np.random.default_rng(5)
    for _ in range(50):
        s = playout(g, rng, plies=int(rng.integers(0, 20)))[-1]
        rot = g.make_state(tuple(s.board[::-1]), s.to_move, s.ply)
        assert np.array_equal(g.encode_planes(rot), g.encode_planes(s)[:, ::-1, ::-1])


def test_piece_planes_include_side_to_move():
    g = TicTacToe()
    s0 = g.initial_state()
    s1 = g.apply(s0, 0)
    assert g.encode_planes(s0)[2].all() and not g.encode_planes(s1)[2].any()


# -- symmetries ---------------------------------------------------------------------------


def test_hex_symmetry_rotates_corner_stone():
    g = Hex(4)
    s = g.apply(g.initial_state(), 0)
    syms = g.symmetries(s, 0.5)
    assert len(syms) == 2
    assert syms[1][0].board[15] == 1 and syms[1][1] == 0.5


def test_hex_symmetric_position_deduplicated():
    g = Hex(3)
    s = g.apply(g.initial_state(), 4)  # center stone
    assert len(g.symmetries(s, 1.0)) == 1


def test_tictactoe_symmetries_preserve_outcome_exhaustively():
    g = TicTacToe()
    for s in all_states(g):
        syms = g.symmetries(s, 0.0)
        assert 1 <= len(syms) <= 8
        for t, _ in syms:
            assert t.outcome == s.outcome
            assert t.key == g.compute_key(t)


@pytest.mark.parametrize("g", [Othello(4), Breakthrough(5), Clobber(4)], ids=lambda g: g.describe())
def test_symmetry_groups_preserve_legality(g):
    rng = np.random.default_rng(6)
    for s in playout(g, rng)[:-1]:
        n_moves = len(g.legal_actions(s))
        for t, _ in g.symmetries(s, 0.0):
            assert len(g.legal_actions(t)) == n_moves


def test_symmetry_group_sizes():
    assert len(Othello(4).cell_maps()) == 4  # the diagonal-preserving subgroup
    assert len(Breakthrough(5).cell_maps()) == 2  # identity and mirror
    assert len(Clobber(4).cell_maps()) == 4
    assert len(TicTacToe().cell_maps()) == 8


# -- notation and serialization ---------------------------------------------------------------


def test_serialization_round_trips(game):
    rng = np.random.default_rng(7)
    for s in playout(game, rng):
        text = game.serialize(s)
        assert "\n" not in text
        back = game.deserialize(text)
        assert back == s and back.outcome == s.outcome


def test_serialization_format_examples():
    g = TicTacToe()
    s = g.apply(g.initial_state(), 4)
    assert g.serialize(s) == "tictactoe .../.x./... o 1"
    h = Hex(3, swap=True)
    assert h.serialize(h.apply(h.initial_state(), 0)) == "hex3s x../.../... o 1"
    o = Othello(4)
    assert o.serialize(o.initial_state()) == "othello4 ..../.ox./.xo./.... x 0 0"


def test_deserialize_rejects_other_game():
    with pytest.raises(ValueError):
        Hex(3).deserialize(TicTacToe().serialize(TicTacToe().initial_state()))


def test_action_notation_round_trips(game):
    s = game.initial_state()
    for a in game.legal_actions(s):
        assert game.parse_action(game.action_to_str(a)) == a


def test_parse_rejects_off_board():
    with pytest.raises(ValueError):
        Hex(3).parse_action("d1")
    with pytest.raises(ValueError):
        Breakthrough(5).parse_action("a1b2")


def test_make_game():
    assert make_game("hex", 5, swap=True).describe() == "hex5s"
    assert make_game("othello").n == 8
    with pytest.raises(ValueError):
        make_game("chess")
    with pytest.raises(ValueError):
        Othello(5)


def test_exact_length():
    assert Hex(5).exact_length == 25 and Hex(5, swap=True).exact_length == 26
    assert Breakthrough(5).exact_length is None


# -- constants ----------------------------------------------------------------------------


def _mean_random_length(game, games=1000, seed=0):
    rng = np.random.default_rng(seed)
    return sum(playout(game, rng)[-1].ply for _ in range(games)) / games


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_random_game_length_constants(n):
    # sizes 6-8 and Breakthrough are checked by the slow variant below
    assert round(_mean_random_length(Clobber(n)), 1) == CLOBBER_MEAN_LENGTH[n]


@pytest.mark.slow
def test_random_game_length_constants_large():
    for n in (6, 7, 8):
        assert round(_mean_random_length(Clobber(n)), 1) == CLOBBER_MEAN_LENGTH[n]
    for n in (5, 6, 7, 8):
        assert round(_mean_random_length(Breakthrough(n)), 1) == BREAKTHROUGH_MEAN_LENGTH[n]


# -- properties ---------------------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1),
       case=st.sampled_from([("hex", 4), ("hex", 6), ("othello", 4), ("othello", 6), ("breakthrough", 5),
                             ("breakthrough", 6), ("clobber", 4), ("clobber", 6)]))
def test_random_playouts_keep_contract(seed, case):
    name, size = case
    g = make_game(name, size)
    states = playout(g, np.random.default_rng(seed))
    end = states[-1]
    assert end.outcome in (-1, 0, 1)
    if name != "othello":
        assert end.outcome != 0
    for s in states[:-1]:
        assert s.outcome is None and g.legal_actions(s)


@settings(max_examples=40, deadline=None)
@given(board=st.lists(st.integers(0, 2), min_size=9, max_size=9), first=st.booleans())
def test_tictactoe_key_depends_on_board_and_side(board, first):
    g = TicTacToe()
    a = g.make_state(board, FIRST if first else SECOND, 0)
    b = g.make_state(board, SECOND if first else FIRST, 0)
    assert a.key != b.key
    assert g.deserialize(g.serialize(a)) == a
