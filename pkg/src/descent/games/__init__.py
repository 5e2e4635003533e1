from .base import FIRST, SECOND, HEURISTICS, Game, GameState, RulesError, UnsupportedHeuristic
from .hex import Hex
from .moves import Breakthrough, Clobber
from .othello import Othello
from .tictactoe import TicTacToe

GAMES = {
    "hex": Hex,
    "othello": Othello,
    "breakthrough": Breakthrough,
    "clobber": Clobber,
    "tictactoe": TicTacToe,
}


def make_game(name: str, size: int | None = None, swap: bool = False) -> Game:
    """Build a rules object from its config name."""
    try:
        cls = GAMES[name]
    except KeyError:
        raise ValueError(f"unknown game {name!r}; choose from {sorted(GAMES)}") from None
    if cls is TicTacToe:
        return TicTacToe()
    if cls is Hex:
        return Hex(size or 11, swap=swap)
    return cls(size) if size else cls()


__all__ = [
    "FIRST", "SECOND", "HEURISTICS", "Game", "GameState", "RulesError", "UnsupportedHeuristic",
    "Hex", "Othello", "Breakthrough", "Clobber", "TicTacToe", "GAMES", "make_game",
]
