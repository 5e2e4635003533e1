"""Zobrist keys: one random 64-bit word per (cell, piece) plus side-to-move and extras."""

from __future__ import annotations

import zlib

import numpy as np


class Zobrist:
    def __init__(self, label: str, cells: int, pieces: int = 2, extras: int = 4):
        # seeded from the game label so keys are stable across processes
        rng = np.random.default_rng(zlib.crc32(label.encode()))
        raw = rng.integers(0, 2**64, size=pieces * cells + 1 + extras, dtype=np.uint64)
        words = [int(w) for w in raw]
        self.cells = cells
        # piece index 0 (empty) hashes to 0 so empty cells never contribute
        self.table = [[0] * cells] + [
            words[p * cells:(p + 1) * cells] for p in range(pieces)
        ]
        self.side = words[pieces * cells]
        self.extras = words[pieces * cells + 1:]

    def full(self, board, to_move: int, extra_bits=()) -> int:
        h = 0
        t = self.table
        for i, p in enumerate(board):
            if p:
                h ^= t[p][i]
        if to_move:
            h ^= self.side
        for k in extra_bits:
            h ^= self.extras[k]
        return h
