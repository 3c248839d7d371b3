"""Shared test fixtures: pinned matrices and the brute-force oracle.

The pinned matrices below were derived by hand from the map definitions
(u = b_V + t_k, target cell floor(u/L), digit u mod L packed base L) and are
frozen here independently of the library code; `brute_force_word_matrix`
recomputes any word product by enumerating all M^n map compositions, which
is the ground truth the fast matrix path must match exactly.
"""

from __future__ import annotations

from itertools import product as iproduct

import numpy as np

from mandelperc.ifs import BasicCells, IfsSpec, cell_step

# Hand-derived coding matrices, frozen (digit order 0..Q-1).
PINNED = {
    "carpet": [
        [[1, 0], [2, 2]],
        [[2, 1], [1, 2]],
        [[2, 2], [0, 1]],
    ],
    "gasket": [
        [[1, 0], [1, 1]],
        [[1, 1], [0, 1]],
    ],
    "line4": [
        [[1, 0, 0, 0], [1, 1, 1, 0], [1, 0, 1, 1], [0, 0, 1, 0]],
        [[1, 1, 0, 0], [0, 1, 1, 1], [0, 1, 0, 1], [0, 0, 0, 1]],
    ],
    "overlap2d": [
        [[1, 0, 0, 0], [1, 1, 0, 0], [1, 0, 1, 0], [1, 1, 1, 1]],
        [[1, 1, 0, 0], [0, 1, 0, 0], [1, 1, 1, 1], [0, 1, 0, 1]],
        [[1, 0, 1, 0], [1, 1, 1, 1], [0, 0, 1, 0], [0, 0, 1, 1]],
        [[1, 1, 1, 1], [0, 1, 0, 1], [0, 0, 1, 1], [0, 0, 0, 1]],
    ],
}


def brute_force_word_matrix(
    spec: IfsSpec, basics: BasicCells, word: tuple[int, ...]
) -> np.ndarray:
    """Count map compositions realizing each (source, target) cell pair.

    Entry (U, V) is the number of map sequences (l_1, ..., l_n) whose
    composition sends basic cell V onto the word-w subcell of basic cell U.
    Maps are applied innermost first; the digit produced by the outermost
    map is the first digit of the word.
    """
    n = len(word)
    N = basics.N
    out = np.zeros((N, N), dtype=np.int64)
    for seq in iproduct(range(spec.M), repeat=n):
        for V, b in enumerate(basics.cells):
            cell = b
            digits = []
            for k in reversed(seq):
                cell, digit = cell_step(spec, cell, k)
                digits.append(digit)
            digits.reverse()
            if tuple(digits) == word:
                out[basics.index(cell), V] += 1
    return out
