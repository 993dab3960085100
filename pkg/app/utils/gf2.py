"""Dense linear algebra over GF(2) on bit-packed rows."""

from typing import List, Tuple

import numpy as np


def pack_rows(matrix) -> np.ndarray:
    return np.packbits(np.asarray(matrix, dtype=np.uint8) & 1, axis=1)


def unpack_rows(packed: np.ndarray, width: int) -> np.ndarray:
    return np.unpackbits(packed, axis=1, count=width)


def row_reduce(matrix) -> Tuple[np.ndarray, List[int]]:
    """
    Reduced row echelon form over GF(2).

    Rows are packed eight columns per byte, so eliminating one pivot is a
    single vectorized XOR over all rows that carry the pivot bit.

    Args:
        matrix: 0/1 array of shape (m, n)

    Returns:
        Tuple of (rows, pivots): the nonzero RREF rows as a uint8 0/1 array
        and the pivot column of each row
    """
    matrix = np.asarray(matrix, dtype=np.uint8) & 1
    m, n = matrix.shape
    packed = pack_rows(matrix)
    pivots: List[int] = []
    row = 0

    for col in range(n):
        if row == m:
            break
        mask = np.uint8(0x80 >> (col & 7))
        column = (packed[:, col >> 3] & mask) != 0
        candidates = np.flatnonzero(column[row:])
        if candidates.size == 0:
            continue

        pivot = row + int(candidates[0])
        if pivot != row:
            packed[[row, pivot]] = packed[[pivot, row]]
            column[[row, pivot]] = column[[pivot, row]]
        column[row] = False
        targets = np.flatnonzero(column)
        if targets.size:
            packed[targets] ^= packed[row]
        pivots.append(col)
        row += 1

    return unpack_rows(packed[:row], n), pivots


def null_space(matrix) -> np.ndarray:
    """
    Basis of {x : H x = 0} over GF(2), one basis vector per free column.

    Returns:
        uint8 array of shape (n - rank, n)
    """
    matrix = np.asarray(matrix)
    n = matrix.shape[1]
    rows, pivots = row_reduce(matrix)
    free = np.setdiff1d(np.arange(n), pivots)

    basis = np.zeros((free.size, n), dtype=np.uint8)
    basis[np.arange(free.size), free] = 1
    if pivots:
        basis[:, pivots] = rows[:, free].T
    return basis


def combine(coefficients, basis: np.ndarray) -> np.ndarray:
    """GF(2) combinations of basis rows; coefficients of shape (dim,) or (count, dim)."""
    coefficients = np.asarray(coefficients, dtype=np.int64)
    return ((coefficients @ basis.astype(np.int64)) % 2).astype(np.uint8)
