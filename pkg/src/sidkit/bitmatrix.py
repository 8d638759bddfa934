"""Square boolean matrices with rows packed into Python integers.

Bit ``j`` of ``rows[i]`` is entry ``(i, j)``.  Python ints are arbitrary
precision, so the same code path serves p <= 64 (one machine word per row)
and anything larger.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Sequence

import numpy as np


def iter_bits(x: int) -> Iterator[int]:
    """Yield the indices of the set bits of ``x`` in increasing order."""
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def bits_of(indices: Iterable[int]) -> int:
    out = 0
    for k in indices:
        out |= 1 << k
    return out


def popcount(x: int) -> int:
    return x.bit_count()


class BitMatrix:
    """Immutable p x p boolean matrix supporting the OR-AND product."""

    __slots__ = ("p", "rows")

    def __init__(self, p: int, rows: Sequence[int]):
        if len(rows) != p:
            raise ValueError(f"expected {p} rows, got {len(rows)}")
        full = (1 << p) - 1
        if any(r & ~full for r in rows):
            raise ValueError("row has bits outside the matrix dimension")
        self.p = p
        self.rows = tuple(rows)

    @classmethod
    def zeros(cls, p: int) -> "BitMatrix":
        return cls(p, [0] * p)

    @classmethod
    def identity(cls, p: int) -> "BitMatrix":
        return cls(p, [1 << i for i in range(p)])

    @classmethod
    def from_array(cls, a) -> "BitMatrix":
        a = np.asarray(a, dtype=bool)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("expected a square 2-d array")
        return cls(a.shape[0], [bits_of(np.flatnonzero(row).tolist()) for row in a])

    def to_array(self) -> np.ndarray:
        out = np.zeros((self.p, self.p), dtype=bool)
        for i, r in enumerate(self.rows):
            for j in iter_bits(r):
                out[i, j] = True
        return out

    def __getitem__(self, ij: tuple[int, int]) -> bool:
        i, j = ij
        return bool(self.rows[i] >> j & 1)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self.p == other.p and self.rows == other.rows

    def __hash__(self) -> int:
        return hash((self.p, self.rows))

    def __repr__(self) -> str:
        return f"BitMatrix(p={self.p}, nnz={self.nnz()})"

    def nnz(self) -> int:
        return sum(popcount(r) for r in self.rows)

    def __or__(self, other: "BitMatrix") -> "BitMatrix":
        self._check(other)
        return BitMatrix(self.p, [a | b for a, b in zip(self.rows, other.rows)])

    def __matmul__(self, other: "BitMatrix") -> "BitMatrix":
        # (A @ B)[i] = OR of B[k] over the set bits k of A[i]
        self._check(other)
        b = other.rows
        out = []
        for r in self.rows:
            acc = 0
            for k in iter_bits(r):
                acc |= b[k]
            out.append(acc)
        return BitMatrix(self.p, out)

    def square(self) -> "BitMatrix":
        return self @ self

    def transpose(self) -> "BitMatrix":
        cols = [0] * self.p
        for i, r in enumerate(self.rows):
            for j in iter_bits(r):
                cols[j] |= 1 << i
        return BitMatrix(self.p, cols)

    def closure(self) -> "BitMatrix":
        """Reflexive-transitive closure by repeated squaring of (Id + self).

        ceil(log2 p) squarings suffice because a shortest path has at most
        p - 1 edges.
        """
        m = self | BitMatrix.identity(self.p)
        steps = max(0, (self.p - 1).bit_length())
        for _ in range(steps):
            nxt = m.square()
            if nxt == m:
                break
            m = nxt
        return m

    def _check(self, other: "BitMatrix") -> None:
        if self.p != other.p:
            raise ValueError(f"dimension mismatch: {self.p} vs {other.p}")
