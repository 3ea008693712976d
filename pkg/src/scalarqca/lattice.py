"""Periodic lattice geometry, lexicographic cell indexing and stencils.

Cells of Z_{n_1} + ... + Z_{n_d} are flattened with the last coordinate
varying fastest, so coordinate 1 is the most significant digit. Offsets in a
stencil are kept as signed, unwrapped integer vectors; they are only reduced
modulo the lattice dimensions when applied to a concrete cell.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import prod
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError

Vector = tuple[int, ...]


@dataclass(frozen=True)
class LatticeShape:
    """Dimensions (n_1, ..., n_d) of a periodic lattice."""

    dims: tuple[int, ...]

    def __post_init__(self) -> None:
        dims = tuple(self.dims)
        if len(dims) < 1:
            raise InputError("lattice needs at least one dimension")
        for n in dims:
            if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
                raise InputError(f"lattice dimensions must be positive integers, got {dims!r}")
        object.__setattr__(self, "dims", tuple(int(n) for n in dims))

    @property
    def d(self) -> int:
        return len(self.dims)

    @property
    def volume(self) -> int:
        return prod(self.dims)

    def __str__(self) -> str:
        return "x".join(str(n) for n in self.dims)


def _as_vector(vector: Iterable[int], d: int, what: str = "vector") -> Vector:
    v = tuple(int(c) for c in vector)
    if len(v) != d:
        raise InputError(f"{what} {v!r} has dimension {len(v)}, expected {d}")
    return v


def validate_coord(coord: Sequence[int], shape: LatticeShape) -> Vector:
    c = _as_vector(coord, shape.d, "coordinate")
    for ci, n in zip(c, shape.dims):
        if not 0 <= ci < n:
            raise InputError(f"coordinate {c!r} out of range for lattice {shape.dims!r}")
    return c


def lex_index(coord: Sequence[int], shape: LatticeShape) -> int:
    """Position of a cell in the flattened one dimensional array.

    >>> lex_index((1, 2, 3), LatticeShape((2, 3, 4)))
    23
    """
    c = validate_coord(coord, shape)
    index = 0
    # Horner form of x_d + n_d x_{d-1} + n_d n_{d-1} x_{d-2} + ...
    for ci, n in zip(c, shape.dims):
        index = index * n + ci
    return index


def coord_of(index: int, shape: LatticeShape) -> Vector:
    """Inverse of :func:`lex_index`."""
    index = int(index)
    if not 0 <= index < shape.volume:
        raise InputError(f"index {index} out of range [0, {shape.volume})")
    coord = []
    for n in reversed(shape.dims):
        index, ci = divmod(index, n)
        coord.append(ci)
    return tuple(reversed(coord))


def wrap(vector: Sequence[int], shape: LatticeShape) -> Vector:
    """Reduce every component of ``vector`` modulo the lattice dimensions."""
    v = _as_vector(vector, shape.d)
    return tuple(c % n for c, n in zip(v, shape.dims))


def all_coords(shape: LatticeShape) -> np.ndarray:
    """Coordinates of every cell as a (volume, d) array, in index order."""
    grids = np.indices(shape.dims).reshape(shape.d, -1)
    return grids.T.copy()


def flat_indices(coords: np.ndarray, shape: LatticeShape) -> np.ndarray:
    """Vectorised :func:`lex_index` with periodic wrap, for (m, d) arrays."""
    return np.ravel_multi_index(tuple(np.asarray(coords).T), shape.dims, mode="wrap")


@dataclass(frozen=True)
class Stencil:
    """Lexicographically ordered neighbourhood offsets.

    Tuple comparison in Python is lexicographic with the first coordinate
    most significant, which matches the cell ordering used by
    :func:`lex_index` and is invariant under translation of both operands.
    """

    offsets: tuple[Vector, ...]

    def __post_init__(self) -> None:
        offsets = tuple(tuple(int(c) for c in e) for e in self.offsets)
        if offsets:
            d = len(offsets[0])
            if d < 1 or any(len(e) != d for e in offsets):
                raise InputError("stencil offsets must share one positive dimension")
        for a, b in zip(offsets, offsets[1:]):
            if not a < b:
                raise InputError(
                    f"stencil offsets must be strictly increasing, got {a!r} before {b!r}"
                )
        object.__setattr__(self, "offsets", offsets)

    @classmethod
    def from_offsets(cls, offsets: Iterable[Sequence[int]]) -> "Stencil":
        """Sort ``offsets``; duplicates are rejected."""
        vecs = [tuple(int(c) for c in e) for e in offsets]
        if len(set(vecs)) != len(vecs):
            raise InputError("stencil offsets must be distinct")
        return cls(tuple(sorted(vecs)))

    @property
    def d(self) -> int:
        if not self.offsets:
            raise InputError("empty stencil has no dimension")
        return len(self.offsets[0])

    @property
    def radius(self) -> int:
        return max((abs(c) for e in self.offsets for c in e), default=0)

    def index(self, offset: Sequence[int]) -> int:
        return self.offsets.index(tuple(offset))

    def __len__(self) -> int:
        return len(self.offsets)

    def __iter__(self):
        return iter(self.offsets)

    def __contains__(self, offset) -> bool:
        return tuple(offset) in self.offsets


def box_stencil(d: int, r: int) -> Stencil:
    """All offsets in [-r, r]^d."""
    if d < 1 or r < 0:
        raise InputError(f"box stencil needs d >= 1 and r >= 0, got d={d}, r={r}")
    return Stencil(tuple(itertools.product(range(-r, r + 1), repeat=d)))


def triangular_stencil() -> Stencil:
    """The seven-cell neighbourhood {0, +-v1, +-v2, +-(v1 + v2)} in Z^2."""
    return Stencil.from_offsets(
        [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1)]
    )


def parse_stencil_spec(spec: str) -> Stencil:
    """Parse ``box:<d>x<r>`` or ``tri``."""
    spec = spec.strip()
    if spec == "tri":
        return triangular_stencil()
    if spec.startswith("box:"):
        try:
            d_s, r_s = spec[4:].split("x")
            return box_stencil(int(d_s), int(r_s))
        except ValueError as exc:
            raise InputError(f"bad box stencil spec {spec!r}: {exc}") from None
    raise InputError(f"unknown stencil spec {spec!r}; expected box:<d>x<r> or tri")
