"""Evolution operators of homogeneous additive rules on periodic lattices."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import InputError
from .lattice import LatticeShape, Stencil, all_coords, flat_indices, wrap

MODULUS_SLACK = 1e-12
PHASE_TOL = 1e-12
DENSE_LIMIT = 4096


@dataclass(frozen=True)
class RuleWeights:
    """One complex weight per stencil offset, in stencil order."""

    stencil: Stencil
    weights: tuple[complex, ...]

    def __post_init__(self) -> None:
        weights = tuple(complex(w) for w in self.weights)
        if len(weights) != len(self.stencil):
            raise InputError(
                f"{len(weights)} weights given for a stencil of {len(self.stencil)} offsets"
            )
        for e, w in zip(self.stencil, weights):
            if not np.isfinite(w.real) or not np.isfinite(w.imag):
                raise InputError(f"weight at offset {e} is not finite")
            if abs(w) > 1 + MODULUS_SLACK:
                raise InputError(f"weight at offset {e} has modulus {abs(w):.17g} > 1")
        object.__setattr__(self, "weights", weights)

    @classmethod
    def single(cls, offset: Sequence[int], weight: complex = 1.0) -> "RuleWeights":
        return cls(Stencil((tuple(offset),)), (weight,))

    def as_array(self) -> np.ndarray:
        return np.array(self.weights, dtype=complex)

    def weight(self, offset: Sequence[int]) -> complex:
        return self.weights[self.stencil.index(offset)]


@dataclass(frozen=True, eq=False)
class EvolutionOperator:
    """Sparse N x N matrix acting on flattened fields.

    ``matrix`` is CSR with sorted column indices; entries declared by a rule
    are kept even when numerically zero. ``aliased`` records that two stencil
    offsets wrapped onto the same column and had their weights summed.
    """

    shape: LatticeShape
    matrix: sp.csr_matrix
    aliased: bool = False

    def __post_init__(self) -> None:
        n = self.shape.volume
        if self.matrix.shape != (n, n):
            raise InputError(f"matrix shape {self.matrix.shape} does not match volume {n}")

    def row(self, x: int) -> list[tuple[int, complex]]:
        """(column, entry) pairs of row ``x``, sorted by column."""
        m = self.matrix
        lo, hi = m.indptr[x], m.indptr[x + 1]
        return [(int(c), complex(v)) for c, v in zip(m.indices[lo:hi], m.data[lo:hi])]

    @property
    def rows(self) -> list[list[tuple[int, complex]]]:
        return [self.row(x) for x in range(self.shape.volume)]

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def __matmul__(self, other: "EvolutionOperator") -> "EvolutionOperator":
        if other.shape != self.shape:
            raise InputError("operator shapes differ")
        product = (self.matrix @ other.matrix).tocsr()
        product.sort_indices()
        return EvolutionOperator(self.shape, product, self.aliased or other.aliased)


def _csr(data, rows, cols, n: int) -> sp.csr_matrix:
    m = sp.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()
    m.sum_duplicates()
    m.sort_indices()
    return m


def build_operator(shape: LatticeShape, rule: RuleWeights) -> EvolutionOperator:
    """Matrix realising phi'(x) = sum_e w(e) phi(x + e) with periodic wrap."""
    if rule.stencil.d != shape.d:
        raise InputError(
            f"stencil dimension {rule.stencil.d} does not match lattice dimension {shape.d}"
        )
    n = shape.volume
    coords = all_coords(shape)
    rows, cols, data = [], [], []
    x = np.arange(n)
    for e, w in zip(rule.stencil, rule.weights):
        rows.append(x)
        cols.append(flat_indices(coords + np.array(e), shape))
        data.append(np.full(n, w, dtype=complex))
    wrapped = {wrap(e, shape) for e in rule.stencil}
    aliased = len(wrapped) < len(rule.stencil)
    m = _csr(np.concatenate(data), np.concatenate(rows), np.concatenate(cols), n)
    return EvolutionOperator(shape, m, aliased)


def translation_operator(
    shape: LatticeShape, offset: Sequence[int], phase: complex = 1.0
) -> EvolutionOperator:
    """Constant translation reading from ``x + offset``, times a unimodular phase."""
    phase = complex(phase)
    if abs(abs(phase) - 1) > PHASE_TOL:
        raise InputError(f"phase must have modulus 1, got {abs(phase):.17g}")
    return build_operator(shape, RuleWeights.single(offset, phase))


@dataclass(frozen=True, eq=False)
class FieldState:
    shape: LatticeShape
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (self.shape.volume,):
            raise InputError(
                f"state has {amps.size} amplitudes, lattice volume is {self.shape.volume}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def delta(cls, shape: LatticeShape, index: int) -> "FieldState":
        if not 0 <= index < shape.volume:
            raise InputError(f"initial index {index} out of range [0, {shape.volume})")
        amps = np.zeros(shape.volume, dtype=complex)
        amps[index] = 1.0
        return cls(shape, amps)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def apply(op: EvolutionOperator, state: FieldState) -> FieldState:
    """One application of ``op``; each row sums in stored column order."""
    if op.shape != state.shape:
        raise InputError(f"operator lattice {op.shape.dims} != state lattice {state.shape.dims}")
    return FieldState(state.shape, op.matrix @ state.amplitudes)


def evolve(op: EvolutionOperator, state: FieldState, steps: int) -> list[FieldState]:
    """States at t = 0..steps."""
    states = [state]
    for _ in range(steps):
        states.append(apply(op, states[-1]))
    return states


def bandwidth_K(shape: LatticeShape) -> int:
    """K = 1 + n_d + n_d n_{d-1} + ... + n_d ... n_2."""
    K, stride = 1, 1
    for n in reversed(shape.dims[1:]):
        stride *= n
        K += stride
    return K


def size_condition(shape: LatticeShape, r: int) -> bool:
    """Whether the band 2Kr-diagonal product U U^dagger still fits in the lattice."""
    if r < 0:
        raise InputError(f"radius must be non-negative, got {r}")
    return 1 + 4 * bandwidth_K(shape) * r <= shape.volume


def interior_rows(shape: LatticeShape, stencil: Stencil) -> np.ndarray:
    """Row indices whose stencil neighbourhood does not cross the periodic boundary."""
    coords = all_coords(shape)
    offsets = np.array(stencil.offsets)
    lo = offsets.min(axis=0)
    hi = offsets.max(axis=0)
    dims = np.array(shape.dims)
    ok = np.all((coords + lo >= 0) & (coords + hi < dims), axis=1)
    return np.flatnonzero(ok)


def measured_bandwidth(op: EvolutionOperator, rows: Sequence[int] | None = None) -> int:
    """Max |row - column| over nonzero entries, without wrap correction.

    Restrict to ``rows`` (e.g. :func:`interior_rows`) to ignore entries that
    wrap around the periodic boundary.
    """
    coo = op.matrix.tocoo()
    mask = coo.data != 0
    if rows is not None:
        mask &= np.isin(coo.row, np.asarray(rows))
    if not mask.any():
        return 0
    return int(np.max(np.abs(coo.row[mask].astype(np.int64) - coo.col[mask])))
