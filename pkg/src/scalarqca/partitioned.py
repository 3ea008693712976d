"""Two-phase partitioned evolution on a 1-d ring built from 2x2 scattering blocks.

The even phase acts on pairs (2i, 2i+1), the odd phase on (2i+1, 2i+2 mod n);
block rows and columns are ordered (left cell, right cell). The composite
step is invariant under translation by two cells but not by one, so it evades
the restriction that applies to fully homogeneous scalar rules.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import InputError
from .lattice import LatticeShape
from .operators import EvolutionOperator, FieldState, apply, translation_operator
from .unitarity import global_check

BLOCK_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class BlockRule:
    entries: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.entries, dtype=complex)
        if m.shape != (2, 2):
            raise InputError(f"block must be 2x2, got shape {m.shape}")
        dev = np.max(np.abs(m @ m.conj().T - np.eye(2)))
        if not dev <= BLOCK_TOL:
            raise InputError(f"block is not unitary (max |BB^dagger - I| = {dev:.3e})")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @classmethod
    def rotation(cls, theta: float) -> "BlockRule":
        """((cos t, i sin t), (i sin t, cos t))."""
        c, s = np.cos(theta), np.sin(theta)
        return cls(np.array([[c, 1j * s], [1j * s, c]]))


@dataclass(frozen=True, eq=False)
class TwoPhaseOperator:
    shape: LatticeShape
    even_phase: EvolutionOperator
    odd_phase: EvolutionOperator
    composite: EvolutionOperator


def _phase_operator(n: int, block: np.ndarray, start: int) -> EvolutionOperator:
    rows, cols, data = [], [], []
    for left in range(start, n + start, 2):
        pair = (left % n, (left + 1) % n)
        for a in range(2):
            for b in range(2):
                rows.append(pair[a])
                cols.append(pair[b])
                data.append(block[a, b])
    m = sp.csr_matrix((np.array(data, dtype=complex), (rows, cols)), shape=(n, n))
    m.sort_indices()
    return EvolutionOperator(LatticeShape((n,)), m)


def build_partitioned(n: int, block: BlockRule) -> TwoPhaseOperator:
    if n < 4 or n % 2:
        raise InputError(f"partitioned ring needs even n >= 4, got {n}")
    even = _phase_operator(n, block.entries, 0)
    odd = _phase_operator(n, block.entries, 1)
    return TwoPhaseOperator(LatticeShape((n,)), even, odd, odd @ even)


def step(op: TwoPhaseOperator, state: FieldState) -> FieldState:
    """Even phase, then odd phase."""
    if state.shape != op.shape:
        raise InputError(f"state lattice {state.shape.dims} != operator lattice {op.shape.dims}")
    return apply(op.odd_phase, apply(op.even_phase, state))


def run(op: TwoPhaseOperator, state: FieldState, steps: int) -> list[FieldState]:
    states = [state]
    for _ in range(steps):
        states.append(step(op, states[-1]))
    return states


@dataclass(frozen=True)
class InvarianceReport:
    commutes_with_shift2: bool
    shift2_commutator: float
    shift1_commutator: float


def _commutator_max(a: EvolutionOperator, b: EvolutionOperator) -> float:
    diff = (a.matrix @ b.matrix - b.matrix @ a.matrix).tocsr()
    return float(np.max(np.abs(diff.data))) if diff.nnz else 0.0


def subgroup_invariance_report(op: TwoPhaseOperator, tol: float = 1e-12) -> InvarianceReport:
    t1 = translation_operator(op.shape, (1,))
    t2 = translation_operator(op.shape, (2,))
    c2 = _commutator_max(op.composite, t2)
    return InvarianceReport(c2 <= tol, c2, _commutator_max(op.composite, t1))


def phases_unitary(op: TwoPhaseOperator, tol: float = 1e-12) -> bool:
    return all(global_check(p, tol)[0] for p in (op.even_phase, op.odd_phase, op.composite))
