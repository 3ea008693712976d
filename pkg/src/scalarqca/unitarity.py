"""Global and local unitarity checks for homogeneous rules.

For a homogeneous rule the entry of U U^dagger between cells x and x + delta
is the overlap sum

    C(delta) = sum_{e in E, e - delta in E} w(e) * conj(w(e - delta)),

so unitarity reduces to C(delta) = [delta == 0] for every delta in E - E,
provided the lattice is large enough that E - E does not alias.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import InputError
from .lattice import LatticeShape, Stencil, Vector, wrap
from .operators import DENSE_LIMIT, EvolutionOperator, RuleWeights

DEFAULT_TOL = 1e-10


def displacement_set(stencil: Stencil) -> list[Vector]:
    """All distinct differences e - e' of stencil offsets, lex-sorted."""
    if len(stencil) == 0:
        raise InputError("stencil is empty")
    diffs = {
        tuple(a - b for a, b in zip(e, f)) for e in stencil for f in stencil
    }
    return sorted(diffs)


def overlap_sum(rule: RuleWeights, delta: Vector) -> complex:
    """C(delta), summed over e in stencil order."""
    offsets = rule.stencil.offsets
    index = {e: i for i, e in enumerate(offsets)}
    total = 0j
    for e, w in zip(offsets, rule.weights):
        j = index.get(tuple(a - b for a, b in zip(e, delta)))
        if j is not None:
            total += w * rule.weights[j].conjugate()
    return total


@dataclass(frozen=True)
class UnitarityReport:
    residuals: dict[Vector, complex]
    max_abs_residual: float
    passed: bool
    tol: float

    def worst(self) -> tuple[Vector, complex]:
        """Displacement with the largest residual modulus (first in lex order on ties)."""
        delta = max(self.residuals, key=lambda k: abs(self.residuals[k]))
        return delta, self.residuals[delta]


def local_conditions(rule: RuleWeights, tol: float = DEFAULT_TOL) -> UnitarityReport:
    if tol <= 0:
        raise InputError(f"tolerance must be positive, got {tol}")
    zero = (0,) * rule.stencil.d
    residuals = {}
    for delta in displacement_set(rule.stencil):
        residuals[delta] = overlap_sum(rule, delta) - (1.0 if delta == zero else 0.0)
    worst = max(abs(r) for r in residuals.values())
    return UnitarityReport(residuals, float(worst), worst <= tol, tol)


def global_check(op: EvolutionOperator, tol: float = DEFAULT_TOL) -> tuple[bool, float]:
    """Max entry modulus of U U^dagger - I and whether it is within ``tol``."""
    n = op.shape.volume
    if n <= DENSE_LIMIT:
        u = op.dense()
        dev = u @ u.conj().T - np.eye(n)
        deviation = float(np.max(np.abs(dev))) if n else 0.0
    else:
        m = op.matrix
        dev = (m @ m.conj().T).tocsr() - sp.identity(n, dtype=complex, format="csr")
        deviation = float(np.max(np.abs(dev.data))) if dev.nnz else 0.0
    return deviation <= tol, deviation


def aliasing_free(shape: LatticeShape, stencil: Stencil) -> bool:
    """True iff wrapping is injective on E - E for this lattice."""
    if stencil.d != shape.d:
        raise InputError(
            f"stencil dimension {stencil.d} does not match lattice dimension {shape.d}"
        )
    diffs = displacement_set(stencil)
    return len({wrap(v, shape) for v in diffs}) == len(diffs)
