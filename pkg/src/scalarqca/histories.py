"""Sum-over-histories probabilities for a single particle on the lattice.

A history visits one cell per timestep. Under phi'(x) = sum_e w(e) phi(x+e)
the particle steps from x + e to x with amplitude w(e), so a step from cell
c to cell c' carries the operator entry U[c', c]; offsets that alias onto the
same step on a small lattice contribute their summed weight.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConsistencyError, InputError
from .lattice import LatticeShape, coord_of, lex_index, wrap
from .operators import RuleWeights

MAX_PATHS = 10**7
IMAG_WARN = 1e-12
IMAG_FAIL = 1e-9


@dataclass(frozen=True)
class Path:
    cells: tuple[int, ...]

    @property
    def T(self) -> int:
        return len(self.cells) - 1


@dataclass(frozen=True)
class HistorySetSpec:
    """Histories starting in ``sources`` at t = 0 and obeying every condition.

    Each condition ``(t, cells)`` keeps only histories inside ``cells`` at
    time t, with 0 < t < T. Several sources each enter with amplitude 1.
    """

    sources: tuple[int, ...]
    T: int
    conditions: tuple[tuple[int, frozenset[int]], ...] = field(default=())

    def __post_init__(self) -> None:
        sources = (self.sources,) if isinstance(self.sources, int) else tuple(self.sources)
        if not sources:
            raise InputError("history set needs at least one source cell")
        if len(set(sources)) != len(sources):
            raise InputError("source cells must be distinct")
        if self.T < 0:
            raise InputError(f"truncation time must be non-negative, got {self.T}")
        conds = tuple(sorted((int(t), frozenset(int(c) for c in cells)) for t, cells in self.conditions))
        for t, _ in conds:
            if not 0 < t < self.T:
                raise InputError(f"condition time {t} must lie strictly between 0 and T={self.T}")
        object.__setattr__(self, "sources", tuple(int(s) for s in sources))
        object.__setattr__(self, "conditions", conds)

    @property
    def latest_condition(self) -> int:
        return max((t for t, _ in self.conditions), default=0)

    def allowed(self, t: int) -> frozenset[int] | None:
        """Intersection of the cell sets constraining time t, or None if unconstrained."""
        sets = [cells for ct, cells in self.conditions if ct == t]
        if not sets:
            return None
        return frozenset.intersection(*sets)


def _step_table(shape: LatticeShape, rule: RuleWeights, cell: int) -> dict[int, complex]:
    # next cell -> summed weight of offsets e with next + e == cell
    here = coord_of(cell, shape)
    table: dict[int, complex] = {}
    for e, w in zip(rule.stencil, rule.weights):
        nxt = lex_index(wrap([c - ei for c, ei in zip(here, e)], shape), shape)
        table[nxt] = table.get(nxt, 0j) + w
    return table


class _Steps:
    def __init__(self, shape: LatticeShape, rule: RuleWeights):
        if rule.stencil.d != shape.d:
            raise InputError(
                f"stencil dimension {rule.stencil.d} does not match lattice dimension {shape.d}"
            )
        self.shape, self.rule = shape, rule
        self._cache: dict[int, dict[int, complex]] = {}

    def __call__(self, cell: int) -> dict[int, complex]:
        if cell not in self._cache:
            self._cache[cell] = _step_table(self.shape, self.rule, cell)
        return self._cache[cell]


def path_amplitude(shape: LatticeShape, rule: RuleWeights, path: Path) -> complex:
    """Product of step weights, multiplied from the last step back to the first."""
    steps = _Steps(shape, rule)
    for c in path.cells:
        if not 0 <= c < shape.volume:
            raise InputError(f"cell {c} outside lattice of volume {shape.volume}")
    amp = 1 + 0j
    for t in range(path.T - 1, -1, -1):
        table = steps(path.cells[t])
        nxt = path.cells[t + 1]
        if nxt not in table:
            raise InputError(
                f"step {path.cells[t]} -> {nxt} at t={t} matches no stencil offset"
            )
        amp *= table[nxt]
    return amp


def estimated_paths(rule: RuleWeights, spec: HistorySetSpec) -> int:
    return len(spec.sources) * len(rule.stencil) ** spec.T


def _check_guard(rule: RuleWeights, spec: HistorySetSpec) -> None:
    estimate = estimated_paths(rule, spec)
    if estimate > MAX_PATHS:
        raise InputError(
            f"refusing to enumerate about {estimate} paths (limit {MAX_PATHS}); "
            "reduce T or the stencil"
        )


def enumerate_paths(
    shape: LatticeShape, rule: RuleWeights, spec: HistorySetSpec
) -> list[Path]:
    """All histories in the set, sorted lexicographically by their cell sequences."""
    _check_guard(rule, spec)
    steps = _Steps(shape, rule)
    for s in spec.sources:
        if not 0 <= s < shape.volume:
            raise InputError(f"source cell {s} outside lattice of volume {shape.volume}")
    allowed = {t: spec.allowed(t) for t in range(spec.T + 1)}
    found: list[tuple[int, ...]] = []
    stack = [(s,) for s in sorted(spec.sources)]
    while stack:
        cells = stack.pop()
        t = len(cells) - 1
        if t == spec.T:
            found.append(cells)
            continue
        ok = allowed[t + 1]
        for nxt in sorted(steps(cells[-1]), reverse=True):
            if ok is None or nxt in ok:
                stack.append(cells + (nxt,))
    found.sort()
    return [Path(c) for c in found]


def _amplitudes(shape, rule, spec) -> list[tuple[Path, complex]]:
    return [(p, path_amplitude(shape, rule, p)) for p in enumerate_paths(shape, rule, spec)]


def final_cell_probabilities(
    shape: LatticeShape, rule: RuleWeights, spec: HistorySetSpec
) -> np.ndarray:
    """Contribution to the set probability from each final cell x (pairs ending at x)."""
    totals: dict[int, complex] = defaultdict(complex)
    for path, amp in _amplitudes(shape, rule, spec):
        totals[path.cells[-1]] += amp
    out = np.zeros(shape.volume)
    for x in sorted(totals):
        out[x] = abs(totals[x]) ** 2
    return out


def _checked_real(total: complex) -> float:
    if abs(total.imag) > IMAG_FAIL:
        raise ConsistencyError(f"set probability has imaginary part {total.imag:.3e}")
    return total.real


def set_probability(shape: LatticeShape, rule: RuleWeights, spec: HistorySetSpec) -> float:
    """|S| = sum over pairs coinciding at T of w(g1) conj(w(g2)), grouped by final cell."""
    totals: dict[int, complex] = defaultdict(complex)
    for path, amp in _amplitudes(shape, rule, spec):
        totals[path.cells[-1]] += amp
    total = 0j
    for x in sorted(totals):
        total += totals[x] * totals[x].conjugate()
    return _checked_real(total)


def set_probability_pairwise(
    shape: LatticeShape, rule: RuleWeights, spec: HistorySetSpec
) -> float:
    """Brute-force double sum over path pairs; quadratic in the number of paths."""
    amps = _amplitudes(shape, rule, spec)
    total = 0j
    for p1, a1 in amps:
        for p2, a2 in amps:
            if p1.cells[-1] == p2.cells[-1]:
                total += a1 * a2.conjugate()
    return _checked_real(total)


def truncation_invariance_gap(
    shape: LatticeShape, rule: RuleWeights, spec: HistorySetSpec, T1: int, T2: int
) -> float:
    """|P(T2) - P(T1)| for the same conditions truncated at two later times."""
    if T1 > T2:
        raise InputError(f"need T1 <= T2, got T1={T1}, T2={T2}")
    if T1 <= spec.latest_condition:
        raise InputError(
            f"truncation time {T1} must lie after the last condition at t={spec.latest_condition}"
        )
    p1 = set_probability(shape, rule, replace(spec, T=T1))
    if T1 == T2:
        return 0.0
    p2 = set_probability(shape, rule, replace(spec, T=T2))
    return abs(p2 - p1)
