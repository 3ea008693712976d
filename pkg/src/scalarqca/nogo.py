"""Classifier for homogeneous scalar rules and independent numerical oracles.

The classifier follows the sliding-neighbourhood elimination: with k the
first weight above tolerance, the neighbourhoods of x and x + e_j - e_k can
only share the cell at position j of the first and k of the second, so the
condition at displacement e_j - e_k isolates w_j * conj(w_k). Walking j from
the last position down to k + 1 forces every later weight to vanish, and the
diagonal condition then fixes |w_k| = 1.

Positions in traces are 1-based, counted in stencil (lexicographic) order.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from numba import njit

from .errors import InputError
from .lattice import Stencil, Vector
from .operators import RuleWeights
from .unitarity import DEFAULT_TOL, displacement_set, local_conditions, overlap_sum


@dataclass(frozen=True)
class AllZero:
    def __str__(self) -> str:
        return "AllZero"


@dataclass(frozen=True)
class TranslationPhase:
    offset: Vector
    phase: complex

    def __str__(self) -> str:
        return f"TranslationPhase offset={format_vector(self.offset)} phase={format_complex(self.phase)}"


@dataclass(frozen=True)
class Violation:
    delta: Vector
    residual: complex

    def __str__(self) -> str:
        return (
            f"Violation delta={format_vector(self.delta)} "
            f"residual={format_complex(self.residual)} |residual|={abs(self.residual):.17g}"
        )


NogoVerdict = Union[AllZero, TranslationPhase, Violation]


def format_vector(v: Sequence[int]) -> str:
    return "(" + ",".join(str(int(c)) for c in v) + ")"


def format_complex(z: complex) -> str:
    z = complex(z)
    return f"{z.real:.17g}{z.imag:+.17g}i"


def _sub(a: Vector, b: Vector) -> Vector:
    return tuple(x - y for x, y in zip(a, b))


def _first_nonzero(rule: RuleWeights, tol: float) -> int | None:
    for i, w in enumerate(rule.weights):
        if abs(w) > tol:
            return i
    return None


def _check_rule(rule: RuleWeights, tol: float) -> None:
    if len(rule.stencil) == 0:
        raise InputError("stencil is empty")
    if tol <= 0:
        raise InputError(f"tolerance must be positive, got {tol}")


def classify(rule: RuleWeights, tol: float = DEFAULT_TOL, strict: bool = False) -> NogoVerdict:
    """Classify a homogeneous rule as all-zero, translation times phase, or a violation.

    Only the sliding conditions and the diagonal condition are checked unless
    ``strict`` is set, in which case the full set of local conditions must
    also hold.
    """
    _check_rule(rule, tol)
    k = _first_nonzero(rule, tol)
    if k is None:
        return AllZero()
    offsets = rule.stencil.offsets
    e_k = offsets[k]
    for j in range(len(offsets) - 1, k, -1):
        delta = _sub(offsets[j], e_k)
        c = overlap_sum(rule, delta)
        if abs(c) > tol:
            return Violation(delta, c)
    zero = (0,) * rule.stencil.d
    c0 = overlap_sum(rule, zero) - 1.0
    if abs(c0) > tol:
        return Violation(zero, c0)
    if strict:
        report = local_conditions(rule, tol)
        if not report.passed:
            return Violation(*report.worst())
    return TranslationPhase(e_k, rule.weights[k])


@dataclass(frozen=True)
class EliminationStep:
    """Second neighbourhood slid to ``delta``; its position ``x2_position``
    overlaps position ``x1_position`` of the first, forcing that weight to zero."""

    delta: Vector
    x1_position: int
    x2_position: int
    overlap: tuple[tuple[int, int], ...]
    residual: complex
    violated: bool

    @property
    def eliminated_position(self) -> int:
        return self.x1_position


@dataclass(frozen=True)
class Conclusion:
    position: int
    offset: Vector
    phase: complex
    residual: complex
    violated: bool


@dataclass(frozen=True)
class EliminationTrace:
    steps: tuple[EliminationStep, ...]
    conclusion: Conclusion | None

    def __len__(self) -> int:
        return len(self.steps) + (self.conclusion is not None)

    @property
    def violated(self) -> bool:
        if self.steps and self.steps[-1].violated:
            return True
        return self.conclusion is not None and self.conclusion.violated

    def lines(self) -> list[str]:
        out = []
        for s in self.steps:
            status = "VIOLATED" if s.violated else "ok"
            out.append(
                f"eliminate w_{s.x1_position}: delta={format_vector(s.delta)} "
                f"overlap x1[{s.x1_position}]=x2[{s.x2_position}] "
                f"C={format_complex(s.residual)} {status}"
            )
        c = self.conclusion
        if c is not None:
            status = "VIOLATED" if c.violated else "ok"
            out.append(
                f"conclude |w_{c.position}|=1: offset={format_vector(c.offset)} "
                f"phase={format_complex(c.phase)} C(0)-1={format_complex(c.residual)} {status}"
            )
        return out


def _live_overlap(offsets: Sequence[Vector], k: int, j: int) -> tuple[tuple[int, int], ...]:
    # Cells both neighbourhoods may still weight, as (x1 position, x2 position).
    delta = _sub(offsets[j], offsets[k])
    live = range(k, j + 1)
    first = {offsets[i]: i for i in live}
    pairs = []
    for i2 in live:
        cell = tuple(a + b for a, b in zip(delta, offsets[i2]))
        if cell in first:
            pairs.append((first[cell] + 1, i2 + 1))
    return tuple(pairs)


def elimination_trace(rule: RuleWeights, tol: float = DEFAULT_TOL) -> EliminationTrace:
    """Step-by-step record of the sliding elimination, stopping at the first violation."""
    _check_rule(rule, tol)
    k = _first_nonzero(rule, tol)
    if k is None:
        raise InputError("all weights vanish; there is no first non-zero weight to slide from")
    offsets = rule.stencil.offsets
    steps = []
    for j in range(len(offsets) - 1, k, -1):
        delta = _sub(offsets[j], offsets[k])
        overlap = _live_overlap(offsets, k, j)
        if overlap != ((j + 1, k + 1),):
            raise AssertionError(f"overlap at {delta} is not a singleton: {overlap}")
        c = overlap_sum(rule, delta)
        step = EliminationStep(delta, j + 1, k + 1, overlap, c, abs(c) > tol)
        steps.append(step)
        if step.violated:
            return EliminationTrace(tuple(steps), None)
    zero = (0,) * rule.stencil.d
    c0 = overlap_sum(rule, zero) - 1.0
    conclusion = Conclusion(k + 1, offsets[k], rule.weights[k], c0, abs(c0) > tol)
    return EliminationTrace(tuple(steps), conclusion)


class _Conditions:
    """Incidence of ordered offset pairs on displacements, for vectorised C(delta)."""

    def __init__(self, stencil: Stencil):
        if len(stencil) == 0:
            raise InputError("stencil is empty")
        self.deltas = displacement_set(stencil)
        where = {d: i for i, d in enumerate(self.deltas)}
        m = len(stencil)
        self.incidence = np.zeros((len(self.deltas), m, m))
        for i, e in enumerate(stencil.offsets):
            for j, f in enumerate(stencil.offsets):
                self.incidence[where[_sub(e, f)], i, j] = 1.0
        self.target = np.zeros(len(self.deltas), dtype=complex)
        self.target[where[(0,) * stencil.d]] = 1.0
        self.size = m
        self.zero = where[(0,) * stencil.d]
        self.flat = self.incidence.reshape(len(self.deltas), m * m).T.copy()
        # pair_delta[i, j] = index of e_i - e_j; each row and column hits distinct deltas
        self.pair_delta = np.array(
            [[where[_sub(e, f)] for f in stencil.offsets] for e in stencil.offsets]
        )

    def residuals(self, w: np.ndarray) -> np.ndarray:
        """C(delta) - [delta == 0] for a batch of weight vectors along the last axis."""
        outer = w[..., :, None] * w[..., None, :].conj()
        return outer.reshape(*w.shape[:-1], self.size * self.size) @ self.flat - self.target


@njit(cache=True)
def _quartic_argmin(c3: float, c2: float, c1: float) -> tuple[float, float]:
    """Minimiser t and value of t^4 + c3 t^3 + c2 t^2 + c1 t (value 0 at t = 0).

    Critical points come from the closed-form roots of the cubic derivative
    (trigonometric form when all three are real), Newton polished.
    """
    a, b, c = 0.75 * c3, 0.5 * c2, 0.25 * c1
    shift = a / 3
    p = b - a * shift
    q = 2 * shift**3 - shift * b + c
    disc = (q / 2) ** 2 + (p / 3) ** 3
    roots = np.empty(3)
    if disc > 0:
        sq = math.sqrt(disc)
        u1, u2 = -q / 2 + sq, -q / 2 - sq
        roots[:] = math.copysign(abs(u1) ** (1 / 3), u1) + math.copysign(abs(u2) ** (1 / 3), u2)
    else:
        rad = math.sqrt(max(-p / 3, 0.0))
        cos_arg = -q / (2 * rad**3) if rad > 0 else 0.0
        phi = math.acos(min(1.0, max(-1.0, cos_arg))) / 3
        for k in range(3):
            roots[k] = 2 * rad * math.cos(phi - 2 * math.pi * k / 3)
    best_t, best_g = 0.0, 0.0
    for k in range(3):
        t = roots[k] - shift
        for _ in range(2):
            f2 = (12 * t + 6 * c3) * t + 2 * c2
            if f2 == 0:
                break
            t -= (((4 * t + 3 * c3) * t + 2 * c2) * t + c1) / f2
        g = t * (c1 + t * (c2 + t * (c3 + t)))
        if g < best_g:
            best_t, best_g = t, g
    return best_t, best_g


@njit(cache=True)
def _residuals_into(w, pair_delta, zero, r):
    r[:] = 0
    size = w.shape[0]
    for i in range(size):
        for j in range(size):
            r[pair_delta[i, j]] += w[i] * w[j].conjugate()
    r[zero] -= 1.0


@njit(cache=True)
def _descent_kernel(w0, pair_delta, ndelta, zero, min_improvement, max_iterations):
    """Exact coordinate minimisation over the real and imaginary part of each weight.

    Along w + t*u*e_m every C(delta) moves as r + t*a + t^2*[delta == 0], so
    the objective is an exactly known quartic in t.
    """
    size = w0.shape[0]
    w = w0.copy()
    r = np.zeros(ndelta, dtype=np.complex128)
    a = np.zeros(ndelta, dtype=np.complex128)
    directions = (1.0 + 0j, 1j)
    for it in range(1, max_iterations + 1):
        _residuals_into(w, pair_delta, zero, r)
        f_start = 0.0
        for d in range(ndelta):
            f_start += abs(r[d]) ** 2
        for m in range(size):
            for u in directions:
                a[:] = 0
                for j in range(size):
                    a[pair_delta[m, j]] += u * w[j].conjugate()
                for i in range(size):
                    a[pair_delta[i, m]] += u.conjugate() * w[i]
                c3 = 2 * a[zero].real
                c2 = 2 * r[zero].real
                c1 = 0.0
                for d in range(ndelta):
                    c2 += abs(a[d]) ** 2
                    c1 += 2 * (r[d] * a[d].conjugate()).real
                t, gain = _quartic_argmin(c3, c2, c1)
                if gain < 0:
                    w[m] += t * u
                    for d in range(ndelta):
                        r[d] += t * a[d]
                    r[zero] += t * t
        _residuals_into(w, pair_delta, zero, r)
        f_end = 0.0
        for d in range(ndelta):
            f_end += abs(r[d]) ** 2
        if f_start - f_end < min_improvement:
            return w, it
    return w, max_iterations


@dataclass(frozen=True)
class OracleResult:
    """Final point of one restart.

    ``objective`` is the summed squared residual moduli that was minimised;
    ``residual`` is the largest single condition residual modulus.
    """

    weights: np.ndarray
    residual: float
    objective: float
    iterations: int

    def nonzero_count(self, threshold: float = 1e-4) -> int:
        return int(np.sum(np.abs(self.weights) > threshold))


def _random_disc(rng: np.random.Generator, size: int) -> np.ndarray:
    radius = np.sqrt(rng.random(size))
    angle = 2 * np.pi * rng.random(size)
    return radius * np.exp(1j * angle)


def random_search_oracle(
    stencil: Stencil,
    seed: int,
    restarts: int,
    min_improvement: float = 1e-14,
    max_iterations: int = 10_000,
) -> list[OracleResult]:
    """Minimise the summed squared unitarity residuals from random starts.

    Each restart draws weights uniformly on the unit complex disc from its own
    PCG64 stream, spawned in restart order from ``SeedSequence(seed)``, then
    runs coordinate descent with exact line minimisation (the objective is a
    quartic along each real coordinate) until a full sweep improves the
    objective by less than ``min_improvement`` or ``max_iterations`` sweeps.
    """
    if restarts < 0:
        raise InputError(f"restarts must be non-negative, got {restarts}")
    cond = _Conditions(stencil)
    results = []
    for child in np.random.SeedSequence(seed).spawn(restarts):
        rng = np.random.Generator(np.random.PCG64(child))
        w, iterations = _descent_kernel(
            _random_disc(rng, cond.size).astype(np.complex128),
            cond.pair_delta,
            len(cond.deltas),
            cond.zero,
            float(min_improvement),
            int(max_iterations),
        )
        r = np.abs(cond.residuals(w))
        results.append(OracleResult(w, float(r.max()), float(np.sum(r**2)), int(iterations)))
    return results


@dataclass(frozen=True)
class GridPoint:
    weights: tuple[complex, ...]
    max_abs_residual: float


def exhaustive_grid_oracle(
    stencil: Stencil,
    moduli: Sequence[float],
    phase_count: int,
    threshold: float = 1e-2,
) -> list[GridPoint]:
    """Every assignment of grid moduli and phases whose worst residual is within ``threshold``.

    Phases are enumerated for every modulus, zero included, so the grid has
    (len(moduli) * phase_count) ** |E| points.
    """
    if len(stencil) > 3:
        raise InputError(f"grid oracle refuses {len(stencil)} offsets (limit 3)")
    if phase_count < 1 or not moduli:
        raise InputError("grid needs at least one modulus and one phase")
    cond = _Conditions(stencil)
    phases = np.exp(2j * np.pi * np.arange(phase_count) / phase_count)
    values = (np.asarray(moduli, dtype=float)[:, None] * phases[None, :]).ravel()
    grid = np.array(list(itertools.product(values, repeat=len(stencil))), dtype=complex)
    worst = np.max(np.abs(cond.residuals(grid)), axis=-1)
    keep = np.flatnonzero(worst <= threshold)
    return [GridPoint(tuple(complex(z) for z in grid[i]), float(worst[i])) for i in keep]
