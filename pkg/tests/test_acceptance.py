"""Acceptance criteria, one test each, every one within a 60 s budget.

Run on its own with ``pytest tests/test_acceptance.py``; the summary at the
end prints one PASS/FAIL line per criterion.
"""
import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from scalarqca.histories import HistorySetSpec, final_cell_probabilities, truncation_invariance_gap
from scalarqca.lattice import LatticeShape, box_stencil, triangular_stencil
from scalarqca.nogo import TranslationPhase, Violation, classify, exhaustive_grid_oracle, random_search_oracle
from scalarqca.operators import (
    FieldState,
    RuleWeights,
    apply,
    bandwidth_K,
    build_operator,
    interior_rows,
    measured_bandwidth,
    size_condition,
)
from scalarqca.partitioned import BlockRule, build_partitioned, run, subgroup_invariance_report
from scalarqca.unitarity import aliasing_free, global_check, local_conditions

from conftest import random_disc, random_rule, translation_rule

BUDGET = 60.0
S = 1 / math.sqrt(2)


@pytest.fixture
def clock():
    start = time.perf_counter()
    yield
    assert time.perf_counter() - start < BUDGET


def test_1_nogo_falsification_sweep(criterion, clock):
    rng = np.random.default_rng(1)
    stencil = box_stencil(1, 1)
    checked = translations = 0
    while checked < 100_000:
        w = random_disc(rng, 3)
        if np.sum(np.abs(w) > 0.1) < 2:
            continue
        verdict = classify(RuleWeights(stencil, tuple(w)), 1e-10)
        translations += not isinstance(verdict, Violation)
        checked += 1
    criterion.detail = f"{checked} rules, non-violation verdicts: {translations}"
    assert translations == 0


def test_2_translation_soundness(criterion, clock):
    rng = np.random.default_rng(2)
    stencil = box_stencil(2, 2)
    shape = LatticeShape((9, 9))
    assert aliasing_free(shape, stencil)
    worst = 0.0
    for k, offset in enumerate(stencil.offsets):
        for _ in range(16):
            phase = np.exp(2j * np.pi * rng.random())
            rule = translation_rule(stencil, k, phase)
            assert classify(rule, 1e-10) == TranslationPhase(offset, phase)
            ok, dev = global_check(build_operator(shape, rule), 1e-12)
            assert ok
            worst = max(worst, dev)
    criterion.detail = f"25 offsets x 16 phases, worst |UU^dagger - I| = {worst:.2e}"


def _mixed_rule(rng, stencil, i):
    if i % 4 == 0:
        return translation_rule(stencil, int(rng.integers(len(stencil))), np.exp(2j * np.pi * rng.random()))
    if i % 4 == 1:
        w = np.zeros(len(stencil), dtype=complex)
        w[rng.integers(len(stencil))] = np.exp(2j * np.pi * rng.random())
        w = w + 10.0 ** -rng.integers(3, 13) * random_disc(rng, len(stencil))
        return RuleWeights(stencil, tuple(w / max(1.0, np.abs(w).max())))
    return random_rule(rng, stencil)


@pytest.mark.parametrize("dims", [(16,), (9, 9)])
def test_3_local_global_equivalence(dims, criterion, clock):
    shape = LatticeShape(dims)
    stencil = box_stencil(len(dims), 1)
    assert aliasing_free(shape, stencil)
    rng = np.random.default_rng(3)
    worst_gap, passes = 0.0, 0
    for i in range(200):
        rule = _mixed_rule(rng, stencil, i)
        report = local_conditions(rule)
        ok, dev = global_check(build_operator(shape, rule))
        assert ok == report.passed
        worst_gap = max(worst_gap, abs(dev - report.max_abs_residual))
        passes += ok
    criterion.detail = f"200 rules on {shape}, {passes} unitary, max deviation gap {worst_gap:.2e}"
    assert worst_gap <= 1e-12


def test_4_oracle_confirmation(criterion, clock):
    summary = []
    for name, stencil, restarts in (("box:1x1", box_stencil(1, 1), 100), ("tri", triangular_stencil(), 50)):
        results = random_search_oracle(stencil, 42, restarts)
        converged = [r for r in results if r.residual < 1e-8]
        multi = sum(r.nonzero_count(1e-4) > 1 for r in converged)
        summary.append(f"{name}: {len(converged)}/{restarts} converged, {multi} multi-nonzero")
        assert multi == 0
    grid = exhaustive_grid_oracle(box_stencil(1, 1), [0, S, 1], 8)
    for p in grid:
        mods = np.abs(p.weights)
        assert np.sum(mods > 1e-12) == 1 and abs(mods.max() - 1) < 1e-12
    summary.append(f"grid survivors {len(grid)}, all single unit weight")
    criterion.detail = "; ".join(summary)
    assert grid


def test_5_histories_equivalence(criterion, clock):
    shape = LatticeShape((8,))
    stencil = box_stencil(1, 1)
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(50):
        rule = random_rule(rng, stencil)
        op = build_operator(shape, rule)
        source = int(rng.integers(8))
        state = FieldState.delta(shape, source)
        for T in range(5):
            probs = final_cell_probabilities(shape, rule, HistorySetSpec(source, T))
            worst = max(worst, float(np.max(np.abs(probs - state.probabilities()))))
            state = apply(op, state)
    assert worst <= 1e-12

    specs = [
        HistorySetSpec(0, 4),
        HistorySetSpec((0, 3), 4),
        HistorySetSpec(2, 4, ((1, {1, 2, 3}),)),
        HistorySetSpec((1, 6), 4, ((1, {0, 1, 5, 6, 7}), (2, {0, 6, 7}))),
    ]
    worst_gap, unitary = 0.0, 0
    for k in range(3):
        for _ in range(4):
            rule = translation_rule(stencil, k, np.exp(2j * np.pi * rng.random()))
            assert local_conditions(rule).passed
            unitary += 1
            for spec in specs:
                t1 = spec.latest_condition + 1
                worst_gap = max(worst_gap, truncation_invariance_gap(shape, rule, spec, t1, 4))
    assert worst_gap < 1e-12
    bad_gap = truncation_invariance_gap(shape, RuleWeights(stencil, (S, 0, S)), HistorySetSpec(0, 1), 1, 2)
    assert bad_gap > 0.01
    criterion.detail = (
        f"max |P - |phi|^2| = {worst:.2e}; unitary gap {worst_gap:.2e} over {unitary} rules; "
        f"(1/sqrt2,0,1/sqrt2) gap {bad_gap:.3f}"
    )


def test_6_partitioned_evasion(criterion, clock):
    op = build_partitioned(16, BlockRule.rotation(math.pi / 4))
    ok, dev = global_check(op.composite, 1e-12)
    assert ok
    states = run(op, FieldState.delta(op.shape, 0), 100)
    drift = max(abs(s.norm() - 1) for s in states)
    assert drift <= 1e-10
    rep = subgroup_invariance_report(op)
    assert rep.shift2_commutator <= 1e-12 and rep.commutes_with_shift2
    assert rep.shift1_commutator > 0.1
    criterion.detail = (
        f"|UU^dagger - I| = {dev:.1e}, norm drift {drift:.1e}, "
        f"[U,T2] = {rep.shift2_commutator:.1e}, [U,T1] = {rep.shift1_commutator:.3f}"
    )


def test_7_bandwidth_arithmetic(criterion, clock):
    shape = LatticeShape((3, 4, 5))
    K = bandwidth_K(shape)
    assert K == 26 == 1 + 5 + 5 * 4
    stencil = box_stencil(3, 1)
    rule = RuleWeights(stencil, tuple(np.linspace(0.05, 0.15, 27) * np.exp(0.3j)))
    bw = measured_bandwidth(build_operator(shape, rule), interior_rows(shape, stencil))
    assert bw <= K * 1
    assert size_condition(LatticeShape((16,)), 1)
    assert not size_condition(LatticeShape((4,)), 1)
    criterion.detail = f"K = {K}, interior bandwidth {bw} <= K*r = {K}"


def _cli(*args):
    return subprocess.run([sys.executable, "-m", "scalarqca", *args], capture_output=True)


def test_8_cli_determinism(tmp_path, criterion, clock):
    shift = tmp_path / "shift.json"
    shift.write_text(json.dumps({
        "dims": [16], "stencil": [[-1], [0], [1]],
        "weights": [{"re": 0, "im": 0}, {"re": 0, "im": 0}, {"re": 1, "im": 0}],
    }))
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({
        "dims": [8], "stencil": [[-1], [0], [1]],
        "weights": [{"re": S, "im": 0}, {"re": 0, "im": 0}, {"re": S, "im": 0}],
    }))
    first = _cli("classify", str(shift))
    assert first.returncode == 0
    assert first.stdout == b"TranslationPhase offset=(1) phase=1+0i\n"
    check = _cli("check", str(bad))
    assert check.returncode == 1
    for args, ref in ((("classify", str(shift)), first), (("check", str(bad)), check)):
        again = _cli(*args)
        assert again.stdout == ref.stdout and again.returncode == ref.returncode
    criterion.detail = "classify exit 0 with exact verdict, check exit 1, repeat runs byte-identical"
