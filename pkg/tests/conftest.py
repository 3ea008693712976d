import numpy as np
import pytest

from scalarqca.lattice import LatticeShape, Stencil, box_stencil
from scalarqca.operators import RuleWeights


def random_disc(rng, size):
    return np.sqrt(rng.random(size)) * np.exp(2j * np.pi * rng.random(size))


def random_rule(rng, stencil: Stencil) -> RuleWeights:
    return RuleWeights(stencil, tuple(random_disc(rng, len(stencil))))


def translation_rule(stencil: Stencil, position: int, phase: complex) -> RuleWeights:
    w = [0j] * len(stencil)
    w[position] = phase
    return RuleWeights(stencil, tuple(w))


def dense_oracle(shape: LatticeShape, rule: RuleWeights) -> np.ndarray:
    """U from the local rule by rolling a multi-dimensional identity, independent of build_operator."""
    n = shape.volume
    eye = np.eye(n).reshape(shape.dims + (n,))
    u = np.zeros((n, n), dtype=complex)
    for e, w in zip(rule.stencil, rule.weights):
        # row x picks the basis vector of cell x + e
        shifted = np.roll(eye, shift=tuple(-c for c in e), axis=tuple(range(shape.d)))
        u += w * shifted.reshape(n, n)
    return u


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def box11():
    return box_stencil(1, 1)


_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line; the test body sets ``.detail`` and asserts."""

    class Line:
        detail = ""

    line = Line()
    yield line
    rep = getattr(request.node, "rep_call", None)
    passed = rep is not None and rep.passed
    _ACCEPTANCE.append((request.node.name, passed, line.detail))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")
