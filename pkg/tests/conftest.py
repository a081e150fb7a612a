from __future__ import annotations

import os

import pytest
from hypothesis import HealthCheck, settings

from tatehh.hochschild import EquivariantComplex, subdivision_model
from tatehh.problem import corpus
from tatehh.tate_ss import DEFAULT_BUDGET, auto_top

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# criterion number -> (status, detail), filled by test_acceptance.py
ACCEPTANCE: dict[str, tuple[str, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(k.split()[0]), k)):
        status, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {status}  {detail}")


@pytest.fixture(scope="session")
def specs():
    return {s.name: s for s in corpus()}


def _synthetic(p: int) -> dict[str, EquivariantComplex]:
    triv = EquivariantComplex.trivial(p, {0: 1})
    free = EquivariantComplex.regular(p)
    return {
        f"trivial_p{p}": triv,
        f"free_p{p}": free,
        f"shifted_trivial_p{p}": triv.shift(2),
        f"trivial_plus_free_p{p}": triv.direct_sum(free),
    }


@pytest.fixture(scope="session")
def equivariant_corpus(specs):
    """Bounded C_p complexes: subdivision models of every corpus (A, A) plus small representations."""
    out: dict[str, EquivariantComplex] = {}
    for name, s in specs.items():
        p = s.p
        top = auto_top(s.algebra, s.module, p, DEFAULT_BUDGET, cap=2)
        out[f"{name}_model"] = subdivision_model(s.algebra, s.module, p, top)
    for p in (2, 3, 5):
        out.update(_synthetic(p))
    return out
