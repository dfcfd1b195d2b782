"""The seeded property suites behind ``cframe check``."""

import numpy as np
import pytest

from cframe.errors import ParameterError
from cframe.suite import SUITES, constructed_cases, draw_case, run_suite


def test_case_mix_covers_the_grid():
    rng = np.random.default_rng(42)
    cases = [draw_case(rng, i) for i in range(100)]
    kinds = {c.frame.module.algebra.kind for c in cases}
    ks = {c.frame.module.k for c in cases}
    ns = {c.frame.module.n for c in cases}
    modes = {c.frame.module.algebra.scalar_mode for c in cases}
    assert kinds == {"full", "diagonal"} and ks == {1, 2, 3} and ns == {1, 2, 3}
    assert modes == {"float", "rational"}
    assert any("poly" in c.label for c in cases) and any("atoms" in c.label for c in cases)
    for c in cases:
        if "atoms" in c.label:
            assert len(c.frame.measure) <= 6
        else:
            assert c.frame.degree <= 4


def test_constructed_cases():
    labels = [c.label for c in constructed_cases()]
    for name in ("single-atom", "two-identical-atoms", "zero-atom"):
        assert sum(label.startswith(name) for label in labels) == 2


@pytest.mark.parametrize("suite", SUITES[:-1])
def test_each_suite_passes_on_a_small_run(suite):
    report = run_suite(suite, seed=1, cases=6)
    assert report.all_passed, [f for p in report.properties.values() for f in p.failures]
    assert all(line.split(": ")[1].split()[1] == "ok" for line in report.lines())


def test_same_seed_same_report():
    a = run_suite("operators", seed=9, cases=4)
    b = run_suite("operators", seed=9, cases=4)
    assert a.lines() == b.lines()


def test_parameter_errors():
    with pytest.raises(ParameterError):
        run_suite("everything", 0, 1)
    with pytest.raises(ParameterError):
        run_suite("all", 0, 0)
