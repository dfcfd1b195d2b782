"""Config parsing, diagnostics, canonical serialization and presets."""

import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cframe import AtomicMeasure, IntervalMeasure, PolynomialFrame, SampledFrame, optimal_bounds
from cframe.config import (
    PRESETS,
    config_digest,
    config_from_dict,
    config_to_dict,
    format_float,
    format_scalar,
    parse_config,
    preset,
    with_overrides,
)
from cframe.errors import ConfigError
from cframe.exact import QComplex

BASE = {
    "algebra": {"kind": "diagonal", "dim": 2, "scalar_mode": "rational"},
    "module_rank": 1,
    "measure": {"interval": {"a": "0", "b": "1"}},
    "frame": {"polynomial": {"entries": [[[["0", "2"], []], [[], ["-1", "1"]]]]}},
}


def with_(**changes):
    d = json.loads(json.dumps(BASE))
    d.update(changes)
    return d


class TestParse:
    def test_example_frame(self):
        job = config_from_dict(BASE)
        assert isinstance(job.frame, PolynomialFrame)
        assert job.measure == IntervalMeasure(0, 1)
        assert optimal_bounds(job.frame) == (Fraction(1, 3), Fraction(4, 3))
        assert job.grid_size == 32

    def test_complex_pairs_and_floats(self):
        d = with_(algebra={"kind": "full", "dim": 1, "scalar_mode": "float"},
                  frame={"polynomial": {"entries": [[[[[0.5, -1], 2]]]]}})
        job = config_from_dict(d)
        assert job.frame.coeffs[0, 0, 0, 0] == 0.5 - 1j
        assert job.frame.coeffs[0, 0, 0, 1] == 2

    def test_atoms_and_samples(self):
        d = with_(measure={"atoms": {"points": [0, "1/2"], "weights": ["1", "1/2"]}},
                  frame={"samples": {"values": [[[["1", "0"], ["0", "1"]]], [[["0", "0"], ["0", "2"]]]]}})
        job = config_from_dict(d)
        assert isinstance(job.frame, SampledFrame)
        assert job.measure == AtomicMeasure((0, Fraction(1, 2)), (1, Fraction(1, 2)))

    def test_unreduced_fraction_has_line(self):
        text = json.dumps(with_(measure={"interval": {"a": "0", "b": "2/4"}}), indent=2)
        with pytest.raises(ConfigError) as err:
            parse_config(text)
        assert "not reduced" in str(err.value)
        assert err.value.line == text.splitlines().index('      "b": "2/4"') + 1

    @pytest.mark.parametrize(
        "change, fragment",
        [
            ({"algebra": {"kind": "upper", "dim": 2}}, "kind"),
            ({"module_rank": 0}, "module_rank"),
            ({"grid_size": 1}, "grid_size"),
            ({"measure": {"interval": {"a": "1", "b": "0"}}}, "a < b"),
            ({"frame": {"polynomial": {"entries": [[[["1"], ["1"]], [[], ["1"]]]]}}}, "off-diagonal"),
            ({"frame": {"polynomial": {"entries": []}}}, "components"),
            ({"tolerances": {"equality_tol": -1}}, "nonnegative"),
            ({"extra": 1}, "unknown field"),
        ],
    )
    def test_structural_errors(self, change, fragment):
        with pytest.raises(ConfigError) as err:
            config_from_dict(with_(**change))
        assert fragment in str(err.value)

    def test_invalid_json(self):
        with pytest.raises(ConfigError) as err:
            parse_config('{"algebra": ', "job.json")
        assert err.value.line == 1

    def test_mode_override(self):
        d = with_(algebra={"kind": "diagonal", "dim": 2, "scalar_mode": "float"})
        assert config_from_dict(d, mode_override="rational").module.exact


class TestSerialization:
    def test_round_trip(self):
        job = config_from_dict(BASE)
        again = config_from_dict(config_to_dict(job))
        assert config_to_dict(again) == config_to_dict(job)
        assert config_digest(again) == config_digest(job)

    def test_round_trip_samples(self):
        d = with_(algebra={"kind": "full", "dim": 1, "scalar_mode": "float"},
                  measure={"interval": {"a": "0", "b": "1", "weight_coeffs": ["1", "1"]}},
                  frame={"samples": {"grid": [0.25, 0.75], "weights": [0.5, 0.5], "values": [[[[1.5]]], [[[[0, 1]]]]]}})
        job = config_from_dict(d)
        again = config_from_dict(config_to_dict(job))
        assert np.array_equal(again.frame.values, job.frame.values)
        assert again.frame.points == job.frame.points

    def test_digest_changes_with_content(self):
        a = config_from_dict(BASE)
        b = with_overrides(a, grid_size=64)
        assert config_digest(a) != config_digest(b)
        assert config_digest(a).startswith("sha256:")

    def test_trailing_zero_coefficients_trimmed(self):
        d = with_(frame={"polynomial": {"entries": [[[["1", "0", "0"], []], [[], ["1"]]]]}})
        entries = config_to_dict(config_from_dict(d))["frame"]["polynomial"]["entries"]
        assert entries[0][0][0] == ["1"]

    def test_formatting(self):
        assert format_scalar(QComplex(Fraction(1, 3))) == "1/3"
        assert format_scalar(QComplex(1, -2)) == ["1", "-2"]
        assert format_float(-0.0) == 0.0
        assert format_float(0.1) == 0.1
        assert format_float(float("nan")) == "nan"

    @given(st.floats(allow_nan=False, allow_infinity=False))
    def test_float_round_trip(self, x):
        assert float(json.loads(json.dumps(format_float(x)))) == x


class TestPresets:
    def test_names(self):
        assert set(PRESETS) == {"paper-2.8", "paper-3.4"}

    def test_exact_override(self):
        job = preset("paper-3.4", "rational")
        assert job.module.exact and job.second_frame is not None

    def test_unknown(self):
        with pytest.raises(ConfigError):
            preset("no-such-preset")
