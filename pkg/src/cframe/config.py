"""Job configuration: JSON parsing with field diagnostics, canonical
serialization, digests and the built-in example presets.

Scalars are written as rational strings ("p/q", "p") when exact and as
JSON numbers otherwise; a complex scalar is a [re, im] pair.  Polynomials
are ascending coefficient lists, and an empty list is the zero polynomial.
"""

from __future__ import annotations

import copy
import hashlib
import json
import re
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from . import exact
from .cstar import KINDS, MODES, AlgebraDescriptor, ToleranceConfig
from .errors import CFrameError, ConfigError
from .hilbert import ModuleDescriptor
from .measure import DEFAULT_PANELS, AtomicMeasure, IntervalMeasure, PolynomialFrame, SampledFrame

TOLERANCE_FIELDS = ("positivity_tol", "equality_tol", "invertibility_tol", "eig_tol")
_RATIONAL = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+)\s*)?$")


@dataclass(frozen=True, eq=False)
class JobConfig:
    module: ModuleDescriptor
    measure: object
    frame: object
    second_frame: object = None
    tolerances: ToleranceConfig = ToleranceConfig()
    grid_size: int = DEFAULT_PANELS

    @property
    def algebra(self) -> AlgebraDescriptor:
        return self.module.algebra


class _Ctx:
    """Carries the raw text so field errors can point at a line."""

    def __init__(self, text: str, source: str):
        self.text = text
        self.source = source

    def fail(self, path: str, msg: str):
        key = path.split(".")[-1].split("[")[0]
        line = None
        if self.text and key:
            m = re.search(r'"%s"\s*:' % re.escape(key), self.text)
            if m:
                line = self.text.count("\n", 0, m.start()) + 1
        raise ConfigError(msg, path, line)


# -- scalars --------------------------------------------------------------------

def parse_rational(value, ctx: _Ctx, path: str) -> Fraction:
    if isinstance(value, bool):
        ctx.fail(path, "expected a number or rational string, got a boolean")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            ctx.fail(path, "non-finite numbers are not allowed")
        return exact.to_fraction(value)
    if isinstance(value, str):
        m = _RATIONAL.match(value)
        if not m:
            ctx.fail(path, f"cannot parse {value!r} as a rational 'p/q'")
        p = int(m.group(1))
        q = int(m.group(2)) if m.group(2) is not None else 1
        if q == 0:
            ctx.fail(path, f"zero denominator in {value!r}")
        f = Fraction(p, q)
        if m.group(2) is not None and (f.numerator, f.denominator) != (p, q):
            ctx.fail(path, f"rational {value!r} is not reduced (expected {f})")
        return f
    ctx.fail(path, f"expected a number or rational string, got {type(value).__name__}")


def parse_scalar(value, exact_mode: bool, ctx: _Ctx, path: str):
    if isinstance(value, list):
        if len(value) != 2:
            ctx.fail(path, "a complex scalar is a [re, im] pair")
        re_, im_ = (parse_rational(v, ctx, f"{path}[{i}]") for i, v in enumerate(value))
    else:
        re_, im_ = parse_rational(value, ctx, path), Fraction(0)
    if exact_mode:
        return exact.QComplex(re_, im_)
    return complex(float(re_), float(im_))


def format_scalar(x):
    """Canonical JSON form of a scalar: rational strings when exact."""
    if isinstance(x, exact.QComplex):
        return str(x.re) if not x.im else [str(x.re), str(x.im)]
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return int(x)
    z = complex(x)
    if z.imag == 0:
        return format_float(z.real)
    return [format_float(z.real), format_float(z.imag)]


def format_float(x):
    """Shortest round-trip float; negative zero is written as 0.0, non-finite values as strings."""
    x = float(x)
    if x != x:
        return "nan"
    if x in (float("inf"), float("-inf")):
        return "inf" if x > 0 else "-inf"
    return 0.0 if x == 0 else x


def format_real(x):
    if isinstance(x, Fraction):
        return str(x)
    if x is None:
        return None
    return format_float(x)


# -- sections ----------------------------------------------------------------------

def _require(d, key, ctx, path, kind=None):
    if not isinstance(d, dict):
        ctx.fail(path, "expected an object")
    if key not in d:
        ctx.fail(f"{path}.{key}" if path else key, f"missing required field {key!r}")
    v = d[key]
    if kind is not None and (not isinstance(v, kind) or isinstance(v, bool) and kind is not bool):
        ctx.fail(f"{path}.{key}" if path else key, f"field {key!r} has the wrong type")
    return v


def _check_keys(d, allowed, ctx, path):
    for key in d:
        if key not in allowed:
            ctx.fail(f"{path}.{key}" if path else key, f"unknown field {key!r}")


def _parse_algebra(d, ctx, mode_override) -> AlgebraDescriptor:
    _check_keys(d, ("kind", "dim", "scalar_mode"), ctx, "algebra")
    kind = _require(d, "kind", ctx, "algebra", str)
    dim = _require(d, "dim", ctx, "algebra", int)
    mode = d.get("scalar_mode", "float")
    if kind not in KINDS:
        ctx.fail("algebra.kind", f"kind must be one of {KINDS}")
    if mode not in MODES:
        ctx.fail("algebra.scalar_mode", f"scalar_mode must be one of {MODES}")
    if not 1 <= dim <= 16:
        ctx.fail("algebra.dim", "dim must be between 1 and 16")
    return AlgebraDescriptor(kind, dim, mode_override or mode)


def _parse_measure(d, ctx, path="measure"):
    if not isinstance(d, dict) or len(d) != 1 or next(iter(d)) not in ("interval", "atoms"):
        ctx.fail(path, "measure must be {'interval': {...}} or {'atoms': {...}}")
    (tag, body), = d.items()
    if tag == "interval":
        _check_keys(body, ("a", "b", "weight_coeffs"), ctx, f"{path}.interval")
        a = parse_rational(_require(body, "a", ctx, f"{path}.interval"), ctx, f"{path}.interval.a")
        b = parse_rational(_require(body, "b", ctx, f"{path}.interval"), ctx, f"{path}.interval.b")
        coeffs = body.get("weight_coeffs", ["1"])
        if not isinstance(coeffs, list) or not coeffs:
            ctx.fail(f"{path}.interval.weight_coeffs", "weight_coeffs must be a nonempty list")
        w = tuple(parse_rational(c, ctx, f"{path}.interval.weight_coeffs[{i}]") for i, c in enumerate(coeffs))
        try:
            return IntervalMeasure(a, b, w)
        except CFrameError as e:
            ctx.fail(f"{path}.interval", str(e))
    _check_keys(body, ("points", "weights"), ctx, f"{path}.atoms")
    points = _require(body, "points", ctx, f"{path}.atoms", list)
    weights = _require(body, "weights", ctx, f"{path}.atoms", list)
    pts = []
    for i, p in enumerate(points):
        if isinstance(p, str) and not _RATIONAL.match(p):
            pts.append(p)
        else:
            f = parse_rational(p, ctx, f"{path}.atoms.points[{i}]")
            pts.append(int(f) if f.denominator == 1 else f)
    ws = tuple(parse_rational(w, ctx, f"{path}.atoms.weights[{i}]") for i, w in enumerate(weights))
    try:
        return AtomicMeasure(tuple(pts), ws)
    except CFrameError as e:
        ctx.fail(f"{path}.atoms", str(e))


def _parse_frame(d, module: ModuleDescriptor, measure, ctx, path):
    if not isinstance(d, dict) or len(d) != 1 or next(iter(d)) not in ("polynomial", "samples"):
        ctx.fail(path, "frame must be {'polynomial': {...}} or {'samples': {...}}")
    (tag, body), = d.items()
    n, k, ex = module.n, module.k, module.exact
    diag = module.algebra.kind == "diagonal"
    if tag == "polynomial":
        _check_keys(body, ("entries",), ctx, f"{path}.polynomial")
        entries = _require(body, "entries", ctx, f"{path}.polynomial", list)
        if len(entries) != n:
            ctx.fail(f"{path}.polynomial.entries", f"expected {n} components, got {len(entries)}")
        polys = {}
        degree = 0
        for i, comp in enumerate(entries):
            cp = f"{path}.polynomial.entries[{i}]"
            if not isinstance(comp, list) or len(comp) != k or any(not isinstance(r, list) or len(r) != k for r in comp):
                ctx.fail(cp, f"each component must be a {k}x{k} matrix of coefficient lists")
            for p in range(k):
                for q in range(k):
                    ep = f"{cp}[{p}][{q}]"
                    coeffs = comp[p][q]
                    if not isinstance(coeffs, list):
                        ctx.fail(ep, "an entry polynomial is a list of ascending coefficients")
                    vals = [parse_scalar(c, ex, ctx, f"{ep}[{t}]") for t, c in enumerate(coeffs)]
                    if diag and p != q and any(vals):
                        ctx.fail(ep, "diagonal algebra: off-diagonal entry polynomials must be zero")
                    polys[i, p, q] = vals
                    degree = max(degree, len(vals) - 1)
        shape = (n, k, k, degree + 1)
        arr = exact.exact_zeros(shape) if ex else np.zeros(shape, dtype=complex)
        for (i, p, q), vals in polys.items():
            for t, v in enumerate(vals):
                arr[i, p, q, t] = v
        try:
            return PolynomialFrame(module, measure, arr)
        except (CFrameError, TypeError) as e:
            ctx.fail(f"{path}.polynomial", str(e))

    _check_keys(body, ("grid", "weights", "values"), ctx, f"{path}.samples")
    values = _require(body, "values", ctx, f"{path}.samples", list)
    if isinstance(measure, AtomicMeasure):
        grid, weights = measure.points, measure.weights
        if "grid" in body and len(body["grid"]) != len(grid):
            ctx.fail(f"{path}.samples.grid", "sampled frames over atoms use the atoms as their grid")
    else:
        grid_raw = _require(body, "grid", ctx, f"{path}.samples", list)
        w_raw = _require(body, "weights", ctx, f"{path}.samples", list)
        grid = tuple(parse_rational(g, ctx, f"{path}.samples.grid[{i}]") for i, g in enumerate(grid_raw))
        weights = tuple(parse_rational(w, ctx, f"{path}.samples.weights[{i}]") for i, w in enumerate(w_raw))
        if any(not measure.a <= g <= measure.b for g in grid):
            ctx.fail(f"{path}.samples.grid", "grid points must lie in the interval")
    m = len(grid)
    if len(values) != m:
        ctx.fail(f"{path}.samples.values", f"expected {m} sample values, got {len(values)}")
    shape = (m, n, k, k)
    arr = exact.exact_zeros(shape) if ex else np.zeros(shape, dtype=complex)
    for r, at in enumerate(values):
        rp = f"{path}.samples.values[{r}]"
        if not isinstance(at, list) or len(at) != n:
            ctx.fail(rp, f"each sample is a list of {n} components")
        for i, comp in enumerate(at):
            if not isinstance(comp, list) or len(comp) != k or any(not isinstance(row, list) or len(row) != k for row in comp):
                ctx.fail(f"{rp}[{i}]", f"each component must be a {k}x{k} matrix")
            for p in range(k):
                for q in range(k):
                    v = parse_scalar(comp[p][q], ex, ctx, f"{rp}[{i}][{p}][{q}]")
                    if diag and p != q and v:
                        ctx.fail(f"{rp}[{i}][{p}][{q}]", "diagonal algebra: off-diagonal entries must be zero")
                    arr[r, i, p, q] = v
    try:
        return SampledFrame(module, measure, grid, weights, arr)
    except CFrameError as e:
        ctx.fail(f"{path}.samples", str(e))


def _parse_tolerances(d, ctx) -> ToleranceConfig:
    if not isinstance(d, dict):
        ctx.fail("tolerances", "expected an object")
    _check_keys(d, TOLERANCE_FIELDS, ctx, "tolerances")
    values = {}
    for key, v in d.items():
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not v >= 0:
            ctx.fail(f"tolerances.{key}", "tolerances are nonnegative numbers")
        values[key] = float(v)
    return ToleranceConfig(**values)


def config_from_dict(data, text: str = "", source: str = "<config>", mode_override=None) -> JobConfig:
    """Validate a decoded JSON object; ``mode_override`` forces a scalar mode."""
    ctx = _Ctx(text, source)
    if not isinstance(data, dict):
        ctx.fail("", "top level must be a JSON object")
    _check_keys(data, ("algebra", "module_rank", "measure", "frame", "second_frame", "tolerances", "grid_size"), ctx, "")
    alg = _parse_algebra(_require(data, "algebra", ctx, "", dict), ctx, mode_override)
    rank = _require(data, "module_rank", ctx, "", int)
    if not 1 <= rank <= 64:
        ctx.fail("module_rank", "module_rank must be between 1 and 64")
    module = ModuleDescriptor(alg, rank)
    measure = _parse_measure(_require(data, "measure", ctx, ""), ctx)
    frame = _parse_frame(_require(data, "frame", ctx, ""), module, measure, ctx, "frame")
    second = None
    if data.get("second_frame") is not None:
        second = _parse_frame(data["second_frame"], module, measure, ctx, "second_frame")
    tol = _parse_tolerances(data["tolerances"], ctx) if "tolerances" in data else ToleranceConfig()
    grid = data.get("grid_size", DEFAULT_PANELS)
    if isinstance(grid, bool) or not isinstance(grid, int) or grid < 2:
        ctx.fail("grid_size", "grid_size must be an integer >= 2")
    return JobConfig(module, measure, frame, second, tol, grid)


def parse_config(text: str, source: str = "<config>", mode_override=None) -> JobConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON: {e.msg} (column {e.colno})", source, e.lineno) from None
    return config_from_dict(data, text, source, mode_override)


def load_config(path: str, mode_override=None) -> JobConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read config: {e.strerror}", path) from None
    return parse_config(text, path, mode_override)


# -- serialization ---------------------------------------------------------------------

def measure_to_dict(measure) -> dict:
    if isinstance(measure, IntervalMeasure):
        return {"interval": {"a": str(measure.a), "b": str(measure.b), "weight_coeffs": [str(c) for c in measure.weight]}}
    points = [p if isinstance(p, str) else (int(p) if Fraction(p).denominator == 1 else str(Fraction(p))) for p in measure.points]
    return {"atoms": {"points": points, "weights": [str(Fraction(w)) for w in measure.weights]}}


def _trim(coeffs: list) -> list:
    while coeffs and (coeffs[-1] == "0" or coeffs[-1] == 0.0):
        coeffs.pop()
    return coeffs


def frame_to_dict(F) -> dict:
    n, k = F.module.n, F.module.k
    if isinstance(F, PolynomialFrame):
        entries = [
            [[_trim([format_scalar(c) for c in F.coeffs[i, p, q]]) for q in range(k)] for p in range(k)]
            for i in range(n)
        ]
        return {"polynomial": {"entries": entries}}
    values = [
        [[[format_scalar(F.values[r, i, p, q]) for q in range(k)] for p in range(k)] for i in range(n)]
        for r in range(len(F.points))
    ]
    body = {}
    if not isinstance(F.measure, AtomicMeasure):
        body["grid"] = [format_real(exact.to_fraction(g)) for g in F.points]
        body["weights"] = [format_real(exact.to_fraction(w)) for w in F.weights]
    body["values"] = values
    return {"samples": body}


def config_to_dict(cfg: JobConfig) -> dict:
    alg = cfg.algebra
    out = {
        "algebra": {"kind": alg.kind, "dim": alg.dim, "scalar_mode": alg.scalar_mode},
        "module_rank": cfg.module.n,
        "measure": measure_to_dict(cfg.measure),
        "frame": frame_to_dict(cfg.frame),
    }
    if cfg.second_frame is not None:
        out["second_frame"] = frame_to_dict(cfg.second_frame)
    out["tolerances"] = {name: getattr(cfg.tolerances, name) for name in TOLERANCE_FIELDS}
    out["grid_size"] = cfg.grid_size
    return out


def canonical_json(data) -> str:
    return json.dumps(data, ensure_ascii=False, separators=(",", ":"), allow_nan=False)


def config_digest(cfg: JobConfig) -> str:
    return "sha256:" + hashlib.sha256(canonical_json(config_to_dict(cfg)).encode("utf-8")).hexdigest()


def with_overrides(cfg: JobConfig, grid_size=None, equality_tol=None) -> JobConfig:
    if grid_size is not None:
        cfg = replace(cfg, grid_size=grid_size)
    if equality_tol is not None:
        cfg = replace(cfg, tolerances=replace(cfg.tolerances, equality_tol=equality_tol))
    return cfg


# -- presets ------------------------------------------------------------------------------

PRESETS = {
    "paper-2.8": {
        "algebra": {"kind": "diagonal", "dim": 2, "scalar_mode": "float"},
        "module_rank": 1,
        "measure": {"interval": {"a": "0", "b": "1", "weight_coeffs": ["1"]}},
        "frame": {"polynomial": {"entries": [[[["0", "2"], []], [[], ["-1", "1"]]]]}},
    },
    "paper-3.4": {
        "algebra": {"kind": "diagonal", "dim": 2, "scalar_mode": "float"},
        "module_rank": 1,
        "measure": {"interval": {"a": "0", "b": "1", "weight_coeffs": ["1"]}},
        "frame": {"polynomial": {"entries": [[[["0", "2"], []], [[], ["-1", "1"]]]]}},
        "second_frame": {"polynomial": {"entries": [[[["0", "3/2"], []], [[], ["-7/3", "1"]]]]}},
    },
}


def preset(name: str, mode_override=None) -> JobConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown example {name!r}; available: {', '.join(sorted(PRESETS))}", "--example")
    return config_from_dict(copy.deepcopy(PRESETS[name]), source=f"example:{name}", mode_override=mode_override)
