"""Convergence studies: sweep grid size and FD step, fit rates, judge defects.

An experiment is described by a JSON document (see :class:`ExperimentSpec`).
Every requested check is evaluated on every ``(N, h)`` cell for every trial;
trials draw seeded band-limited random normal fields that are the same
continuous fields at every resolution. Verdicts use the finest cell.
"""

from __future__ import annotations

import copy
import csv
import io
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import ambient as _ambient
from . import immersion as _imm
from . import knot as _knot
from . import vcp as _vcp
from .errors import ConfigError

SCHEMA_VERSION = 1
EPS = np.finfo(float).eps
FLOOR_FACTOR = 100.0
DEFAULT_N = 128
DEFAULT_H = _knot.DEFAULT_STEP
DEFAULT_SEED = 0
THREADS_ENV = "VCPKNOT_THREADS"

PASS = "PASS"
FAIL = "FAIL"
FAIL_AS_EXPECTED = "FAIL-AS-EXPECTED"
UNEXPECTED_PASS = "UNEXPECTED-PASS"
ERROR = "ERROR"
GOOD_VERDICTS = (PASS, FAIL_AS_EXPECTED)


# --------------------------------------------------------------------------
# checks


@dataclass(frozen=True)
class Trial:
    """Everything a check needs for one trial in one cell."""

    imm: object
    u: object
    v: object
    w: object
    h: float
    richardson: bool
    sign: int
    seed: int


@dataclass(frozen=True)
class Check:
    """A named defect with its tolerance rule.

    ``tolerance`` is absolute. ``fd`` marks finite-difference estimators, whose
    rounding floor scales like ``1/h``. ``parallel_only`` checks are expected
    to fail for a non-parallel (control) VCP field.
    """

    name: str
    tolerance: float
    evaluate: object
    fd: bool = False
    parallel_only: bool = False
    description: str = ""

    def floor(self, h):
        return FLOOR_FACTOR * EPS * (1.0 / h if self.fd else 1.0)


def _axioms(t):
    return _vcp.verify_vcp_axioms(t.imm.space.vcp, trials=1000, seed=t.seed).max_violation


def _j2(t):
    J = lambda x: _knot.apply_J(x, t.sign)
    return (J(J(t.u)) + t.u).max_norm()


def _compat(t):
    J = lambda x: _knot.apply_J(x, t.sign)
    return abs(_knot.l2_inner(J(t.u), J(t.v)) - _knot.l2_inner(t.u, t.v))


def _sympl(t):
    w_uv = _knot.omega2(t.u, t.v, t.sign)
    w_vu = _knot.omega2(t.v, t.u, t.sign)
    return max(abs(w_uv - _knot.l2_inner(_knot.apply_J(t.u, t.sign), t.v)), abs(w_uv + w_vu))


def _lemma_normal(t):
    Y = _knot.KnotVectorFieldScheme.extend(t.v, _knot.ExtensionRule.EXPONENTIAL)
    return _knot.covariant_derivative("perp", t.u, Y, t.h, t.richardson).max_norm()


def _torsion(kind):
    return lambda t: _knot.torsion(kind, t.u, t.v, t.h, t.richardson).max_norm()


def _metric_lc(t):
    return abs(_knot.metric_compatibility_defect("levi_civita", t.u, t.v, t.w, t.h, t.richardson))


def _metric_perp(t):
    defect = _knot.metric_compatibility_defect("perp", t.u, t.v, t.w, t.h, t.richardson)
    return abs(defect - _knot.volume_variation_term(t.u, t.v, t.w))


def _nabla_j(kind):
    def run(t):
        X = _knot.KnotVectorFieldScheme.extend(t.v, sign=t.sign)
        return _knot.nabla_J_defect(kind, t.u, X, t.h, t.richardson).max_norm()

    return run


def _nijenhuis(t):
    return _knot.nijenhuis(t.u, t.v, t.h, t.richardson, t.sign).max_norm()


def _domega(t):
    return abs(_knot.d_omega2_defect(t.u, t.v, t.w, t.h, t.richardson, t.sign))


CHECKS = {
    c.name: c
    for c in [
        Check("axioms", 1e-12, _axioms, description="VCP axioms on basis and random tuples"),
        Check("J2", 1e-10, _j2, description="J J u + u"),
        Check("compat", 1e-10, _compat, description="<Ju, Jv> - <u, v>"),
        Check("sympl", 1e-10, _sympl, description="omega2(u, v) - <Ju, v> and antisymmetry"),
        Check("lemma_normal", 1e-6, _lemma_normal, fd=True, description="perp derivative of an exponential extension"),
        Check("torsion_perp", 1e-6, _torsion("perp"), fd=True, description="torsion of the normal connection"),
        Check("torsion_lc", 1e-6, _torsion("levi_civita"), fd=True, description="torsion of the Levi-Civita connection"),
        Check("metric_lc", 1e-6, _metric_lc, fd=True, description="metric defect of the Levi-Civita connection"),
        Check("metric_perp", 1e-6, _metric_perp, fd=True, description="perp metric defect minus the volume variation term"),
        Check("nablaJ_perp", 1e-6, _nabla_j("perp"), fd=True, parallel_only=True, description="(nabla^perp_u J) v"),
        Check("nablaJ_lc", 1e-6, _nabla_j("levi_civita"), fd=True, parallel_only=True, description="(nabla^LC_u J) v"),
        Check("nijenhuis", 1e-6, _nijenhuis, fd=True, parallel_only=True, description="Nijenhuis tensor N_J(u, v)"),
        Check("domega", 1e-5, _domega, fd=True, parallel_only=True, description="d omega2(u, v, w)"),
    ]
}


# --------------------------------------------------------------------------
# experiment description


def _strictly(values, increasing):
    pairs = zip(values, values[1:])
    return all((a < b) if increasing else (a > b) for a, b in pairs)


@dataclass(frozen=True)
class ExperimentSpec:
    """Validated experiment configuration.

    JSON layout::

        {"name": "g2_loop",
         "ambient": {"m": 7, "topology": "euclidean",
                     "vcp": {"kind": "g2", "parallel": true, "twist_rate": 0.5}},
         "immersion": {"preset": "circle", "params": {}},
         "sweep": {"N": [32, 64, 128], "h": [1e-3, 3e-4, 1e-4], "seed": 0,
                   "trials": 5, "richardson": true, "order": 8, "field_modes": 2},
         "checks": ["nijenhuis", "domega"],
         "sign": 1}
    """

    name: str
    ambient: dict
    immersion: dict
    N: tuple
    h: tuple
    seed: int = DEFAULT_SEED
    trials: int = 1
    richardson: bool = True
    order: int = _imm.DEFAULT_ORDER
    field_modes: int = 2
    checks: tuple = ()
    sign: int = 1

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("<root>", "expected a JSON object")
        amb = data.get("ambient")
        if not isinstance(amb, dict):
            raise ConfigError("ambient", "required object")
        imm = data.get("immersion")
        if not isinstance(imm, dict) or not ("preset" in imm or "file" in imm):
            raise ConfigError("immersion", "required object with 'preset' or 'file'")
        if "preset" in imm and imm["preset"] not in _imm.PRESETS:
            raise ConfigError("immersion.preset", f"unknown preset {imm['preset']!r}; choose from {sorted(_imm.PRESETS)}")
        if "file" in imm and not os.path.isfile(str(imm["file"])):
            raise ConfigError("immersion.file", f"file not found: {imm['file']}")
        if not isinstance(imm.get("params", {}), dict):
            raise ConfigError("immersion.params", "expected an object")
        sweep = data.get("sweep", {})
        if not isinstance(sweep, dict):
            raise ConfigError("sweep", "expected an object")

        Ns = sweep.get("N", [DEFAULT_N])
        if not isinstance(Ns, list) or not Ns or not all(isinstance(n, int) and not isinstance(n, bool) and n > 0 for n in Ns):
            raise ConfigError("sweep.N", "non-empty list of positive integers")
        if not _strictly(Ns, increasing=True):
            raise ConfigError("sweep.N", "values must be strictly increasing")
        hs = sweep.get("h", [DEFAULT_H])
        if not isinstance(hs, list) or not hs or not all(isinstance(x, (int, float)) and not isinstance(x, bool) and x > 0 for x in hs):
            raise ConfigError("sweep.h", "non-empty list of positive reals")
        if not _strictly(hs, increasing=False):
            raise ConfigError("sweep.h", "values must be strictly decreasing")

        def integer(key, default, low):
            value = sweep.get(key, default)
            if not isinstance(value, int) or isinstance(value, bool) or value < low:
                raise ConfigError(f"sweep.{key}", f"integer >= {low}")
            return value

        seed = integer("seed", DEFAULT_SEED, 0)
        trials = integer("trials", 1, 1)
        order = sweep.get("order", _imm.DEFAULT_ORDER)
        if order not in _imm.FIRST_WEIGHTS:
            raise ConfigError("sweep.order", f"one of {sorted(_imm.FIRST_WEIGHTS)}")
        modes = integer("field_modes", 2, 0)
        if modes > min(Ns) / 4:
            raise ConfigError("sweep.field_modes", f"band limit {modes} exceeds N/4 for N = {min(Ns)}")
        richardson = sweep.get("richardson", True)
        if not isinstance(richardson, bool):
            raise ConfigError("sweep.richardson", "boolean")

        checks = data.get("checks", list(CHECKS))
        if not isinstance(checks, list) or not checks:
            raise ConfigError("checks", "non-empty list of check names")
        for i, name in enumerate(checks):
            if name not in CHECKS:
                raise ConfigError(f"checks[{i}]", f"unknown check {name!r}; choose from {sorted(CHECKS)}")
        if len(set(checks)) != len(checks):
            raise ConfigError("checks", "duplicate check names")
        sign = data.get("sign", 1)
        if sign not in (1, -1):
            raise ConfigError("sign", "must be 1 or -1")

        spec = cls(
            name=str(data.get("name", "experiment")),
            ambient=copy.deepcopy(amb),
            immersion=copy.deepcopy(imm),
            N=tuple(Ns),
            h=tuple(float(x) for x in hs),
            seed=seed,
            trials=trials,
            richardson=richardson,
            order=order,
            field_modes=modes,
            checks=tuple(checks),
            sign=sign,
        )
        spec.build_space()  # surfaces ambient errors before any computation
        return spec

    @classmethod
    def from_json(cls, text):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("<root>", f"invalid JSON: {exc}") from None
        return cls.from_dict(data)

    @classmethod
    def load(cls, path):
        """Read a config file; a relative ``immersion.file`` is resolved against its directory."""
        with open(path) as fh:
            text = fh.read()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("<root>", f"invalid JSON: {exc}") from None
        imm = data.get("immersion") if isinstance(data, dict) else None
        if isinstance(imm, dict) and isinstance(imm.get("file"), str) and not os.path.isabs(imm["file"]):
            imm["file"] = os.path.join(os.path.dirname(os.path.abspath(path)), imm["file"])
        return cls.from_dict(data)

    def to_dict(self):
        return {
            "name": self.name,
            "ambient": self.ambient,
            "immersion": self.immersion,
            "sweep": {
                "N": list(self.N),
                "h": list(self.h),
                "seed": self.seed,
                "trials": self.trials,
                "richardson": self.richardson,
                "order": self.order,
                "field_modes": self.field_modes,
            },
            "checks": list(self.checks),
            "sign": self.sign,
        }

    def build_space(self):
        return _ambient.from_config(self.ambient)

    @property
    def control(self):
        """True when the ambient VCP field is the non-parallel control."""
        return not self.build_space().field.parallel


# --------------------------------------------------------------------------
# running


def random_tangent(imm, rng, modes):
    """Seeded band-limited ambient field, normal-projected and scaled to unit max-norm."""
    raw = _imm.fourier_field(imm.grid, imm.m, modes, rng)
    t = _knot.KnotTangent.from_ambient(imm, raw)
    norm = t.max_norm()
    return t * (1.0 / norm) if norm > 0 else t


def trial_fields(imm, seed, trial, modes):
    # one generator per (seed, trial): the same continuous fields at every N
    rng = np.random.default_rng([seed, trial])
    return tuple(random_tangent(imm, rng, modes) for _ in range(3))


@dataclass
class CellResult:
    index: int
    N: int
    h: float
    defects: dict = field(default_factory=dict)  # check -> list of per-trial defects
    errors: dict = field(default_factory=dict)  # check -> message
    error: str | None = None
    wall_time: float = 0.0


def _run_cell(spec, space, index, N, h):
    cell = CellResult(index, N, h)
    start = time.perf_counter()
    try:
        imm = _imm.from_config(space, spec.immersion, N, spec.order)
        fields = [trial_fields(imm, spec.seed, k, spec.field_modes) for k in range(spec.trials)]
    except Exception as exc:  # recorded per cell
        cell.error = f"{type(exc).__name__}: {exc}"
        cell.wall_time = time.perf_counter() - start
        return cell
    for name in spec.checks:
        check = CHECKS[name]
        values = []
        try:
            for k, (u, v, w) in enumerate(fields):
                values.append(float(check.evaluate(Trial(imm, u, v, w, h, spec.richardson, spec.sign, spec.seed + k))))
        except Exception as exc:  # recorded per check and cell
            cell.errors[name] = f"{type(exc).__name__}: {exc}"
        cell.defects[name] = values
    cell.wall_time = time.perf_counter() - start
    return cell


def thread_count():
    value = os.environ.get(THREADS_ENV)
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            raise ConfigError(THREADS_ENV, f"expected a positive integer, got {value!r}") from None
    return min(4, os.cpu_count() or 1)


class InsufficientCells(ValueError):
    pass


def fit_rate(cells, floor=0.0):
    """Least-squares slope of ``log(defect)`` against ``log(x)``.

    ``cells`` are ``(x, defect)`` pairs, ``x`` a resolution or a step. Cells
    whose defect is non-positive or at most ``floor`` are excluded. At least
    three usable cells are required.
    """
    usable = [(float(x), float(d)) for x, d in cells if d > 0 and d > floor and np.isfinite(d)]
    if len(usable) < 3:
        raise InsufficientCells(f"{len(usable)} usable cells, need at least 3")
    x = np.log([c[0] for c in usable])
    y = np.log([c[1] for c in usable])
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def _rate(cells, floor):
    """Rate entry for the report: a number, ``"floor"`` or ``None`` with a note."""
    if len(cells) < 3:
        return None, f"insufficient cells for rate fit ({len(cells)} cells, need at least 3)"
    if all(d <= floor for _, d in cells):
        return "floor", None
    try:
        return round(fit_rate(cells, floor), 12), None
    except InsufficientCells as exc:
        return None, f"insufficient cells for rate fit ({exc})"


@dataclass
class CheckSummary:
    name: str
    tolerance: float
    control: bool
    cells: list
    finest_defect: float | None
    rate_h: object
    rate_N: object
    monotone: bool
    verdict: str
    notes: list


@dataclass
class VerificationReport:
    spec: ExperimentSpec
    checks: dict
    cells: list
    wall_time: float = 0.0

    @property
    def aborted(self):
        return any(c.error or c.errors for c in self.cells)

    @property
    def exit_code(self):
        if self.aborted:
            return 3
        return 0 if all(s.verdict in GOOD_VERDICTS for s in self.checks.values()) else 1

    def to_dict(self, include_timing=True):
        out = {
            "schema_version": SCHEMA_VERSION,
            "defaults": {"h": DEFAULT_H, "N": DEFAULT_N, "seed": DEFAULT_SEED},
            "spec": self.spec.to_dict(),
            "control": self.spec.control,
            "checks": {
                name: {
                    "tolerance": s.tolerance,
                    "control": s.control,
                    "cells": s.cells,
                    "finest_defect": s.finest_defect,
                    "rate_h": s.rate_h,
                    "rate_N": s.rate_N,
                    "monotone": s.monotone,
                    "verdict": s.verdict,
                    "notes": s.notes,
                }
                for name, s in self.checks.items()
            },
            "cell_errors": [
                {"N": c.N, "h": c.h, "error": c.error} for c in self.cells if c.error
            ],
        }
        if include_timing:
            out["timing"] = {
                "total": self.wall_time,
                "cells": [{"N": c.N, "h": c.h, "wall_time": c.wall_time} for c in self.cells],
            }
        return out

    def to_json(self, include_timing=True):
        return json.dumps(self.to_dict(include_timing), sort_keys=True, indent=2)

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["check", "N", "h", "trial", "defect", "tolerance", "error"])
        for name in self.spec.checks:
            for c in self.cells:
                error = c.error or c.errors.get(name, "")
                values = c.defects.get(name, [])
                if not values:
                    writer.writerow([name, c.N, repr(c.h), "", "", CHECKS[name].tolerance, error])
                for k, d in enumerate(values):
                    writer.writerow([name, c.N, repr(c.h), k, repr(d), CHECKS[name].tolerance, error])
        return buf.getvalue()

    def write(self, out_dir):
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "report.json"), "w") as fh:
            fh.write(self.to_json())
        with open(os.path.join(out_dir, "report.csv"), "w") as fh:
            fh.write(self.to_csv())


def _summarize(spec, name, cells):
    check = CHECKS[name]
    control = spec.control and check.parallel_only
    entries, notes = [], []
    table = {}
    for c in cells:
        values = c.defects.get(name, [])
        error = c.error or c.errors.get(name)
        entry = {"N": c.N, "h": c.h, "error": error}
        if values and not error:
            entry["max_defect"] = max(values)
            entry["mean_defect"] = math.fsum(values) / len(values)
            entry["at_floor"] = bool(entry["max_defect"] <= check.floor(c.h))
            table[(c.N, c.h)] = entry["max_defect"]
        entries.append(entry)

    errored = any(e["error"] for e in entries)
    Nf, hf = spec.N[-1], spec.h[-1]
    finest = table.get((Nf, hf))

    rate_h, note = _rate([(h, table[(Nf, h)]) for h in spec.h if (Nf, h) in table], check.floor(hf))
    if note:
        notes.append(f"h sweep: {note}")
    rate_N, note = _rate([(2 * np.pi / N, table[(N, hf)]) for N in spec.N if (N, hf) in table], check.floor(hf))
    if note:
        notes.append(f"N sweep: {note}")

    # finest pre-floor cell against the coarsest cell
    ordered = [(N, h) for N in spec.N for h in spec.h if (N, h) in table]
    monotone = True
    if ordered:
        coarse = table[ordered[0]]
        pre_floor = [k for k in ordered if table[k] > check.floor(k[1])]
        if pre_floor:
            monotone = bool(table[pre_floor[-1]] <= coarse)

    if errored or finest is None:
        verdict = ERROR
    elif finest <= check.tolerance:
        verdict = UNEXPECTED_PASS if control else PASS
    else:
        verdict = FAIL_AS_EXPECTED if control else FAIL
    return CheckSummary(name, check.tolerance, control, entries, finest, rate_h, rate_N, monotone, verdict, notes)


def run_experiment(spec, threads=None):
    """Run every check on every sweep cell; cells may run concurrently."""
    space = spec.build_space()
    jobs = [(N, h) for N in spec.N for h in spec.h]
    threads = thread_count() if threads is None else max(1, int(threads))
    start = time.perf_counter()
    if threads == 1 or len(jobs) == 1:
        cells = [_run_cell(spec, space, i, N, h) for i, (N, h) in enumerate(jobs)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(_run_cell, spec, space, i, N, h) for i, (N, h) in enumerate(jobs)]
            cells = [f.result() for f in futures]
    cells.sort(key=lambda c: c.index)
    checks = {name: _summarize(spec, name, cells) for name in spec.checks}
    return VerificationReport(spec, checks, cells, time.perf_counter() - start)
