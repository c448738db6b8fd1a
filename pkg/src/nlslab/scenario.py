"""Scenario files: parsing, execution and report writing.

A scenario is flat ``key = value`` text with dotted sections::

    name = sy-invariants
    source.catalog = satsuma-yajima
    grid.L = 20
    grid.N = 2048
    checks = invariants, virial-identity, classify
    expect.invariants.m = 16 +- 1e-8
    expect.verdict.status = NotPrecluded

``#`` starts a comment.  ``expect.<path>`` compares a field of the report
(dotted path, list indices allowed) against ``v +- tol``, ``< v``, ``<= v``,
``> v``, ``>= v``, a bare number (exact) or a word (string equality).
"""

from __future__ import annotations

import csv
import io
import math
import os
import platform
import re
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import classifier as cl
from . import functionals as fn
from . import virial_identities as vi
from .catalog import ExactSolution, default_grid, eval_exact, parse_solution_id
from .errors import BlowUpDetected, ConvergenceError, IdentityResidualError, NlsLabError, ParameterError
from .ground_state import ThresholdCache, critical_omega, ground_state_imag_time, thresholds_from
from .grid import BackgroundKind, Field1D, Grid1D
from .integrator import EvolveConfig, Scheme, evolve, measure_virial, virial_rhs
from .models import Family, ModelSpec

CHECKS = ("invariants", "virial-identity", "appendix", "classify", "ground-state", "pohozaev")

SCHEMA = {
    "name": "str",
    "model.family": "str",
    "model.epsilon": "int",
    "model.p": "float",
    "model.n": "int",
    "model.mu": "float",
    "model.lambda1": "float",
    "model.lambda2": "float",
    "source.catalog": "str",
    "source.t": "float",
    "source.shift": "float",
    "source.shape": "str",
    "source.amplitude": "float",
    "source.width": "float",
    "source.phase": "float",
    "source.background": "str",
    "source.seed": "int",
    "source.file": "str",
    "grid.L": "float",
    "grid.N": "int",
    "evolve.dt": "float",
    "evolve.t_end": "float",
    "evolve.stride": "int",
    "evolve.scheme": "str",
    "evolve.expect_blowup": "bool",
    "evolve.log_floor": "float",
    "checks": "list",
    "check.virial_identity.tol": "float",
    "check.virial_identity.times": "floats",
    "check.virial_identity.dt": "float",
    "check.appendix.tol": "float",
    "check.appendix.times": "floats",
    "check.ground_state.p": "float",
    "check.ground_state.n": "int",
    "check.ground_state.omega": "float",
    "check.ground_state.tol": "float",
    "check.pohozaev.tol": "float",
    "classify.tau0": "float",
    "classify.eps_small": "float",
    "classify.decay_certificate": "bool",
    "classify.parity": "str",
    "classify.thresholds": "str",
}

_KEY = re.compile(r"[A-Za-z_][A-Za-z0-9_.\-]*")
_BOOLS = {"true": True, "yes": True, "on": True, "1": True, "false": False, "no": False, "off": False, "0": False}


class ScenarioError(NlsLabError):
    """Malformed or invalid scenario; maps to exit code 2."""

    def __init__(self, message: str, line: int = 0, col: int = 0, path: str = "<scenario>"):
        super().__init__(message)
        self.message, self.line, self.col, self.path = message, line, col, path

    def __str__(self):
        return f"{self.path}:{self.line}:{self.col}: {self.message}"


@dataclass(frozen=True)
class Entry:
    key: str
    raw: str
    value: object
    line: int
    col: int


@dataclass(frozen=True)
class Expectation:
    path: str
    op: str
    value: object
    tol: float = 0.0

    def check(self, actual) -> bool:
        if self.op == "str":
            return str(actual) == self.value
        if isinstance(actual, bool) or not isinstance(actual, (int, float)):
            return False
        a = float(actual)
        if not math.isfinite(a):
            return False
        return {
            "approx": lambda: abs(a - self.value) <= self.tol,
            "<": lambda: a < self.value,
            "<=": lambda: a <= self.value,
            ">": lambda: a > self.value,
            ">=": lambda: a >= self.value,
        }[self.op]()

    def describe(self) -> str:
        if self.op == "approx":
            return f"{self.value:.17g} +- {self.tol:g}"
        if self.op == "str":
            return self.value
        return f"{self.op} {self.value:.17g}"


def _parse_expectation(raw: str) -> Expectation:
    s = raw.strip()
    for op in ("<=", ">=", "<", ">"):
        if s.startswith(op):
            return Expectation("", op, float(s[len(op):]))
    if "+-" in s:
        v, t = s.split("+-", 1)
        return Expectation("", "approx", float(v), float(t))
    try:
        return Expectation("", "approx", float(s), 0.0)
    except ValueError:
        return Expectation("", "str", s)


def _convert(kind: str, raw: str):
    if kind == "str":
        if not raw:
            raise ValueError("empty value")
        return raw
    if kind == "int":
        return int(raw)
    if kind == "float":
        v = float(raw)
        if not math.isfinite(v):
            raise ValueError("not finite")
        return v
    if kind == "bool":
        if raw.lower() not in _BOOLS:
            raise ValueError(f"expected true/false, got {raw!r}")
        return _BOOLS[raw.lower()]
    if kind == "list":
        return [s.strip() for s in raw.split(",") if s.strip()]
    if kind == "floats":
        return [float(s) for s in raw.split(",") if s.strip()]
    raise AssertionError(kind)


def parse_text(text: str, path: str = "<scenario>") -> dict[str, Entry]:
    entries: dict[str, Entry] = {}
    for ln, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0]
        if not body.strip():
            continue
        lead = len(body) - len(body.lstrip())
        if "=" not in body:
            raise ScenarioError("expected 'key = value'", ln, lead + 1, path)
        key_part, value_part = body.split("=", 1)
        key = key_part.strip()
        if not _KEY.fullmatch(key):
            raise ScenarioError(f"malformed key {key!r}", ln, lead + 1, path)
        raw = value_part.strip()
        vcol = len(key_part) + 2 + (len(value_part) - len(value_part.lstrip()))
        if key in entries:
            raise ScenarioError(f"duplicate key {key!r} (first set on line {entries[key].line})", ln, lead + 1, path)
        if key.startswith("expect."):
            try:
                exp = _parse_expectation(raw)
            except ValueError as exc:
                raise ScenarioError(f"bad expectation for {key}: {exc}", ln, vcol, path) from None
            value = Expectation(key[len("expect."):], exp.op, exp.value, exp.tol)
        elif key in SCHEMA:
            try:
                value = _convert(SCHEMA[key], raw)
            except ValueError as exc:
                raise ScenarioError(f"bad value for {key}: {exc}", ln, vcol, path) from None
        else:
            raise ScenarioError(f"unknown key {key!r}", ln, lead + 1, path)
        entries[key] = Entry(key, raw, value, ln, vcol)
    return entries


# -- building -----------------------------------------------------------------


@dataclass
class Scenario:
    name: str
    path: str
    entries: dict
    model: ModelSpec
    grid: Grid1D
    field0: Field1D
    solution: ExactSolution | None
    evolve: EvolveConfig | None
    expect_blowup: bool
    checks: list
    expectations: list = field(default_factory=list)

    def get(self, key, default=None):
        e = self.entries.get(key)
        return default if e is None else e.value


def _fail(entries, key, msg, path):
    e = entries.get(key)
    if e is None:
        return ScenarioError(msg, 0, 0, path)
    return ScenarioError(msg, e.line, e.col, path)


def _initial_field(entries, grid: Grid1D, model: ModelSpec, base: Path, path: str) -> Field1D:
    def val(k, d):
        return entries[k].value if k in entries else d

    if "source.file" in entries:
        fp = base / entries["source.file"].value
        try:
            data = np.loadtxt(fp, delimiter=",", skiprows=1, ndmin=2)
        except OSError as exc:
            raise _fail(entries, "source.file", f"cannot read {fp}: {exc.strerror}", path) from None
        if data.shape != (grid.points, 3) or np.abs(data[:, 0] - grid.x).max() > 1e-9 * max(1.0, grid.length):
            raise _fail(entries, "source.file", "file must hold x,re,im on the scenario grid", path)
        bg = BackgroundKind.STOKES if model.family is Family.GROSS_PITAEVSKII else BackgroundKind.ZERO
        frame = "gp" if bg is BackgroundKind.STOKES else "lab"
        return Field1D(grid, data[:, 1] + 1j * data[:, 2], bg, val("source.t", 0.0), frame)
    shape = val("source.shape", None)
    if shape is None:
        raise ScenarioError("no source: set source.catalog, source.shape or source.file", 0, 0, path)
    bg_name = val("source.background", "stokes" if model.family is Family.GROSS_PITAEVSKII else "zero")
    if bg_name not in ("zero", "stokes"):
        raise _fail(entries, "source.background", "source.background must be zero or stokes", path)
    bg = BackgroundKind.STOKES if bg_name == "stokes" else BackgroundKind.ZERO
    amp, width = val("source.amplitude", 1.0), val("source.width", 1.0)
    shift, k0 = val("source.shift", 0.0), val("source.phase", 0.0)
    if width <= 0:
        raise _fail(entries, "source.width", "width must be positive", path)
    y = (grid.x - shift) / width
    if shape == "gaussian":
        w = amp * np.exp(-(y**2)) * np.exp(1j * k0 * (grid.x - shift))
    elif shape == "sech":
        w = amp / np.cosh(y) * np.exp(1j * k0 * (grid.x - shift))
    elif shape == "random":
        w = vi.random_field(grid, val("source.seed", 0), amp, width=width).values
        if bg is BackgroundKind.STOKES:
            w = w - 1.0
    else:
        raise _fail(entries, "source.shape", f"unknown shape {shape!r} (gaussian, sech, random)", path)
    t0 = val("source.t", 0.0)
    if bg is BackgroundKind.STOKES:
        return Field1D(grid, 1.0 + w, bg, t0, "gp")
    return Field1D(grid, w, bg, t0)


def build(entries: dict, path: str = "<scenario>", base: Path | None = None) -> Scenario:
    base = base or Path(".")
    name = entries["name"].value if "name" in entries else Path(path).stem
    sol = None
    if "source.catalog" in entries:
        if "source.shape" in entries or "source.file" in entries:
            raise _fail(entries, "source.catalog", "give exactly one of source.catalog, source.shape, source.file",
                        path)
        try:
            sol = parse_solution_id(entries["source.catalog"].value)
        except ParameterError as exc:
            raise _fail(entries, "source.catalog", str(exc), path) from None
    elif "source.shape" in entries and "source.file" in entries:
        raise _fail(entries, "source.file", "give exactly one of source.catalog, source.shape, source.file", path)

    try:
        if "model.family" in entries:
            kw = {k.split(".", 1)[1]: e.value for k, e in entries.items() if k.startswith("model.")}
            model = ModelSpec(**kw)
        elif sol is not None:
            model = sol.gp_model if sol.background is BackgroundKind.STOKES else sol.model
        else:
            raise ScenarioError("model.family is required unless the source is a catalog solution", 0, 0, path)
    except ParameterError as exc:
        key = next((k for k in entries if k.startswith("model.")), "model.family")
        raise _fail(entries, key, str(exc), path) from None

    if "grid.L" in entries or "grid.N" in entries:
        if "grid.L" not in entries or "grid.N" not in entries:
            raise _fail(entries, "grid.L" if "grid.L" in entries else "grid.N", "set both grid.L and grid.N", path)
        try:
            grid = Grid1D(entries["grid.L"].value, entries["grid.N"].value)
        except ParameterError as exc:
            bad = "grid.N" if "points" in str(exc) else "grid.L"
            raise _fail(entries, bad, str(exc), path) from None
    elif sol is not None:
        grid = default_grid(sol)
    else:
        raise ScenarioError("grid.L and grid.N are required for non-catalog sources", 0, 0, path)

    try:
        if sol is not None:
            f0 = eval_exact(sol, entries["source.t"].value if "source.t" in entries else 0.0, grid)
            if f0.background is BackgroundKind.STOKES and model.family is Family.GROSS_PITAEVSKII:
                f0 = f0.to_gp_frame()
        else:
            f0 = _initial_field(entries, grid, model, base, path)
    except ScenarioError:
        raise
    except NlsLabError as exc:
        raise _fail(entries, "grid.L" if "grid.L" in entries else "source.catalog",
                    f"source does not fit the grid: {exc}", path) from None

    cfg = None
    if "evolve.t_end" in entries or "evolve.dt" in entries:
        if "evolve.t_end" not in entries or "evolve.dt" not in entries:
            raise _fail(entries, "evolve.dt" if "evolve.dt" in entries else "evolve.t_end",
                        "set both evolve.dt and evolve.t_end", path)
        try:
            scheme = Scheme(entries["evolve.scheme"].value) if "evolve.scheme" in entries else None
        except ValueError:
            raise _fail(entries, "evolve.scheme", f"unknown scheme; use {', '.join(s.value for s in Scheme)}",
                        path) from None
        try:
            cfg = EvolveConfig(entries["evolve.dt"].value, entries["evolve.t_end"].value,
                               entries["evolve.stride"].value if "evolve.stride" in entries else 1, scheme,
                               **({"log_floor": entries["evolve.log_floor"].value}
                                  if "evolve.log_floor" in entries else {}))
            cfg.scheme_for(model)
        except ParameterError as exc:
            raise _fail(entries, "evolve.dt", str(exc), path) from None
        steps = (cfg.t_end - f0.time) / cfg.dt
        if steps < 0 or abs(steps - round(steps)) > 1e-6 * max(1.0, abs(steps)):
            raise _fail(entries, "evolve.t_end", f"(t_end - t0)/dt = {steps:.9g} is not a whole number", path)

    checks = entries["checks"].value if "checks" in entries else []
    for c in checks:
        if c not in CHECKS:
            raise _fail(entries, "checks", f"unknown check {c!r}; expected {', '.join(CHECKS)}", path)
    if "appendix" in checks and not (sol is not None and sol.background is BackgroundKind.STOKES):
        raise _fail(entries, "checks", "the appendix check needs a Stokes-background catalog source", path)
    if "virial-identity" in checks and sol is None and cfg is None:
        raise _fail(entries, "checks", "virial-identity on non-catalog data needs an evolve section", path)
    expectations = [e.value for k, e in entries.items() if k.startswith("expect.")]
    return Scenario(name, path, entries, model, grid, f0, sol, cfg,
                    bool(entries["evolve.expect_blowup"].value) if "evolve.expect_blowup" in entries else False,
                    checks, expectations)


def load(path: str | os.PathLike) -> Scenario:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario: {exc.strerror}", 0, 0, str(p)) from None
    return build(parse_text(text, str(p)), str(p), p.parent)


# -- execution ----------------------------------------------------------------


@dataclass
class Outcome:
    code: int
    report: dict | None = None
    failures: list = field(default_factory=list)
    traj: object = None
    final: Field1D | None = None
    ground_state: object = None


def _lookup(report, path: str):
    cur = report
    for part in path.split("."):
        if isinstance(cur, dict) and part in cur:
            cur = cur[part]
        elif isinstance(cur, list) and part.lstrip("-").isdigit() and -len(cur) <= int(part) < len(cur):
            cur = cur[int(part)]
        else:
            raise KeyError(path)
    return cur


def _identity_checks(sc: Scenario, traj, failures) -> list:
    model = sc.model
    out = []
    if sc.solution is not None:
        tol = sc.get("check.virial_identity.tol", 1e-5)
        dt = sc.get("check.virial_identity.dt", vi.DEFAULT_FD_STEP)
        sol, grid = sc.solution, sc.grid
        for t in sc.get("check.virial_identity.times", [sc.field0.time]):
            chk = vi.fd_identity_check(vi.exact_source(sol, grid), lambda f: measure_virial(f, model),
                                       lambda f: virial_rhs(f, model), t, dt, tol, sol.id)
            out.append(chk.to_dict())
            if not chk.rel_residual < tol:
                failures.append(f"virial-identity: relative residual {chk.rel_residual:.3g} >= {tol:g} at t={t:g}")
        return out
    tol = sc.get("check.virial_identity.tol", 1e-4)
    n = len(traj.times)
    if n < 5:
        failures.append("virial-identity: trajectory has fewer than 5 samples")
        return out
    for idx in sorted({max(2, n // 4), n // 2, min(n - 3, 3 * n // 4)}):
        chk = vi.trajectory_identity_check(traj, "virial", traj.virial_rhs, idx)
        out.append(chk.to_dict())
        if not chk.rel_residual < tol:
            failures.append(f"virial-identity: relative residual {chk.rel_residual:.3g} >= {tol:g} at "
                            f"t={chk.t:g}")
    return out


def _appendix(sc: Scenario, failures) -> list:
    tol = sc.get("check.appendix.tol", 1e-6)
    out = []
    src = vi.exact_source(sc.solution, sc.grid)
    for t in sc.get("check.appendix.times", [sc.field0.time]):
        terms = vi.appendix_terms(src, sc.model, t)
        out.append({"t": t, "I": terms.I, "II": terms.II, "III": terms.III, "residual": terms.residual})
        if not terms.residual < tol:
            failures.append(f"appendix: |I+II+III| relative {terms.residual:.3g} >= {tol:g} at t={t:g}")
    return out


def _ground_state(sc: Scenario, cache: ThresholdCache, failures):
    p = sc.get("check.ground_state.p", sc.model.p)
    n = sc.get("check.ground_state.n", sc.model.n)
    default_omega = critical_omega(p, n) if n / 2 - 2 / p > 0 else 1.0
    omega = sc.get("check.ground_state.omega", default_omega)
    tol = sc.get("check.ground_state.tol", 1e-6)
    try:
        res = ground_state_imag_time(p, n, omega, sc.grid, min(tol, 1e-10))
    except ConvergenceError as exc:
        failures.append(f"ground-state: {exc}")
        return None, None
    cache.put(thresholds_from(res), sc.grid)
    if not res.residual < tol:
        failures.append(f"ground-state: residual {res.residual:.3g} >= {tol:g}")
    rep = {"p": p, "n": n, "omega_eff": omega, "residual": res.residual, "l2_norm": res.l2_norm,
           "iterations": res.iterations, **res.norms}
    return res, rep


def _verdict(sc: Scenario, traj, cache: ThresholdCache) -> dict:
    extra = {}
    if sc.model.family is Family.POWER_NLS:
        for key, name in (("classify.eps_small", "eps_small"), ("classify.decay_certificate", "decay_certificate")):
            if key in sc.entries:
                extra[name] = sc.get(key)
    if "classify.parity" in sc.entries:
        extra["parity"] = sc.get("classify.parity")
    tau0 = sc.get("classify.tau0", cl.DEFAULT_TAU0)
    if traj is not None:
        v = cl.classify_trajectory(traj, sc.model, tau0, cache, **extra)
    else:
        v = cl.classify(cl.facts_from_field(sc.field0, sc.model, **extra), tau0, cache)
    return v.to_dict()


def execute(sc: Scenario) -> Outcome:
    failures: list[str] = []
    report: dict = {
        "scenario": sc.name,
        "model": sc.model.as_dict(),
        "grid": {"L": sc.grid.length, "N": sc.grid.points},
        "source": sc.solution.id if sc.solution is not None else (sc.get("source.shape") or sc.get("source.file")),
        "t0": sc.field0.time,
        "checks": list(sc.checks),
    }
    cache = ThresholdCache(sc.get("classify.thresholds")) if "classify.thresholds" in sc.entries else ThresholdCache()
    traj = None
    final = sc.field0
    if sc.evolve is not None:
        try:
            traj = evolve(sc.field0, sc.model, sc.evolve)
            final = traj.final
            if sc.expect_blowup:
                failures.append("evolve: blow-up was expected but the run reached t_end")
        except BlowUpDetected as exc:
            traj, final = exc.trajectory, exc.field
            if not sc.expect_blowup:
                failures.append(f"evolve: {exc}")
        report["trajectory"] = traj.summary()
    gs = None
    for check in sc.checks:
        try:
            if check == "invariants":
                report["invariants"] = fn.invariants(sc.field0, sc.model).to_dict()
                if traj is not None and final is not None:
                    report["invariants_final"] = fn.invariants(final, sc.model).to_dict()
            elif check == "virial-identity":
                report["identity_checks"] = _identity_checks(sc, traj, failures)
            elif check == "appendix":
                report["appendix"] = _appendix(sc, failures)
            elif check in ("ground-state", "pohozaev"):
                if gs is None:
                    gs, report["ground_state"] = _ground_state(sc, cache, failures)
                if check == "pohozaev" and gs is not None:
                    tol = sc.get("check.pohozaev.tol", 1e-6)
                    r1, r2 = vi.pohozaev_residuals(gs if gs.n == 2 else gs.profile, gs.p, gs.omega_eff, gs.n)
                    rc = vi.pohozaev_consequence_residual(gs if gs.n == 2 else gs.profile, gs.p, gs.n)
                    report["pohozaev"] = {"residual_1": r1, "residual_2": r2,
                                          "consequence": rc if math.isclose(gs.omega_eff, critical_omega(gs.p, gs.n))
                                          else None}
                    for label, r in (("first", r1), ("second", r2)):
                        if not r < tol:
                            failures.append(f"pohozaev: {label} identity residual {r:.3g} >= {tol:g}")
            elif check == "classify":
                report["verdict"] = _verdict(sc, traj, cache)
        except (NlsLabError, ValueError) as exc:
            failures.append(f"{check}: {exc}")
    expectations = []
    for exp in sc.expectations:
        try:
            actual = _lookup(report, exp.path)
            ok = exp.check(actual)
        except KeyError:
            actual, ok = None, False
        expectations.append({"path": exp.path, "expected": exp.describe(), "actual": actual, "passed": ok})
        if not ok:
            failures.append(f"expect.{exp.path}: got {actual!r}, expected {exp.describe()}")
    report["expectations"] = expectations
    report["failures"] = list(failures)
    report["passed"] = not failures
    return Outcome(1 if failures else 0, report, failures, traj, final, gs)


# -- serialization ------------------------------------------------------------


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    if hasattr(x, "value") and isinstance(getattr(x, "value"), str):
        return x.value
    return x


def dumps(obj, indent: int = 2) -> str:
    """JSON with sorted keys and every float written to 17 significant digits."""

    def enc(x, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if isinstance(x, dict):
            if not x:
                return "{}"
            items = [f"{pad}{_json_str(k)}: {enc(x[k], level + 1)}" for k in sorted(x)]
            return "{\n" + ",\n".join(items) + "\n" + end + "}"
        if isinstance(x, list):
            if not x:
                return "[]"
            return "[\n" + ",\n".join(pad + enc(v, level + 1) for v in x) + "\n" + end + "]"
        if x is None:
            return "null"
        if isinstance(x, bool):
            return "true" if x else "false"
        if isinstance(x, int):
            return str(x)
        if isinstance(x, float):
            return format(x, ".17g") if math.isfinite(x) else "null"
        return _json_str(str(x))

    return enc(_plain(obj), 0) + "\n"


def _json_str(s: str) -> str:
    import json

    return json.dumps(s, ensure_ascii=False)


def _profile_csv(f: Field1D) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "re", "im"])
    for x, v in zip(f.x, f.values):
        w.writerow([format(float(x), ".17g"), format(float(v.real), ".17g"), format(float(v.imag), ".17g")])
    return buf.getvalue()


def write_outputs(out: Outcome, sc: Scenario, out_dir: str | os.PathLike, elapsed: float):
    d = Path(out_dir)
    d.mkdir(parents=True, exist_ok=True)
    (d / "report.json").write_text(dumps(out.report), encoding="utf-8")
    meta = {
        "scenario_file": str(sc.path),
        "created_unix": time.time(),
        "elapsed_seconds": elapsed,
        "nlslab_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "exit_code": out.code,
    }
    (d / "metadata.json").write_text(dumps(meta), encoding="utf-8")
    if out.traj is not None:
        out.traj.to_csv(d / "series.csv")
    if out.final is not None:
        (d / "profile.csv").write_text(_profile_csv(out.final), encoding="utf-8")
    if out.ground_state is not None:
        out.ground_state.to_csv(d / "ground_state.csv")


def run_file(path: str, out_dir: str) -> tuple[int, list[str]]:
    """Load, execute and write one scenario; returns (exit code, messages)."""
    t0 = time.perf_counter()
    try:
        sc = load(path)
    except ScenarioError as exc:
        return 2, [f"error: {exc}"]
    try:
        out = execute(sc)
    except NlsLabError as exc:
        return 1, [f"FAIL {sc.name}: {exc}"]
    write_outputs(out, sc, out_dir, time.perf_counter() - t0)
    if out.code:
        return out.code, [f"FAIL {sc.name}: {msg}" for msg in out.failures]
    return 0, [f"ok   {sc.name}: {len(sc.checks)} checks, {len(sc.expectations)} expectations -> {out_dir}"]
