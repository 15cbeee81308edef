"""End-to-end analysis: source text in, invariant ideal basis out."""

from __future__ import annotations

import contextlib
import json
import logging
import random
import signal
import threading
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .errors import AnalysisError, AnalysisTimeout
from .frontend import LoopAst, execute, flatten, initial_name, parse
from .invariants import invariant_ideal, path_ideal
from .poly import Ideal, MultiPoly, parse_poly
from .recurrences import extract_loop
from .solve import closed_forms

log = logging.getLogger(__name__)

PHASES = ("parse", "extract", "solve", "invariants")
DEFAULT_TIMEOUT = 60.0
VERIFY_FAILED = 5


@contextlib.contextmanager
def deadline(seconds: float | None):
    """Raise AnalysisTimeout after ``seconds`` of wall time (main thread only)."""
    usable = (seconds and seconds > 0 and hasattr(signal, "setitimer")
              and threading.current_thread() is threading.main_thread())
    if not usable:
        yield
        return

    def on_alarm(signum, frame):
        raise AnalysisTimeout(f"analysis exceeded {seconds:g} s")

    old = signal.signal(signal.SIGALRM, on_alarm)
    signal.setitimer(signal.ITIMER_REAL, seconds)
    try:
        yield
    finally:
        signal.setitimer(signal.ITIMER_REAL, 0)
        signal.signal(signal.SIGALRM, old)


@dataclass
class VerificationResult:
    passed: bool
    trials: int
    max_steps: int
    counterexample: dict | None = None

    def as_dict(self) -> dict:
        out = {"trials": self.trials, "max_steps": self.max_steps, "passed": self.passed}
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample
        return out


@dataclass
class AnalysisReport:
    source: str
    variables: list[str] = field(default_factory=list)
    initial_variables: list[str] = field(default_factory=list)
    paths: int = 0
    closed_forms: list[list[str]] = field(default_factory=list)
    invariant_basis: list[str] = field(default_factory=list)
    trivial_ideal: bool = False
    diagnostics: list[dict] = field(default_factory=list)
    timings_ms: dict = field(default_factory=lambda: {p: 0.0 for p in PHASES})
    verification: VerificationResult | None = None
    exit_code: int = 0
    ideal: Ideal | None = field(default=None, repr=False)
    ast: LoopAst | None = field(default=None, repr=False)

    @property
    def ok(self) -> bool:
        return self.exit_code == 0

    def as_dict(self, timings: bool = True) -> dict:
        d = {
            "variables": self.variables,
            "initial_variables": self.initial_variables,
            "paths": self.paths,
            "closed_forms": self.closed_forms,
            "invariant_basis": self.invariant_basis,
            "trivial_ideal": self.trivial_ideal,
            "diagnostics": self.diagnostics,
            "timings_ms": self.timings_ms if timings else {p: 0.0 for p in self.timings_ms},
            "verification": self.verification.as_dict() if self.verification else None,
        }
        return d

    def to_json(self, timings: bool = True) -> str:
        return json.dumps(self.as_dict(timings), indent=2)

    def to_text(self) -> str:
        lines = []
        if self.variables:
            lines.append("variables: " + ", ".join(self.variables))
            lines.append(f"paths: {self.paths}")
        for i, forms in enumerate(self.closed_forms, 1):
            lines.append(f"closed forms, path {i}:")
            lines += [f"  {f}" for f in forms]
        if self.exit_code == 0 or self.invariant_basis:
            if self.trivial_ideal:
                lines.append("invariant ideal: zero ideal (no polynomial invariant)")
            else:
                lines.append("invariant ideal basis:")
                lines += [f"  {g}" for g in self.invariant_basis]
        for d in self.diagnostics:
            lines.append(f"{d['code']}: {d['message']}")
        if self.verification:
            v = self.verification
            status = "passed" if v.passed else "FAILED"
            lines.append(f"verification: {status} ({v.trials} trials x {v.max_steps} steps)")
            if v.counterexample:
                lines.append(f"  counterexample: {json.dumps(v.counterexample)}")
        ms = ", ".join(f"{k} {v:.1f}" for k, v in self.timings_ms.items())
        lines.append(f"timings (ms): {ms}")
        return "\n".join(lines) + "\n"


def _format_forms(cfs) -> list[str]:
    forms = cfs.format()
    if cfs.start:
        forms = [f"{f}  (n >= {cfs.start})" for f in forms]
    return forms


def run(source: str, timeout: float | None = None, verify: bool = False,
        trials: int = 100, steps: int = 30, seed: int = 0) -> AnalysisReport:
    """Analyze one loop. Errors end up as diagnostics with a nonzero exit code."""
    report = AnalysisReport(source)
    clock = time.perf_counter
    phase = "parse"
    t0 = clock()

    def tick(next_phase):
        nonlocal phase, t0
        now = clock()
        report.timings_ms[phase] = round((now - t0) * 1000, 3)
        phase, t0 = next_phase, now

    try:
        with deadline(timeout):
            ast = parse(source)
            report.ast = ast
            ps = flatten(ast)
            variables = ps.variables
            report.variables = list(variables)
            report.initial_variables = [initial_name(v) for v in variables]
            report.paths = len(ps.paths)
            tick("extract")
            systems = extract_loop(ps)
            tick("solve")
            cfs = [closed_forms(s, variables) for s in systems]
            report.closed_forms = [_format_forms(c) for c in cfs]
            tick("invariants")
            pids = [path_ideal(c, variables, i + 1) for i, c in enumerate(cfs)]
            ideal = invariant_ideal(pids, variables)
            tick("verify")
            report.ideal = ideal
            report.invariant_basis = [g.primitive().format() for g in ideal.generators]
            report.trivial_ideal = not ideal.generators
    except AnalysisError as exc:
        tick(phase)
        report.exit_code = exc.exit_code
        report.diagnostics += exc.details.get("diagnostics") or [exc.as_diagnostic()]
        return report
    report.timings_ms.pop("verify", None)
    if verify:
        t = clock()
        report.verification = verify_numeric(ast, report.ideal.generators, trials, steps, seed)
        report.timings_ms["verify"] = round((clock() - t) * 1000, 3)
        if not report.verification.passed:
            report.exit_code = VERIFY_FAILED
            report.diagnostics.append({"code": "VerificationFailed",
                                       "message": "a basis polynomial is nonzero on a concrete run"})
    return report


# --- randomized execution oracle -------------------------------------------------


def _random_rational(rng: random.Random) -> Fraction:
    den = 0
    while den == 0:
        den = rng.randint(-9, 9)
    return Fraction(rng.randint(-9, 9), den)


def verify_numeric(source: str | LoopAst, basis: Sequence[MultiPoly | str], trials: int = 100,
                   max_steps: int = 30, seed: int = 0) -> VerificationResult:
    """Run the loop on random rational inputs and random branch choices; every
    basis polynomial must vanish exactly after 0, 1, ..., max_steps iterations."""
    ast = parse(source) if isinstance(source, str) else source
    variables = flatten(ast).variables
    names = tuple(initial_name(v) for v in variables) + tuple(variables)
    polys = [parse_poly(p, names) if isinstance(p, str) else p for p in basis]
    result = VerificationResult(True, trials, max_steps)
    if not polys:
        return result
    rng = random.Random(seed)
    for trial in range(trials):
        init = {v: _random_rational(rng) for v in variables}
        state = dict(init)
        choices: list[bool] = []

        def choose():
            c = rng.random() < 0.5
            choices.append(c)
            return c

        for step in range(max_steps + 1):
            env = {initial_name(v): x for v, x in init.items()}
            env.update(state)
            for p in polys:
                if p.evaluate(env) != 0:
                    result.passed = False
                    result.counterexample = {
                        "trial": trial,
                        "initial": {k: str(x) for k, x in init.items()},
                        "branches": ["then" if c else "else" for c in choices],
                        "step": step,
                        "polynomial": p.format(),
                    }
                    return result
            if step == max_steps:
                break
            try:
                state = execute(ast, state, choose, counter=step)
            except ZeroDivisionError:
                break
    return result


# --- benchmark harness --------------------------------------------------------------


@dataclass
class BenchRow:
    name: str
    status: str
    seconds: float
    basis_size: int
    nonempty: bool
    verified: bool | None
    exit_code: int

    def as_dict(self) -> dict:
        return asdict(self)


def bench(corpus: str | Path, timeout: float | None = DEFAULT_TIMEOUT, verify: bool = True,
          trials: int = 100, steps: int = 30, seed: int = 0) -> list[BenchRow]:
    """Analyze every ``*.loop`` file of a directory; failures become rows, not exceptions."""
    rows = []
    for path in sorted(Path(corpus).glob("*.loop")):
        start = time.perf_counter()
        report = run(path.read_text(), timeout=timeout)
        seconds = time.perf_counter() - start
        verified = None
        if report.ok and verify:
            try:
                with deadline(timeout):
                    verified = verify_numeric(report.ast, report.ideal.generators, trials,
                                              steps, seed).passed
            except AnalysisTimeout:
                verified = False
        status = "ok" if report.ok else report.diagnostics[0]["code"]
        rows.append(BenchRow(path.stem, status, round(seconds, 3), len(report.invariant_basis),
                             bool(report.invariant_basis), verified, report.exit_code))
        log.info("%s: %s in %.3f s", path.stem, status, seconds)
    return rows
