"""Batch driver: ``kmslat <task> --job file.json [--json out.json] [--seed N]``.

Exit status is 0 when every check passes, 1 when a check fails, 2 for an
invalid job file (the message names the offending field) and 3 when an
oracle build would exceed the size cap.
"""

from __future__ import annotations

import argparse
import json
import sys as _sys
from fractions import Fraction

import numpy as np

from . import algebra as alg
from . import lattice as lat
from . import measures as ms
from . import oracle
from . import states as st
from .scalars import format_rational, format_scalar, is_exact, parse_rational, to_json_scalar, within

TASKS = ("eval", "kms-check", "characterize", "critical", "ground", "limit", "trace-check",
         "dilation", "stable-lattice", "cosets", "reconstruct", "oracle-compare",
         "orbit-measure", "exel-check", "moments-recover")

STATE_KINDS = {k.value: k for k in st.StateKind}

OPTION_DEFAULTS = {
    "eps": "1/1000000000000",
    "tol": "0",
    "depth": 4,
    "J": 6,
    "seed": 0,
    "char-bound": 8,
    "random-pairs": 0,
    "bound": 8,
    "kmax": 4,
}


class JobError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")


# ---------------------------------------------------------------------------
# parsing

def _int(value, path, minimum=None):
    if not isinstance(value, int) or isinstance(value, bool):
        raise JobError(path, "must be an integer")
    if minimum is not None and value < minimum:
        raise JobError(path, f"must be >= {minimum}")
    return value


def _rational(value, path):
    try:
        return parse_rational(value)
    except ValueError as exc:
        raise JobError(path, str(exc)) from None


def _vector(value, d, path):
    if d == 1 and isinstance(value, int) and not isinstance(value, bool):
        return (value,)
    if not isinstance(value, list) or len(value) != d:
        raise JobError(path, f"must be a list of {d} integers")
    return tuple(_int(x, f"{path}[{i}]") for i, x in enumerate(value))


def _monomial(sys, value, path):
    if not isinstance(value, list) or len(value) != 4:
        raise JobError(path, "a monomial is [m, k, l, n]")
    m = _vector(value[0], sys.d, f"{path}[0]")
    k = _int(value[1], f"{path}[1]", 0)
    l = _int(value[2], f"{path}[2]", 0)
    n = _vector(value[3], sys.d, f"{path}[3]")
    return alg.normalize(sys, m, k, l, n)


class Job:
    def __init__(self, raw: dict, task: str, seed=None):
        if not isinstance(raw, dict):
            raise JobError("job", "must be a JSON object")
        self.raw = raw
        self.task = task
        if "task" in raw and raw["task"] != task:
            raise JobError("job.task", f"file says {raw['task']!r} but {task!r} was requested")
        self.sys = self._system()
        opts = raw.get("options", {})
        if not isinstance(opts, dict):
            raise JobError("job.options", "must be an object")
        unknown = set(opts) - set(OPTION_DEFAULTS)
        if unknown:
            raise JobError(f"job.options.{sorted(unknown)[0]}", "unknown option")
        self.options = {**OPTION_DEFAULTS, **opts}
        if seed is not None:
            self.options["seed"] = seed

    def _system(self):
        A = self.raw.get("matrix")
        if A is None:
            raise JobError("job.matrix", "required")
        if not isinstance(A, list) or not A or any(not isinstance(row, list) or len(row) != len(A) for row in A):
            raise JobError("job.matrix", "must be a non-empty square list of integer rows")
        for i, row in enumerate(A):
            for j, x in enumerate(row):
                _int(x, f"job.matrix[{i}][{j}]")
        if lat.determinant(A) == 0:
            raise JobError("job.matrix", "determinant is zero")
        sigma = self.raw.get("sigma")
        if sigma is not None:
            if not isinstance(sigma, list):
                raise JobError("job.sigma", "must be a list of vectors")
            sigma = [_vector(s, len(A), f"job.sigma[{i}]") for i, s in enumerate(sigma)]
        try:
            return lat.DilationSystem.from_matrix(A, sigma)
        except ValueError as exc:
            raise JobError("job.sigma", str(exc)) from None

    # option accessors
    def opt_rational(self, name):
        return _rational(self.options[name], f"job.options.{name}")

    def opt_int(self, name, minimum=0):
        return _int(self.options[name], f"job.options.{name}", minimum)

    # fields
    def r(self, required=True):
        if "r" not in self.raw:
            if required:
                raise JobError("job.r", f"required for task {self.task}")
            return None
        r = _rational(self.raw["r"], "job.r")
        if not 0 < r <= 1:
            raise JobError("job.r", "must lie in (0, 1]")
        return r

    def measure(self, required=True):
        if "measure" not in self.raw:
            if required:
                raise JobError("job.measure", f"required for task {self.task}")
            return None
        try:
            mu = ms.parse_measure(self.raw["measure"])
        except (ValueError, TypeError) as exc:
            raise JobError("job.measure", str(exc)) from None
        if mu.d != self.sys.d:
            raise JobError("job.measure", f"dimension {mu.d} does not match d = {self.sys.d}")
        return mu

    def monomials(self, required=True):
        raw = self.raw.get("monomials")
        if raw is None:
            if required:
                raise JobError("job.monomials", f"required for task {self.task}")
            return []
        if not isinstance(raw, list):
            raise JobError("job.monomials", "must be a list")
        return [_monomial(self.sys, v, f"job.monomials[{i}]") for i, v in enumerate(raw)]

    def pairs(self):
        out = []
        raw = self.raw.get("pairs", [])
        if not isinstance(raw, list):
            raise JobError("job.pairs", "must be a list")
        for i, p in enumerate(raw):
            if not isinstance(p, list) or len(p) != 2:
                raise JobError(f"job.pairs[{i}]", "a pair is [monomial, monomial]")
            out.append((_monomial(self.sys, p[0], f"job.pairs[{i}][0]"),
                        _monomial(self.sys, p[1], f"job.pairs[{i}][1]")))
        count = self.opt_int("random-pairs")
        if count:
            rng = np.random.Generator(np.random.PCG64(self.opt_int("seed")))
            bound, kmax = self.opt_int("bound"), self.opt_int("kmax")
            for _ in range(count):
                out.append((alg.random_monomial(self.sys, rng, bound, kmax),
                            alg.random_monomial(self.sys, rng, bound, kmax)))
        if not out:
            raise JobError("job.pairs", "give pairs or options.random-pairs > 0")
        return out

    def spec(self, forced_kind=None):
        """State spec from ``job.state`` (default kms-series), unless the task fixes the kind."""
        kind_name = forced_kind or self.raw.get("state", "kms-series")
        if kind_name not in STATE_KINDS:
            raise JobError("job.state", f"must be one of {sorted(STATE_KINDS)}")
        kind = STATE_KINDS[kind_name]
        needs_r = kind is st.StateKind.KMS_SERIES
        spec = st.StateSpec(kind, r=self.r(required=needs_r) if needs_r else None,
                            mu=self.measure(required=kind is not st.StateKind.CRITICAL),
                            eps=self.opt_rational("eps"))
        return spec

    def validated(self, spec):
        try:
            st.validate_spec(self.sys, spec)
        except st.StateSpecError as exc:
            raise JobError(f"job.{exc.field}", str(exc).split(": ", 1)[1]) from None
        return spec


# ---------------------------------------------------------------------------
# output helpers

def _mono_json(mono):
    m, k, l, n = mono
    return [list(m), k, l, list(n)]


def _mono_text(mono):
    m, k, l, n = mono
    return f"({','.join(map(str, m))} | {k} | {l} | {','.join(map(str, n))})"


def _bound_text(b):
    return format_rational(b) if isinstance(b, Fraction) and b.denominator < 10 ** 6 else f"{float(b):.3g}"


def _value_line(sv: st.StateValue):
    return f"{format_scalar(sv.value)} ± {_bound_text(sv.error_bound)}"


# ---------------------------------------------------------------------------
# tasks

def _task_eval(job, kind=None):
    spec = job.validated(job.spec(kind))
    results, lines = [], []
    for mono in job.monomials():
        v = st.eval_state(job.sys, spec, mono)
        results.append({"monomial": _mono_json(mono), **v.to_json()})
        lines.append(f"{_mono_text(mono)}: {_value_line(v)}")
    return True, results, lines


def _task_kms(job):
    spec = job.validated(job.spec())
    tol = job.opt_rational("tol")
    results, lines, ok = [], [], True
    for i, (x, y) in enumerate(job.pairs()):
        rep = st.kms_condition_check(job.sys, spec, x, y, tol)
        ok &= rep.passed
        results.append(rep.to_json())
        lines.append(f"pair {i}: {_mono_text(x)} {_mono_text(y)} "
                     f"lhs={format_scalar(rep.lhs)} rhs={format_scalar(rep.rhs)} {'pass' if rep.passed else 'FAIL'}")
    return ok, results, lines


def _task_critical(job):
    spec = job.validated(st.StateSpec.critical())
    ok, results, lines = True, [], []
    for mono in job.monomials(required=False):
        v = st.eval_state(job.sys, spec, mono)
        results.append({"monomial": _mono_json(mono), **v.to_json()})
        lines.append(f"{_mono_text(mono)}: {_value_line(v)}")
    if job.raw.get("pairs") or job.opt_int("random-pairs"):
        for i, (x, y) in enumerate(job.pairs()):
            rep = st.kms_condition_check(job.sys, spec, x, y, job.opt_rational("tol"))
            ok &= rep.passed
            results.append(rep.to_json())
            lines.append(f"kms pair {i}: {'pass' if rep.passed else 'FAIL'}")
    return ok, results, lines


def _task_characterize(job):
    spec = job.validated(job.spec())
    tol = job.opt_rational("tol")
    ok, results, lines = True, [], []
    for mono in job.monomials():
        rep = st.characterization_check(job.sys, spec, mono, tol)
        ok &= rep.passed
        results.append(rep.to_json())
        lines.append(f"{_mono_text(mono)}: {format_scalar(rep.lhs)} vs {format_scalar(rep.rhs)} "
                     f"{'pass' if rep.passed else 'FAIL'}")
    return ok, results, lines


def _task_trace(job):
    if job.sys.N != 1:
        raise JobError("job.matrix", "trace checks need |det A| = 1")
    spec = st.StateSpec.invariant_trace(job.measure())
    tol = job.opt_rational("tol")
    rep = st.trace_property_check(job.sys, spec, job.pairs(), tol)
    lines = [f"pair {i}: psi(xy)={format_scalar(p.lhs)} psi(yx)={format_scalar(p.rhs)} "
             f"{'pass' if p.passed else 'FAIL'}" for i, p in enumerate(rep.pairs)]
    lines.append(f"moment criterion: {'pass' if rep.moment_criterion else 'FAIL'}"
                 + ("" if rep.moment_witness is None else f" at m={rep.moment_witness[0]}, l={rep.moment_witness[1]}"))
    lines.append(f"invariant: {str(ms.is_invariant(job.sys, spec.mu, job.opt_int('char-bound'))).lower()}")
    return rep.passed, [rep.to_json()], lines


def _task_dilation(job):
    flag = lat.is_dilation(job.sys)
    return True, [{"dilation": flag}], [f"dilation: {str(flag).lower()}"]


def _task_stable(job):
    L = lat.stable_lattice(job.sys)
    basis = [list(c) for c in L.columns]
    text = "{0}" if not basis else "{" + ", ".join("(" + ",".join(map(str, c)) + ")" for c in basis) + "}"
    return True, [{"rank": L.rank, "basis": basis}], [f"stable lattice: rank {L.rank}, basis {text}"]


def _task_cosets(job):
    k = job.opt_int("depth")
    if job.sys.N ** k > 10 ** 5:
        raise JobError("job.options.depth", "N^depth exceeds 100000")
    reps = lat.coset_representatives(job.sys, k)
    return True, [{"k": k, "representatives": [list(c) for c in reps]}], \
        [f"Sigma_{k}: {len(reps)} representatives"] + ["  " + ",".join(map(str, c)) for c in reps]


def _task_reconstruct(job):
    spec = job.validated(job.spec("kms-series"))
    n = job.opt_int("depth")
    ok, results, lines = True, [], []
    exact_pn = st.geometric_p_n(job.sys, spec.r, n)
    for mono in job.monomials():
        x = alg.AlgebraElement.from_monomial(job.sys, mono)
        rep = st.reconstruction_partial_sum(job.sys, spec, x, n)
        full = st.eval_state(job.sys, spec, mono)
        bound = rep.tail_bound + rep.partial_sum.error_bound + full.error_bound
        passed = within(rep.partial_sum.value - full.value, bound)
        ok &= passed
        results.append({"monomial": _mono_json(mono), **rep.to_json(), "state": full.to_json(), "pass": passed})
        lines.append(f"{_mono_text(mono)}: partial {_value_line(rep.partial_sum)} vs "
                     f"{_value_line(full)}, tail {_bound_text(rep.tail_bound)} {'pass' if passed else 'FAIL'}")
    lines.append(f"phi(p_{n}) = {format_rational(exact_pn)}")
    return ok, results, lines


def _task_oracle(job):
    spec = job.validated(job.spec("kms-series"))
    mu = spec.mu
    if ms.angle_modulus(mu) is None:
        raise JobError("job.measure", "the oracle needs an atomic measure")
    J = job.opt_int("J")
    rep = oracle.build(job.sys, mu, J)
    rel = oracle.relation_check(rep)
    monos = job.monomials(required=False) or alg.monomial_panel(job.sys, 2, 3)
    ok = rel["pass"]
    results, lines = [{"relations": rel}], [f"dim {rep.dim}; relations {'pass' if rel['pass'] else 'FAIL'}"]
    worst = 0.0
    for mono in monos:
        a = oracle.vector_state_sum(rep, spec.r, mono)
        b = st.eval_state(job.sys, spec, mono)
        gap = abs(complex(a.value) - complex(b.value))
        bound = float(a.error_bound + b.error_bound)
        passed = gap <= bound
        ok &= passed
        worst = max(worst, gap)
        results.append({"monomial": _mono_json(mono), "oracle": a.to_json(), "state": b.to_json(),
                        "gap": gap, "bound": bound, "pass": passed})
    lines.append(f"{len(monos)} monomials, max gap {worst:.3g}, {'pass' if ok else 'FAIL'}")
    return ok, results, lines


def _task_orbit(job):
    if "point" not in job.raw:
        raise JobError("job.point", "required for task orbit-measure")
    raw = job.raw["point"]
    if not isinstance(raw, list) or len(raw) != job.sys.d:
        raise JobError("job.point", f"must be a list of {job.sys.d} rationals")
    q = [_rational(x, f"job.point[{i}]") for i, x in enumerate(raw)]
    mu = ms.periodic_orbit_measure(job.sys, q)
    cb = job.opt_int("char-bound")
    forward = all(ms.moments_agree(ms.moment(mu, job.sys.apply_B(m)), ms.moment(mu, m))
                  for m in ms.character_box(job.sys.d, cb))
    inv = ms.is_invariant(job.sys, mu, cb)
    lines = [f"period {len(mu.atoms)}"] + ["  " + ",".join(format_rational(x) for x in q) for _, q in mu.atoms]
    lines.append(f"invariant: {str(inv).lower()}")
    return inv and forward, [{"measure": ms.format_measure(mu), "period": len(mu.atoms),
                              "invariant": inv, "character_identity": forward}], lines


def _task_exel(job):
    mu, r = job.measure(), job.r()
    cb = job.opt_int("char-bound")
    witness = ms.exel_condition_witness(job.sys, mu, r, cb)
    ok = witness is None
    line = "exel condition: true" if ok else f"exel condition: false (fails at m={list(witness)})"
    return ok, [{"holds": ok, "witness": None if ok else list(witness), "char_bound": cb}], [line]


def _task_moments(job):
    spec = job.validated(job.spec("kms-series"))
    raw = job.raw.get("characters")
    if not isinstance(raw, list) or not raw:
        raise JobError("job.characters", "required: a list of integer vectors")
    chars = [_vector(v, job.sys.d, f"job.characters[{i}]") for i, v in enumerate(raw)]
    tol = job.opt_rational("tol")
    ok, results, lines = True, [], []
    for m in chars:
        rec = st.recover_moments(job.sys, spec, m)
        true = ms.moment(spec.mu, m)
        slack = tol + rec.error_bound
        if is_exact(rec.value) and is_exact(true):
            passed = within(rec.value - true, slack)
        else:
            passed = abs(complex(rec.value) - complex(true)) <= float(slack) + ms.MOMENT_TOL
        ok &= passed
        results.append({"m": list(m), "recovered": rec.to_json(), "moment": to_json_scalar(true), "pass": passed})
        lines.append(f"m={list(m)}: recovered {_value_line(rec)}, moment {format_scalar(true)} "
                     f"{'pass' if passed else 'FAIL'}")
    return ok, results, lines


HANDLERS = {
    "eval": _task_eval,
    "kms-check": _task_kms,
    "characterize": _task_characterize,
    "critical": _task_critical,
    "ground": lambda job: _task_eval(job, "ground"),
    "limit": lambda job: _task_eval(job, "critical-limit"),
    "trace-check": _task_trace,
    "dilation": _task_dilation,
    "stable-lattice": _task_stable,
    "cosets": _task_cosets,
    "reconstruct": _task_reconstruct,
    "oracle-compare": _task_oracle,
    "orbit-measure": _task_orbit,
    "exel-check": _task_exel,
    "moments-recover": _task_moments,
}


def run(task: str, raw: dict, seed=None) -> dict:
    """Run one task on a parsed job; returns the JSON report (raises JobError / SizeCapExceeded)."""
    job = Job(raw, task, seed)
    ok, results, lines = HANDLERS[task](job)
    return {"task": task, "pass": bool(ok), "results": results, "lines": lines}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="kmslat", description=__doc__.splitlines()[0])
    parser.add_argument("task", choices=TASKS)
    parser.add_argument("--job", required=True, help="job file (JSON)")
    parser.add_argument("--json", dest="json_out", help="write the machine-readable report here")
    parser.add_argument("--seed", type=int, help="seed for random panels (overrides options.seed)")
    args = parser.parse_args(argv)
    try:
        with open(args.job) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: job: {exc}", file=_sys.stderr)
        return 2
    try:
        report = run(args.task, raw, args.seed)
    except (JobError, st.StateSpecError) as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return 2
    except oracle.SizeCapExceeded as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return 3
    for line in report["lines"]:
        print(line)
    print(f"{args.task}: {'pass' if report['pass'] else 'FAIL'}")
    if args.json_out:
        with open(args.json_out, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0 if report["pass"] else 1


if __name__ == "__main__":
    _sys.exit(main())
