"""Command-line front end: ``t2m <command> ...``.

Exit codes: 0 success, 1 failed check, 2 usage or parse error, 3 divergence.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from typing import Optional

from . import corpus
from .circuits import NatSet, compile_to_machine, count_test_gates, eval_circuit, parse_circuit
from .dsl import load_machine, print_machine
from .errors import (BudgetExceeded, CallBudgetExceeded, CertificateRefuted,
                     CertificateUnverifiable, OracleDivergence, PrefixUnavailable,
                     QueryUndecidedWithinFuel, T2MError, WitnessDiverged)
from .models import (halting_demo, max_by_lpo_loop, parse_certificate, revising_decode,
                     simulate_lpo_by_revising)
from .oracle import resolve_oracle, run_with_oracle
from .seq import EvSeq
from .transform import separate_layers
from .weihrauch import (ReductionWitness, check_bc, check_bf, check_f, check_hat,
                        check_weihrauch, resolve_problem)

OK, CHECK_FAILED, USAGE, DIVERGED = 0, 1, 2, 3

_DIVERGENCE_ERRORS = (OracleDivergence, WitnessDiverged, BudgetExceeded, CallBudgetExceeded,
                      QueryUndecidedWithinFuel, CertificateUnverifiable, PrefixUnavailable)


@dataclass
class CliConfig:
    fuel: int = 1_000_000
    depth: int = 1
    prefix: int = 64
    call_limit: Optional[int] = None
    trace: bool = False
    json: bool = False

    @classmethod
    def from_args(cls, a):
        cfg = cls(a.fuel, a.depth, a.prefix, a.call_limit, a.trace, a.json)
        for name in ("fuel", "depth", "prefix", "call_limit"):
            v = getattr(cfg, name)
            if v is not None and v < 0:
                raise _Usage(f"--{name.replace('_', '-')} must be non-negative")
        return cfg


class _Usage(T2MError):
    kind = "UsageError"


def _fmt(cells) -> str:
    cells = tuple(cells)
    return ",".join(map(str, cells)) if any(c > 9 for c in cells) else "".join(map(str, cells))


def _emit(cfg, data, text):
    if cfg.json:
        print(json.dumps(data, sort_keys=True))
    else:
        print(text)


def _machine(path):
    """A machine file, or a corpus machine when no such file exists."""
    if not os.path.exists(path):
        stem = os.path.basename(path)
        stem = stem[:-4] if stem.endswith(".t2m") else stem
        if stem in corpus.names():
            return corpus.load(stem)
    return load_machine(path)


def _read_samples(path):
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                out.append(EvSeq.parse(line))
    return out


# -- commands -----------------------------------------------------------------

def cmd_validate(a, cfg):
    m = _machine(a.file)
    _emit(cfg, {"machine": m.name, "valid": True, "vertices": len(m.labels)},
          f"{m.name}: valid ({len(m.labels)} vertices)")
    return OK


def cmd_run(a, cfg):
    m = _machine(a.file)
    x = EvSeq.parse(a.input)
    oracle = resolve_oracle(a.oracle, _machine, cfg.fuel)
    trace = [] if cfg.trace else None
    r = run_with_oracle(m, oracle, x, cfg.depth, cfg.fuel, cfg.call_limit,
                        detect_cycles=True, prefix_goal=cfg.prefix, trace=trace)
    out = r.output
    exact = isinstance(out, EvSeq)
    cells = tuple(out.take(cfg.prefix)) if exact else tuple(out[:cfg.prefix])
    complete = exact or len(cells) >= cfg.prefix
    data = {
        "status": r.status.value,
        "output": _fmt(cells),
        "exact": str(out) if exact else None,
        "steps_used": r.base.steps_used,
        "depth": r.depth,
        "total_calls": r.total_calls,
        "max_nesting": r.max_nesting,
        "approximate": r.approximate,
        "diverged_query": r.diverged_query,
        "calls": [{"depth": c.depth_at_call, "query": str(c.query), "answer": str(c.answer),
                   "query_steps": c.query_steps} for c in r.calls],
    }
    if trace is not None:
        data["trace"] = trace
    if cfg.json:
        print(json.dumps(data, sort_keys=True))
    else:
        if trace is not None:
            for rec in trace:
                print(f"{rec['step']:>6} {rec['vertex']:<12} {rec['label']:<14} heads={rec['heads']}",
                      file=sys.stderr)
        print(_fmt(cells))
    if not complete:
        print(f"{r.status.value}: only {len(cells)} of {cfg.prefix} output symbols", file=sys.stderr)
        return DIVERGED
    return OK


def cmd_transform(a, cfg):
    m = _machine(a.file)
    layered = separate_layers(m, a.n)
    text = print_machine(layered.graph)
    if a.output:
        with open(a.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        _emit(cfg, {"machine": layered.graph.name, "vertices": len(layered.graph.labels),
                    "output": a.output},
              f"wrote {a.output} ({len(layered.graph.labels)} vertices)")
    else:
        sys.stdout.write(text)
    return OK


def _witness(spec):
    parts = spec.split(",")
    if len(parts) != 2:
        raise _Usage("--witness expects F.t2m,G.t2m")
    F, G = (_machine(p.strip()) for p in parts)
    return ReductionWitness(G, F, f"{F.name},{G.name}")


def cmd_check(a, cfg):
    f = resolve_problem(a.f, cfg.fuel)
    g = resolve_problem(a.g, cfg.fuel)
    w = _witness(a.witness)
    kw = {"prefix_len": cfg.prefix, "fuel": cfg.fuel}
    if a.samples:
        kw["samples"] = _read_samples(a.samples)
    rel, _, arg = a.relation.partition(":")
    try:
        if rel == "W" and not arg:
            report = check_weihrauch(f, g, w, **kw)
        elif rel == "bc" and arg:
            report = check_bc(f, g, int(arg), w, **kw)
        elif rel == "bf":
            report = check_bf(f, g, w, bound=int(arg) if arg else 4, **kw)
        elif rel == "f" and arg:
            report = check_f(f, g, int(arg), w, **kw)
        elif rel == "hat" and arg:
            report = check_hat(f, g, int(arg), w, **kw)
        else:
            raise _Usage(f"unknown relation {a.relation!r}; use W, bc:n, bf, f:k or hat:k")
    except ValueError as e:
        if isinstance(e, T2MError):
            raise
        raise _Usage(str(e)) from None
    data = report.to_json()
    lines = [f"{report.relation}: {'pass' if report.passed else 'FAIL'} "
             f"({sum(r[3] for r in report.per_sample)}/{len(report.per_sample)} samples)"]
    for row in data["per_sample"]:
        if not row["pass"]:
            lines.append(f"  {row['input']}: expected {row['expected']} got {row['produced']}")
    _emit(cfg, data, "\n".join(lines))
    return OK if report.passed else CHECK_FAILED


def cmd_demo(a, cfg):
    if a.kind == "max-by-lpo":
        w = EvSeq.parse(a.input)
        value, calls, trace = max_by_lpo_loop(w, a.budget)
        data = {"input": str(w), "max": value, "calls": calls,
                "trace": [{"n": n, "query": str(q), "answer": str(y)} for n, q, y in trace]}
        _emit(cfg, data, f"MAX = {value} after {calls} LPO calls")
        return OK
    if a.kind == "revising":
        m = _machine(a.machine)
        s = simulate_lpo_by_revising(m, EvSeq.parse(a.input), cfg.fuel, min_output=cfg.prefix)
        decoded = revising_decode(s)
        data = {"stream": str(s.symbols), "complete": s.complete,
                "status": s.status.value if s.status else None, "marks": s.mark_count,
                "decoded": _fmt(decoded.take(cfg.prefix))}
        _emit(cfg, data, f"stream {s.symbols} ({s.mark_count} marks)\n"
                         f"output {_fmt(decoded.take(cfg.prefix))}")
        return OK if s.complete else DIVERGED
    m = _machine(a.machine)
    cert = parse_certificate(a.certificate)
    v = halting_demo(m, cert, cfg.fuel, EvSeq.parse(a.input))
    data = {"machine": m.name, "verdict": v.verdict, "query": str(v.query),
            "answer": str(v.answer), "checked_steps": v.checked_steps}
    _emit(cfg, data, f"{m.name}: {v.verdict} (LPO answer {v.answer})")
    return OK


def _parse_binding(text):
    name, eq, body = text.partition("=")
    body = body.strip()
    if not eq or not (body.startswith("{") and body.endswith("}")):
        raise _Usage(f"--set expects NAME={{a,b,...}}, not {text!r}")
    inner = body[1:-1].strip()
    try:
        return name.strip(), NatSet([int(t) for t in inner.split(",")] if inner else [])
    except ValueError:
        raise _Usage(f"bad set {body}") from None


def cmd_circuit(a, cfg):
    with open(a.file, encoding="utf-8") as fh:
        c = parse_circuit(fh.read())
    inputs = dict(_parse_binding(b) for b in a.set or [])
    if a.kind == "eval":
        out = eval_circuit(c, inputs)
        data = {"outputs": {k: list(v.elements) for k, v in out.items()},
                "test_gates": count_test_gates(c)}
        _emit(cfg, data, "\n".join(f"{k} = {v}" for k, v in out.items()))
        return OK
    plan = compile_to_machine(c)
    out, r = plan.evaluate(inputs, cfg.fuel)
    data = {"lpo_calls": plan.lpo_calls, "level_bound": plan.level_bound,
            "recorded_calls": r.total_calls,
            "call_depths": [x.depth_at_call for x in r.calls],
            "outputs": {k: list(v.elements) for k, v in out.items()}}
    text = [f"lpo_calls {plan.lpo_calls}", f"level_bound {plan.level_bound}"]
    text += [f"{k} = {v}" for k, v in out.items()]
    _emit(cfg, data, "\n".join(text))
    return OK


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--fuel", type=int, default=1_000_000)
    common.add_argument("--depth", type=int, default=1)
    common.add_argument("--prefix", type=int, default=64)
    common.add_argument("--call-limit", type=int, default=None)
    common.add_argument("--trace", action="store_true")

    p = argparse.ArgumentParser(prog="t2m", description="Oracle-Type-2-Machine tools")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", parents=[common], help="parse and validate a machine")
    s.add_argument("file")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("run", parents=[common], help="run a machine")
    s.add_argument("file")
    s.add_argument("--input", default=":0")
    s.add_argument("--oracle", default="lpo")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("transform", parents=[common], help="graph transformations")
    s.add_argument("kind", choices=["separate-layers"])
    s.add_argument("file")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_transform)

    s = sub.add_parser("check-reduction", parents=[common], help="check a reduction witness")
    s.add_argument("--relation", default="W")
    s.add_argument("--f", required=True)
    s.add_argument("--g", required=True)
    s.add_argument("--witness", required=True, help="F.t2m,G.t2m")
    s.add_argument("--samples")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("demo", parents=[common], help="model demonstrations")
    s.add_argument("kind", choices=["max-by-lpo", "revising", "halting"])
    s.add_argument("--input", default=":0")
    s.add_argument("--machine")
    s.add_argument("--certificate")
    s.add_argument("--budget", type=int, default=None, help="LPO call budget for max-by-lpo")
    s.set_defaults(func=cmd_demo)

    s = sub.add_parser("circuit", parents=[common], help="arithmetic circuits")
    s.add_argument("kind", choices=["eval", "compile"])
    s.add_argument("file")
    s.add_argument("--set", action="append", metavar="NAME={a,b}",
                   help="replace a constant gate")
    s.set_defaults(func=cmd_circuit)
    return p


def _exit_code(e: T2MError) -> int:
    if isinstance(e, _DIVERGENCE_ERRORS):
        return DIVERGED
    if isinstance(e, CertificateRefuted):
        return CHECK_FAILED
    return USAGE


def main(argv=None) -> int:
    p = build_parser()
    a = p.parse_args(argv)
    try:
        cfg = CliConfig.from_args(a)
        if a.command == "demo":
            if a.kind in ("revising", "halting") and not a.machine:
                raise _Usage(f"demo {a.kind} needs --machine")
            if a.kind == "halting" and not a.certificate:
                raise _Usage("demo halting needs --certificate")
        return a.func(a, cfg)
    except T2MError as e:
        print(f"t2m: {e}", file=sys.stderr)
        return _exit_code(e)
    except OSError as e:
        print(f"t2m: IOError: {e}", file=sys.stderr)
        return USAGE
    except ValueError as e:
        print(f"t2m: ValueError: {e}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
