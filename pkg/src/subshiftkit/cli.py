"""Command line front end.

Every subcommand writes newline-delimited JSON (or CSV with a header row) to
stdout or ``--out``.  Output depends only on the arguments and ``--seed``;
timings go to stderr.  Errors map to exit codes: 2 capacity, 3 constraint
violation, 4 bad input, 1 anything else.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import grid2d, language, overlaps, params, thermo
from ._util import frac_str, parse_int
from .errors import BadInput, SubshiftError
from .words import DEFAULT_MATERIALIZE_CAP, Hierarchy, zero_count

BUILTIN_SCHEDULES = {**params.TOY_SCHEDULES, **params.REMARK3_TOY_SCHEDULES}
GENERATORS = ("structured", "mosaic", "corrupt", "uniform")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(BadInput.exit_code, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# plumbing

def _ordered_map(fn, items, workers: int):
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _schedule(args) -> params.Schedule:
    if args.mode == params.PAPER:
        return params.Schedule.paper(args.cap)
    src = args.schedule
    if src in BUILTIN_SCHEDULES:
        return BUILTIN_SCHEDULES[src]
    if not Path(src).exists():
        raise BadInput(f"schedule {src!r} is neither a builtin ({', '.join(BUILTIN_SCHEDULES)}) nor a file")
    return params.Schedule.load(src)


def _states(args, levels: int | None = None):
    sched = _schedule(args)
    if levels is None:
        levels = args.levels if getattr(args, "levels", None) is not None else sched.max_level
    return params.compute_states(sched, levels)


def _hierarchy(args, levels: int | None = None) -> Hierarchy:
    return Hierarchy(_states(args, levels), cap=args.materialize_cap)


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise BadInput(f"not a rational number: {text!r}") from exc


def _dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False)


class _Out:
    """Collects records; rendered once so the bytes do not depend on timing."""

    def __init__(self, fmt: str, header: list[str] | None = None):
        self.fmt = fmt
        self.header = header
        self.records: list = []

    def add(self, record: dict, row: list | None = None):
        self.records.append((record, row))

    def render(self) -> str:
        if self.fmt == "csv":
            if self.header is None:
                raise BadInput("this command has no CSV form; use --format json")
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(self.header)
            for rec, row in self.records:
                if row is not None:
                    w.writerow(row)
            return buf.getvalue()
        if self.fmt == "pretty":
            return "".join(json.dumps(rec, indent=2, ensure_ascii=False) + "\n" for rec, _ in self.records)
        return "".join(_dumps(rec) + "\n" for rec, _ in self.records)


def _note(args, **fields):
    """Diagnostics (timings, stats) go to stderr so stdout stays deterministic."""
    if not args.quiet:
        print(_dumps(fields), file=sys.stderr)


# ---------------------------------------------------------------------------
# subcommands

def cmd_params(args) -> _Out:
    states = _states(args)
    out = _Out(args.format, ["k", "n_prime", "ell_prime", "beta", "n_big", "ell", "rho_a", "rho_b", "f_a", "f_b"])
    for st in states:
        d = st.to_dict(summary=args.summary)
        out.add({"record": "state", **d}, [_cell(d[c]) for c in out.header])
    out.add({"record": "remark3", **params.check_remark3(states, args.mode).to_dict()})
    r_prime = {st.k: 2 * thermo.surrogate_reconstruction(st.ell_prime, args.K) + 1 for st in states[1:]}
    out.add({"record": "constraints", **params.check_constraints_c1_c4(states, r_prime).to_dict()})
    return out


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, dict):
        return _dumps(v)
    return v


def cmd_forbidden(args) -> _Out:
    hier = _hierarchy(args)
    stats: list = []
    out = _Out(args.format, ["n", "word", "k", "p"])
    for rec in language.enumerate_forbidden(args.n_max, hier, minimal=args.minimal, stats=stats,
                                            workers=args.workers):
        out.add(rec.to_json(), [rec.n, rec.word, rec.level_k, rec.block_p])
    for st in stats:
        _note(args, **st.to_json())
    return out


def cmd_language(args) -> _Out:
    hier = _hierarchy(args)
    out = _Out(args.format, ["n", "count", "log_growth"])
    for n, count, growth in language.complexity_function(args.n_max, hier, workers=args.workers):
        out.add({"n": n, "count": count, "log_growth": growth}, [n, count, repr(growth)])
    return out


def cmd_reconstruct(args) -> _Out:
    hier = _hierarchy(args)
    if args.n is not None:
        ns = [args.n]
    elif args.n_max is not None:
        ns = list(range(1, args.n_max + 1))
    else:
        ns = list(range(1, hier.ell(1) + 1))
    reports = _ordered_map(lambda n: language.reconstruction_report(n, hier), ns, args.workers)
    out = _Out(args.format, ["n", "length", "locally_admissible", "nodes_visited", "ok"])
    for r in reports:
        out.add(r.to_json(), [r.n, r.length, r.locally_admissible, r.nodes_visited, r.ok])
    return out


def cmd_overlaps(args) -> _Out:
    hier = _hierarchy(args)
    ks = [args.k] if args.k is not None else list(range(1, hier.top + 1))

    def work(k):
        cls = overlaps.classify_self_overlaps(k, hier)
        cross = overlaps.cross_overlaps(k, hier)
        return cls, [r.to_json() for r in cross if r.shifts]

    out = _Out(args.format, ["k", "class", "status", "offending_shifts"])
    for k, (cls, cross) in zip(ks, _ordered_map(work, ks, args.workers)):
        out.add({"k": k, "classification": cls.to_json(), "cross_overlaps_empty": not cross, "cross": cross})
        for c in cls.classes:
            out.records.append((None, [k, c.label, c.status, " ".join(map(str, c.offending))]))
    out.records = [(r, row) for r, row in out.records if r is not None or args.format == "csv"]
    return out


def _grid_sample(hier: Hierarchy, k: int, i: int, seed: int, generator: str, n: int):
    rng = np.random.default_rng([seed, k, i])
    gen = GENERATORS[i % len(GENERATORS)] if generator == "mixed" else generator
    if gen == "structured":
        p = grid2d.structured_pattern(hier, k, n, rng)
    elif gen == "mosaic":
        p = grid2d.mosaic_pattern(hier, k, n, rng)
    elif gen == "corrupt":
        base = grid2d.mosaic_pattern(hier, k, n, rng)
        p = grid2d.corrupt(base, rng, int(rng.integers(1, 4)))
    elif gen == "uniform":
        p = grid2d.uniform_pattern(n, rng)
    else:
        raise BadInput(f"unknown generator {gen!r}")
    return gen, p


def _grid_check(hier, k, i, args):
    if args.check == "density":
        rng = np.random.default_rng([args.seed, k, i])
        p = grid2d.tiled_pattern(hier, k, args.blocks, rng)
        d = grid2d.forbidden_position_density(p, args.D, hier.ell(k), hier)
        bound = Fraction(2 * args.D, hier.ell(k))
        return {"k": k, "sample": i, "generator": "tiled", "density": frac_str(d), "bound": frac_str(bound),
                "ok": d <= bound}
    n = args.side or grid2d.default_side(hier, k)
    gen, p = _grid_sample(hier, k, i, args.seed, args.generator, n)
    ijk = grid2d.compute_ijk(p, k, hier)
    rec = {"k": k, "sample": i, "generator": gen, "side": n}
    if args.check == "ijk":
        rec.update(ijk.cardinalities())
        rec["ok"] = True
    elif args.check == "admissibility":
        cov = grid2d.admissibility_cover(p, k, hier, ijk)
        rec.update({"disjoint": cov.disjoint, "covered": cov.covered, "I": int(ijk.I_mask.sum()), "ok": cov.ok})
    else:
        fr = grid2d.frequency_bounds(p, k, hier, ijk)
        rec.update(fr.to_json())
        rec["ok"] = fr.ok
    return rec


def cmd_grid(args) -> _Out:
    hier = _hierarchy(args)
    ks = [args.k] if args.k is not None else [k for k in range(2, hier.top + 1, 2)][:1]
    jobs = [(k, i) for k in ks for i in range(args.samples)]
    t0 = time.perf_counter()
    recs = _ordered_map(lambda job: _grid_check(hier, job[0], job[1], args), jobs, args.workers)
    _note(args, command="grid", seconds=time.perf_counter() - t0, samples=len(jobs))
    out = _Out(args.format, ["k", "sample", "generator", "ok"])
    for r in recs:
        out.add(r, [r["k"], r["sample"], r["generator"], r["ok"]])
    fails = sum(not r["ok"] for r in recs)
    out.add({"record": "summary", "check": args.check, "samples": len(recs), "failures": fails, "ok": not fails})
    return out


def _bound_inputs(args, states) -> list[thermo.BoundInputs]:
    ks = [args.k] if args.k is not None else list(range(2, len(states)))
    if args.inputs:
        try:
            raw = json.loads(Path(args.inputs).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise BadInput(f"cannot read inputs {args.inputs}: {exc}") from exc
        rows = raw if isinstance(raw, list) else [raw]
        by_k = {}
        try:
            for row in rows:
                k = int(row["k"])
                if not 1 <= k < len(states):
                    raise BadInput(f"inputs for level {k}, but only levels 1..{len(states) - 1} are computed")
                extra = {name: int(row[name]) for name in ("D", "card_A", "card_A_tilde", "card_A_hat") if name in row}
                by_k[k] = thermo.BoundInputs(k, states[k], states[k - 1], parse_int(row["R_prime"]),
                                             parse_int(row["C_prime"]), **extra)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, SubshiftError):
                raise
            raise BadInput(f"malformed inputs file: {exc}") from exc
        if args.k is None:
            ks = sorted(by_k)
        missing = [k for k in ks if k not in by_k]
        if missing:
            raise BadInput(f"no inputs for levels {missing}")
        return [by_k[k] for k in ks]
    return [thermo.surrogate_inputs(states, k, args.K, D=args.D) for k in ks]


def cmd_bounds(args) -> _Out:
    states = _states(args)
    inputs = _bound_inputs(args, states)
    if args.chaotic:
        out = _Out(args.format, thermo.CHAOTIC_CSV_HEADER)
        for row in thermo.chaotic_report(inputs, args.precision):
            out.add(row.to_json(), row.csv_row())
        return out
    mu = _fraction(args.mu)
    out = _Out(args.format, ["k", "term_name", "exact_coefficient", "decimal_value"])
    for inp in inputs:
        st = inp.state
        which = "B" if inp.k % 2 == 0 else "A"
        lower = thermo.pressure_lower_bound(st, inp.D, which)
        eps = thermo.epsilon_k(inp)
        ub = thermo.pressure_upper_bound_rhs(inp, mu, args.precision, args.form)
        out.add({"k": inp.k, "inputs": inp.to_json(),
                 "entropy_lower_bound": {"term_name": "entropy_lower_bound",
                                         "exact_coefficient": f"{frac_str(thermo.entropy_lower_bound(st, which))}*ln(2)",
                                         "decimal_value": str(thermo.LogLinear.log(2, st.freq(which)).value(args.precision))},
                 "pressure_lower_bound": lower.to_json(args.precision),
                 "epsilon": {"term_name": "epsilon", "exact_coefficient": eps.render(),
                             "decimal_value": str(eps.value(args.precision))},
                 "upper_bound": ub.to_json()})
        for t in ub.terms:
            j = t.to_json()
            out.records.append((None, [inp.k, j["term_name"], j["exact_coefficient"] or "", j["decimal_value"]]))
    out.records = [(r, row) for r, row in out.records if r is not None or args.format == "csv"]
    return out


# ---------------------------------------------------------------------------
# aggregate report

def _lemma(name: str, ok: bool, detail) -> dict:
    return {"name": name, "pass": bool(ok), "detail": detail}


def _report_schedule(name: str, sched: params.Schedule, args) -> list[dict]:
    states = params.compute_states(sched, sched.max_level)
    hier = Hierarchy(states, cap=args.materialize_cap)
    out = []
    rem = params.check_remark3(states, params.TOY)
    out.append(_lemma(f"{name}:schedule_inequalities", rem.all_hold(),
                      [{"k": k, "item": v.item, "detail": v.detail} for k, v in rem.failures()]))
    ell1 = hier.ell(1)
    mism = []
    for n in range(1, 2 * ell1 + 1):
        if language.segment_language(n, hier) != language.language_slice(n, hier).words:
            mism.append(n)
    out.append(_lemma(f"{name}:forbidden_words", not mism, {"n_max": 2 * ell1, "mismatched_lengths": mism}))
    bad = [n for n in range(1, ell1 + 1) if not language.verify_reconstruction(n, hier)]
    out.append(_lemma(f"{name}:reconstruction", not bad, {"n_max": ell1, "failing": bad}))
    top = min(hier.top, 4)
    cls_fail, cross_fail = [], []
    for k in range(1, top + 1):
        c = overlaps.classify_self_overlaps(k, hier)
        cls_fail += [{"k": k, "class": v.label, "offending": list(v.offending)} for v in c.classes if v.status == "fail"]
        if not overlaps.verify_no_cross_overlap(k, hier):
            cross_fail.append(k)
    out.append(_lemma(f"{name}:self_overlap_classes", not cls_fail, cls_fail))
    out.append(_lemma(f"{name}:cross_overlaps", not cross_fail, cross_fail))
    grid_fail, count = [], 0
    for k in range(2, hier.top + 1, 2):
        n = grid2d.default_side(hier, k)
        if n > 160:
            continue
        for i in range(args.samples):
            gen, p = _grid_sample(hier, k, i, args.seed, "mixed", n)
            ijk = grid2d.compute_ijk(p, k, hier)
            count += 1
            if not (grid2d.check_admissibility_cover(p, k, hier, ijk) and grid2d.frequency_bounds(p, k, hier, ijk).ok):
                grid_fail.append({"k": k, "sample": i, "generator": gen})
    out.append(_lemma(f"{name}:grid_cover_and_frequency", not grid_fail, {"patterns": count, "failures": grid_fail}))
    dup_bad = []
    for k in (0, 1):
        b = hier.dense_level(k)[1]
        if 2 ** (len(b) * zero_count(b)) != 2 ** thermo.dictionary_log_count(states, k, "B", hier.ell(k)):
            dup_bad.append(k)
    out.append(_lemma(f"{name}:duplication_count", not dup_bad, dup_bad))
    return out


def cmd_report(args) -> _Out:
    lemmas = []
    paper = params.compute_states(params.Schedule.paper(2), 2)
    s1 = paper[1]
    recurrence = ((s1.n_prime, s1.ell_prime, s1.beta, s1.n_big, s1.ell, s1.rho_a, s1.rho_b) == (2, 4, 64, 64, 128, 64, 2)
                  and paper[2].beta.bit_length() - 1 == 32780 and paper[2].beta & (paper[2].beta - 1) == 0
                  and paper[2].ell.bit_length() - 1 == 32787 and paper[2].ell & (paper[2].ell - 1) == 0)
    lemmas.append(_lemma("paper:parameter_recurrence", recurrence, {"k1": s1.to_dict(),
                                                                   "log2_beta2": paper[2].beta.bit_length() - 1,
                                                                   "log2_ell2": paper[2].ell.bit_length() - 1}))
    rem = params.check_remark3(paper, params.PAPER)
    lemmas.append(_lemma("paper:schedule_inequalities", rem.all_hold(),
                         [{"k": k, "item": v.item} for k, v in rem.failures()]))
    toy = {"t1": params.TOY_SCHEDULES["t1"]}
    hier = Hierarchy(params.compute_states(toy["t1"], 5), cap=args.materialize_cap)
    f1 = list(language.forbidden_slice(1, hier).words())
    f2 = list(language.forbidden_slice(2, hier).words())
    c2 = language.language_slice(2, hier).count
    lemmas.append(_lemma("language_ground_truth", f1 == [] and f2 == ["00"] and c2 == 8,
                         {"F1": f1, "F2": f2, "C2": c2}))
    names = list(params.TOY_SCHEDULES) if args.all_schedules else ["t1"]
    for name in names:
        lemmas.extend(_report_schedule(name, params.TOY_SCHEDULES[name], args))
    for name, sched in params.REMARK3_TOY_SCHEDULES.items():
        rem = params.check_remark3(params.compute_states(sched, sched.max_level), params.TOY)
        lemmas.append(_lemma(f"{name}:schedule_inequalities", rem.all_hold(),
                             [{"k": k, "item": v.item} for k, v in rem.failures()]))
    try:
        rows = thermo.chaotic_report([thermo.surrogate_inputs(paper, 2, args.K)], args.precision)
        lemmas.append(_lemma("bounds:chaotic_roundtrip", all(r.roundtrip_ok for r in rows),
                             [r.to_json() for r in rows]))
    except SubshiftError as exc:
        lemmas.append(_lemma("bounds:chaotic_roundtrip", False, str(exc)))
    out = _Out(args.format)
    out.add({"record": "report", "seed": args.seed, "pass": all(x["pass"] for x in lemmas), "lemmas": lemmas})
    return out


# ---------------------------------------------------------------------------
# argument parsing

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", choices=(params.PAPER, params.TOY), default=params.TOY)
    common.add_argument("--schedule", default="t1", help="builtin toy schedule name or JSON file")
    common.add_argument("--cap", type=int, default=params.DEFAULT_PAPER_CAP, help="paper-exact level cap")
    common.add_argument("--levels", type=int, default=None)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("json", "csv", "pretty"), default="json")
    common.add_argument("--out", default=None)
    common.add_argument("--precision", type=int, default=thermo.DEFAULT_PRECISION)
    common.add_argument("--materialize-cap", type=int, default=DEFAULT_MATERIALIZE_CAP)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--K", type=int, default=1, help="base of the surrogate growth models")
    common.add_argument("--quiet", action="store_true", help="suppress stderr diagnostics")

    parser = _Parser(prog="subshiftkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("params", parents=[common], help="parameter states and schedule inequalities")
    p.add_argument("--summary", action="store_true", help="abbreviate integers above 256 bits")
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("forbidden", parents=[common], help="forbidden words by length")
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--minimal", action="store_true")
    p.set_defaults(func=cmd_forbidden)

    p = sub.add_parser("language", parents=[common], help="complexity function")
    p.add_argument("--n-max", type=int, required=True)
    p.set_defaults(func=cmd_language)

    p = sub.add_parser("reconstruct", parents=[common], help="local versus global admissibility")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--n-max", type=int, default=None)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("overlaps", parents=[common], help="suffix/prefix overlap classes")
    p.add_argument("--k", type=int, default=None)
    p.set_defaults(func=cmd_overlaps)

    p = sub.add_parser("grid", parents=[common], help="two-dimensional pattern checks")
    p.add_argument("--check", choices=("admissibility", "frequency", "ijk", "density"), default="admissibility")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--side", type=int, default=None)
    p.add_argument("--generator", choices=("mixed",) + GENERATORS, default="mixed")
    p.add_argument("--blocks", type=int, default=3, help="blocks per side for density patterns")
    p.add_argument("--D", type=int, default=thermo.DEFAULT_D)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("bounds", parents=[common], help="entropy and pressure bounds")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--inputs", default=None, help="JSON file with R_prime, C_prime, ... per level")
    p.add_argument("--mu", default="1", help="mu_complement as a rational")
    p.add_argument("--form", choices=(thermo.PROOF, thermo.STATEMENT), default=thermo.PROOF)
    p.add_argument("--D", type=int, default=thermo.DEFAULT_D)
    p.add_argument("--chaotic", action="store_true", help="per-level double-estimate table")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("report", parents=[common], help="run every check and summarize")
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--all-schedules", action="store_true")
    p.set_defaults(func=cmd_report)
    return parser


def _validate(args):
    for name in ("levels", "n_max", "n", "samples", "k"):
        v = getattr(args, name, None)
        if v is not None and v < 0:
            raise BadInput(f"--{name.replace('_', '-')} must be >= 0")
    if args.workers < 1:
        raise BadInput("--workers must be >= 1")
    if args.precision < 5:
        raise BadInput("--precision must be >= 5")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _validate(args)
        t0 = time.perf_counter()
        text = args.func(args).render()
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        _note(args, command=args.command, seconds=round(time.perf_counter() - t0, 6))
    except SubshiftError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, RecursionError, MemoryError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
