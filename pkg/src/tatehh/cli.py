"""Command line front end.

    tatehh <command> [input.json] [-p P] [--max-degree D] [--window=LO..HI]
           [--json] [--strict] [--verbose]

Inputs are file paths or corpus names (see ``tatehh selftest``).  Exit codes:
0 on success, 1 on parse/validation errors or failed self-tests, 2 for an
inconclusive verdict under --strict.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
import warnings
from dataclasses import dataclass, field
from typing import Any

from . import problem
from .complexes import Convention
from .dg_algebra import DgBimodule, validate
from .hochschild import CyclicBarObject, compare_subdivision, hh, hh_via_resolution, subdivision_model
from .problem import ParseError, ProblemSpec
from .tate import (
    DEFAULT_MARGIN,
    EquivariantComplex,
    MarginError,
    orbits_fixed_transfer,
    tate_complex,
    tate_homology,
    transfer_cone,
)
from .tate_ss import (
    DEFAULT_BUDGET,
    auto_top,
    convergence_check,
    d1_triviality_check,
    degeneration_check,
    spectral_sequence,
)

COMMANDS = ("hh", "tate", "ss", "d1check", "degeneration", "subdivision-selftest", "selftest")
DEFAULT_D = 6
DEFAULT_WINDOW = (-3, 4)

EXIT_OK, EXIT_INPUT, EXIT_INCONCLUSIVE = 0, 1, 2


@dataclass
class RunReport:
    command: str
    input: str
    parameters: dict[str, Any]
    results: dict[str, Any]
    status: str = "ok"
    notes: list[str] = field(default_factory=list)
    seconds: float = 0.0
    input_digest: str = ""

    def payload(self) -> dict[str, Any]:
        return {"command": self.command, "input": self.input, "input_digest": self.input_digest,
                "parameters": self.parameters, "results": self.results, "status": self.status,
                "notes": self.notes}

    @property
    def digest(self) -> str:
        """sha256 of the report without timing."""
        blob = json.dumps(_jsonable(self.payload()), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def to_json(self) -> str:
        out = _jsonable(self.payload())
        out["digest"] = self.digest
        out["seconds"] = round(self.seconds, 3)
        return json.dumps(out, sort_keys=True)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "item"):
        return x.item()
    return x


# ---------------------------------------------------------------------------
# tables


def _table(headers: list[str], rows: list[list[Any]]) -> str:
    cells = [[str(h) for h in headers]] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def render(report: RunReport) -> str:
    out = [f"# {report.command}  input={report.input}  status={report.status}"]
    out.append("# parameters: " + ", ".join(f"{k}={v}" for k, v in sorted(report.parameters.items())))
    r = report.results
    if "dims" in r:
        out.append(_table(["n", "dim"], [[n, d] for n, d in sorted(r["dims"].items())]))
    if "pages" in r:
        for name, page in r["pages"].items():
            out.append(f"{name}:")
            ts = sorted({t for (s, t) in page})
            ss = sorted({s for (s, t) in page})
            rows = [[t] + [page.get((s, t), "") for s in ss] for t in ts]
            out.append(_table(["t \\ s"] + ss, rows))
    if "differentials" in r and r["differentials"]:
        out.append(_table(["r", "from", "to", "rank"], r["differentials"]))
    if "convergence" in r:
        out.append(_table(["n", "sum E_inf", "dim H_n"], [[n, e, h] for n, (e, h) in sorted(r["convergence"].items())]))
    if "levels" in r:
        out.append(_table(["p", "level", "words", "ok"], r["levels"]))
    if "checks" in r:
        out.append(_table(["check", "result"], [[k, v] for k, v in r["checks"].items()]))
    for key in ("verdict", "hh_total", "e_infinity_totals", "tate_dims", "model_top", "stable",
                "variants_agree", "periodicity", "d1_violations"):
        if key in r:
            out.append(f"{key}: {r[key]}")
    if "representatives" in r:
        for n, reps in sorted(r["representatives"].items()):
            for rep in reps:
                out.append(f"H_{n}: {rep}")
    for note in report.notes:
        out.append(f"note: {note}")
    out.append(f"digest: {report.digest}")
    return "\n".join(out)


# ---------------------------------------------------------------------------
# commands


def _parse_window(text: str | None) -> tuple[int, int] | None:
    if text is None:
        return None
    try:
        lo, hi = text.split("..")
        lo, hi = int(lo), int(hi)
    except ValueError:
        raise ParseError(f"window must look like LO..HI, got {text!r}") from None
    if lo > hi:
        raise ParseError(f"empty window {text}")
    return lo, hi


def _word_label(z, k: int, x: tuple[int, ...]) -> str:
    parts = [z.m.labels[x[0]]] + [z.a.labels[i] for i in x[1:]]
    return "[" + "|".join(parts) + "]"


def _representatives(z: CyclicBarObject, D: int, p: int) -> dict[int, list[str]]:
    c = z.realize(max_total=D + 1)
    cells = z._last_cells
    out: dict[int, list[str]] = {}
    for n in range(0, D + 1):
        h = c.homology(n, representatives=True)
        labs = []
        for vec in h.representatives:
            terms = []
            for s, t, off, k in c.cells.get(n, ()):
                for pos in range(k):
                    v = int(vec[off + pos]) % p
                    if v:
                        w = _word_label(z, s, cells[(s, t)][pos])
                        terms.append(w if v == 1 else f"{v}{w}")
            labs.append(" + ".join(terms))
        if labs:
            out[n] = labs
    return out


def _model(spec: ProblemSpec, p: int, D: int) -> tuple[EquivariantComplex, int]:
    top = auto_top(spec.algebra, spec.module, p, DEFAULT_BUDGET, cap=D)
    return subdivision_model(spec.algebra, spec.module, p, top), top


def _group_order(spec: ProblemSpec, p: int | None) -> int:
    p = spec.p if p is None else p
    if p != spec.p:
        raise ParseError(f"group order {p} must equal the characteristic {spec.p} for Tate constructions")
    return p


def cmd_hh(spec: ProblemSpec, args) -> RunReport:
    D = args.max_degree
    res = hh(spec.algebra, spec.module, D)
    rep = RunReport("hh", spec.name, {"D": D, "truncation": res.truncation},
                    {"dims": res.dims, "stable": res.stable})
    if args.verbose:
        rep.results["representatives"] = _representatives(CyclicBarObject(spec.algebra, spec.module, res.truncation),
                                                          D, spec.p)
    if spec.resolution is not None:
        other = hh_via_resolution(spec.algebra, spec.module, D, spec.resolution)
        rep.results["resolution_dims"] = other
        if any(other.get(n) != v for n, v in res.dims.items()):
            rep.notes.append("supplied resolution gives different dims; it may not be a resolution in this range")
    return rep


def cmd_tate(spec: ProblemSpec, args) -> RunReport:
    p = _group_order(spec, args.p)
    window = args.window or DEFAULT_WINDOW
    model, top = _model(spec, p, args.max_degree)
    lo, hi = window
    full = (lo - DEFAULT_MARGIN, hi + DEFAULT_MARGIN)
    tc = tate_complex(model, Convention.MIXED, full)
    dims = tc.homology_dims(lo, hi)
    params = {"p": p, "window": f"{lo}..{hi}", "margin": DEFAULT_MARGIN, "model_top": top}
    rep = RunReport("tate", spec.name, params,
                    {"dims": dims, "variants_agree": tc.variants_agree, "periodicity": tc.certificate.ok})
    rep.notes.append(f"coefficients: {p}-fold subdivision of the cyclic bar, good truncation at degree {top}")
    return rep


def cmd_ss(spec: ProblemSpec, args) -> RunReport:
    p = _group_order(spec, args.p)
    lo, hi = args.window or DEFAULT_WINDOW
    model, top = _model(spec, p, args.max_degree)
    tc = tate_complex(model, Convention.MIXED, (lo - 1, hi + 1), compare_variants=False)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        ss = spectral_sequence(tc, args.r_max, degrees=(lo, hi))
    conv = convergence_check(ss, tc)
    diffs = []
    for r, ranks in ss.rank_out.items():
        for (s, t), k in sorted(ranks.items()):
            if k:
                diffs.append([r, (s, t), (s - r, t + r - 1), k])
    pages = {"E_1": ss.pages[1]}
    if 2 in ss.pages:
        pages["E_2"] = ss.pages[2]
    pages["E_inf"] = ss.e_infinity()
    params = {"p": p, "window": f"{lo}..{hi}", "r_max": ss.r_max, "stable_page": ss.stable_page, "model_top": top}
    rep = RunReport("ss", spec.name, params, {"pages": pages, "differentials": diffs,
                                              "convergence": conv.rows})
    rep.notes.append(ss.indexing)
    rep.notes.extend(str(w.message) for w in caught)
    if not conv.ok:
        rep.status = "discrepancy"
    return rep


def cmd_d1check(spec: ProblemSpec, args) -> RunReport:
    p = _group_order(spec, args.p)
    if not spec.module_is_regular:
        raise ParseError("d1check needs M = A (omit the module)")
    lo, hi = args.window or DEFAULT_WINDOW
    r = d1_triviality_check(spec.algebra, p, (lo, hi))
    rep = RunReport("d1check", spec.name, {"p": p, "window": f"{lo}..{hi}", "model_top": r.model_top},
                    {"d1_violations": r.violations, "verdict": "trivial" if r.ok else "nontrivial"})
    if not r.ok:
        rep.status = "violation"
    return rep


def cmd_degeneration(spec: ProblemSpec, args) -> RunReport:
    p = _group_order(spec, args.p)
    window = args.window or DEFAULT_WINDOW
    r = degeneration_check(spec.algebra, spec.module, p, args.max_degree, window)
    results = {"verdict": r.verdict, "hh_total": r.hh_total, "dims": r.hh_dims, "model_top": r.model_top,
               "tate_dims": r.tate_dims, "e_infinity_totals": r.e_infinity_totals}
    if args.verbose:
        results["e2_check"] = r.e2_check
    params = {"p": p, "D": args.max_degree, "window": f"{window[0]}..{window[1]}", "classes": list(r.classes)}
    rep = RunReport("degeneration", spec.name, params, results, status=r.verdict, notes=list(r.reasons))
    if spec.expected_smooth is not None:
        rep.notes.append(f"corpus annotation: expected smooth = {'yes' if spec.expected_smooth else 'no'}")
    return rep


def cmd_subdivision(spec: ProblemSpec, args) -> RunReport:
    orders = [args.p] if args.p else [2, 3]
    rows = []
    ok = True
    notes = []
    for q in orders:
        r = compare_subdivision(spec.algebra, spec.module, q, min(3, args.max_degree))
        for lv in r.levels:
            rows.append([q, lv.level, lv.words, "yes" if lv.ok else "NO"])
        notes.extend(r.failures()[:10])
        if r.note:
            notes.append(f"p={q}: {r.note}")
        ok &= r.ok
    rep = RunReport("subdivision-selftest", spec.name, {"orders": orders, "max_level": min(3, args.max_degree)},
                    {"levels": rows}, status="ok" if ok else "failed", notes=notes)
    return rep


def _selftest_one(spec: ProblemSpec) -> dict[str, str]:
    checks: dict[str, str] = {}

    def mark(name, good, detail=""):
        checks[name] = "pass" if good else f"FAIL {detail}".strip()

    mark("validate", not validate(spec.algebra) and not validate(spec.module))
    D = 3
    a = hh(spec.algebra, spec.module, D)
    b = hh_via_resolution(spec.algebra, spec.module, D)
    mark("hh routes agree", a.dims == b, f"{a.dims} vs {b}")
    r = compare_subdivision(spec.algebra, spec.module, 2, 2, max_words=20000)
    mark("subdivision p=2", r.ok, "; ".join(r.failures()[:2]))
    p = spec.p
    model, top = subdivision_model(spec.algebra, spec.module, p, 1), 1
    tc = tate_complex(model, Convention.MIXED, (-4, 5))
    mark("variants agree", bool(tc.variants_agree))
    mark("periodicity", tc.certificate.ok)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ss = spectral_sequence(tc)
    mark("page recurrence", not ss.recurrence_violations())
    mark("convergence", convergence_check(ss, tc).ok)
    cone_dims = transfer_cone(model, (-4, 5)).homology_dims(-3, 4)
    mark("transfer cone", cone_dims == tc.homology_dims(-3, 4))
    return checks


def cmd_selftest(spec: ProblemSpec | None, args) -> RunReport:
    specs = [spec] if spec is not None else problem.corpus()
    checks: dict[str, str] = {}
    for p in (2, 3, 5):
        dims = tate_homology(EquivariantComplex.trivial(p, {0: 1}), (-6, 6))
        checks[f"trivial F_{p}"] = "pass" if set(dims.values()) == {1} else "FAIL"
        dims = tate_homology(EquivariantComplex.regular(p), (-6, 6))
        checks[f"free F_{p}[C_{p}]"] = "pass" if set(dims.values()) == {0} else "FAIL"
    for s in specs:
        for k, v in _selftest_one(s).items():
            checks[f"{s.name}: {k}"] = v
    ok = all(v == "pass" for v in checks.values())
    return RunReport("selftest", spec.name if spec else "corpus", {"inputs": [s.name for s in specs]},
                     {"checks": checks}, status="ok" if ok else "failed")


HANDLERS = {
    "hh": cmd_hh,
    "tate": cmd_tate,
    "ss": cmd_ss,
    "d1check": cmd_d1check,
    "degeneration": cmd_degeneration,
    "subdivision-selftest": cmd_subdivision,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tatehh", description="Hochschild homology and Tate spectral sequences over F_p")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("input", nargs="?", help="problem file or corpus name")
    ap.add_argument("-p", type=int, default=None, help="order of the cyclic group (default: the characteristic)")
    ap.add_argument("--max-degree", "-D", type=int, default=DEFAULT_D, help="top Hochschild degree D")
    ap.add_argument("--window", default=None, help="total-degree window LO..HI (write --window=-3..4)")
    ap.add_argument("--r-max", type=int, default=None, help="last page (default: the degeneration page)")
    ap.add_argument("--json", action="store_true", help="print the report as JSON")
    ap.add_argument("--strict", action="store_true", help="exit 2 on inconclusive verdicts")
    ap.add_argument("--verbose", "-v", action="store_true", help="print cycle representatives and cross-checks")
    return ap


def run(command: str, spec: ProblemSpec | None, args) -> RunReport:
    t0 = time.perf_counter()
    if command == "selftest":
        rep = cmd_selftest(spec, args)
    else:
        if spec is None:
            raise ParseError(f"{command} needs an input file or corpus name")
        rep = HANDLERS[command](spec, args)
    if spec is not None:
        canon = json.dumps(spec.raw, sort_keys=True, separators=(",", ":"))
        rep.input_digest = hashlib.sha256(canon.encode("utf-8")).hexdigest()
    rep.seconds = time.perf_counter() - t0
    return rep


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        args.window = _parse_window(args.window)
        if args.p is not None and args.p < 1:
            raise ParseError("group order must be positive")
        if args.max_degree < 0:
            raise ParseError("--max-degree must be >= 0")
        spec = problem.parse(args.input) if args.input else None
        rep = run(args.command, spec, args)
    except (ParseError, MarginError) as exc:
        msg = {"error": "input", "problems": getattr(exc, "problems", [str(exc)])}
        if args.json:
            print(json.dumps(msg, sort_keys=True))
        else:
            for line in msg["problems"]:
                print(f"error: {line}", file=sys.stderr)
        return EXIT_INPUT
    print(rep.to_json() if args.json else render(rep))
    if rep.status in ("failed", "violation", "discrepancy"):
        return EXIT_INPUT
    if args.strict and rep.status == "inconclusive":
        return EXIT_INCONCLUSIVE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
