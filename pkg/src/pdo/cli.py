"""Command-line entry point: ``pdo <subcommand> ...``.

Every report is a JSON object carrying the command, the library version, the
full run configuration, a status and the result.  Exit codes: 0 success,
2 verified negative answer, 1 error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from . import __version__
from .algebra import INF, Window
from .diffop import DiffOp, op_commutator
from .errors import NegativeResult, NoConductorFound, ParseError, PdoError, PrecisionExhausted
from .parser import parse_operator, parse_poly

EXIT_OK, EXIT_ERROR, EXIT_NEGATIVE = 0, 1, 2

# how far past the target the build precision may be raised
PRECISION_HEADROOM = 16


@dataclass(frozen=True)
class RunConfig:
    precision: int = 8
    mmax: int = 40
    window_tmin: int = -64
    window_tmax: int = 40
    window_umax: int = 48
    budget: int = 10
    rank_search: int = 4
    nmax: int = 10
    seed: int = 0
    out: Optional[str] = None
    format: str = "json"

    def __post_init__(self):
        for name in ("precision", "mmax", "budget", "rank_search", "nmax"):
            if getattr(self, name) < 1:
                raise ValueError(f"--{name.replace('_', '-')} must be positive")
        if not self.window_tmin < 0 < self.window_tmax or self.window_umax < 0:
            raise ValueError("window needs tmin < 0 < tmax and umax >= 0")

    @property
    def window(self) -> Window:
        return Window(self.window_tmin, self.window_tmax, self.window_umax)

    def to_json(self) -> dict:
        return asdict(self)


class Negative(Exception):
    """Raised by a handler that still has a report to emit."""

    def __init__(self, message: str, result: dict):
        super().__init__(message)
        self.result = result


def _split(text: str) -> List[str]:
    return [s.strip() for s in text.split(",") if s.strip()]


def _polys(text: Optional[str]) -> list:
    return [parse_poly(s) for s in _split(text or "")]


# ---------------------------------------------------------------------------
# commute
# ---------------------------------------------------------------------------


def _read_operator_sources(files: Sequence[str], exprs: Sequence[str]) -> Tuple[List[str], List[DiffOp]]:
    """Expression strings and ready-made JSON operators, in input order."""
    texts: List[str] = []
    fixed: List[DiffOp] = []
    for f in files:
        body = Path(f).read_text()
        if not body.strip():
            raise ParseError(f"{f}: empty input")
        if body.lstrip()[0] in "[{":
            data = json.loads(body)
            if isinstance(data, dict):
                data = data.get("operators", [data] if "terms" in data else [])
            if not data:
                raise ParseError(f"{f}: no operators")
            for d in data:
                if isinstance(d, str):
                    texts.append(d)
                else:
                    fixed.append(DiffOp.from_json(d))
        else:
            lines = [ln.strip() for ln in body.splitlines()]
            lines = [ln for ln in lines if ln and not ln.startswith("#")]
            if not lines:
                raise ParseError(f"{f}: no expressions")
            texts.extend(lines)
    texts.extend(exprs)
    return texts, fixed


def _parse_all(texts: Sequence[str], precision: int, nvars: Optional[int] = None) -> List[DiffOp]:
    if nvars is None:
        nvars = max((parse_operator(t, None, 1).nvars for t in texts), default=1)
    return [parse_operator(t, nvars, precision) for t in texts]


def _commutators(ops: Sequence[DiffOp]):
    out = []
    for i in range(len(ops)):
        for j in range(i + 1, len(ops)):
            out.append((i, j, op_commutator(ops[i], ops[j])))
    return out


def _prec(p):
    return None if p == INF else p


def cmd_commute(args, cfg: RunConfig) -> dict:
    texts, fixed = _read_operator_sources(args.files, args.expr or [])
    if len(texts) + len(fixed) < 2:
        raise ParseError("need at least two operators")
    target = cfg.precision
    nvars = fixed[0].nvars if fixed else None
    build = target
    while True:
        ops = _parse_all(texts, build, nvars) + fixed
        comms = _commutators(ops)
        if any(not c.is_zero() for _, _, c in comms):
            break
        if min(c.precision for _, _, c in comms) >= target:
            break
        if fixed and not texts:
            raise PrecisionExhausted(f"stored operator precision certifies less than M^{target}")
        if build >= target + PRECISION_HEADROOM:
            raise PrecisionExhausted(f"could not certify M^{target} with build precision up to {build}")
        build += 1
    pairs = []
    nonzero = False
    for i, j, c in comms:
        zero = c.is_zero()
        nonzero |= not zero
        pairs.append({
            "i": i,
            "j": j,
            "vanishes": zero,
            "certified_mod": _prec(c.precision),
            "residual": None if zero else c.format(),
        })
    result = {
        "inputs": list(texts) + [P.format() for P in fixed],
        "nvars": ops[0].nvars,
        "target_precision": target,
        "build_precision": build,
        "pairs": pairs,
    }
    if nonzero:
        raise Negative("some commutators are nonzero", result)
    return result


# ---------------------------------------------------------------------------
# analyze / schur
# ---------------------------------------------------------------------------


def cmd_analyze(args, cfg: RunConfig) -> dict:
    from .spectral import analyze_ring

    gens: List[str] = list(args.gen or [])
    fixed: List[DiffOp] = []
    if args.ring:
        data = json.loads(Path(args.ring).read_text())
        items = data.get("generators", []) if isinstance(data, dict) else data
        for g in items:
            if isinstance(g, str):
                gens.append(g)
            else:
                fixed.append(DiffOp.from_json(g))
    if not gens and not fixed:
        raise ParseError("no ring generators given")
    nvars = fixed[0].nvars if fixed else None
    ops = _parse_all(gens, cfg.precision, nvars) + fixed
    report = analyze_ring(ops, mmax=cfg.mmax, data_rank=args.rank, seed=cfg.seed)
    out = report.to_json()
    out["generators"] = list(gens) + [P.format() for P in fixed]
    return out


def cmd_schur(args, cfg: RunConfig) -> dict:
    from .schur import SubspaceUT, analyze_pair

    data = json.loads(Path(args.pair).read_text())
    w = cfg.window.to_json()
    a_json = dict(data["A"])
    a_json.setdefault("window", w)
    w_json = dict(data["W"])
    w_json.setdefault("window", w)
    A = SubspaceUT.from_json(a_json)
    # "over": "A" makes W the A-module spanned by its generators
    W = SubspaceUT.from_json(w_json, over=A if w_json.get("over") == "A" else None)
    rep = analyze_pair(A, W, d=args.d, n_max=cfg.nmax, r_max=cfg.rank_search, a_levels=cfg.mmax)
    result = rep.to_json()
    if not rep.stable:
        raise Negative("A_m W_n is not contained in W_{m+n} at some explored level", result)
    return result


# ---------------------------------------------------------------------------
# glue / cm / cycle
# ---------------------------------------------------------------------------


def cmd_glue(args, cfg: RunConfig) -> dict:
    from .glue import GlueInput, check_glue, conductor, glue_affine

    inp = GlueInput(_polys(args.ideal), _polys(args.subring))
    res = glue_affine(inp, cfg.budget)
    out = res.to_json()
    out["two_sided_check"] = check_glue(res, inp)
    try:
        out["conductor"] = _fmt_all(conductor(res.algebra, cfg.budget))
    except NoConductorFound as exc:
        out["conductor"] = None
        raise Negative(str(exc), out)
    return out


def _fmt_all(polys):
    from .glue import fmt

    return [fmt(p) for p in polys]


def cmd_cm(args, cfg: RunConfig) -> dict:
    from .cmtools import s2_closure
    from .glue import MonomialAlgebra, conductor

    A = MonomialAlgebra(_polys(args.algebra))
    clo = s2_closure(A, cfg.budget, seed=cfg.seed)
    out = {"is_cm": not clo.trace}
    out.update(clo.to_json())
    try:
        out["conductor"] = _fmt_all(conductor(A, cfg.budget))
    except NoConductorFound:
        out["conductor"] = None
    return out


def cmd_cycle(args, cfg: RunConfig) -> dict:
    from .algebra import Poly
    from .cmtools import CurveLocalization, cycle_of

    num = parse_poly(args.fn)
    den = parse_poly(args.den) if args.den else Poly.one(2)
    primes = [CurveLocalization(p, args.assume_irreducible) for p in _polys(args.primes)]
    if not primes:
        raise ParseError("no primes given")
    cyc = cycle_of(num, den, primes)
    out = {"function": args.fn, "denominator": args.den or "1"}
    out.update(cyc.to_json())
    out["cycle"] = cyc.format()
    return out


def cmd_selftest(args, cfg: RunConfig) -> dict:
    from .selftest import run

    results = run(echo=lambda s: print(s, file=sys.stderr))
    out = {"criteria": results, "all_passed": all(r["passed"] for r in results)}
    if not out["all_passed"]:
        raise PdoError("acceptance criteria failed: " + ", ".join(str(r["criterion"]) for r in results if not r["passed"]))
    return out


# ---------------------------------------------------------------------------
# rendering and dispatch
# ---------------------------------------------------------------------------


def render_text(report: dict) -> str:
    lines = [f"pdo {report['command']} ({report['status']})"]
    if report.get("message"):
        lines.append(f"  message: {report['message']}")
    for k, v in (report.get("result") or {}).items():
        if isinstance(v, (dict, list)):
            v = json.dumps(v, separators=(", ", ": "))
        lines.append(f"  {k}: {v}")
    return "\n".join(lines) + "\n"


def render(report: dict, fmt: str) -> str:
    if fmt == "text":
        return render_text(report)
    return json.dumps(report, indent=2) + "\n"


COMMANDS = {
    "commute": cmd_commute,
    "analyze": cmd_analyze,
    "schur": cmd_schur,
    "glue": cmd_glue,
    "cm": cmd_cm,
    "cycle": cmd_cycle,
    "selftest": cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    d = RunConfig()
    common.add_argument("--precision", type=int, default=d.precision, help="truncation order N (target for commute)")
    common.add_argument("--mmax", type=int, default=d.mmax, help="largest filtration degree explored")
    common.add_argument("--window-tmin", type=int, default=d.window_tmin)
    common.add_argument("--window-tmax", type=int, default=d.window_tmax)
    common.add_argument("--window-umax", type=int, default=d.window_umax)
    common.add_argument("--budget", type=int, default=d.budget, help="degree budget for glue/cm")
    common.add_argument("--rank-search", type=int, default=d.rank_search, help="largest rank r tried")
    common.add_argument("--nmax", type=int, default=d.nmax, help="filtration levels checked in schur")
    common.add_argument("--seed", type=int, default=d.seed)
    common.add_argument("--out", help="write the JSON report here")
    common.add_argument("--format", choices=("json", "text"), default=d.format, help="stdout format")

    ap = argparse.ArgumentParser(prog="pdo", description="Commutative rings of partial differential operators.")
    ap.add_argument("--version", action="version", version=f"pdo {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("commute", parents=[common], help="pairwise commutators of operators")
    p.add_argument("files", nargs="*", help="JSON operator files or one expression per line")
    p.add_argument("--expr", action="append", help="operator expression (repeatable)")

    p = sub.add_parser("analyze", parents=[common], help="spectral data of a commutative ring")
    p.add_argument("--ring", help="JSON file with a 'generators' list")
    p.add_argument("--gen", action="append", help="generator expression (repeatable)")
    p.add_argument("--rank", type=int, help="data rank r for the coherence flag")

    p = sub.add_parser("schur", parents=[common], help="Schur-pair analysis in k[[u]]((t))")
    p.add_argument("--pair", required=True, help="JSON file with subspaces 'A' and 'W'")
    p.add_argument("--d", type=int, default=1, help="Cartier multiple d")

    p = sub.add_parser("glue", parents=[common], help="generators of R + I in k[x, h]")
    p.add_argument("--ideal", required=True, help="comma-separated ideal generators")
    p.add_argument("--subring", default="", help="comma-separated subring generators")

    p = sub.add_parser("cm", parents=[common], help="Cohen-Macaulay test and S2 closure")
    p.add_argument("--algebra", required=True, help="comma-separated algebra generators")

    p = sub.add_parser("cycle", parents=[common], help="Weil cycle of a rational function")
    p.add_argument("--fn", required=True, help="numerator")
    p.add_argument("--den", help="denominator (default 1)")
    p.add_argument("--primes", required=True, help="comma-separated primes of k[x, h]")
    p.add_argument("--assume-irreducible", action="store_true", help="trust nonlinear primes")

    sub.add_parser("selftest", parents=[common], help="run the acceptance criteria")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = RunConfig(
            precision=args.precision,
            mmax=args.mmax,
            window_tmin=args.window_tmin,
            window_tmax=args.window_tmax,
            window_umax=args.window_umax,
            budget=args.budget,
            rank_search=args.rank_search,
            nmax=args.nmax,
            seed=args.seed,
            out=args.out,
            format=args.format,
        )
    except ValueError as exc:
        ap.error(str(exc))
    report = {"command": args.command, "version": __version__, "config": cfg.to_json()}
    code = EXIT_OK
    try:
        report["status"] = "ok"
        report["result"] = COMMANDS[args.command](args, cfg)
    except Negative as exc:
        report["status"] = "negative"
        report["message"] = str(exc)
        report["result"] = exc.result
        code = EXIT_NEGATIVE
    except NegativeResult as exc:
        report["status"] = "negative"
        report["message"] = f"{type(exc).__name__}: {exc}"
        report["result"] = None
        code = EXIT_NEGATIVE
    except (PdoError, ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"pdo {args.command}: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if cfg.out:
        Path(cfg.out).write_text(render(report, "json"))
    sys.stdout.write(render(report, cfg.format))
    return code


if __name__ == "__main__":
    sys.exit(main())
