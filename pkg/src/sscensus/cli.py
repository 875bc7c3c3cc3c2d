"""Command-line front end: constants, censuses, Hurwitz and L-sums, heuristic, checks, demos."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from .census import (
    CurveBox,
    convergence_report,
    cross_identity_check,
    hurwitz_average,
    lfunc_prime_sum,
    predicted,
)
from .classnum import DiscriminantError, hurwitz
from .constants import (
    Cyclotomic,
    PrimeSet,
    PrimeSetError,
    Quadratic,
    exact_pi_hint,
    k_constant,
    split_prime_set,
)
from .curves import CurveError, find_four_torsion_curve, torsion_4_obstruction_demo, torsion_order_bound
from .heuristic import (
    HeuristicParams,
    IncompatibleCongruences,
    bias_ratio,
    model_normalizer,
    predicted_constant,
    sato_tate_histogram,
)
from .verify import run_checks

CENSUS_FIELDS = (
    "x",
    "A",
    "B",
    "prime_set",
    "empirical_avg",
    "hurwitz_avg",
    "lsum_over_x",
    "predicted",
    "ratio_emp_pred",
    "ratio_hur_pred",
)

EXIT_OK, EXIT_USAGE, EXIT_INVARIANT = 0, 1, 2


class UsageError(Exception):
    pass


class InvariantViolation(Exception):
    pass


class PrimeSetSpecError(PrimeSetError):
    def __init__(self, spec: str, pos: int, msg: str):
        super().__init__(f"{msg} at position {pos} in {spec!r}")
        self.pos = pos


_CLASSES = re.compile(r"\s*(-?\d+(?:\s*,\s*-?\d+)*)\s+mod\s+(\d+)\s*$")
_SPLIT = re.compile(r"split:Q\((sqrt|zeta):(-?\d+)\)$")


def parse_prime_set(spec: str) -> PrimeSet:
    """'all', 'c mod m', 'c1,c2 mod m', 'split:Q(sqrt:D)' or 'split:Q(zeta:m)'."""
    s = spec.strip()
    if s == "all":
        return PrimeSet.all_primes()
    if s.startswith("split:"):
        mt = _SPLIT.match(s)
        if not mt:
            pos = len("split:")
            if s[pos : pos + 2] != "Q(":
                raise PrimeSetSpecError(spec, pos, "expected 'Q('")
            raise PrimeSetSpecError(spec, pos + 2, "expected 'sqrt:<int>)' or 'zeta:<int>)'")
        kind, n = mt.group(1), int(mt.group(2))
        return split_prime_set(Quadratic(n) if kind == "sqrt" else Cyclotomic(n))
    mt = _CLASSES.match(s)
    if not mt:
        i = s.find(" mod ")
        if i < 0:
            raise PrimeSetSpecError(spec, len(s), "expected 'all', '<residues> mod <m>' or 'split:...'")
        bad = next((j for j, ch in enumerate(s[:i]) if not (ch.isdigit() or ch in ", -")), i)
        raise PrimeSetSpecError(spec, bad, "bad residue list")
    residues = [int(r) for r in mt.group(1).split(",")]
    m = int(mt.group(2))
    if m < 1:
        raise PrimeSetSpecError(spec, mt.start(2), "modulus must be positive")
    return PrimeSet(m, frozenset(residues))


@dataclass
class RunConfig:
    subcommand: str
    prime_set_spec: str = "all"
    A: int | None = None
    B: int | None = None
    x_grid: list[int] = field(default_factory=list)
    minimal: bool = False
    workers: int | None = None
    output_format: str = "csv"
    output_path: str | None = None
    extra: dict = field(default_factory=dict)


# -- formatting ------------------------------------------------------------------------


def fmt_real(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def _json_value(v):
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, float):
        return float(f"{v:.12g}")
    return v


def render(rows: list[dict], fmt: str, single: bool = False, plot_cols: tuple[str, ...] | None = None, title: str = "") -> str:
    if fmt == "json":
        data = [{k: _json_value(v) for k, v in r.items()} for r in rows]
        return json.dumps(data[0] if single and len(data) == 1 else data, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        fields = list(rows[0]) if rows else list(plot_cols or ())
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(fields)
        for r in rows:
            w.writerow([fmt_real(r.get(k, "")) for k in fields])
        return buf.getvalue()
    if fmt == "gnuplot":
        cols = plot_cols or tuple(k for k in (rows[0] if rows else {}) if not isinstance(rows[0][k], str))
        lines = []
        if title:
            lines.append(f"# {title}")
        lines.append("# " + " ".join(cols))
        lines += [" ".join(fmt_real(r[c]) for c in cols) for r in rows]
        return "\n".join(lines) + "\n"
    raise UsageError(f"unknown format {fmt!r}")


# -- subcommands --------------------------------------------------------------------------


def _need_grid(cfg: RunConfig) -> list[int]:
    if not cfg.x_grid:
        raise UsageError("give --x or --x-grid")
    if cfg.x_grid != sorted(cfg.x_grid):
        raise UsageError("--x-grid must be ascending")
    return cfg.x_grid


def cmd_constants(cfg: RunConfig) -> str:
    ps = parse_prime_set(cfg.prime_set_spec)
    res = k_constant(ps)
    row = {
        "prime_set": ps.label,
        "modulus": ps.m,
        "density": res.density,
        "K": res.K,
        "C": res.C,
        "C_exact_hint": exact_pi_hint(res.C),
        "bias_ratio": bias_ratio(ps),
    }
    return render([row], cfg.output_format if cfg.output_format != "gnuplot" else "json", single=True)


def cmd_census(cfg: RunConfig) -> str:
    ps = parse_prime_set(cfg.prime_set_spec)
    if cfg.A is None or cfg.B is None:
        raise UsageError("census needs --A and --B")
    grid = _need_grid(cfg)
    if grid[0] < 5:
        raise UsageError("grid points must be >= 5")
    try:
        box = CurveBox(cfg.A, cfg.B, cfg.minimal)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    with_cm = bool(cfg.extra.get("cm"))
    reports = convergence_report(ps, box, grid, workers=cfg.workers, with_cm=with_cm)
    rows = [r.row() for r in reports]
    title = f"census {ps.label} A={box.A} B={box.B} minimal={box.minimal_only}; averages normalised by 4AB"
    return render(rows, cfg.output_format, plot_cols=("x", "empirical_avg", "predicted"), title=title)


def cmd_hurwitz(cfg: RunConfig) -> str:
    Ds = cfg.extra.get("D") or []
    if Ds:
        rows = []
        for D in Ds:
            try:
                rows.append({"D": D, "H": hurwitz(D).value})
            except DiscriminantError as exc:
                raise UsageError(str(exc)) from exc
        return render(rows, cfg.output_format if cfg.output_format != "gnuplot" else "csv")
    ps = parse_prime_set(cfg.prime_set_spec)
    C = k_constant(ps).C
    rows = []
    for x in _need_grid(cfg):
        hav = hurwitz_average(ps, x)
        pred = predicted(C, x)
        row = {"x": x, "prime_set": ps.label, "hurwitz_avg": hav, "predicted": pred, "ratio_hur_pred": hav / pred}
        if cfg.extra.get("cross"):
            lhs, rhs = cross_identity_check(ps, x)
            if abs(lhs - rhs) > 1e-9 * max(1.0, lhs):
                raise InvariantViolation(f"cross identity fails at x={x}: {lhs!r} vs {rhs!r}")
            row["cross_rhs"] = rhs
        rows.append(row)
    return render(rows, cfg.output_format, plot_cols=("x", "hurwitz_avg", "predicted"))


def cmd_lsum(cfg: RunConfig) -> str:
    ps = parse_prime_set(cfg.prime_set_spec)
    K = k_constant(ps).K
    rows = []
    for x in _need_grid(cfg):
        s = lfunc_prime_sum(ps, x)
        rows.append({"x": x, "prime_set": ps.label, "lsum": s, "lsum_over_x": s / x, "K": K, "ratio": s / (K * x)})
    return render(rows, cfg.output_format, plot_cols=("x", "lsum_over_x", "K"))


def cmd_heuristic(cfg: RunConfig) -> str:
    ps = parse_prime_set(cfg.prime_set_spec)
    e = cfg.extra
    try:
        params = HeuristicParams(e.get("M", 1), e.get("k", 1), e.get("n", 1))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    row = {
        "M": params.M,
        "k": params.k,
        "n": params.n,
        "predicted_constant": predicted_constant(params),
        "prime_set": ps.label,
        "C_P": k_constant(ps).C,
        "bias_ratio": bias_ratio(ps),
    }
    p = e.get("p")
    if p is not None:
        try:
            c = model_normalizer(p, params.M, params.k)
        except IncompatibleCongruences as exc:
            raise UsageError(str(exc)) from exc
        row["p"] = p
        row["normalizer"] = c
        row["normalizer_times_2sqrtp"] = 2 * math.sqrt(p) * c
    return render([row], cfg.output_format if cfg.output_format != "gnuplot" else "json", single=True)


def cmd_verify(cfg: RunConfig) -> str:
    checks = run_checks()
    width = max(len(c.name) for c in checks)
    lines = [f"{'PASS' if c.ok else 'FAIL'}  {c.name:<{width}}  {c.detail}" for c in checks]
    out = "\n".join(lines) + "\n"
    if not all(c.ok for c in checks):
        raise InvariantViolation(out)
    return out


def cmd_demo(cfg: RunConfig) -> str:
    which = cfg.extra.get("which", "torsion")
    x = cfg.x_grid[-1] if cfg.x_grid else None
    if which == "torsion":
        a, b, P = find_four_torsion_curve()
        demo = torsion_4_obstruction_demo(a, b, x or 10**4)
        residues = sorted({r for p, r in demo.primes if p > 37})
        rows = [{"p": p, "p_mod_4": r} for p, r in demo.primes]
        pt = "(" + ", ".join(fmt_real(c) if c.denominator > 1 else str(c.numerator) for c in P) + ")"
        head = (
            f"# E_({a},{b}) has the rational point {pt} of order 4 (torsion bound {torsion_order_bound(a, b)}); "
            f"supersingular primes above 37 lie in residues {residues} mod 4\n"
        )
        return head + render(rows, cfg.output_format)
    if which == "sato-tate":
        a, b = cfg.extra.get("a", 1), cfg.extra.get("b", 1)
        try:
            h = sato_tate_histogram(a, b, x or 10**4, cfg.extra.get("bins", 20), workers=cfg.workers)
        except (ValueError, CurveError) as exc:
            raise UsageError(str(exc)) from exc
        rows = [
            {"theta_lo": float(lo), "theta_hi": float(hi), "mass": float(m), "sato_tate": float(s)}
            for lo, hi, m, s in zip(h.edges[:-1], h.edges[1:], h.mass, h.expected)
        ]
        head = f"# E_({a},{b}), {h.count} good primes <= {h.x}, sup-norm CDF distance {h.distance:.12g}\n"
        return head + render(rows, cfg.output_format)
    raise UsageError(f"unknown demo {which!r}")


COMMANDS = {
    "constants": cmd_constants,
    "census": cmd_census,
    "hurwitz": cmd_hurwitz,
    "lsum": cmd_lsum,
    "heuristic": cmd_heuristic,
    "verify": cmd_verify,
    "demo": cmd_demo,
}


def run(cfg: RunConfig) -> int:
    try:
        text = COMMANDS[cfg.subcommand](cfg)
    except (UsageError, PrimeSetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvariantViolation as exc:
        print(f"invariant violation:\n{exc}", file=sys.stderr)
        return EXIT_INVARIANT
    if cfg.output_path:
        with open(cfg.output_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- argument parsing ---------------------------------------------------------------------


def _int_list(s: str) -> list[int]:
    try:
        return [int(v) for v in s.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}") from exc


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit with 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--set", dest="prime_set", default="all", help="prime set: all | '1,4 mod 5' | split:Q(sqrt:-3) | split:Q(zeta:15)")
    common.add_argument("--format", choices=("csv", "json", "gnuplot"), default=None)
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--workers", type=int, help="worker processes (default $CENSUS_WORKERS, then CPU count)")
    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--x", type=int, help="single bound")
    grid.add_argument("--x-grid", type=_int_list, help="ascending comma-separated bounds")

    parser = _Parser(prog="sscensus", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    sub.add_parser("constants", parents=[common], help="K_P, C_P and the bias ratio")

    p = sub.add_parser("census", parents=[common, grid], help="family census against the prediction")
    p.add_argument("--A", type=int, required=True)
    p.add_argument("--B", type=int, required=True)
    p.add_argument("--minimal", action="store_true", help="restrict to minimal models")
    p.add_argument("--cm", action="store_true", help="add the CM sub-count column")

    p = sub.add_parser("hurwitz", parents=[common, grid], help="H(D) values or the Hurwitz average")
    p.add_argument("--D", type=_int_list, help="discriminants, e.g. --D=-20,-28")
    p.add_argument("--cross", action="store_true", help="also check the Hurwitz / L-value identity")

    sub.add_parser("lsum", parents=[common, grid], help="sum of L(1, chi_d) log p against K_P x")

    p = sub.add_parser("heuristic", parents=[common], help="model constant, bias and normaliser")
    p.add_argument("--M", type=int, default=1)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--p", type=int, help="prime for the normaliser c_p")

    sub.add_parser("verify", parents=[common], help="run the invariant suite")

    p = sub.add_parser("demo", parents=[common, grid], help="torsion-4 obstruction or Sato-Tate histogram")
    p.add_argument("which", nargs="?", choices=("torsion", "sato-tate"), default="torsion")
    p.add_argument("--a", type=int, default=1)
    p.add_argument("--b", type=int, default=1)
    p.add_argument("--bins", type=int, default=20)
    return parser


_DEFAULT_FORMAT = {"constants": "json", "heuristic": "json"}


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    grid = list(ns.x_grid or []) if hasattr(ns, "x_grid") else []
    if getattr(ns, "x", None) is not None:
        grid = sorted(set(grid) | {ns.x})
    if ns.workers is not None and ns.workers < 1:
        raise UsageError("--workers must be >= 1")
    extra = {k: v for k, v in vars(ns).items() if k in ("cm", "D", "cross", "M", "k", "n", "p", "which", "a", "b", "bins")}
    return RunConfig(
        subcommand=ns.subcommand,
        prime_set_spec=ns.prime_set,
        A=getattr(ns, "A", None),
        B=getattr(ns, "B", None),
        x_grid=grid,
        minimal=getattr(ns, "minimal", False),
        workers=ns.workers,
        output_format=ns.format or _DEFAULT_FORMAT.get(ns.subcommand, "csv"),
        output_path=ns.out,
        extra=extra,
    )


def main(argv: list[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return run(cfg)


if __name__ == "__main__":
    raise SystemExit(main())
