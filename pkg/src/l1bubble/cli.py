"""Command-line front end.

Subcommands: ``energy``, ``classify``, ``phase-diagram``, ``optimize`` and
``verify``.  Exit codes: 0 success, 1 verification violations, 2 input
parse errors, 3 domain errors, 4 I/O errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from . import defaults as D
from .bounds import (
    verify_H_functions,
    verify_lemma_appendix,
    verify_lemma_extra,
    verify_p_sum,
)
from .closed_forms import classify, eta_triple, r12, r13, r23
from .energy import energy
from .errors import DomainError, ParamOutOfRange, ParseError
from .lattice import parse_grid
from .optimizer import AnnealSchedule, anneal

EXIT_OK, EXIT_VIOLATIONS, EXIT_PARSE, EXIT_DOMAIN, EXIT_IO = 0, 1, 2, 3, 4

CSV_HEADER = ("eta", "r", "E_I", "E_II", "E_III", "optimal", "boundary")
SELECTORS = ("appendix", "extra", "hfun", "psum", "all")


def _number(text: str) -> Fraction:
    """Exact rational from ``"0.3"``, ``"1/4"`` or ``"1e-3"``."""
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _fmt(x) -> str:
    return "%.12g" % float(x)


@dataclass(frozen=True)
class RunConfig:
    """Validated view of the command line."""

    subcommand: str
    eta: Fraction | None = None
    va: Fraction | None = None
    vb: Fraction | None = None
    cell_size: Fraction = Fraction(1)
    tol: float = D.CLASSIFY_TOL
    res: int | None = None
    seed: int = D.ANNEAL_SEED
    chains: int = D.ANNEAL_CHAINS
    steps_per_cell: int = D.ANNEAL_STEPS_PER_CELL
    out: str | None = None
    fmt: str | None = None
    allow_limit: bool = False
    negative: bool = False
    grid_path: str | None = None
    selector: str = "all"
    eta_range: tuple = (0.0, 2.0)
    r_range: tuple = (0.0, 1.0)

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> "RunConfig":
        cfg = cls(ns.command)
        kw = {}
        for name in ("eta", "cell_size", "tol", "res", "seed", "chains", "out", "allow_limit"):
            if getattr(ns, name, None) is not None:
                kw[name] = getattr(ns, name)
        kw["fmt"] = getattr(ns, "format", None)
        kw["negative"] = bool(getattr(ns, "self_test_negative", False))
        kw["grid_path"] = getattr(ns, "grid", None)
        kw["selector"] = getattr(ns, "selector", "all")
        if getattr(ns, "steps_per_cell", None) is not None:
            kw["steps_per_cell"] = ns.steps_per_cell
        for name in ("eta_range", "r_range"):
            if getattr(ns, name, None) is not None:
                kw[name] = tuple(float(x) for x in getattr(ns, name))
        va, vb, r = getattr(ns, "va", None), getattr(ns, "vb", None), getattr(ns, "r", None)
        if r is not None:
            if va is not None or vb is not None:
                raise ParamOutOfRange("give either --va/--vb or --r, not both")
            if not (0 < r <= 1):
                raise ParamOutOfRange(f"r must lie in (0, 1], got {float(r)}")
            va, vb = Fraction(1), r
        elif (va is None) != (vb is None):
            raise ParamOutOfRange("--va and --vb must be given together")
        if va is not None and not (va > 0 and vb > 0):
            raise ParamOutOfRange("volumes must be positive")
        if kw.get("cell_size", 1) <= 0:
            raise ParamOutOfRange("cell size must be positive")
        if kw.get("tol", 0) < 0:
            raise ParamOutOfRange("tolerance must be non-negative")
        if kw.get("res") is not None and kw["res"] < 2:
            raise ParamOutOfRange("resolution must be at least 2")
        if kw.get("chains", 1) < 1 or kw.get("steps_per_cell", 1) < 1:
            raise ParamOutOfRange("chains and steps must be positive")
        return replace(cfg, va=va, vb=vb, **kw)

    @property
    def ratio(self) -> float:
        if self.va is None:
            raise ParamOutOfRange("give --r or --va/--vb")
        return float(min(self.va, self.vb) / max(self.va, self.vb))


# -- subcommands ------------------------------------------------------------------


def cmd_energy(cfg: RunConfig, stdout) -> int:
    with open(cfg.grid_path, encoding="utf-8") as fh:
        config = parse_grid(fh.read(), cfg.cell_size)
    eta = cfg.eta if cfg.eta is not None else Fraction(1)
    br = energy(config, eta, allow_limit=cfg.allow_limit)
    print(f"cells_a     {config.n_a}", file=stdout)
    print(f"cells_b     {config.n_b}", file=stdout)
    print(f"perim_a     {_fmt(br.perim_a)}", file=stdout)
    print(f"perim_b     {_fmt(br.perim_b)}", file=stdout)
    print(f"interface   {_fmt(br.interface)}", file=stdout)
    print(f"perim_union {_fmt(br.perim_union)}", file=stdout)
    print(f"total       {float(br.total)!r}", file=stdout)
    print(f"union_form  {float(br.total_union_form)!r}", file=stdout)
    return EXIT_OK


def cmd_classify(cfg: RunConfig, stdout) -> int:
    eta = float(cfg.eta if cfg.eta is not None else 1)
    c = classify(cfg.ratio, eta, cfg.tol)
    print(f"r           {_fmt(c.r)}", file=stdout)
    print(f"eta         {_fmt(c.eta)}", file=stdout)
    print(f"E_I         {_fmt(c.E_I)}", file=stdout)
    print(f"E_II        {_fmt(c.E_II)}", file=stdout)
    print(f"E_III       {_fmt(c.E_III)}", file=stdout)
    print(f"optimal     {c.optimal_label}", file=stdout)
    print(f"boundary    {'yes' if c.boundary else 'no'}", file=stdout)
    print(f"curve       {c.governing_curve}", file=stdout)
    return EXIT_OK


def centred_grid(lo: float, hi: float, n: int) -> np.ndarray:
    """``n`` cell centres of ``[lo, hi]``; never touches the endpoints."""
    return lo + (hi - lo) * (np.arange(n) + 0.5) / n


def phase_rows(cfg: RunConfig):
    res = cfg.res or D.PHASE_DIAGRAM_RES
    for eta in centred_grid(*cfg.eta_range, res):
        for r in centred_grid(*cfg.r_range, res):
            c = classify(float(r), float(eta), cfg.tol)
            yield (
                _fmt(eta), _fmt(r), _fmt(c.E_I), _fmt(c.E_II), _fmt(c.E_III),
                c.optimal_label, "1" if c.boundary else "0",
            )


def phase_csv(cfg: RunConfig) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    writer.writerows(phase_rows(cfg))
    return buf.getvalue()


def phase_svg(cfg: RunConfig, width: int = 600, height: int = 300) -> str:
    """The three separation curves as SVG polylines in (eta, r) coordinates.

    Each curve is drawn only where it separates two optimal types.
    """
    res = cfg.res or D.PHASE_DIAGRAM_RES
    e0, e1 = cfg.eta_range
    q0, q1 = cfg.r_range
    et = eta_triple()
    spans = {
        "r12": (r12, max(e0, et), e1),
        "r23": (r23, max(e0, et), e1),
        "r13": (r13, e0, min(e1, et)),
    }
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">'
    ]
    for name, (fun, lo, hi) in spans.items():
        if hi <= lo:
            continue
        # closed grid, with the open ends nudged inside the domain of the curve
        etas = np.linspace(lo, hi, res + 1)
        etas = np.clip(etas, 1e-9, 2 - 1e-9)
        rs = np.asarray(fun(etas), dtype=float)
        pts = " ".join(
            f"{(x - e0) / (e1 - e0) * width:.3f},{(1 - (y - q0) / (q1 - q0)) * height:.3f}"
            for x, y in zip(etas, rs)
        )
        lines.append(f'  <polyline id="{name}" fill="none" stroke="black" points="{pts}"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def cmd_phase_diagram(cfg: RunConfig, stdout) -> int:
    e0, e1 = cfg.eta_range
    q0, q1 = cfg.r_range
    if not (0 <= e0 < e1 <= 2 and 0 <= q0 < q1 <= 1):
        raise ParamOutOfRange("ranges must satisfy 0 <= eta_min < eta_max <= 2, 0 <= r_min < r_max <= 1")
    text = phase_svg(cfg) if cfg.fmt == "svg-polyline" else phase_csv(cfg)
    _emit(text, cfg.out, stdout)
    return EXIT_OK


def cmd_optimize(cfg: RunConfig, stdout) -> int:
    if cfg.va is None or cfg.va.denominator != 1 or cfg.vb.denominator != 1:
        raise ParamOutOfRange("optimize needs integer cell counts --va and --vb")
    n_a, n_b = int(cfg.va), int(cfg.vb)
    swapped = n_b > n_a
    if swapped:
        n_a, n_b = n_b, n_a
    eta = float(cfg.eta if cfg.eta is not None else 1)
    h = cfg.cell_size
    schedule = AnnealSchedule.default(
        n_a, n_b, h,
        steps_per_temperature=cfg.steps_per_cell * (n_a + n_b),
        chains=cfg.chains,
        master_seed=cfg.seed,
    )
    res = anneal(n_a, n_b, eta, h, schedule)
    upper = min(res.candidate_energies.values())
    print(
        f"lower {_fmt(res.lower_bound)} <= best {_fmt(res.best_energy)} "
        f"<= candidate {_fmt(upper)}  continuum {_fmt(res.continuum_min)}  "
        f"sandwich {'ok' if res.sandwich_ok else 'VIOLATED'}",
        file=stdout,
    )
    print(f"predicted type {','.join(res.predicted_types)}", file=stdout)
    if swapped:
        print("note: volumes swapped so that A is the larger phase", file=stdout)
    if cfg.fmt == "grid-text":
        text = res.best_config.to_text()
    else:
        text = res.to_json()
    if cfg.out is not None or cfg.fmt is not None:
        _emit(text, cfg.out, stdout)
    else:
        print(res.best_config.to_text(), end="", file=stdout)
    return EXIT_OK


def sweep_grids(res: int | None, seed: int) -> D.SweepGrids:
    """Default grids, with every eta and r resolution replaced by ``res`` if given."""
    g = D.SweepGrids()
    if res is None:
        return replace(g, extra=replace(g.extra, seed=seed), psum=replace(g.psum, seed=seed))
    return D.SweepGrids(
        appendix=replace(g.appendix, eta=res, r=res),
        extra=replace(g.extra, eta=res, r=res, seed=seed),
        hfun=replace(g.hfun, eta=res, r=res),
        psum=replace(g.psum, seed=seed),
    )


def run_sweeps(selector: str, grids: D.SweepGrids, negative: bool = False) -> dict:
    jobs = {
        "appendix": lambda: verify_lemma_appendix(grids.appendix, negative=negative),
        "extra": lambda: verify_lemma_extra(grids.extra),
        "hfun": lambda: verify_H_functions(grids.hfun),
        "psum": lambda: verify_p_sum(grids.psum),
    }
    names = list(jobs) if selector == "all" else [selector]
    return {name: jobs[name]() for name in names}


def cmd_verify(cfg: RunConfig, stdout) -> int:
    grids = sweep_grids(cfg.res, cfg.seed)
    # the negative control lives in the appendix sweep, so it always runs
    selector = cfg.selector
    if cfg.negative and selector not in ("appendix", "all"):
        selector = "appendix"
    reports = run_sweeps(selector, grids, cfg.negative)
    text = "".join(rep.to_text() for rep in reports.values())
    out = cfg.out or "verify-report.txt"
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(text)
    for name, rep in reports.items():
        status = "ok" if rep.ok else "FAIL"
        print(
            f"{name:9s} {status:4s} checked {rep.checked} violations {rep.violation_count} "
            f"min_margin {rep.min_margin:.3g}",
            file=stdout,
        )
    print(f"report written to {out}", file=stdout)
    return EXIT_OK if all(rep.ok for rep in reports.values()) else EXIT_VIOLATIONS


def _emit(text: str, path: str | None, stdout) -> None:
    if path is None or path == "-":
        stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# -- argument parsing ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="l1bubble",
        description="l1 double-bubble energies, phase diagram, lattice minimizers and bound sweeps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, volumes=False):
        p.add_argument("--eta", type=_number, help="interaction intensity in (0, 2)")
        if volumes:
            p.add_argument("--va", type=_number, help="volume (cell count) of A")
            p.add_argument("--vb", type=_number, help="volume (cell count) of B")
            p.add_argument("--r", type=_number, help="volume ratio, with unit V_A")

    p = sub.add_parser("energy", help="energy of a grid file")
    p.add_argument("grid", help="text grid of '.', 'A', 'B'")
    common(p)
    p.add_argument("--cell-size", type=_number, help="lattice spacing h (default 1)")
    p.add_argument("--allow-limit", action="store_true", help="accept eta = 0 or 2")

    p = sub.add_parser("classify", help="optimal minimizer type at (r, eta)")
    common(p, volumes=True)
    p.add_argument("--tol", type=float, help=f"curve tolerance (default {D.CLASSIFY_TOL})")

    p = sub.add_parser("phase-diagram", help="classify an (eta, r) grid")
    p.add_argument("--res", type=int, help=f"points per axis (default {D.PHASE_DIAGRAM_RES})")
    p.add_argument("--tol", type=float)
    p.add_argument("--eta-range", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--r-range", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--format", choices=("csv", "svg-polyline"), default="csv")
    p.add_argument("--out", help="output file (default stdout)")

    p = sub.add_parser("optimize", help="anneal a lattice configuration")
    common(p, volumes=True)
    p.add_argument("--cell-size", type=_number)
    p.add_argument("--seed", type=int)
    p.add_argument("--chains", type=int)
    p.add_argument("--steps-per-cell", type=int,
                   help=f"steps per temperature per cell (default {D.ANNEAL_STEPS_PER_CELL})")
    p.add_argument("--format", choices=("json", "grid-text"))
    p.add_argument("--out")

    p = sub.add_parser("verify", help="run the inequality sweeps")
    p.add_argument("selector", nargs="?", default="all", choices=SELECTORS)
    p.add_argument("--res", type=int, help="eta and r resolution of every sweep grid")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="report file (default verify-report.txt)")
    p.add_argument("--self-test-negative", action="store_true",
                   help="add a deliberately false claim; the run must then fail")
    return parser


_COMMANDS = {
    "energy": cmd_energy,
    "classify": cmd_classify,
    "phase-diagram": cmd_phase_diagram,
    "optimize": cmd_optimize,
    "verify": cmd_verify,
}


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse already printed its message; usage errors are input errors
        return EXIT_OK if exc.code == 0 else EXIT_PARSE
    try:
        cfg = RunConfig.from_args(ns)
        return _COMMANDS[cfg.subcommand](cfg, stdout)
    except ParseError as exc:
        print(f"parse error: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_PARSE
    except DomainError as exc:
        print(f"domain error: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"I/O error: {exc}", file=stderr)
        return EXIT_IO


__all__ = ["CSV_HEADER", "RunConfig", "build_parser", "main", "phase_csv", "phase_svg"]

if __name__ == "__main__":
    sys.exit(main())
