"""Convergence experiments for the manufactured solution ``u = t^r sin(pi x)``.

Usage::

    python3 -m fracdg --experiment 1 --out results/exp1.csv
    python3 -m fracdg --config my.ini --J 16,32,64 --sigma 1,2,* --m 0

A case is a triple ``(r, m, sigma)`` swept over a list of ``J``; every
``(r, m, sigma, J)`` cell is solved independently and reported as one row.
In sigma lists ``*`` and ``**`` stand for the grading exponents
:func:`~fracdg.mesh.sigma_star` and :func:`~fracdg.mesh.sigma_star_star` of the
case, and fractions such as ``10/3`` are accepted.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import logging
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from fracdg.dgsolver import ProblemSpec, SpaceTimeSolution, manufactured_problem, solve
from fracdg.fem1d import assemble, l2_error, l2_norm
from fracdg.mesh import SpatialPartition, make_graded_mesh, sigma_star, sigma_star_star

__all__ = [
    "Case",
    "ConvergenceReport",
    "ExperimentConfig",
    "ReportRow",
    "error_metrics",
    "main",
    "observed_order",
    "preset",
    "run_experiment",
]

log = logging.getLogger(__name__)

MEASURES = ("interp", "l2")
TINY_FIRST_SLAB = 1e-14


# {{{ configuration


@dataclass(frozen=True)
class Case:
    r: float
    m: int
    sigma: float
    Js: tuple[int, ...]


@dataclass(frozen=True)
class ExperimentConfig:
    alpha: float = 0.2
    beta: float = 0.8
    kappa1: float = 1.0
    kappa2: float = 1.0
    T: float = 1.0
    cells: int = 32
    n: int = 3
    cases: tuple[Case, ...] = ()
    measure: str = "interp"
    out: str | None = None
    name: str = "custom"

    def __post_init__(self) -> None:
        # reuse the solver's own checks on the coefficients
        ProblemSpec(alpha=self.alpha, beta=self.beta, kappa1=self.kappa1, kappa2=self.kappa2, T=self.T)
        SpatialPartition(cells=self.cells)
        if self.n not in (1, 2, 3):
            raise ValueError(f"spatial degree n must be 1, 2 or 3, got {self.n}")
        if self.measure not in MEASURES:
            raise ValueError(f"measure must be one of {MEASURES}, got {self.measure!r}")
        for case in self.cases:
            if not 0 <= case.m <= 4:
                raise ValueError(f"time degree m must lie in 0..4, got {case.m}")
            if not case.sigma >= 1.0:
                raise ValueError(f"grading exponent must be >= 1, got {case.sigma}")
            if not case.r > self.beta - 1.0:
                raise ValueError(f"need r > beta - 1, got r={case.r}")
            for J in case.Js:
                if J < 1:
                    raise ValueError(f"slab counts must be positive, got {J}")

    def digest(self) -> str:
        d = asdict(self)
        d.pop("out")
        return hashlib.sha256(repr(sorted(d.items())).encode()).hexdigest()[:12]


def _doubling(start: int, count: int) -> tuple[int, ...]:
    return tuple(start * 2**k for k in range(count))


def preset(number: int, beta: float = 0.8) -> ExperimentConfig:
    """The three experiments of the convergence study with their default data."""
    if number == 1:
        cases = tuple(Case(4.0, m, 1.0, _doubling(64, 5)) for m in (0, 1))
    elif number == 2:
        cases = tuple(Case(r, 0, 1.0, _doubling(16, 5)) for r in (0.2, 0.5, 0.8))
        cases += tuple(Case(r, 1, 1.0, _doubling(16, 5)) for r in (0.5, 0.8, 1.5))
    elif number == 3:
        rows = ((0.2, 0, "1.5"), (0.2, 1, "3"), (0.4, 0, "1.1"), (0.4, 1, "2"))
        cases = ()
        for r, m, first in rows:
            Js = _doubling(16, 5) if m == 0 else _doubling(4, 5)
            for token in (first, "*", "**"):
                cases += (Case(r, m, parse_sigma(token, m, r, beta), Js),)
    else:
        raise ValueError(f"unknown experiment {number}; choose 1, 2 or 3")
    return ExperimentConfig(cases=cases, name=f"experiment{number}")


def parse_sigma(token: str, m: int, r: float, beta: float) -> float:
    token = token.strip()
    if token == "*":
        return sigma_star(m, r, beta)
    if token == "**":
        return sigma_star_star(m, r, beta)
    return float(Fraction(token))


def _split(text: str) -> list[str]:
    return [t for t in (s.strip() for s in text.replace(";", ",").split(",")) if t]


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(t) for t in _split(text))


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(Fraction(t)) for t in _split(text))


def _read_ini(path: str) -> dict[str, str]:
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_file(fh)
    flat: dict[str, str] = {}
    for section in parser.sections():
        flat.update(parser[section])
    return flat


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    """Preset (if any), then the config file, then command-line flags."""
    base = preset(args.experiment) if args.experiment else ExperimentConfig()
    values: dict[str, str] = _read_ini(args.config) if args.config else {}
    for key in ("alpha", "beta", "kappa1", "kappa2", "T", "cells", "n", "J", "sigma", "m", "r", "measure", "out"):
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = str(flag)
    known = {"alpha", "beta", "kappa1", "kappa2", "t", "cells", "n", "j", "sigma", "m", "r", "measure", "out"}
    unknown = {k.lower() for k in values} - known
    if unknown:
        raise ValueError(f"unknown configuration keys: {', '.join(sorted(unknown))}")
    values = {k.lower(): v for k, v in values.items()}

    scalars = {}
    for key, conv in (("alpha", float), ("beta", float), ("kappa1", float), ("kappa2", float), ("cells", int), ("n", int)):
        if key in values:
            scalars[key] = conv(values[key])
    if "t" in values:
        scalars["T"] = float(values["t"])
    if "measure" in values:
        scalars["measure"] = values["measure"]
    if "out" in values:
        scalars["out"] = values["out"]
    beta = scalars.get("beta", base.beta)

    cases = base.cases
    sweep = {"j", "sigma", "m", "r"} & values.keys()
    if sweep:
        if cases and not {"m", "r"} & sweep:
            # keep each preset case, overriding its J list and/or sigma
            Js = _int_list(values["j"]) if "j" in values else None
            new = []
            for c in cases:
                sigmas = [parse_sigma(t, c.m, c.r, beta) for t in _split(values["sigma"])] if "sigma" in values else [c.sigma]
                for s in sigmas:
                    case = replace(c, sigma=s, Js=c.Js if Js is None else Js)
                    if case not in new:
                        new.append(case)
            cases = tuple(new)
        else:
            rs = _float_list(values.get("r", "4"))
            ms = _int_list(values.get("m", "0"))
            Js = _int_list(values.get("j", "16,32,64,128,256"))
            tokens = _split(values.get("sigma", "1"))
            cases = tuple(
                Case(r, m, parse_sigma(t, m, r, beta), Js) for r in rs for m in ms for t in tokens
            )
    return replace(base, cases=cases, **scalars)


# }}}


# {{{ metrics


def error_metrics(solution: SpaceTimeSolution, exact, measure: str = "interp") -> tuple[float, float]:
    """``(E1, E2)``: the largest error over the nodes ``t_1..t_J`` and the error at ``T``.

    ``measure="interp"`` compares ``U(t_j)`` with the finite element nodal
    interpolant of ``u(., t_j)`` in ``L^2``; ``"l2"`` measures the true
    ``L^2`` distance to ``u(., t_j)`` by Gauss quadrature.
    """
    if measure not in MEASURES:
        raise ValueError(f"measure must be one of {MEASURES}, got {measure!r}")
    mesh, fem = solution.mesh, solution.fem
    errs = np.empty(mesh.J)
    for j in range(1, mesh.J + 1):
        t = float(mesh.nodes[j])
        trace = solution.trace(j)
        if measure == "interp":
            errs[j - 1] = l2_norm(fem, trace - np.asarray(exact(fem.dof_coords, t), dtype=float))
        else:
            errs[j - 1] = l2_error(fem, trace, lambda x: exact(x, t))
    if errs.size == 0:
        return 0.0, 0.0
    return float(errs.max()), float(errs[-1])


def observed_order(e_coarse: float, e_fine: float) -> float:
    """``log2(E(J) / E(2J))``."""
    if not (e_coarse > 0 and e_fine > 0):
        raise ValueError(f"orders need positive errors, got {e_coarse}, {e_fine}")
    return math.log2(e_coarse / e_fine)


# }}}


# {{{ report


def _sci(x: float | None) -> str:
    if x is None or not math.isfinite(x):
        return "nan" if x is not None else "--"
    mant, _, exp = f"{x:.2e}".partition("e")
    return f"{mant}e{int(exp)}"


def _fixed(x: float | None) -> str:
    return "--" if x is None else f"{x:.2f}"


@dataclass
class ReportRow:
    J: int
    sigma: float
    m: int
    r: float
    E1: float = math.nan
    E2: float = math.nan
    order1: float | None = None
    order2: float | None = None
    error: str | None = None

    @property
    def key(self) -> tuple:
        return (self.r, self.m, self.sigma)


@dataclass
class ConvergenceReport:
    rows: list[ReportRow] = field(default_factory=list)
    config_hash: str = ""
    runtime: float = 0.0

    HEADER = ("J", "sigma", "m", "r", "E1", "order1", "E2", "order2")

    @property
    def failed(self) -> bool:
        return any(row.error is not None for row in self.rows)

    def fill_orders(self) -> None:
        """Orders between each row and the row of the same case with half its ``J``."""
        index = {(row.key, row.J): row for row in self.rows}
        for row in self.rows:
            coarse = index.get((row.key, row.J // 2)) if row.J % 2 == 0 else None
            row.order1 = row.order2 = None
            if coarse is None or row.error or coarse.error:
                continue
            for name in ("1", "2"):
                ec, ef = getattr(coarse, "E" + name), getattr(row, "E" + name)
                if ec > 0 and ef > 0:
                    setattr(row, "order" + name, observed_order(ec, ef))

    def _cells(self, row: ReportRow) -> list[str]:
        return [
            str(row.J),
            f"{row.sigma:.6g}",
            str(row.m),
            f"{row.r:g}",
            _sci(row.E1),
            _fixed(row.order1),
            _sci(row.E2),
            _fixed(row.order2),
        ]

    def to_csv(self) -> str:
        lines = [",".join(self.HEADER)]
        lines += [",".join(self._cells(row)) for row in self.rows]
        return "\n".join(lines) + "\n"

    def to_table(self) -> str:
        body = [list(self.HEADER)] + [self._cells(row) for row in self.rows]
        widths = [max(len(r[c]) for r in body) for c in range(len(self.HEADER))]
        lines = [f"# config {self.config_hash}"]
        for k, cells in enumerate(body):
            lines.append("  ".join(c.rjust(w) for c, w in zip(cells, widths)))
            if k == 0:
                lines.append("  ".join("-" * w for w in widths))
        for row in self.rows:
            if row.error:
                lines.append(f"# FAILED J={row.J} sigma={row.sigma:.6g} m={row.m} r={row.r:g}: {row.error}")
        return "\n".join(lines) + "\n"

    def write(self, path: str) -> tuple[str, str]:
        """Write ``path`` (comma-separated) and the aligned table next to it as ``.txt``."""
        root, ext = os.path.splitext(path)
        csv_path = path if ext else path + ".csv"
        txt_path = root + ".txt"
        folder = os.path.dirname(csv_path)
        if folder:
            os.makedirs(folder, exist_ok=True)
        with open(csv_path, "w") as fh:
            fh.write(self.to_csv())
        with open(txt_path, "w") as fh:
            fh.write(self.to_table())
        return csv_path, txt_path


# }}}


def _run_cell(config: ExperimentConfig, case: Case, J: int, fems: dict) -> ReportRow:
    row = ReportRow(J=J, sigma=case.sigma, m=case.m, r=case.r)
    try:
        spec = manufactured_problem(case.r, config.alpha, config.beta, config.kappa1, config.kappa2, config.T)
        mesh = make_graded_mesh(config.T, J, case.sigma)
        if mesh.widths[0] / config.T < TINY_FIRST_SLAB:
            log.warning(
                "first slab width %.3e is below %.0e of T (J=%d, sigma=%g); results may lose precision",
                mesh.widths[0],
                TINY_FIRST_SLAB,
                J,
                case.sigma,
            )
        fem = fems.get((config.cells, config.n))
        if fem is None:
            fem = fems[(config.cells, config.n)] = assemble(SpatialPartition(0.0, 1.0, config.cells), config.n)
        sol = solve(spec, mesh, fem, case.m)
        row.E1, row.E2 = error_metrics(sol, spec.exact, config.measure)
    except Exception as exc:  # recorded per row, the sweep goes on
        log.error("cell J=%d sigma=%g m=%d r=%g failed: %s", J, case.sigma, case.m, case.r, exc)
        row.error = f"{type(exc).__name__}: {exc}"
    return row


def run_experiment(config: ExperimentConfig) -> ConvergenceReport:
    start = time.perf_counter()
    report = ConvergenceReport(config_hash=config.digest())
    fems: dict = {}
    for case in config.cases:
        for J in case.Js:
            t0 = time.perf_counter()
            report.rows.append(_run_cell(config, case, J, fems))
            log.info("r=%g m=%d sigma=%g J=%d done in %.2fs", case.r, case.m, case.sigma, J, time.perf_counter() - t0)
    report.fill_orders()
    report.runtime = time.perf_counter() - start
    if config.out:
        report.write(config.out)
    return report


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fracdg",
        description="DG time stepping convergence study for two-term fractional subdiffusion.",
    )
    p.add_argument("--config", help="INI file with key = value entries (any section names)")
    p.add_argument("--experiment", type=int, choices=(1, 2, 3), help="start from a preset")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--kappa1", type=float)
    p.add_argument("--kappa2", type=float)
    p.add_argument("--T", type=float)
    p.add_argument("--J", help="comma-separated slab counts, e.g. 16,32,64")
    p.add_argument("--sigma", help="comma-separated grading exponents; '*' and '**' allowed")
    p.add_argument("--m", help="comma-separated time degrees")
    p.add_argument("--n", type=int, help="spatial degree (1..3)")
    p.add_argument("--cells", type=int, help="spatial cells on (0, 1)")
    p.add_argument("--r", help="comma-separated exponents of the exact solution t^r sin(pi x)")
    p.add_argument("--measure", choices=MEASURES, help="error measure (default: interp)")
    p.add_argument("--out", help="output CSV path; an aligned .txt table is written next to it")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        config = build_config(args)
    except (ValueError, OSError, configparser.Error) as exc:
        print(f"fracdg: configuration error: {exc}", file=sys.stderr)
        return 2
    report = run_experiment(config)
    sys.stdout.write(report.to_table())
    log.info("total runtime %.1fs", report.runtime)
    return 1 if report.failed else 0


if __name__ == "__main__":
    raise SystemExit(main())
