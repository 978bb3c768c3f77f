"""Command-line front end: ``qfpt {solve,compare,report} {chain,lattice,classical2} [options]``.

Exit codes: 0 success, 1 invalid configuration, 2 solver failure,
3 validity conditions violated beyond tolerance.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import asdict, dataclass, fields
from typing import Optional

import numpy as np

from . import errors
from .fptcore import FptSolution, assemble, mean_fpt
from .laplace_exact import solve_exact
from .lattice import VALIDATED_T_MAX, solve_lattice_inversion, solve_lattice_series, solve_lattice_volterra
from .model import InitialState, Partition, TightBindingChain, validate_doorway
from .propagator import return_kernel_trigsum, survival_trigsum
from .volterra import TimeGrid, classical_two_site, solve_volterra

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_INVALID = 0, 1, 2, 3

SYSTEMS = ("chain", "lattice", "classical2")
PIPELINES = ("exact", "volterra", "both", "lattice-series", "lattice-inversion")
ALLOWED = {
    "chain": ("exact", "volterra", "both"),
    "lattice": ("lattice-series", "lattice-inversion", "volterra"),
    "classical2": ("volterra",),
}
DEFAULT_PIPELINE = {"chain": "exact", "lattice": "lattice-inversion", "classical2": "volterra"}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    system: str = "chain"
    sites: int = 2
    boundary: int = 1
    start: int = 1
    energies: Optional[tuple[float, ...]] = None
    couplings: Optional[tuple[float, ...]] = None
    rate: float = 1.0
    pipeline: Optional[str] = None
    t_max: float = 2.0
    h: float = 1e-3
    series_order: int = 12
    output: Optional[str] = None

    def validate(self) -> "RunConfig":
        if self.system not in SYSTEMS:
            raise ConfigError(f"unknown system {self.system!r}")
        if self.pipeline is None:
            self.pipeline = DEFAULT_PIPELINE[self.system]
        if self.pipeline not in PIPELINES:
            raise ConfigError(f"unknown pipeline {self.pipeline!r}")
        if self.pipeline not in ALLOWED[self.system]:
            raise ConfigError(f"pipeline {self.pipeline!r} is not available for system {self.system!r}")
        try:
            self.grid()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.system == "lattice" and self.t_max > VALIDATED_T_MAX and self.pipeline != "lattice-series":
            raise ConfigError(f"lattice solutions are only validated up to t_max={VALIDATED_T_MAX}")
        if self.system == "classical2" and not self.rate > 0:
            raise ConfigError("rate must be positive")
        if self.system == "chain":
            try:
                chain, part, start = self.chain_objects()
                validate_doorway(chain, part)
                if not 1 <= start.start_site <= part.boundary_index:
                    raise ConfigError(f"start site {start.start_site} is not in omega = 1..{part.boundary_index}")
            except (ValueError, errors.MultiDoorway, errors.Disconnected) as exc:
                raise ConfigError(str(exc)) from None
        return self

    def grid(self) -> TimeGrid:
        return TimeGrid(self.t_max, self.h)

    def chain_objects(self):
        chain = TightBindingChain(self.sites, self.energies, self.couplings)
        return chain, Partition(self.boundary), InitialState(self.start)

    # -- flat ``key = value`` text form

    def dumps(self) -> str:
        lines = []
        for key, value in asdict(self).items():
            if value is None:
                continue
            if isinstance(value, tuple):
                value = ",".join(repr(float(v)) for v in value)
            elif isinstance(value, float):
                value = repr(value)
            lines.append(f"{key} = {value}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "RunConfig":
        return cls(**parse_config_text(text))


_CASTS = {
    "system": str, "pipeline": str, "output": str,
    "sites": int, "boundary": int, "start": int, "series_order": int,
    "rate": float, "t_max": float, "h": float,
    "energies": lambda v: tuple(float(x) for x in v.split(",") if x.strip()),
    "couplings": lambda v: tuple(float(x) for x in v.split(",") if x.strip()),
}


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment, lists are comma separated."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key == "tmax":
            key = "t_max"
        if key not in _CASTS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            out[key] = _CASTS[key](value)
        except ValueError:
            raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from None
    return out


# ---------------------------------------------------------------- running

def _exact_solution(cfg: RunConfig) -> FptSolution:
    chain, part, start = cfg.chain_objects()
    pr, pfp = solve_exact(chain, part, start)
    return assemble(f"chain{cfg.sites}", pr, pfp)


def _volterra_chain(cfg: RunConfig) -> FptSolution:
    chain, part, start = cfg.chain_objects()
    grid = cfg.grid()
    pr, pfp = solve_volterra(survival_trigsum(chain, part, start), return_kernel_trigsum(chain, part), grid)
    return assemble(f"chain{cfg.sites}", pr, pfp, grid.nodes)


def run(cfg: RunConfig) -> FptSolution:
    grid = cfg.grid()
    if cfg.system == "chain":
        return _volterra_chain(cfg) if cfg.pipeline == "volterra" else _exact_solution(cfg)
    if cfg.system == "classical2":
        pr, pfp = classical_two_site(cfg.rate, grid)
        return assemble("classical2", pr, pfp, grid.nodes)
    if cfg.pipeline == "lattice-series":
        sol = solve_lattice_series(grid, cfg.series_order)
    elif cfg.pipeline == "lattice-inversion":
        sol = solve_lattice_inversion(grid)
    else:
        sol = solve_lattice_volterra(grid)
    return assemble("lattice", sol.pr, sol.pfp, sol.t)


def _fmt(x: float) -> str:
    return f"{x + 0.0:.12g}"


def write_csv(path: str, t: np.ndarray, pr: np.ndarray, pfp: np.ndarray) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write("t,P_r,P_fp\n")
        for row in zip(t, pr, pfp):
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _summary(sol: FptSolution) -> list[tuple[str, str]]:
    items = sol.report.items()
    try:
        items.append(("mean_fpt", f"{mean_fpt(sol):.9g}"))
    except errors.Undefined:
        items.append(("mean_fpt", "undefined"))
    return items


def _emit(pairs, out=None) -> None:
    for key, value in pairs:
        print(f"{key}={value}", file=out or sys.stdout)


def cmd_solve(cfg: RunConfig) -> int:
    sol = run(cfg)
    t = cfg.grid().nodes
    pr, pfp = sol.sample(t)
    path = cfg.output or "fpt_solution.csv"
    write_csv(path, t, pr, pfp)
    _emit([("system", cfg.system), ("pipeline", cfg.pipeline), ("rows", str(len(t))), ("csv", path)])
    _emit(_summary(sol))
    if cfg.pipeline == "both":
        code = _compare_lines(cfg)
        if code:
            return code
    return EXIT_OK if sol.report.ok else EXIT_INVALID


def _compare_lines(cfg: RunConfig) -> int:
    exact = _exact_solution(cfg)
    numeric = _volterra_chain(cfg)
    t = cfg.grid().nodes
    pr_e, pfp_e = exact.sample(t)
    d_pr = float(np.max(np.abs(numeric.pr - pr_e)))
    d_pfp = float(np.max(np.abs(numeric.pfp - pfp_e)))
    bound = 10 * cfg.h**2
    _emit([("max_abs_diff_Pr", f"{d_pr:.6e}"), ("max_abs_diff_Pfp", f"{d_pfp:.6e}"), ("bound", f"{bound:.6e}")])
    return EXIT_INVALID if max(d_pr, d_pfp) > bound else EXIT_OK


def cmd_compare(cfg: RunConfig) -> int:
    if cfg.system != "chain":
        raise ConfigError("compare needs a finite chain: the exact pipeline is unavailable otherwise")
    return _compare_lines(cfg)


def cmd_report(cfg: RunConfig) -> int:
    sol = run(cfg)
    wanted = ("T", "normalization_residual", "positivity_violation", "monotonicity_violation", "mean_fpt",
              "condition_A", "condition_B", "condition_C")
    items = [(k, v) for k, v in _summary(sol) if k in wanted]
    path = cfg.output or "fpt_report.txt"
    with open(path, "w", newline="\n") as fh:
        _emit(items, fh)
    _emit(items)
    return EXIT_OK if sol.report.ok else EXIT_INVALID


COMMANDS = {"solve": cmd_solve, "compare": cmd_compare, "report": cmd_report}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("system", nargs="?", choices=SYSTEMS)
    common.add_argument("--config", help="flat key = value file; explicit flags override it")
    common.add_argument("--dump-config", metavar="PATH", help="write the resolved config to PATH and exit")
    common.add_argument("--sites", type=int)
    common.add_argument("--boundary", type=int)
    common.add_argument("--start", type=int)
    common.add_argument("--energies", help="comma-separated site energies")
    common.add_argument("--couplings", help="comma-separated couplings between neighbouring sites")
    common.add_argument("--rate", type=float, help="classical hopping rate")
    common.add_argument("--pipeline", choices=PIPELINES)
    common.add_argument("--tmax", dest="t_max", type=float)
    common.add_argument("--h", type=float, help="grid step (default 1e-3)")
    common.add_argument("--series-order", dest="series_order", type=int)
    common.add_argument("--out", dest="output")

    parser = argparse.ArgumentParser(prog="qfpt", description="Quantum first-passage times for doorway chains.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="write t,P_r,P_fp as CSV")
    sub.add_parser("compare", parents=[common], help="exact vs Volterra on a finite chain")
    sub.add_parser("report", parents=[common], help="validity report as key=value lines")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    if args.config:
        with open(args.config) as fh:
            values.update(parse_config_text(fh.read()))
    names = {f.name for f in fields(RunConfig)}
    for key, value in vars(args).items():
        if key in names and value is not None:
            values[key] = _CASTS[key](value) if key in ("energies", "couplings") else value
    return RunConfig(**values)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args).validate()
    except (ConfigError, OSError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.dump_config:
        with open(args.dump_config, "w", newline="\n") as fh:
            fh.write(cfg.dumps())
        return EXIT_OK
    try:
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except errors.FptError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
