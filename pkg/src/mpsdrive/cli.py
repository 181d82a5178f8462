"""Command-line entry points; every run writes CSV tables plus a JSON manifest.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .bound import BOUND_CSV_HEADER, verify_bound
from .chain import mps_state_vector
from .errors import MPSDriveError, NotClosed, NonUniformGrid, ParseError
from .experiments import DECAY_POINT, decay_scan, operator_series, placement_sweep
from .floquet import DriveOptions, fidelity_trace, floquet_spectrum, propagate, zero_momentum_sector
from .spectrum import (
    GOE_RATIO,
    GUE_RATIO,
    POISSON_RATIO,
    eigenstate_diagnostics,
    flag_special_states,
    quasi_energy_grid,
    relative_spread,
    sdos,
    spectral_ratios,
)
from .trajectory import ParamPoint, RotationLoop, builtin_loop, load_trajectory, state_at

log = logging.getLogger("mpsdrive")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

DEFAULT_R = {
    "decay-scan": [3, 4, 5, 6, 7, 8, 9],
    "operator-convergence": [2, 3, 4, 5],
    "drive": [2, 3, 4],
    "floquet": [4],
    "bound-audit": [3, 5, 7, 9],
}
DEFAULT_N = {"drive": [8], "floquet": [10]}
DEFAULT_GRID = {"drive": 17, "floquet": 512, "bound-audit": 9, "operator-convergence": 1}


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    traj: str = "builtin"
    r: list[int] = field(default_factory=list)
    N: list[int] = field(default_factory=list)
    grid: int = 0
    sigma2: float = 0.05
    tol: float = 1e-9
    out: str = "results"
    seed: int = 0
    optimize_alpha: bool = False
    optimize_complement: bool = False
    t: float = 0.0
    point: list[float] | None = None
    rates: list[float] | None = None

    def validate(self) -> None:
        if not self.r:
            raise ConfigError("empty r list")
        if min(self.r) < 1:
            raise ConfigError("r must be positive")
        if self.N and min(self.N) < max(self.r):
            raise ConfigError(f"N={min(self.N)} is smaller than r={max(self.r)}")
        if self.sigma2 <= 0 or self.tol <= 0:
            raise ConfigError("sigma2 and tol must be positive")
        if self.grid < 1:
            raise ConfigError("grid must be at least 1")
        for name in ("point", "rates"):
            v = getattr(self, name)
            if v is not None and len(v) != 4:
                raise ConfigError(f"--{name} needs four comma-separated numbers")


def _int_list(text: str) -> list[int]:
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return out


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mpsdrive", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("decay-scan", "leakage decay with range r at one point"),
        ("operator-convergence", "Pauli-space convergence of h_r at one loop time"),
        ("drive", "fidelity of the Hermitian drive along the loop"),
        ("floquet", "Floquet spectrum, eigenstate diagnostics and level statistics"),
        ("bound-audit", "leakage bound versus measured norm along the loop"),
    ]:
        s = sub.add_parser(name, help=help_)
        s.add_argument("--traj", default="builtin", help="builtin | rotation | path to JSON/CSV")
        s.add_argument("--r", type=_int_list, default=None, help="e.g. 3,5 or 3-9")
        s.add_argument("--N", type=_int_list, default=None, help="chain lengths")
        s.add_argument("--grid", type=int, default=None, help="number of grid points")
        s.add_argument("--sigma2", type=float, default=0.05)
        s.add_argument("--tol", type=float, default=1e-9, help="absolute integrator tolerance")
        s.add_argument("--out", default="results")
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--optimize-alpha", action="store_true")
        s.add_argument("--optimize-complement", action="store_true")
        s.add_argument("--t", type=float, default=0.0, help="loop time for single-point commands")
        s.add_argument("--point", type=_float_list, default=None, help="a,b,c,d (decay-scan)")
        s.add_argument("--rates", type=_float_list, default=None, help="da,db,dc,dd (decay-scan)")
        s.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    cmd = ns.command
    return RunConfig(
        command=cmd,
        traj=ns.traj,
        r=ns.r if ns.r is not None else list(DEFAULT_R[cmd]),
        N=ns.N if ns.N is not None else list(DEFAULT_N.get(cmd, [])),
        grid=ns.grid if ns.grid is not None else DEFAULT_GRID.get(cmd, 1),
        sigma2=ns.sigma2,
        tol=ns.tol,
        out=ns.out,
        seed=ns.seed,
        optimize_alpha=ns.optimize_alpha,
        optimize_complement=ns.optimize_complement,
        t=ns.t,
        point=ns.point,
        rates=ns.rates,
    )


def load_path(source: str):
    if source == "builtin":
        return builtin_loop()
    if source == "rotation":
        return RotationLoop(1.0)
    try:
        return load_trajectory(source)
    except (OSError, ParseError, NotClosed, NonUniformGrid) as exc:
        raise ConfigError(f"cannot load trajectory {source!r}: {exc}") from exc


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return x


def _source_hash(path) -> str:
    if hasattr(path, "source_hash"):
        return path.source_hash()
    return hashlib.sha256(repr(path).encode()).hexdigest()


def cmd_decay_scan(cfg: RunConfig, path, out: Path) -> dict:
    if cfg.point is not None or cfg.rates is not None or cfg.traj == "builtin":
        p = ParamPoint(
            np.array(cfg.point if cfg.point is not None else DECAY_POINT.values, dtype=float),
            np.array(cfg.rates if cfg.rates is not None else DECAY_POINT.rates, dtype=float),
        )
        psi, dA = state_at(p)
    else:
        psi, dA = path.state(cfg.t)
    scan = decay_scan(psi, dA, cfg.r)
    rows = [(row.r, row.placement, row.norm2, row.optimized_norm2, scan.slope) for row in scan.rows]
    _write_csv(out / "decay_scan.csv", ("r", "placement", "norm2", "optimized_norm2", "slope"), rows)
    r_max = max(cfg.r)
    sweep = placement_sweep(psi, dA, r_max)
    _write_csv(
        out / "placement_sweep.csv", ("r", "j", "norm2"), [(r_max, j + 1, v) for j, v in enumerate(sweep)]
    )
    return {
        "slope": scan.slope,
        "optimized_slope": scan.optimized_slope,
        "lambda2_abs": psi.lambda2_abs,
        "reference_slopes": scan.reference_slopes,
        "files": ["decay_scan.csv", "placement_sweep.csv"],
    }


def cmd_operator_convergence(cfg: RunConfig, path, out: Path) -> dict:
    psi, dA = path.state(cfg.t)
    series = operator_series(psi, dA, cfg.r, optimize_alpha=cfg.optimize_alpha, optimize_c=True)
    _write_csv(
        out / "operator_convergence.csv",
        ("r", "distance_before", "distance_after"),
        [(row.r, row.distance_before, row.distance_after) for row in series.rows],
    )
    weights = series.final.support_weights()
    r_max = max(series.expansions)
    _write_csv(out / "pauli_weights.csv", ("r", "support", "weight"), [(r_max, k, v) for k, v in weights.items()])
    return {"files": ["operator_convergence.csv", "pauli_weights.csv"]}


def _drive_options(cfg: RunConfig) -> DriveOptions:
    return DriveOptions(
        alpha="optimal" if cfg.optimize_alpha else "middle",
        complement=cfg.optimize_complement,
        atol=cfg.tol,
    )


def cmd_drive(cfg: RunConfig, path, out: Path) -> dict:
    grid = np.linspace(0.0, path.period, cfg.grid)
    rows = []
    for N in cfg.N:
        for r in cfg.r:
            log.info("drive N=%d r=%d", N, r)
            for pt in fidelity_trace(path, r, N, grid, _drive_options(cfg)):
                rows.append((N, r, pt.t, pt.F, pt.f))
    _write_csv(out / "fidelity.csv", ("N", "r", "t", "F", "f"), rows)
    return {"files": ["fidelity.csv"]}


def cmd_floquet(cfg: RunConfig, path, out: Path) -> dict:
    files, summary = [], {}
    for N in cfg.N:
        sector = zero_momentum_sector(N)
        psi0 = mps_state_vector(path.state(0.0)[0], N)[0]
        for r in cfg.r:
            log.info("floquet N=%d r=%d (sector dim %d)", N, r, sector.dim)
            U = propagate(path, r, N, path.period, _drive_options(cfg), sector=sector)
            spec = floquet_spectrum(U)
            rows = eigenstate_diagnostics(spec, sector, psi0)
            tag = f"N{N}_r{r}"
            _write_csv(
                out / f"eigenstates_{tag}.csv",
                ("n", "e", "overlap", "S", "mx", "my", "mz"),
                [(x.index, x.quasi_energy, x.overlap, x.entropy, x.mx, x.my, x.mz) for x in rows],
            )
            grid, rho = sdos(spec.quasi_energies, cfg.sigma2, quasi_energy_grid(cfg.grid))
            _write_csv(out / f"sdos_{tag}.csv", ("epsilon", "rho"), zip(grid, rho))
            stats = spectral_ratios(spec.quasi_energies)
            counts, edges = np.histogram(stats.ratios, bins=20, range=(0.0, 1.0))
            _write_csv(
                out / f"ratios_{tag}.csv",
                ("bin_lo", "bin_hi", "count"),
                zip(edges[:-1], edges[1:], counts),
            )
            flagged = flag_special_states(rows)
            special = max(rows, key=lambda x: x.overlap)
            files += [f"eigenstates_{tag}.csv", f"sdos_{tag}.csv", f"ratios_{tag}.csv"]
            summary[tag] = {
                "sector_dim": sector.dim,
                "mean_ratio": stats.mean,
                "excluded_ratios": stats.excluded,
                "reference_ratios": {"poisson": POISSON_RATIO, "goe": GOE_RATIO, "gue": GUE_RATIO},
                "sdos_relative_spread": relative_spread(rho),
                "special_state": {
                    "index": special.index,
                    "quasi_energy": special.quasi_energy,
                    "overlap": special.overlap,
                    "entropy": special.entropy,
                },
                "flagged_states": [x.index for x in flagged],
                "mean_entropy": float(np.mean([x.entropy for x in rows])),
            }
    return {"files": files, "summary": summary}


def cmd_bound_audit(cfg: RunConfig, path, out: Path) -> dict:
    times = np.linspace(0.0, path.period, cfg.grid, endpoint=False)
    reports = []
    for t in times:
        psi, dA = path.state(t)
        for r in cfg.r:
            reports.append(verify_bound(psi, dA, r, t=float(t)))
    _write_csv(out / "bound_audit.csv", BOUND_CSV_HEADER + ("audited",), [rep.csv_row() + (rep.audited,) for rep in reports])
    audited = [rep for rep in reports if rep.audited]
    return {
        "files": ["bound_audit.csv"],
        "audited": len(audited),
        "violations": sum(not rep.holds for rep in audited),
    }


COMMANDS = {
    "decay-scan": cmd_decay_scan,
    "operator-convergence": cmd_operator_convergence,
    "drive": cmd_drive,
    "floquet": cmd_floquet,
    "bound-audit": cmd_bound_audit,
}


def run(cfg: RunConfig) -> int:
    try:
        cfg.validate()
        path = load_path(cfg.traj)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    np.random.seed(cfg.seed)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    try:
        result = COMMANDS[cfg.command](cfg, path, out)
    except MPSDriveError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    manifest = {
        "config": asdict(cfg),
        "trajectory_source": getattr(path, "source", cfg.traj),
        "trajectory_hash": _source_hash(path),
        "period": path.period,
        "versions": {"mpsdrive": __version__, "numpy": np.__version__},
        "result": result,
    }
    with open(out / f"manifest_{cfg.command}.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=float)
    log.info("done in %.1f s", time.perf_counter() - start)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(message)s")
    return run(config_from_args(ns))
