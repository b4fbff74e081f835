"""Command-line driver for parameter sweeps and single-point queries.

Every run reads a JSON config (optionally overridden by flags), writes its
result to ``--out`` and a companion ``<out>.manifest.json``.

Exit codes: 0 ok, 2 config error, 3 physics-domain error (every point
failed), 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .cavity import (
    CavityParams,
    below_threshold,
    bose_occupation,
    extract_temperature,
    heating_condition,
    numeric_steady_state,
    steady_temperature,
    summary_of,
)
from .decoherence import ChannelKind, TransferChannel, evolve
from .dimer import NAMED_STATES, make_dimer, summarize
from .errors import AboveThresholdError, InvalidStateError
from .phaseonium import (
    PhaseoniumParams,
    coherence_gain,
    inject_coherence,
    thermal_phaseonium,
    threshold_margin,
)
from .tc_oracle import OracleConfig, extract_rates

log = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_PHYSICS, EXIT_IO = 0, 2, 3, 4
MODES = ("map", "decay", "compare", "point", "oracle")
OK, ABOVE, INVALID = "ok", "above_threshold", "invalid"

MAP_COLUMNS = ["delta", "C", "T_ratio", "boltzmann_x", "heating_flag", "status"]
BOUNDARY_COLUMNS = ["delta", "C_boundary"]
DECAY_COLUMNS = ["state", "channel", "n_env", "gamma_t", "delta", "C", "T_ratio", "status"]
COMPARE_COLUMNS = ["group", "C", "T_ratio", "status"]

DEFAULT_GRIDS = {
    "map": {"delta": (-2.0, 2.0, 41), "C": (-1.0, 1.0, 41)},
    "decay": {"gamma_t": (0.0, 5.0, 51)},
    "compare": {"eps_fraction": (0.0, 0.999, 21), "C": (-1.0, 1.0, 41)},
}
GRID_BOUNDS = {"delta": (-2.0, 2.0), "C": (-1.0, 1.0), "eps_fraction": (0.0, 1.0)}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    min: float
    max: float
    steps: int

    def values(self) -> np.ndarray:
        return np.linspace(self.min, self.max, self.steps)


@dataclass
class SweepSpec:
    mode: str
    grids: dict[str, Grid] = field(default_factory=dict)
    fixed: dict = field(default_factory=dict)
    output_path: str | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "SweepSpec":
        mode = d.get("mode")
        if mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
        grids = {k: Grid(*v) for k, v in DEFAULT_GRIDS.get(mode, {}).items()}
        for name, g in (d.get("grids") or {}).items():
            try:
                grids[name] = Grid(float(g["min"]), float(g["max"]), int(g["steps"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"grid {name!r} needs numeric min, max, steps") from exc
        for name, g in grids.items():
            if g.steps < 2:
                raise ConfigError(f"grid {name!r} needs at least 2 steps")
            lo, hi = GRID_BOUNDS.get(name, (-math.inf, math.inf))
            if g.min < lo or g.max > hi or g.min > g.max:
                raise ConfigError(f"grid {name!r} range [{g.min}, {g.max}] outside [{lo}, {hi}]")
        fixed = dict(d.get("fixed") or {})
        return cls(mode, grids, fixed, d.get("output_path"))

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "grids": {k: asdict(v) for k, v in self.grids.items()},
            "fixed": self.fixed,
            "output_path": self.output_path,
        }

    def number(self, key, default=None, minimum=None) -> float:
        v = self.fixed.get(key, default)
        if v is None:
            raise ConfigError(f"missing fixed parameter {key!r}")
        try:
            v = float(v)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"fixed parameter {key!r} must be a number") from exc
        if not math.isfinite(v) or (minimum is not None and v < minimum):
            raise ConfigError(f"fixed parameter {key!r}={v} is out of range")
        return v

    def n_env(self) -> float:
        if "n_env" in self.fixed:
            return self.number("n_env", minimum=0.0)
        if "T_env" in self.fixed:
            return bose_occupation(self.number("T_env", minimum=0.0))
        raise ConfigError("specify either n_env or T_env")

    def cavity(self, n_env=None) -> CavityParams:
        kappa = self.number("kappa_over_mu", 0.5)
        if kappa <= 0:
            raise ConfigError("kappa_over_mu must be positive")
        return CavityParams(mu=1.0, kappa=kappa, n_env=self.n_env() if n_env is None else n_env)


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    return str(v)


def to_csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r[c]) for c in columns])
    return buf.getvalue()


def _pmap(fn, items, threads: int):
    items = list(items)
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _counts(rows) -> dict:
    c = {OK: 0, ABOVE: 0, INVALID: 0}
    for r in rows:
        c[r["status"]] += 1
    return c


@dataclass
class RunResult:
    outputs: dict[str, str]  # path suffix -> file contents
    counts: dict
    report: dict | None = None


# -- map ---------------------------------------------------------------------

def map_point(delta: float, C: float, params: CavityParams) -> dict:
    row = {"delta": delta, "C": C, "T_ratio": None, "boltzmann_x": None, "heating_flag": None}
    if abs(C) > 1.0 - abs(delta) / 2.0 + 1e-12:
        return {**row, "status": INVALID}
    s = summary_of(delta, C)
    if not below_threshold(s, params):
        return {**row, "status": ABOVE}
    rep = steady_temperature(s, params)
    return {
        **row,
        "T_ratio": rep.temperature_ratio,
        "boltzmann_x": rep.boltzmann_x,
        "heating_flag": heating_condition(s, params),
        "status": OK,
    }


def heating_boundary(n_env: float, points: int = 101) -> list[dict]:
    """Points on ``C = -1 - (n_env + 1/2) delta`` inside the physical region.

    The line meets the region only for ``-2/(n_env + 1) <= delta <= 0``.
    """
    lo = -2.0 / (n_env + 1.0)
    return [
        {"delta": float(d), "C_boundary": -1.0 - (n_env + 0.5) * float(d)}
        for d in np.linspace(lo, 0.0, points)
    ]


def run_map(spec: SweepSpec, threads: int = 1) -> RunResult:
    params = spec.cavity()
    if params.n_env <= 0:
        raise ConfigError("map mode needs a finite environment temperature (n_env > 0)")
    pts = [(float(d), float(c)) for d in spec.grids["delta"].values() for c in spec.grids["C"].values()]
    rows = _pmap(lambda dc: map_point(dc[0], dc[1], params), pts, threads)
    boundary = heating_boundary(params.n_env, int(spec.number("boundary_points", 101, minimum=2)))
    return RunResult(
        outputs={"": to_csv(MAP_COLUMNS, rows), ".boundary.csv": to_csv(BOUNDARY_COLUMNS, boundary)},
        counts=_counts(rows),
    )


# -- decay -------------------------------------------------------------------

def _state(name):
    if isinstance(name, dict):
        return make_dimer(name["p11"], name["p22"], name["p33"], name["p44"], complex(name.get("c23", 0.0)))
    if name not in NAMED_STATES:
        raise ConfigError(f"unknown state {name!r}; choose from {sorted(NAMED_STATES)}")
    return NAMED_STATES[name]()


def decay_point(state_name, kind: ChannelKind, n_env: float, gamma_t: float, params: CavityParams) -> dict:
    s0 = _state(state_name)
    if kind is ChannelKind.GADC:
        ch = TransferChannel(kind, t_tr=gamma_t, gamma=1.0, n_env=n_env)
    else:
        ch = TransferChannel(kind, t_tr=gamma_t, gamma_d=1.0)
    summ = summarize(evolve(s0, ch))
    row = {
        "state": state_name if isinstance(state_name, str) else "custom",
        "channel": kind.value,
        "n_env": n_env,
        "gamma_t": gamma_t,
        "delta": summ.delta,
        "C": summ.coherence_C,
        "T_ratio": None,
    }
    if not below_threshold(summ, params):
        return {**row, "status": ABOVE}
    return {**row, "T_ratio": steady_temperature(summ, params).temperature_ratio, "status": OK}


def run_decay(spec: SweepSpec, threads: int = 1) -> RunResult:
    try:
        kind = ChannelKind(str(spec.fixed.get("channel", "GADC")).upper())
    except ValueError as exc:
        raise ConfigError("channel must be PDC or GADC") from exc
    states = spec.fixed.get("states", ["psi_plus", "rho_mix"])
    for s in states:
        _state(s)
    n_values = spec.fixed.get("n_env_values")
    if n_values is None:
        n_values = [spec.n_env()]
    n_values = [float(n) for n in n_values]
    if any(not n > 0 for n in n_values):
        raise ConfigError("decay mode needs n_env > 0 for every curve")
    jobs = [
        (s, n, float(gt))
        for n in n_values
        for s in states
        for gt in spec.grids["gamma_t"].values()
    ]
    rows = _pmap(lambda j: decay_point(j[0], kind, j[1], j[2], spec.cavity(j[1])), jobs, threads)
    return RunResult(outputs={"": to_csv(DECAY_COLUMNS, rows)}, counts=_counts(rows))


# -- compare -----------------------------------------------------------------

def dimer_gain(C: float, params: CavityParams) -> float:
    """``T_c(C) / T_c(0)`` for a single-excitation pair (``delta = 0``)."""
    T = steady_temperature(summary_of(0.0, C), params).temperature
    T0 = steady_temperature(summary_of(0.0, 0.0), params).temperature
    return T / T0


def phaseonium_point(frac: float, phi: float, atom: PhaseoniumParams, params: CavityParams) -> dict:
    bare = thermal_phaseonium(atom)
    s = inject_coherence(bare, frac * bare.max_eps, phi)
    row = {"group": "phaseonium", "C": s.coherence_C, "T_ratio": None}
    if threshold_margin(s, params) <= 0:
        return {**row, "status": ABOVE}
    return {**row, "T_ratio": coherence_gain(s, params), "status": OK}


def run_compare(spec: SweepSpec, threads: int = 1) -> RunResult:
    params = spec.cavity()
    atom = PhaseoniumParams(
        T_a=spec.number("T_a", 0.5, minimum=0.0), delta_g=spec.number("delta_g", 0.1, minimum=0.0)
    )
    fracs = spec.grids["eps_fraction"].values()
    if fracs.max() >= 1.0:
        raise ConfigError("eps_fraction must stay below 1 (the injection bound is strict)")
    # phi = pi gives negative C (hotter), phi = 0 positive C; skip the duplicate C = 0
    jobs = [(float(f), math.pi) for f in fracs[::-1]] + [(float(f), 0.0) for f in fracs if f > 0]
    rows = _pmap(lambda j: phaseonium_point(j[0], j[1], atom, params), jobs, threads)

    def dimer_row(C):
        return {"group": "dimer", "C": C, "T_ratio": dimer_gain(C, params), "status": OK}

    rows += _pmap(dimer_row, [float(c) for c in spec.grids["C"].values()], threads)
    return RunResult(outputs={"": to_csv(COMPARE_COLUMNS, rows)}, counts=_counts(rows))


# -- point / oracle ----------------------------------------------------------

def run_point(spec: SweepSpec, fock_dim: int = 40) -> RunResult:
    delta = spec.number("delta")
    C = spec.number("C")
    params = spec.cavity()
    report = {"delta": delta, "C": C, "kappa_over_mu": params.kappa, "n_env": params.n_env}
    if abs(C) > 1.0 - abs(delta) / 2.0 + 1e-12:
        report["status"] = INVALID
        report["error"] = "coherence exceeds 1 - |delta|/2"
        counts = {OK: 0, ABOVE: 0, INVALID: 1}
    else:
        s = summary_of(delta, C)
        try:
            rep = steady_temperature(s, params)
        except AboveThresholdError as exc:
            report.update(status=ABOVE, error=str(exc))
            counts = {OK: 0, ABOVE: 1, INVALID: 0}
        else:
            report.update(asdict(rep))
            report["T_ratio"] = rep.temperature_ratio
            report["heating_flag"] = heating_condition(s, params)
            report["status"] = OK
            if spec.fixed.get("numeric"):
                rho = numeric_steady_state(s, params, fock_dim=fock_dim)
                x, dev = extract_temperature(rho)
                report["numeric"] = {"boltzmann_x": x, "gibbs_deviation": dev, "fock_dim": rho.dim}
            counts = {OK: 1, ABOVE: 0, INVALID: 0}
    return RunResult(outputs={"": json.dumps(report, indent=2, sort_keys=True) + "\n"}, counts=counts, report=report)


def run_oracle(spec: SweepSpec, fock_dim: int = 20) -> RunResult:
    state_name = spec.fixed.get("state", "psi_plus")
    try:
        dimer = _state(state_name)
    except InvalidStateError as exc:
        raise ConfigError(str(exc)) from exc
    g_tau = spec.number("g_tau", 0.01, minimum=0.0)
    try:
        cfg = OracleConfig(g=1.0, tau=g_tau, p=spec.number("p", 1.0), fock_dim=int(spec.fixed.get("fock_dim", fock_dim)))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    est = extract_rates(dimer, cfg)
    summ = summarize(dimer)
    expected = {"r_plus": 1 + summ.coherence_C + summ.delta / 2, "r_minus": 1 + summ.coherence_C - summ.delta / 2}
    report = {
        "state": state_name if isinstance(state_name, str) else "custom",
        "g_tau": g_tau,
        "fock_dim": cfg.fock_dim,
        "estimate": asdict(est),
        "expected": expected,
        "relative_error": {
            k: abs(getattr(est, k) - v) / max(v, 0.1) for k, v in expected.items()
        },
        "status": OK,
    }
    return RunResult(outputs={"": json.dumps(report, indent=2, sort_keys=True) + "\n"}, counts={OK: 1, ABOVE: 0, INVALID: 0}, report=report)


def run(spec: SweepSpec, threads: int = 1, fock_dim: int | None = None) -> RunResult:
    if spec.mode == "map":
        return run_map(spec, threads)
    if spec.mode == "decay":
        return run_decay(spec, threads)
    if spec.mode == "compare":
        return run_compare(spec, threads)
    if spec.mode == "point":
        return run_point(spec, fock_dim or 40)
    return run_oracle(spec, fock_dim or 20)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dimerfuel", description=__doc__.splitlines()[0])
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--config", type=Path, help="JSON file with mode, grids, fixed, output_path")
    p.add_argument("--out", help="output path (CSV for sweeps, JSON for point/oracle)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--fock-dim", type=int)
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a fixed parameter (value parsed as JSON)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def load_spec(args) -> SweepSpec:
    d = {}
    if args.config is not None:
        try:
            d = json.loads(args.config.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
    if args.mode:
        d["mode"] = args.mode
    if args.out:
        d["output_path"] = args.out
    fixed = dict(d.get("fixed") or {})
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        try:
            fixed[key] = json.loads(value)
        except json.JSONDecodeError:
            fixed[key] = value
    d["fixed"] = fixed
    spec = SweepSpec.from_dict(d)
    if not spec.output_path:
        raise ConfigError("no output path (use --out or output_path)")
    return spec


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    start = time.perf_counter()
    try:
        spec = load_spec(args)
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        result = run(spec, threads=args.threads, fock_dim=args.fock_dim)
    except AboveThresholdError as exc:
        print(f"physics error: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except (ConfigError, InvalidStateError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    total = sum(result.counts.values())
    manifest = {
        "config": spec.to_dict(),
        "version": __version__,
        "counts": result.counts,
        "total": total,
        "wall_time_s": time.perf_counter() - start,
    }
    out = spec.output_path
    try:
        for suffix, text in result.outputs.items():
            Path(out + suffix).write_text(text)
        Path(out + ".manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    log.info("wrote %s (%d points: %s)", out, total, result.counts)
    if result.report is not None and "error" in result.report:
        print(result.report["error"], file=sys.stderr)
    if result.counts[OK] == 0:
        return EXIT_PHYSICS
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
