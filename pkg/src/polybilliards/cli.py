"""Command-line experiments writing CSV outputs and a ``run.json`` record.

Exit status: 0 success, 2 invalid input, 3 numerical or internal failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import FitError, PowerLawFit, decay_exponent, diffusion_exponent, fit_power_law, histogram_vs_oracle
from .dynamics import SimulationError
from .ensemble import EnsembleConfig, MomentSeries, default_sample_times, simulate
from .escape import (
    SurvivalCurve,
    crossover_m_alpha,
    default_survival_grid,
    mean_escape_time,
    opening_for_escape_time,
    run_open,
    survival_curve,
)
from .geometry import Circle, GeometryError, Polygon, Sinai, build_table, make_opening
from .oracles import (
    CircleCollisionLaw,
    DomainError,
    PolygonCollisionLaw,
    RegularOrbitParams,
    cb_collision_pdf,
    polygon_collision_pdf,
    regular_orbit_collision_time,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3

KINDS = ("simulate", "histogram", "escape", "scan-m", "oracle", "fit")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """Fully resolved settings of one command; persisted as ``run.json``."""

    kind: str
    table: str = "circle"
    m: int | None = None
    r: float = 1.0
    L: float = 1.0
    R: float = 0.25
    particles: int | None = None
    t_max: float | None = None
    seed: int = 0
    samples: int | None = None
    delta: float | None = None
    tau_e: float | None = None
    placement: str | None = None
    window: tuple[float, float] | None = None
    workers: int = 1
    out: str = "out"
    time: float | None = None
    binning: str = "box"
    m_list: list[int] = field(default_factory=list)
    curve: str = "cb-pdf"
    nc: float = 1.0
    points: int = 401
    input: str | None = None
    fit_kind: str | None = None
    tau: float | None = None

    def table_spec(self, m: int | None = None):
        if self.table == "polygon":
            m = self.m if m is None else m
            if m is None:
                raise ConfigError("--m is required for a polygon table")
            return Polygon(int(m), float(self.r))
        if self.table == "circle":
            return Circle(float(self.r))
        if self.table == "sinai":
            return Sinai(float(self.L), float(self.R))
        raise ConfigError(f"unknown table {self.table!r}")


def _parse_window(text: str) -> tuple[float, float]:
    lo, sep, hi = str(text).partition(":")
    if not sep:
        raise ConfigError(f"window must be lo:hi (got {text!r})")
    return float(lo), float(hi)


def _parse_mlist(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    return [int(v) for v in str(text).split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    a = common.add_argument
    a("--config", help="JSON file whose keys mirror the flags (flags win)")
    a("--table", choices=["polygon", "circle", "sinai"])
    a("--m", type=int)
    a("--r", type=float)
    a("--L", type=float)
    a("--R", type=float)
    a("--particles", type=int)
    a("--t-max", type=float, help="time budget in time units")
    a("--seed", type=int)
    a("--samples", type=int, help="number of log-spaced sample times")
    a("--delta", type=float, help="opening width")
    a("--tau-e", type=float, help="fixed mean escape time (scan-m); sets delta per m")
    a("--placement", help="side:k | vertex:k | s:<value>")
    a("--window", help="fit window lo:hi in time units")
    a("--workers", type=int)
    a("--out", help="output directory")

    parser = argparse.ArgumentParser(prog="polybilliards", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="kind", required=True)
    sub.add_parser("simulate", parents=[common], help="collision moments and diffusion exponent")
    h = sub.add_parser("histogram", parents=[common], help="collision histogram vs analytic law")
    h.add_argument("--time", type=float, help="observation time (default 100 tau_c)")
    h.add_argument("--binning", choices=["box", "phase"])
    sub.add_parser("escape", parents=[common], help="survival curve through an opening")
    s = sub.add_parser("scan-m", parents=[common], help="decay exponent over polygon side counts")
    s.add_argument("--m-list", help="comma-separated ascending side counts")
    o = sub.add_parser("oracle", parents=[common], help="sample analytic curves")
    o.add_argument("--curve", choices=["cb-pdf", "polygon-pdf", "t-reg"])
    o.add_argument("--nc", type=float, help="mean collision count for density curves")
    o.add_argument("--points", type=int)
    f = sub.add_parser("fit", parents=[common], help="re-fit an existing moments.csv or survival.csv")
    f.add_argument("--input", required=True)
    f.add_argument("--fit-kind", choices=["diffusion", "decay"])
    f.add_argument("--tau", type=float, help="tau_c (diffusion) or tau_e (decay) for the default window")
    return parser


def resolve(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        values.update({k.replace("-", "_"): v for k, v in raw.items()})
    for k, v in vars(args).items():
        if k != "config" and v is not None:
            values[k] = v
    values["kind"] = args.kind
    known = set(RunConfig.__dataclass_fields__)
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "window" in values and values["window"] is not None and not isinstance(values["window"], (list, tuple)):
        values["window"] = _parse_window(values["window"])
    if "m_list" in values:
        values["m_list"] = _parse_mlist(values["m_list"])
    return RunConfig(**values)


def _write_run_json(cfg: RunConfig, out: Path, extra: dict | None = None) -> None:
    record = {"version": __version__, "seed": cfg.seed, "config": asdict(cfg)}
    if extra:
        record.update(extra)
    with open(out / "run.json", "w") as fh:
        json.dump(record, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")


def _ensemble(cfg: RunConfig, t_max: float, default_n: int, sample_times=None) -> EnsembleConfig:
    return EnsembleConfig(
        n_particles=cfg.particles or default_n,
        seed=cfg.seed,
        t_max=t_max,
        sample_times=None if sample_times is None else tuple(sample_times),
        workers=cfg.workers,
    )


def cmd_simulate(cfg: RunConfig, out: Path) -> dict:
    table = build_table(cfg.table_spec())
    t_max = cfg.t_max or 1e3 * table.tau_c
    ens = _ensemble(cfg, t_max, 10**4, default_sample_times(table.tau_c, t_max, cfg.samples or 64))
    moments = simulate(table, ens).moments()
    moments.to_csv(out / "moments.csv")
    z, z_err, fit = diffusion_exponent(moments, cfg.window)
    fit.write(out / "fit.csv", {"z": repr(z), "z_stderr": repr(z_err)})
    return {"tau_c": table.tau_c, "t_max": t_max, "z": z, "z_stderr": z_err,
            "usable": moments.usable, "flagged": moments.flagged}


def cmd_histogram(cfg: RunConfig, out: Path) -> dict:
    table = build_table(cfg.table_spec())
    if cfg.table == "sinai":
        raise ConfigError("no analytic collision law exists for the Sinai table")
    t = cfg.time or 100 * table.tau_c
    t_max = max(cfg.t_max or t, t)
    ens = _ensemble(cfg, t_max, 10**5, [t])
    hist = simulate(table, ens).histogram(t)
    law = CircleCollisionLaw(t, cfg.r) if cfg.table == "circle" else PolygonCollisionLaw(t, cfg.m, cfg.r)
    rep = histogram_vs_oracle(hist, law, binning=cfg.binning)
    rep.to_csv(out / "histogram.csv")
    with open(out / "tv.csv", "w") as fh:
        fh.write("t,tv,outside_mass,oracle_tail,binning\n")
        fh.write(f"{t!r},{rep.tv!r},{rep.outside_mass!r},{rep.oracle_tail!r},{cfg.binning}\n")
    return {"t": t, "tv": rep.tv, "outside_mass": rep.outside_mass, "usable": hist.usable, "flagged": hist.flagged}


def _escape_once(cfg: RunConfig, spec, out: Path, prefix: str = "") -> dict:
    table = build_table(spec)
    if cfg.tau_e is not None:
        delta = opening_for_escape_time(table, cfg.tau_e)
    elif cfg.delta is not None:
        delta = cfg.delta
    else:
        raise ConfigError("an opening width (--delta) or --tau-e is required")
    opening = make_opening(table, delta, cfg.placement)
    tau_e = mean_escape_time(table, delta)
    t_max = cfg.t_max or 100 * tau_e
    records = run_open(table, opening, _ensemble(cfg, t_max, 10**5))
    curve = survival_curve(records, default_survival_grid(tau_e, t_max, cfg.samples or 96))
    curve.to_csv(out / f"{prefix}survival.csv")
    records.to_csv(out / f"{prefix}escapes.csv")
    delta_exp, fit = decay_exponent(curve, cfg.window)
    fit.write(out / f"{prefix}fit.csv", {"delta": repr(delta_exp)})
    return {"delta_width": delta, "tau_e": tau_e, "t_max": t_max, "decay_exponent": delta_exp,
            "stderr": fit.stderr, "usable": records.usable, "flagged": records.flagged}


def cmd_escape(cfg: RunConfig, out: Path) -> dict:
    return _escape_once(cfg, cfg.table_spec(), out)


def cmd_scan_m(cfg: RunConfig, out: Path) -> dict:
    if cfg.table != "polygon":
        raise ConfigError("scan-m needs --table polygon")
    ms = cfg.m_list or ([cfg.m] if cfg.m else [])
    if not ms:
        raise ConfigError("scan-m needs --m-list")
    if any(b <= a for a, b in zip(ms, ms[1:])):
        raise ConfigError("--m-list must be strictly ascending")
    rows = []
    for m in ms:
        res = _escape_once(cfg, cfg.table_spec(m), out, prefix=f"m{m}_")
        rows.append((m, res))
    widths = {res["delta_width"] for _, res in rows}
    crossover = crossover_m_alpha(cfg.r, widths.pop()) if len(widths) == 1 else None
    with open(out / "summary.csv", "w") as fh:
        fh.write("m,delta_width,tau_e,decay_exponent,stderr\n")
        for m, res in rows:
            fh.write(f"{m},{res['delta_width']!r},{res['tau_e']!r},{res['decay_exponent']!r},{res['stderr']!r}\n")
    result = {"runs": {str(m): res for m, res in rows}}
    if crossover is not None:
        result["m_alpha"] = crossover.value
        result["m_alpha_nearest"] = crossover.nearest
        with open(out / "crossover.csv", "w") as fh:
            fh.write("m_alpha,m_alpha_nearest\n")
            fh.write(f"{crossover.value!r},{crossover.nearest}\n")
    return result


def cmd_oracle(cfg: RunConfig, out: Path) -> dict:
    npts = cfg.points
    if cfg.curve == "cb-pdf":
        t = cfg.nc * math.pi * cfg.r / 2
        law = CircleCollisionLaw(t, cfg.r)
        lo = law.support[0]
        n = lo * (1 + np.geomspace(1e-6, 10.0, npts))
        rows = zip(n, cb_collision_pdf(n, t, cfg.r))
        header, name = "n,density", "cb_pdf.csv"
    elif cfg.curve == "polygon-pdf":
        if cfg.m is None:
            raise ConfigError("--m is required for polygon-pdf")
        params = RegularOrbitParams.for_m(cfg.m)
        t = cfg.nc * math.pi * cfg.r / 2 * math.cos(math.pi / cfg.m)
        lo, hi = PolygonCollisionLaw(t, cfg.m, cfg.r).support
        n = np.linspace(lo, hi, npts + 1)[:-1]
        rows = zip(n, polygon_collision_pdf(n, t, params, cfg.r))
        header, name = "n,density", f"polygon_pdf_m{cfg.m}.csv"
    else:
        if cfg.m is None:
            raise ConfigError("--m is required for t-reg")
        params = RegularOrbitParams.for_m(cfg.m)
        phi_max = params.psi + math.pi / 2
        phi = np.linspace(0.0, phi_max, npts + 1)[:-1]
        rows = zip(phi, regular_orbit_collision_time(params, cfg.r, phi))
        header, name = "phi,t", f"t_reg_m{cfg.m}.csv"
    with open(out / name, "w") as fh:
        fh.write(header + "\n")
        for a, b in rows:
            fh.write(f"{float(a)!r},{float(b)!r}\n")
    return {"curve": cfg.curve, "file": name}


def cmd_fit(cfg: RunConfig, out: Path) -> dict:
    path = Path(cfg.input)
    try:
        with open(path) as fh:
            header = fh.readline().strip().split(",")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    kind = cfg.fit_kind or ("diffusion" if "var_n" in header else "decay")
    if kind == "diffusion":
        moments = MomentSeries.from_csv(path, tau_c=cfg.tau if cfg.tau else math.nan)
        window = cfg.window
        if window is None and math.isnan(moments.tau_c):
            window = (float(moments.t.min()), float(moments.t.max()))
        z, z_err, fit = diffusion_exponent(moments, window)
        fit.write(out / "fit.csv", {"z": repr(z), "z_stderr": repr(z_err)})
        return {"z": z, "z_stderr": z_err}
    curve = SurvivalCurve.from_csv(path, tau_e=cfg.tau if cfg.tau else math.nan)
    window = cfg.window
    if window is None and math.isnan(curve.tau_e):
        pos = curve.t[curve.t > 0]
        window = (float(pos.min()), float(pos.max()))
    delta, fit = decay_exponent(curve, window)
    fit.write(out / "fit.csv", {"delta": repr(delta)})
    return {"decay_exponent": delta}


COMMANDS = {
    "simulate": cmd_simulate,
    "histogram": cmd_histogram,
    "escape": cmd_escape,
    "scan-m": cmd_scan_m,
    "oracle": cmd_oracle,
    "fit": cmd_fit,
}


def run(cfg: RunConfig) -> dict:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    result = COMMANDS[cfg.kind](cfg, out)
    _write_run_json(cfg, out, {"result": result})
    return result


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            result = run(cfg)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
    except (ConfigError, GeometryError, DomainError, ValueError, TypeError) as exc:
        if isinstance(exc, FitError):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (SimulationError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(json.dumps(result, indent=2, default=float))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
