"""Command-line experiment runner.

Every subcommand writes a CSV (header row, ``%.17e`` numbers) and, next to
it, a JSON summary.  Runs are deterministic for a fixed configuration and
seed.  ``VISCOWAVE_THREADS`` caps worker threads.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import acceptance, cluster_square, rates, resolvent1d, simulate, spectrum1d, spectrum_disk
from .kernels import KernelDomainError, KernelSpecError, kernel_from_spec

__all__ = ["ExperimentConfig", "ConfigError", "build_parser", "config_from_args", "config_from_json", "run", "main"]


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


# parameter schema per subcommand: name -> (type, default)
SCHEMAS: dict[str, dict[str, tuple[type, Any]]] = {
    "spectrum1d": {"n_range": (str, "1:50"), "tol": (float, 1e-10)},
    "disk": {"l": (int, 0), "n_range": (str, "5:80"), "tol": (float, 1e-8)},
    "resolvent": {"s_grid": (str, "log:1:1000:200"), "grid_n": (str, "auto")},
    "clusters": {"delta": (float, 0.3), "s_list": (str, "100,400,1600,6400"), "trials": (int, 200)},
    "simulate": {"grid_n": (int, 2048), "quad_nodes": (int, 40), "T": (float, 500.0), "init": (str, "gaussian"),
                 "tau_max": (float, 1e6)},
    "rates": {"scenario": (str, "auto"), "t_grid": (str, "log:10:1e4:100")},
    "accept": {"suite": (str, "primary"), "only": (str, "")},
}
NEEDS_KERNEL = {"spectrum1d", "disk", "resolvent", "simulate", "rates"}
DEFAULT_OUT = {
    "spectrum1d": "roots.csv",
    "disk": "disk.csv",
    "resolvent": "resolvent.csv",
    "clusters": "clusters.csv",
    "simulate": "decay.csv",
    "rates": "envelope.csv",
    "accept": "acceptance.csv",
}


@dataclass
class ExperimentConfig:
    subcommand: str
    kernel: dict | None = None
    params: dict = field(default_factory=dict)
    out: str | None = None
    seed: int = 7

    def __post_init__(self):
        if self.subcommand not in SCHEMAS:
            raise ConfigError(f"subcommand: unknown value {self.subcommand!r}")
        schema = SCHEMAS[self.subcommand]
        unknown = set(self.params) - set(schema)
        if unknown:
            raise ConfigError(f"params.{sorted(unknown)[0]}: unknown field for {self.subcommand}")
        full = {}
        for name, (typ, default) in schema.items():
            value = self.params.get(name, default)
            try:
                full[name] = typ(value)
            except (TypeError, ValueError):
                raise ConfigError(f"params.{name}: expected {typ.__name__}, got {value!r}") from None
        self.params = full
        if self.subcommand in NEEDS_KERNEL:
            if self.kernel is None:
                raise ConfigError("kernel: required for this subcommand")
            try:
                kernel_from_spec(self.kernel)
            except (KernelSpecError, KernelDomainError) as exc:
                raise ConfigError(str(exc)) from None
        if self.out is None:
            self.out = DEFAULT_OUT[self.subcommand]
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ConfigError("seed: expected integer")


def config_from_json(text: str) -> ExperimentConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: malformed JSON ({exc.msg})") from None
    if not isinstance(raw, dict):
        raise ConfigError("config: expected a JSON object")
    allowed = {"subcommand", "kernel", "params", "out", "seed"}
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"{sorted(unknown)[0]}: unknown field")
    if "subcommand" not in raw:
        raise ConfigError("subcommand: missing field")
    kernel = raw.get("kernel")
    if isinstance(kernel, str):
        kernel = _parse_kernel(kernel)
    return ExperimentConfig(raw["subcommand"], kernel, raw.get("params", {}), raw.get("out"), raw.get("seed", 7))


def _parse_kernel(text: str) -> dict:
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"kernel: malformed JSON ({exc.msg})") from None
    if not isinstance(spec, dict):
        raise ConfigError("kernel: expected a JSON object")
    return spec


# ---------------------------------------------------------------------------
# grids


def parse_range(text: str) -> tuple[int, int]:
    try:
        a, b = text.split(":")
        return int(a), int(b)
    except ValueError:
        raise ConfigError(f"range: expected 'lo:hi', got {text!r}") from None


def parse_grid(text: str) -> np.ndarray:
    """``log:a:b:n``, ``lin:a:b:n`` or a comma-separated list."""
    parts = text.split(":")
    try:
        if parts[0] in ("log", "lin") and len(parts) == 4:
            a, b, n = float(parts[1]), float(parts[2]), int(parts[3])
            return np.geomspace(a, b, n) if parts[0] == "log" else np.linspace(a, b, n)
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise ConfigError(f"grid: cannot parse {text!r}") from None


# ---------------------------------------------------------------------------
# output


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17e" % float(v)
    return str(v)


def write_csv(path: Path, header: Sequence[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_summary(path: Path, summary: dict) -> Path:
    out = path.with_suffix(".json")
    with open(out, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")
    return out


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, complex):
        return [v.real, v.imag]
    return str(v)


# ---------------------------------------------------------------------------
# subcommands


def _spectrum1d(cfg: ExperimentConfig):
    k = kernel_from_spec(cfg.kernel)
    lo, hi = parse_range(cfg.params["n_range"])
    eigs = spectrum1d.find_eigenvalues(k, lo, hi, cfg.params["tol"])
    rows = [
        (e.n, e.z.real, e.z.imag, e.residual, e.seed.real, e.seed.imag, spectrum1d.asymptotic_ratio(k, e))
        for e in eigs
    ]
    header = ["n", "re_z", "im_z", "residual", "seed_re", "seed_im", "ratio_r_n"]
    checks = {
        "residual": max(e.residual for e in eigs) <= cfg.params["tol"],
        "window_count": all(e.window_count == 1 for e in eigs),
    }
    return header, rows, checks


def _disk(cfg: ExperimentConfig):
    k = kernel_from_spec(cfg.kernel)
    l = cfg.params["l"]
    lo, hi = parse_range(cfg.params["n_range"])
    eigs = spectrum_disk.find_disk_eigenvalues(k, l, (lo, hi), cfg.params["tol"])
    beta = getattr(k, "beta", math.nan)
    rows = []
    for e in eigs:
        r = spectrum_disk.xi_ratio(k, e)
        rows.append((l, e.n, e.z.real, e.z.imag, e.residual, r.real, r.imag, spectrum_disk.rate_product(e, beta)))
    header = ["l", "n", "re_z", "im_z", "residual", "xi_ratio_re", "xi_ratio_im", "rate_product"]
    return header, rows, {"residual": max(e.residual for e in eigs) <= cfg.params["tol"]}


def _resolvent(cfg: ExperimentConfig):
    k = kernel_from_spec(cfg.kernel)
    s = parse_grid(cfg.params["s_grid"])
    g = cfg.params["grid_n"]
    grid_n: int | str = g if g == "auto" else int(g)
    from ._parallel import parallel_map

    probes = parallel_map(lambda v: resolvent1d.resolvent_norm(k, float(v), grid_n), list(s))
    proxy = np.array([p.proxy_full for p in probes])
    running = np.maximum.accumulate(np.where(s >= 1.0, proxy, 0.0))
    B = np.real(k.laplace(1j * s)) * running
    rows = [(p.s, p.norm_R, p.proxy_full, b, p.refinement_ratio) for p, b in zip(probes, B)]
    header = ["s", "norm_R", "proxy_full", "B", "refinement_ratio"]
    return header, rows, {"refinement": all(p.refined for p in probes)}


def _clusters(cfg: ExperimentConfig):
    s_list = [float(v) for v in cfg.params["s_list"].split(",")]
    rep = cluster_square.verify_cluster_bounds(cfg.params["delta"], s_list, cfg.params["trials"], cfg.seed)
    rows = [
        (s, mn, mx, ov, ev)
        for s, mn, mx, ov, ev in zip(rep.s_list, rep.min_value, rep.max_ratio, rep.optimality_values, rep.eigenfunction_values)
    ]
    header = ["s", "min_boundary_norm_sq", "max_ratio_sqrt_s", "optimality_norm_sq", "eigenfunction_norm_sq"]
    checks = {
        "lower_bound_positive": rep.lower_constant > 0,
        "optimality_slope": 0.45 <= rep.optimality_slope <= 0.55,
        "eigenfunction_slope": abs(rep.eigenfunction_slope) <= 0.05,
    }
    return header, rows, checks


def _simulate(cfg: ExperimentConfig):
    k = kernel_from_spec(cfg.kernel)
    p = cfg.params
    res = simulate.run_decay(k, p["grid_n"], p["quad_nodes"], p["T"], p["init"], tau_max=p["tau_max"])
    rows = [(r.t, r.E, r.E1_hom, r.weighted_psi) for r in res.records]
    checks = {"contraction": res.max_rel_increase <= 1e-8}
    extra = {"exponent": res.exponent, "halfwidth": res.halfwidth, "window": list(res.window)}
    return ["t", "E", "E1_hom", "weighted_psi"], rows, checks, extra


def _rates(cfg: ExperimentConfig):
    k = kernel_from_spec(cfg.kernel)
    env = rates.predict_energy_envelope(k, cfg.params["scenario"])
    t = parse_grid(cfg.params["t_grid"])
    rows = [(v, env.evaluate(v), env.evaluate(v, log_free=True)) for v in t]
    extra = {"scenario": env.scenario.value, "exponent": env.exponent}
    return ["t", "envelope", "envelope_log_free"], rows, {}, extra


def _accept(cfg: ExperimentConfig):
    if cfg.params["suite"] != "primary":
        raise ConfigError(f"params.suite: unknown suite {cfg.params['suite']!r}")
    only = [int(v) for v in cfg.params["only"].split(",") if v.strip()] or None
    results = acceptance.run_suite(only)
    rows = [(r.number, r.name, r.passed, r.seconds, r.summary) for r in results]
    checks = {f"criterion_{r.number}": r.passed for r in results}
    return ["criterion", "name", "passed", "seconds", "summary"], rows, checks


HANDLERS = {
    "spectrum1d": _spectrum1d,
    "disk": _disk,
    "resolvent": _resolvent,
    "clusters": _clusters,
    "simulate": _simulate,
    "rates": _rates,
    "accept": _accept,
}


def run(cfg: ExperimentConfig) -> int:
    """Execute a configuration; returns 0 when every reported check passes."""
    result = HANDLERS[cfg.subcommand](cfg)
    header, rows, checks = result[:3]
    extra = result[3] if len(result) > 3 else {}
    out = Path(cfg.out)
    write_csv(out, header, rows)
    summary = {
        "subcommand": cfg.subcommand,
        "kernel": cfg.kernel,
        "params": cfg.params,
        "seed": cfg.seed,
        "checks": checks,
        "passed": all(checks.values()),
        **extra,
    }
    write_summary(out, summary)
    return 0 if summary["passed"] else 1


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="viscowave", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="subcommand", required=True)
    for name, schema in SCHEMAS.items():
        sp = sub.add_parser(name)
        if name in NEEDS_KERNEL:
            sp.add_argument("--kernel", required=True, help='JSON, e.g. \'{"kind": "standard", "beta": 0.7, "eps": 1}\'')
        for pname, (typ, default) in schema.items():
            flag = "--" + pname.replace("_", "-")
            sp.add_argument(flag, dest=pname, type=str, default=None, help=f"default: {default}")
        sp.add_argument("--out", default=None)
        sp.add_argument("--seed", type=int, default=7)
    cfg = sub.add_parser("run", help="run a JSON configuration file")
    cfg.add_argument("config")
    return ap


def config_from_args(ns: argparse.Namespace) -> ExperimentConfig:
    if ns.subcommand == "run":
        return config_from_json(Path(ns.config).read_text())
    schema = SCHEMAS[ns.subcommand]
    params = {k: getattr(ns, k) for k in schema if getattr(ns, k) is not None}
    kernel = _parse_kernel(ns.kernel) if getattr(ns, "kernel", None) else None
    return ExperimentConfig(ns.subcommand, kernel, params, ns.out, ns.seed)


def main(argv: Sequence[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
        return run(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
