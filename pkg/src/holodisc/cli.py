"""Command-line front end: construct, equiv, verify, simulate, compare.

Configuration files are YAML.  Stencil documents are JSON with exact
rational coefficients written as text, so they round-trip losslessly.
Every output file is written to a temporary name and renamed into place.

Exit codes: 0 success, 1 a check or run failed, 2 usage or configuration
error (no output is written in that case).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import random
import sys
import tempfile
import time
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from . import __version__
from .constructor import MacroEvolution, NonConvergence, construct, family_from_name
from .coupling import (
    build_coupling, circulant_eigs_V, is_exceptional, random_ensemble,
    self_adjointness_defect, spectral_dichotomy,
)
from .equivpde import consistency_report, to_equivalent_pde
from .exactalg import ParamPoly, TruncSeries, parse_poly
from .gridops import Stencil
from . import simkit

__all__ = ["main", "StencilDocument", "ToolConfig", "ConfigError", "load_config",
           "load_preset", "preset_names", "golden_document"]

SCHEMA = 1


class ConfigError(ValueError):
    """Invalid configuration or command usage (exit code 2)."""


# ---------------------------------------------------------------------------
# atomic output
# ---------------------------------------------------------------------------

def write_atomic(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def dump_json(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# stencil documents
# ---------------------------------------------------------------------------

def _shift_text(s: Fraction) -> str:
    return str(s)


def stencil_to_json(st: Stencil) -> dict[str, str]:
    return {_shift_text(s): c.to_text() for s, c in st.taps.items()}


def stencil_from_json(d: dict[str, str]) -> Stencil:
    return Stencil({Fraction(s): parse_poly(c) for s, c in d.items()})


@dataclass
class StencilDocument:
    """Serialised construction: series of stencils plus equivalent-PDE table."""

    family: str
    parameters: dict[str, str]
    orders: dict[str, int]
    series: dict[tuple[int, ...], Stencil]
    iterations: int | None = None
    certified: bool | None = None
    equivalent: dict[int, ParamPoly] | None = None
    depth: int | None = None
    consistency: dict | None = None
    provenance: dict = field(default_factory=dict)

    @property
    def vars(self) -> tuple[str, ...]:
        return tuple(self.orders)

    def evolution(self) -> MacroEvolution:
        body = TruncSeries(self.vars, tuple(self.orders.values()), dict(self.series))
        return MacroEvolution(body, self.family)

    def closure(self) -> Stencil:
        return self.evolution().folded()

    @classmethod
    def from_result(cls, result, seed: int = 0) -> "StencilDocument":
        ev = result.evolution
        return cls(
            family=result.family.name, parameters=result.family.params(),
            orders=dict(result.orders), series={k: v for k, v in ev.body.items()},
            iterations=result.iterations, certified=result.certified,
            provenance={"tool": "holodisc", "version": __version__, "seed": seed},
        )

    def to_json(self) -> dict:
        out = {
            "schema": SCHEMA,
            "kind": "stencil_document",
            "family": self.family,
            "parameters": dict(self.parameters),
            "orders": dict(self.orders),
            "series_vars": list(self.vars),
            "series": [{"powers": list(k), "taps": stencil_to_json(v)}
                       for k, v in sorted(self.series.items())],
            "closure": stencil_to_json(self.closure()),
            "iterations": self.iterations,
            "certified": self.certified,
            "provenance": dict(self.provenance),
        }
        if self.equivalent is not None:
            out["equivalent_pde"] = {"depth": self.depth,
                                     "terms": {str(n): c.to_text()
                                               for n, c in sorted(self.equivalent.items())}}
        if self.consistency is not None:
            out["consistency"] = self.consistency
        return out

    def dumps(self) -> str:
        return dump_json(self.to_json())

    @classmethod
    def from_json(cls, d: dict) -> "StencilDocument":
        if d.get("kind") != "stencil_document":
            raise ValueError("not a stencil document")
        if d.get("schema") != SCHEMA:
            raise ValueError(f"unsupported schema {d.get('schema')!r}")
        series = {tuple(e["powers"]): stencil_from_json(e["taps"]) for e in d["series"]}
        eq = d.get("equivalent_pde")
        doc = cls(
            family=d["family"], parameters=dict(d["parameters"]),
            orders={k: int(d["orders"][k]) for k in d["series_vars"]}, series=series,
            iterations=d.get("iterations"), certified=d.get("certified"),
            equivalent=({int(n): parse_poly(c) for n, c in eq["terms"].items()} if eq else None),
            depth=(eq["depth"] if eq else None), consistency=d.get("consistency"),
            provenance=dict(d.get("provenance", {})),
        )
        if "closure" in d and stencil_from_json(d["closure"]) != doc.closure():
            raise ValueError("closure does not match the stored series")
        return doc

    @classmethod
    def loads(cls, text: str) -> "StencilDocument":
        return cls.from_json(json.loads(text))

    def make_family(self):
        return family_from_name(self.family, **_family_kwargs(self.family, self.parameters))

    def with_equivalent(self, depth: int) -> "StencilDocument":
        e = to_equivalent_pde(self.evolution(), depth)
        rep = consistency_report(e, self.make_family())
        p = self.orders.get("gamma", 0)
        verdict = rep.as_dict()
        verdict["expected_order"] = p
        verdict["consistent"] = rep.consistent_to(p)
        return StencilDocument(self.family, self.parameters, self.orders, self.series,
                               self.iterations, self.certified, dict(e.terms), depth, verdict,
                               dict(self.provenance))


def _family_kwargs(name: str, params: dict[str, Any]) -> dict[str, Any]:
    """Translate text parameters back into constructor keyword arguments."""
    out: dict[str, Any] = {}
    for key, val in params.items():
        if key in ("theta", "d"):
            if name == "heterogeneous":
                continue
            s = str(val)
            out[key] = None if s in (key, "symbolic") else Fraction(s)
        elif key in ("perturbation", "lattice"):
            out[key] = str(val).lower() == "true"
        else:
            raise ConfigError(f"unknown family parameter {key!r}")
    if name == "wave" and "d" in out:
        out["lattice"] = True
    return out


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

_SCHEMA: dict[str, set[str]] = {
    "family": {"name", "theta", "d", "perturbation", "lattice"},
    "orders": {"gamma", "a", "c", "alpha"},
    "equiv": {"depth"},
    "simulation": {"experiment", "n_fine", "n_coarse", "dt_fine", "dt_coarse", "T", "cadence",
                   "alpha", "domain", "initial", "a", "k", "phi", "modes", "H", "bloch_points",
                   "orders", "tolerance", "full_scale"},
    "verification": {"N", "gamma", "theta", "degree", "trials", "random_configs", "max_N",
                     "commutativity_max_N", "dichotomy"},
    "output": {"dir", "prefix"},
}
_TOP = set(_SCHEMA) | {"seed"}
_DICHOTOMY = {"N", "M", "H", "tol"}


@dataclass
class ToolConfig:
    family: dict = field(default_factory=dict)
    orders: dict = field(default_factory=dict)
    equiv: dict = field(default_factory=dict)
    simulation: dict = field(default_factory=dict)
    verification: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    seed: int = 0

    @classmethod
    def from_mapping(cls, raw: Any) -> "ToolConfig":
        if not isinstance(raw, dict) or not raw:
            raise ConfigError("configuration is empty or not a mapping")
        unknown = set(raw) - _TOP
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        for block, allowed in _SCHEMA.items():
            val = raw.get(block, {})
            if not isinstance(val, dict):
                raise ConfigError(f"block {block!r} must be a mapping")
            extra = set(val) - allowed
            if extra:
                raise ConfigError(f"unknown keys in {block!r}: {sorted(extra)}")
        dich = raw.get("verification", {}).get("dichotomy", {})
        if not isinstance(dich, dict) or set(dich) - _DICHOTOMY:
            raise ConfigError("bad verification.dichotomy block")
        seed = raw.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ConfigError("seed must be an integer")
        for key, val in raw.get("orders", {}).items():
            if not isinstance(val, int) or isinstance(val, bool) or val < 0:
                raise ConfigError(f"order {key!r} must be a non-negative integer")
        if "gamma" in raw.get("orders", {}) and raw["orders"]["gamma"] < 1:
            raise ConfigError("gamma order must be >= 1")
        return cls(**{b: dict(raw.get(b, {})) for b in _SCHEMA}, seed=seed)


def exact(value: Any, what: str) -> Fraction:
    """Exact rational from an int or a ``"num/den"`` string (floats rejected)."""
    if isinstance(value, bool) or isinstance(value, float):
        raise ConfigError(f"{what} must be an integer or a 'num/den' string, not {value!r}")
    try:
        return Fraction(str(value))
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"{what}: cannot read {value!r} as a rational") from None


def load_config(path: str | Path) -> ToolConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from None
    return ToolConfig.from_mapping(raw)


def preset_names() -> list[str]:
    root = resources.files("holodisc") / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def load_preset(name: str) -> ToolConfig:
    path = resources.files("holodisc") / "presets" / f"{name}.yaml"
    if not path.is_file():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return ToolConfig.from_mapping(yaml.safe_load(path.read_text()))


def golden_document(name: str) -> dict | None:
    path = resources.files("holodisc") / "presets" / "golden" / f"{name}.json"
    return json.loads(path.read_text()) if path.is_file() else None


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _resolve_config(args) -> ToolConfig:
    if args.config and args.preset:
        raise ConfigError("give either --config or --preset, not both")
    if args.config:
        cfg = load_config(args.config)
    elif args.preset:
        cfg = load_preset(args.preset)
        cfg.output.setdefault("prefix", args.preset)
    else:
        raise ConfigError("a --config or --preset is required")
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg


def _out_dir(args, cfg: ToolConfig | None = None) -> Path:
    if args.out:
        return Path(args.out)
    if cfg is not None and "dir" in cfg.output:
        return Path(cfg.output["dir"])
    return Path(".")


def _prefix(cfg: ToolConfig, default: str) -> str:
    return str(cfg.output.get("prefix", default))


def _build_family(cfg: ToolConfig):
    block = dict(cfg.family)
    if "name" not in block:
        raise ConfigError("family.name is required")
    name = block.pop("name")
    kwargs: dict[str, Any] = {}
    for key, val in block.items():
        if key in ("theta", "d"):
            kwargs[key] = None if val in (None, "symbolic") else exact(val, f"family.{key}")
        else:
            if not isinstance(val, bool):
                raise ConfigError(f"family.{key} must be true or false")
            kwargs[key] = val
    try:
        return family_from_name(name, **kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid family: {exc}") from None


def cmd_construct(args) -> int:
    cfg = _resolve_config(args)
    family = _build_family(cfg)
    orders = dict(cfg.orders)
    if "gamma" not in orders:
        raise ConfigError("orders.gamma is required")
    unknown = set(orders) - set(family.series_vars)
    if unknown:
        raise ConfigError(f"family {family.name!r} has no series variable(s) {sorted(unknown)}")
    out = _out_dir(args, cfg)
    try:
        result = construct(family, orders)
    except NonConvergence as exc:
        print(f"construct: {exc}", file=sys.stderr)
        return 1
    doc = StencilDocument.from_result(result, cfg.seed)
    depth = cfg.equiv.get("depth")
    if depth is not None:
        if not isinstance(depth, int) or depth < 2:
            raise ConfigError("equiv.depth must be an integer >= 2")
        doc = doc.with_equivalent(depth)
    path = write_atomic(out / f"{_prefix(cfg, family.name)}.stencil.json", doc.dumps())
    print(f"{path}: {family.name} {doc.orders} in {doc.iterations} iterations, "
          f"certified={doc.certified}")
    return 0 if doc.certified else 1


def cmd_equiv(args) -> int:
    if args.depth < 2:
        raise ConfigError("--depth must be >= 2")
    try:
        doc = StencilDocument.loads(Path(args.document).read_text())
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"equiv: cannot read document: {exc}", file=sys.stderr)
        return 1
    doc = doc.with_equivalent(args.depth)
    report = {"family": doc.family, "parameters": doc.parameters, "orders": doc.orders,
              "depth": args.depth,
              "table": {str(n): c.to_text() for n, c in sorted(doc.equivalent.items())},
              "consistency": doc.consistency}
    stem = Path(args.document).name.replace(".stencil.json", "").replace(".json", "")
    path = write_atomic(_out_dir(args) / f"{stem}.equiv.json", dump_json(report))
    for n, c in sorted(doc.equivalent.items()):
        print(f"d^{n}: {c.to_text()}")
    print(f"{path}: defect order {doc.consistency['defect_order']}")
    return 0


def _as_list(v: Any) -> list:
    return v if isinstance(v, list) else [v]


def cmd_verify(args) -> int:
    cfg = _resolve_config(args)
    v = cfg.verification
    if not v:
        raise ConfigError("verification block is empty")
    Ns = [int(n) for n in _as_list(v.get("N", [3, 4, 5]))]
    gammas = [exact(g, "verification.gamma") for g in _as_list(v.get("gamma", ["1/2", 1]))]
    thetas = [exact(t, "verification.theta") for t in _as_list(v.get("theta", [0, "1/3"]))]
    degrees = [int(d) for d in _as_list(v.get("degree", [3]))]
    trials = int(v.get("trials", 3))
    if any(n < 2 for n in Ns) or any(d < 2 for d in degrees):
        raise ConfigError("need N >= 2 and degree >= 2")
    checks: list[dict] = []

    def record(name: str, ok: bool, exceptional: bool = False, **info):
        checks.append({"check": name, "pass": bool(ok), "exceptional": exceptional, **info})

    rng = random.Random(cfg.seed)
    for N in Ns:
        for g in gammas:
            for t in thetas:
                cm = build_coupling(N, g, t)
                exc = is_exceptional(N, g, t)
                tag = {"N": N, "gamma": str(g), "theta": str(t)}
                record("circulant", cm.is_circulant(), **tag)
                record("commutes", cm.commutes(), **tag)
                record("determinant", cm.C_plus.det() == cm.det_plus
                       and cm.C_minus.det() == cm.det_minus, **tag)
                for D in degrees:
                    ens = random_ensemble(rng, N, D)
                    rep = self_adjointness_defect(ens, g, t, trials=trials, seed=rng.randrange(2**31))
                    record("self_adjoint", rep.exact_zero or exc, exceptional=exc,
                           defect=str(rep.defect), degree=D, **tag)
    cmax = int(v.get("commutativity_max_N", 0))
    for N in range(2, cmax + 1):
        for g in gammas:
            for t in thetas:
                record("commutes", build_coupling(N, g, t).commutes(), N=N, gamma=str(g), theta=str(t))
    for N in Ns:
        for t in thetas:
            spectrum = circulant_eigs_V(N, float(t))
            expected = [N // 2] if (t == 0 and N % 2 == 0) else []
            record("circulant_eigs", spectrum.zero_modes == expected, N=N, theta=str(t),
                   zero_modes=spectrum.zero_modes)
    dich = v.get("dichotomy")
    if dich:
        M = int(dich.get("M", 64))
        H = float(exact(dich.get("H", 1), "dichotomy.H"))
        for N in [int(n) for n in _as_list(dich.get("N", [4]))]:
            rep = spectral_dichotomy(N, H, None, M, tol=float(dich.get("tol", 1e-8)))
            target = -4 * math.pi ** 2 / H ** 2
            ok = rep.n_zero == N and abs(rep.gap - target) <= 0.01 * abs(target)
            record("dichotomy", ok, N=N, M=M, n_zero=rep.n_zero, gap=rep.gap, target=target)
    failed = [c for c in checks if not c["pass"]]
    summary = {"checks": checks, "n_checks": len(checks), "n_failed": len(failed),
               "n_exceptional": sum(c["exceptional"] for c in checks), "seed": cfg.seed}
    path = write_atomic(_out_dir(args, cfg) / f"{_prefix(cfg, 'verify')}.json", dump_json(summary))
    print(f"{path}: {len(checks)} checks, {len(failed)} failed, "
          f"{summary['n_exceptional']} exceptional")
    return 1 if failed else 0


def _sim_float(sim: dict, key: str, default: float) -> float:
    val = sim.get(key, default)
    try:
        return float(Fraction(str(val))) if isinstance(val, str) else float(val)
    except (TypeError, ValueError):
        raise ConfigError(f"simulation.{key} must be a number") from None


_FULL_SCALE = {"n_fine": 3300, "n_coarse": 151, "dt_fine": 4e-6}


def _simulate_breather(sim: dict, out: Path, prefix: str, full_scale: bool) -> tuple[int, dict]:
    if full_scale or sim.get("full_scale"):
        sim = {**sim, **_FULL_SCALE}
    n_fine = int(sim.get("n_fine", 1024))
    n_coarse = int(sim.get("n_coarse", 128))
    if n_coarse < 5 or n_fine < n_coarse:
        raise ConfigError("need n_coarse >= 5 and n_fine >= n_coarse")
    dom = sim.get("domain", [-math.pi, math.pi])
    lo, hi = float(dom[0]), float(dom[1])
    T = _sim_float(sim, "T", 1.0)
    cadence = _sim_float(sim, "cadence", 0.1)
    alpha = _sim_float(sim, "alpha", -1.0)
    dt_f = _sim_float(sim, "dt_fine", 2.5e-5)
    dt_c = _sim_float(sim, "dt_coarse", 2e-4)
    init = sim.get("initial", "sech")
    if init not in ("sech", "zero"):
        raise ConfigError("simulation.initial must be 'sech' or 'zero'")
    fine = simkit.SimGrid(lo, hi, n_fine)
    coarse = simkit.SimGrid(lo, hi, n_coarse)
    try:
        simkit.RunConfig("nls_fine", dt_f, T, cadence).check_stability(fine.h, simkit.NLS_RK4_BOUND)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    out.mkdir(parents=True, exist_ok=True)
    u0 = simkit.breather_initial if init == "sech" else (lambda x: np.zeros_like(x, dtype=complex))
    runs = {}
    for name, grid, dt, rhs in (
            ("fine", fine, dt_f, lambda u: simkit.nls_fine_rhs(u, fine.h, alpha)),
            ("holistic", coarse, dt_c, lambda U: simkit.nls_holistic_rhs(U, coarse.h, alpha))):
        try:
            runs[name] = simkit.rk4_integrate(rhs, u0(grid.x), dt, T, cadence, grid.x)
        except simkit.NonFinite as exc:
            simkit.write_trajectory_csv(str(out / f"{prefix}_{name}_last_stable.csv"), exc.trajectory)
            print(f"simulate: {name} run became non-finite: {exc}", file=sys.stderr)
            return 1, {"error": str(exc)}
        simkit.write_trajectory_csv(str(out / f"{prefix}_{name}.csv"), runs[name])
    fine_at = simkit.coarse_samples(runs["fine"], coarse)
    metrics = simkit.compare_runs(fine_at, runs["holistic"], stride=1)
    metrics.update({"experiment": "breather", "n_fine": n_fine, "n_coarse": n_coarse, "T": T,
                    "alpha": alpha, "dt_fine": dt_f, "dt_coarse": dt_c})
    return 0, metrics


def _simulate_dispersion(sim: dict) -> tuple[int, dict]:
    a = exact(sim.get("a", "1/2"), "simulation.a")
    k_over_pi = exact(sim.get("k", 16), "simulation.k (in units of pi)")
    H = exact(sim.get("H", "1/4"), "simulation.H")
    modes = [int(K) for K in _as_list(sim.get("modes", [1, 2, 3]))]
    orders = sim.get("orders", {"gamma": 7, "a": 3})
    tol = _sim_float(sim, "tolerance", 0.01)
    M = int(sim.get("bloch_points", 256))
    if not abs(a) < 1:
        raise ConfigError("need |a| < 1")
    k = float(k_over_pi) * math.pi
    period = Fraction(2) / k_over_pi
    if (H / period).denominator != 1:
        raise ConfigError("H must be a whole number of heterogeneity periods 2/k")
    result = construct(family_from_name("heterogeneous"), orders)
    taps = simkit.numeric_taps(result.evolution.folded(),
                               {"gamma": 1, "a": float(a), "k": k, "H": float(H)})
    rows, ok = [], True
    for K in modes:
        pred = simkit.predicted_het_rate(float(a), k, K)
        fine = simkit.bloch_rate(float(a), k, K, M)
        hol = float(np.real(simkit.stencil_rate(taps, K, float(H))))
        ef, eh = abs(fine - pred) / abs(pred), abs(hol - pred) / abs(pred)
        ok &= ef < tol and eh < tol
        rows.append({"K": K, "predicted": pred, "fine_bloch": fine, "holistic": hol,
                     "rel_err_fine": ef, "rel_err_holistic": eh})
    return (0 if ok else 1), {"experiment": "het_dispersion", "a": str(a), "k": k, "H": str(H),
                              "orders": orders, "tolerance": tol, "modes": rows, "pass": ok}


def cmd_simulate(args) -> int:
    cfg = _resolve_config(args)
    sim = cfg.simulation
    if not sim:
        raise ConfigError("simulation block is empty")
    out = _out_dir(args, cfg)
    exp = sim.get("experiment")
    prefix = _prefix(cfg, str(exp))
    np.random.seed(cfg.seed)
    t0 = time.perf_counter()
    if exp == "breather":
        code, metrics = _simulate_breather(sim, out, prefix, args.full_scale)
    elif exp == "het_dispersion":
        code, metrics = _simulate_dispersion(sim)
    else:
        raise ConfigError("simulation.experiment must be 'breather' or 'het_dispersion'")
    path = write_atomic(out / f"{prefix}_metrics.json", dump_json(metrics))
    print(f"{path}: done in {time.perf_counter() - t0:.1f}s")
    if exp == "breather" and "max_rel_l2" in metrics:
        print(f"max relative L2 of |u| at coarse points: {metrics['max_rel_l2']:.4g}")
    elif exp == "het_dispersion":
        for r in metrics["modes"]:
            print(f"K={r['K']}: predicted {r['predicted']:.8f} fine {r['fine_bloch']:.8f} "
                  f"holistic {r['holistic']:.8f}")
    return code


def _read_closure(path: str) -> tuple[Stencil, dict]:
    d = json.loads(Path(path).read_text())
    if d.get("kind") == "stencil_document":
        return StencilDocument.from_json(d).closure(), d
    if d.get("kind") == "golden":
        return stencil_from_json(d["closure"]), d
    raise ValueError(f"{path} is neither a stencil document nor a golden file")


def cmd_compare(args) -> int:
    """Exact closure comparison (JSON) or trajectory comparison (CSV)."""
    a = args.first
    if args.preset:
        if args.second:
            raise ConfigError("give a second file or --preset, not both")
        gold = golden_document(args.preset)
        if gold is None or "closure" not in gold:
            raise ConfigError(f"no golden closure for preset {args.preset!r}")
        b_closure, b_meta = stencil_from_json(gold["closure"]), gold
    elif args.second:
        b = args.second
        if a.endswith(".csv") and b.endswith(".csv"):
            fa, fb = simkit.read_trajectory_csv(a), simkit.read_trajectory_csv(b)
            try:
                m = simkit.compare_runs(fa, fb)
            except simkit.GridMismatch as exc:
                print(f"compare: {exc}", file=sys.stderr)
                return 1
            print(dump_json({"max_rel_l2": m["max_rel_l2"], "max_max_abs": m["max_max_abs"]}), end="")
            return 0
        try:
            b_closure, b_meta = _read_closure(b)
        except (OSError, ValueError, KeyError) as exc:
            print(f"compare: {exc}", file=sys.stderr)
            return 1
    else:
        raise ConfigError("compare needs two files or a file and --preset")
    try:
        a_closure, _ = _read_closure(a)
    except (OSError, ValueError, KeyError) as exc:
        print(f"compare: {exc}", file=sys.stderr)
        return 1
    diff = a_closure - b_closure
    same = diff.is_zero()
    report = {"identical": same, "difference": stencil_to_json(diff)}
    if args.out:
        write_atomic(Path(args.out) / "compare.json", dump_json(report))
    print("identical" if same else f"differs: {diff.to_text()}")
    return 0 if same else 1


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(2)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="holodisc", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", help="YAML configuration file")
            sp.add_argument("--preset", help="bundled configuration name")
            sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out", help="output directory")

    sp = sub.add_parser("construct", help="build a closure and write a stencil document")
    common(sp)
    sp.set_defaults(func=cmd_construct)

    sp = sub.add_parser("equiv", help="equivalent-PDE table of a stencil document")
    sp.add_argument("document")
    sp.add_argument("--depth", type=int, default=8)
    common(sp, config=False)
    sp.set_defaults(func=cmd_equiv)

    sp = sub.add_parser("verify", help="exact coupling and spectral checks")
    common(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("simulate", help="fine and holistic simulations")
    common(sp)
    sp.add_argument("--paper-scale", dest="full_scale", action="store_true",
                    help="3300 fine points and 151 elements for the breather run")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("compare", help="compare two documents, a document and a golden, or two CSVs")
    sp.add_argument("first")
    sp.add_argument("second", nargs="?")
    sp.add_argument("--preset", help="golden file to compare against")
    sp.add_argument("--out", help="directory for compare.json")
    sp.set_defaults(func=cmd_compare)
    sp = sub.add_parser("presets", help="list bundled presets")
    sp.set_defaults(func=lambda a: print("\n".join(preset_names())) or 0)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"holodisc {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
