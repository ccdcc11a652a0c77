"""Command-line entry point.

    direntropy [--config PATH] [--seed U64] [--out PATH] [--format json|csv]
               [--threads N] [--nats] {strip,entropy,skew-check,chaos,tuples,selftest}

The config is one JSON file (keys documented in ``schema.json``); missing
keys take the defaults in :data:`DEFAULTS`.  JSON output is one record per
line, and the first record always echoes the resolved config and the
declarations.  CSV output starts with that same echo as a ``#`` comment line.
``DIRENTROPY_OUT_DIR`` relocates relative ``--out`` paths.

Exit status: 0 ok, 1 config error, 2 precondition failure, 3 invariant violated.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .chaos_tuples import (
    CylinderSet,
    TupleObservation,
    chaos_ladder,
    density_probe,
    entropy_tuple_certify,
    mean_ly_verdict,
)
from .entropy import PartitionSpec, directional_entropy_rate
from .errors import DirentropyError, InvariantViolation
from .lattice import DirectionSpec, ShapeSet, StripParams, as_rational, strip
from .measures import MeasureKind, MeasureModel, Rect, sample_config
from .skewprod import fiber_directional_check, sandwich_check
from .systems import ConfigWindow, SystemKind, SystemSpec

OUT_DIR_ENV = "DIRENTROPY_OUT_DIR"
LN2 = math.log(2)

DEFAULTS: dict = {
    "system": {"kind": "full_shift", "q": 2},
    "measure": {"kind": "bernoulli", "p": [0.5, 0.5]},
    "direction": {"label": "golden", "horizon": 1000},
    "b_ladder": ["1/2", "1", "3"],
    "N_max": 64,
    "partition": {"name": "zero_coordinate"},
    "seed": 0,
    "declarations": {"trivial_pinsker": False},
    "output": {"format": "json", "path": None},
    "strip": {"b": "1", "N": 5},
    "skew": {"phase_count": 8},
    "chaos": {"R": 4, "b": "1", "Ns": [16, 64, 256], "trials": 4, "pair": "independent", "eta": 0.2},
    "tuples": {"mode": "probe", "budget": 10, "tol": 0.0001, "cylinders": None, "b": "1"},
}


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    system: SystemSpec
    measure: MeasureModel
    direction: DirectionSpec
    b_ladder: tuple[Fraction, ...]
    N_max: int
    partition: PartitionSpec
    seed: int
    declarations: dict
    output: dict
    raw: dict

    def resolved(self) -> dict:
        """The config as actually used, with every key filled in."""
        out = copy.deepcopy(self.raw)
        out["system"] = self.system.to_dict()
        out["measure"] = self.measure.to_dict() if self.measure.kind is not MeasureKind.EMPIRICAL else self.raw["measure"]
        out["direction"] = self.direction.to_dict()
        out["b_ladder"] = [str(b) for b in self.b_ladder]
        out["partition"] = self.partition.to_dict()
        out["seed"] = self.seed
        return out


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def _system(d: dict) -> SystemSpec:
    kind = d.get("kind", "full_shift")
    if kind in ("three_dot", "ledrappier"):
        return SystemSpec.three_dot()
    if kind == "full_shift":
        return SystemSpec.full_shift(int(d.get("q", 2)))
    return SystemSpec.from_dict(d)


def _measure(d: dict, system: SystemSpec) -> MeasureModel:
    kind = d.get("kind")
    if kind == "point_mass":
        return MeasureModel.point_mass(system.q, int(d.get("symbol", 0)))
    if kind == "uniform":
        return MeasureModel.uniform(system.q)
    if kind == "haar":
        return MeasureModel.haar(system)
    if kind == "empirical" and "samples_path" in d:
        with open(d["samples_path"]) as fh:
            samples = [ConfigWindow.from_json(json.loads(line)) for line in fh if line.strip()]
        return MeasureModel.empirical(samples)
    return MeasureModel.from_dict(d, system)


def _direction(d: dict) -> DirectionSpec:
    horizon = int(d.get("horizon", 1000))
    if "continued_fraction" in d:
        return DirectionSpec.from_continued_fraction(d["continued_fraction"], horizon, d.get("label", ""))
    if "beta" in d:
        beta = Fraction(str(d["beta"]))
        return DirectionSpec(beta.numerator, beta.denominator, horizon, d.get("label", ""))
    return DirectionSpec.from_dict({**d, "horizon": horizon})


def load_config(path: str | None, seed: int | None = None) -> ExperimentConfig:
    raw: dict = {}
    if path:
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("cannot read config %s: %s" % (path, exc)) from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(raw) - set(DEFAULTS)
        if unknown:
            raise ConfigError("unknown config keys: %s" % ", ".join(sorted(unknown)))
    cfg = _merge(DEFAULTS, raw)
    if seed is not None:
        cfg["seed"] = seed
    try:
        system = _system(cfg["system"])
        measure = _measure(cfg["measure"], system)
        direction = _direction(cfg["direction"])
        b_ladder = tuple(as_rational(str(b)) for b in cfg["b_ladder"])
        N_max = int(cfg["N_max"])
        partition = PartitionSpec.from_dict({"q": system.q, **cfg["partition"]})
        seed_v = int(cfg["seed"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError("invalid config: %s" % exc) from exc
    if not 0 <= seed_v < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    if N_max < 1 or N_max > direction.horizon:
        raise ConfigError("N_max must lie in [1, horizon=%d]" % direction.horizon)
    if any(b <= 0 for b in b_ladder):
        raise ConfigError("b values must be positive")
    if partition.q != system.q:
        raise ConfigError("partition alphabet differs from the system's")
    if measure.q != system.q:
        raise ConfigError("measure alphabet differs from the system's")
    if measure.kind is MeasureKind.HAAR and system.kind is SystemKind.FULL_SHIFT:
        measure = MeasureModel.uniform(system.q)
    return ExperimentConfig(system, measure, direction, b_ladder, N_max, partition, seed_v,
                            dict(cfg["declarations"]), dict(cfg["output"]), cfg)


class Writer:
    """Collects records and writes them once, in order."""

    def __init__(self, fmt: str, header: dict):
        self.fmt = fmt
        self.header = header
        self.records: list[dict] = []

    def add(self, rec: dict) -> None:
        self.records.append(rec)

    def render(self) -> str:
        if self.fmt == "json":
            lines = [json.dumps({"record": "config", **self.header}, sort_keys=True)]
            lines += [json.dumps(r, sort_keys=True) for r in self.records]
            return "\n".join(lines) + "\n"
        buf = io.StringIO()
        buf.write("# " + json.dumps(self.header, sort_keys=True) + "\n")
        cols: list[str] = []
        for r in self.records:
            for k in r:
                if k not in cols:
                    cols.append(k)
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in self.records:
            w.writerow({k: (json.dumps(v, sort_keys=True) if isinstance(v, (list, dict)) else v) for k, v in r.items()})
        return buf.getvalue()


def _pmap(fn: Callable, items: Sequence, threads: int) -> list:
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(threads) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


def _unit(nats: bool) -> tuple[float, str]:
    return (LN2, "nats/col") if nats else (1.0, "bits/col")


def cmd_strip(cfg: ExperimentConfig, w: Writer, threads: int, nats: bool) -> int:
    b = as_rational(str(cfg.raw["strip"]["b"]))
    N = int(cfg.raw["strip"]["N"])
    shape = strip(cfg.direction, StripParams(b, N))
    if w.fmt == "json":
        w.add({"record": "strip", "b": str(b), "N": N, "count": len(shape), "sites": shape.to_json()})
    else:
        for m, n in shape.sites:
            w.add({"m": m, "n": n})
    return 0


def cmd_entropy(cfg: ExperimentConfig, w: Writer, threads: int, nats: bool) -> int:
    scale, unit = _unit(nats)

    def one(b):
        return directional_entropy_rate(cfg.measure, cfg.system, cfg.partition, cfg.direction, b, cfg.N_max)

    for b, est in zip(cfg.b_ladder, _pmap(one, cfg.b_ladder, threads)):
        rec = {"record": "rate", "b": str(b), "rate": est.rate * scale, "slope_se": est.slope_se * scale,
               "unit": unit, "fit_window": list(est.fit_window), "method": est.curve.method,
               "partition": cfg.partition.name}
        if w.fmt == "json":
            rec["curve"] = [[n, h * scale] for n, h in est.curve.points]
            w.add(rec)
        else:
            for n, h in est.curve.points:
                w.add({**{k: v for k, v in rec.items() if k != "fit_window"},
                       "fit_lo": est.fit_window[0], "fit_hi": est.fit_window[1], "N": n, "H": h * scale})
    return 0


def cmd_skew(cfg: ExperimentConfig, w: Writer, threads: int, nats: bool) -> int:
    scale, unit = _unit(nats)
    phases = int(cfg.raw["skew"]["phase_count"])
    res = fiber_directional_check(cfg.measure, cfg.system, cfg.partition, cfg.direction, cfg.N_max, phases,
                                  cfg.seed, threads)
    fiber = res["fiber"]
    for t, est in fiber.per_phase:
        ok = sandwich_check(cfg.direction, t, cfg.N_max)
        w.add({"record": "phase", "t": str(t), "rate": est.rate * scale, "slope_se": est.slope_se * scale,
               "unit": unit, "sandwich": ok})
    w.add({"record": "skew_check", "fiber_rate": res["fiber_rate"] * scale, "fiber_se": res["fiber_se"] * scale,
           "directional_rate": res["directional_rate"] * scale, "directional_se": res["directional_se"] * scale,
           "difference": res["difference"] * scale, "tolerance": res["tolerance"] * scale,
           "phase_spread": res["phase_spread"] * scale, "agree": res["agree"], "unit": unit,
           "fit_window": list(res["directional"].fit_window), "layers": fiber.layers})
    return 0


def _chaos_rect(cfg: ExperimentConfig, b: Fraction, N: int, R: int) -> Rect:
    lo, hi = -math.ceil(float(b)) - R - 1, math.ceil(float(cfg.direction.beta) * N + float(b)) + R + 1
    return Rect(-R - 1, lo, N + 2 * R + 2, hi - lo + 1)


def cmd_chaos(cfg: ExperimentConfig, w: Writer, threads: int, nats: bool) -> int:
    c = cfg.raw["chaos"]
    R = int(c["R"])
    b = as_rational(str(c["b"]))
    Ns = [int(n) for n in c["Ns"]]
    for n in Ns:
        cfg.direction.check_index(n)
    rect = _chaos_rect(cfg, b, max(Ns), R)
    sys_arg = None if cfg.measure.kind is MeasureKind.HAAR else cfg.system

    def one(k):
        x = sample_config(cfg.measure, rect, cfg.seed, spec=sys_arg, stream=2 * k)
        if c["pair"] == "finite_difference":
            origin = ShapeSet(((0, 0),))
            y = x.with_values(origin, [(x.values(origin)[0] + 1) % x.q])
        else:
            y = sample_config(cfg.measure, rect, cfg.seed, spec=sys_arg, stream=2 * k + 1)
        ladder = chaos_ladder(TupleObservation((x, y), R), cfg.direction, b, Ns)
        return ladder, mean_ly_verdict(ladder, float(c["eta"]))

    for k, (ladder, verdict) in enumerate(_pmap(one, list(range(int(c["trials"]))), threads)):
        for a in ladder:
            w.add({"record": "chaos", "trial": k, "pair": c["pair"], **a.to_dict()})
        if w.fmt == "json":
            w.add({"record": "verdict", "trial": k, **verdict.to_dict()})
    return 0


def cmd_tuples(cfg: ExperimentConfig, w: Writer, threads: int, nats: bool) -> int:
    t = cfg.raw["tuples"]
    declared = bool(cfg.declarations.get("trivial_pinsker", False))
    b = as_rational(str(t["b"]))
    if t["mode"] == "certify":
        cyls = t.get("cylinders") or []
        cylinders = [CylinderSet(ShapeSet.from_json(cd["window"]), frozenset(tuple(p) for p in cd["patterns"]),
                                 cfg.system.q) for cd in cyls]
        verdict = entropy_tuple_certify(cfg.measure, cfg.system, cylinders, cfg.direction, b, cfg.N_max,
                                        float(t["tol"]), declared)
        w.add({"record": "certify", **verdict.to_dict()})
        return 0
    budget = int(t["budget"])
    chunks = [(k, min(k + 1, budget)) for k in range(budget)]

    def one(chunk):
        # each neighbourhood is an independent probe with its own seed stream
        rep = density_probe(cfg.measure, cfg.system, cfg.direction, 1, cfg.seed + chunk[0], declared,
                            b=b, tol=float(t["tol"]))
        return rep["records"][0] if rep["records"] else None

    recs = _pmap(one, chunks, threads)
    found = 0
    for k, rec in enumerate(recs):
        rec = {**rec, "index": k}
        found += bool(rec.get("found"))
        w.add({"record": "probe", **rec})
    w.add({"record": "probe_summary", "budget": budget, "found": found,
           "fraction": (found / budget) if budget else None})
    return 0


def selftest_checks(cfg: ExperimentConfig) -> list[tuple[str, Callable[[], bool]]]:
    from . import selftest

    return selftest.checks(cfg)


def cmd_selftest(cfg: ExperimentConfig, w: Writer, threads: int, nats: bool) -> int:
    checks = selftest_checks(cfg)

    def run(item):
        name, fn = item
        try:
            return name, bool(fn()), ""
        except DirentropyError as exc:
            return name, False, "%s: %s" % (type(exc).__name__, exc)

    failed = 0
    for name, ok, msg in _pmap(run, checks, threads):
        w.add({"record": "check", "name": name, "ok": ok, "error": msg})
        failed += not ok
    w.add({"record": "selftest_summary", "checks": len(checks), "failed": failed})
    if failed:
        raise InvariantViolation("%d self-checks failed" % failed)
    return 0


COMMANDS = {
    "strip": cmd_strip,
    "entropy": cmd_entropy,
    "skew-check": cmd_skew,
    "chaos": cmd_chaos,
    "tuples": cmd_tuples,
    "selftest": cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="direntropy", description="Directional entropy experiments on Z^2 subshifts.")
    p.add_argument("--config", metavar="PATH", help="JSON experiment config")
    p.add_argument("--seed", type=int, metavar="U64", help="override the config seed")
    p.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"), help="json (one record per line) or csv")
    p.add_argument("--threads", type=int, default=1, metavar="N", help="worker threads; output does not depend on it")
    p.add_argument("--nats", action="store_true", help="report entropies in nats instead of bits")
    p.add_argument("--version", action="version", version="%(prog)s " + __version__)
    p.add_argument("command", choices=sorted(COMMANDS))
    return p


def _out_path(path: str | None) -> str | None:
    if path is None:
        return None
    base = os.environ.get(OUT_DIR_ENV)
    if base and not os.path.isabs(path):
        return os.path.join(base, path)
    return path


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be positive", file=sys.stderr)
        return 1
    if args.seed is not None and not 0 <= args.seed < 2**64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return 1
    try:
        cfg = load_config(args.config, args.seed)
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 1
    fmt = args.format or cfg.output.get("format") or "json"
    if fmt not in ("json", "csv"):
        print("config error: output.format must be json or csv", file=sys.stderr)
        return 1
    header = {"command": args.command, "version": __version__, "config": cfg.resolved(),
              "declarations": {"trivial_pinsker": bool(cfg.declarations.get("trivial_pinsker", False))},
              "unit": "nats" if args.nats else "bits"}
    writer = Writer(fmt, header)
    status = 0
    try:
        status = COMMANDS[args.command](cfg, writer, args.threads, args.nats)
    except InvariantViolation as exc:
        print("invariant violated: %s" % exc, file=sys.stderr)
        status = 3
    except (DirentropyError, ValueError) as exc:
        print("precondition failed: %s: %s" % (type(exc).__name__, exc), file=sys.stderr)
        return 2
    text = writer.render()
    path = _out_path(args.out or cfg.output.get("path"))
    if path:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
