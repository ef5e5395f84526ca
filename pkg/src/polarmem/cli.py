"""Command-line front end: model parsing, experiment orchestration, CSV/JSON emission.

Subcommands: capacity, truncate, induced-verify, polarize, construct, simulate,
pipeline.  A single root seed governs every stage through a documented
derivation (sha256 of "<seed>:<stage>"), so identical (model, seed) pairs
reproduce byte-identical outputs.

Exit codes: 0 success, 2 config error, 3 statistical-gate failure, 4 resource
error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import analysis, channels, polar
from .errors import (
    ConfigError,
    ResourceError,
    StructuralError,
    UnsupportedModeError,
    ValidationError,
)
from .markov import (
    CountableChainSpec,
    FiniteMarkovChain,
    ge_chain,
    geometric_pmf,
    mm1_arrival_spec,
    stationary_distribution,
)
from .qnoise import NoiseSpec, verify_induced

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_GATE = 3
EXIT_RESOURCE = 4


def stage_seed(root_seed: int, stage: str) -> int:
    """Deterministic per-stage seed derived from the root seed."""
    digest = hashlib.sha256(f"{root_seed}:{stage}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class ModelConfig:
    chain_kind: str
    chain_spec: object  # FiniteMarkovChain | CountableChainSpec
    chain_params: dict
    noise: NoiseSpec
    csi: bool
    truncation: Optional[tuple[int, str]]
    experiment: dict


def _reject_unknown(doc: dict, allowed: set, where: str) -> None:
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)} in {where}")


def _require_number(doc: dict, key: str, where: str, lo=None, hi=None, integer=False):
    if key not in doc:
        raise ConfigError(f"missing {key!r} in {where}")
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key} must be a number")
    if integer and int(v) != v:
        raise ConfigError(f"{where}.{key} must be an integer")
    if lo is not None and v < lo:
        raise ConfigError(f"{where}.{key}={v} below {lo}")
    if hi is not None and v > hi:
        raise ConfigError(f"{where}.{key}={v} above {hi}")
    return int(v) if integer else float(v)


def _parse_chain(doc: dict):
    if not isinstance(doc, dict) or "type" not in doc:
        raise ConfigError("chain must be an object with a 'type'")
    kind = doc["type"]
    if kind == "explicit":
        _reject_unknown(doc, {"type", "rows"}, "chain")
        if "rows" not in doc:
            raise ConfigError("explicit chain needs 'rows'")
        try:
            return kind, FiniteMarkovChain(np.asarray(doc["rows"], dtype=float)), doc
        except (ValidationError, ValueError) as exc:
            raise ConfigError(f"bad explicit chain: {exc}") from exc
    if kind == "ge":
        _reject_unknown(doc, {"type", "k01", "k10"}, "chain")
        k01 = _require_number(doc, "k01", "chain", 0.0, 1.0)
        k10 = _require_number(doc, "k10", "chain", 0.0, 1.0)
        try:
            return kind, ge_chain(k01, k10), doc
        except StructuralError as exc:
            raise ConfigError(str(exc)) from exc
    if kind == "mm1":
        _reject_unknown(doc, {"type", "lambda", "mu"}, "chain")
        lam = _require_number(doc, "lambda", "chain", lo=0.0)
        mu = _require_number(doc, "mu", "chain", lo=0.0)
        try:
            return kind, mm1_arrival_spec(lam, mu), doc
        except (StructuralError, ValidationError) as exc:
            raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown chain type {kind!r}")


def _parse_noise(doc: dict) -> NoiseSpec:
    if not isinstance(doc, dict) or "type" not in doc:
        raise ConfigError("noise must be an object with a 'type'")
    kind = doc["type"]
    try:
        if kind in ("erasure", "depolarizing"):
            _reject_unknown(doc, {"type", "p"}, "noise")
            p = doc.get("p")
            if not isinstance(p, dict):
                raise ConfigError("noise.p must be an object with 'table' and optional 'tail'")
            _reject_unknown(p, {"table", "tail"}, "noise.p")
            table = p.get("table")
            if not isinstance(table, list) or not table:
                raise ConfigError("noise.p.table must be a nonempty list")
            tail = p.get("tail", 1.0)
            return NoiseSpec(kind, np.asarray(table, dtype=float), float(tail))
        if kind == "pauli":
            _reject_unknown(doc, {"type", "q"}, "noise")
            q = doc.get("q")
            if not isinstance(q, dict):
                raise ConfigError("noise.q must be an object with 'rows' and optional 'tail'")
            _reject_unknown(q, {"rows", "tail"}, "noise.q")
            rows = q.get("rows")
            if not isinstance(rows, list) or not rows:
                raise ConfigError("noise.q.rows must be a nonempty list of 4-vectors")
            tail = q.get("tail", [0.25, 0.25, 0.25, 0.25])
            return NoiseSpec("pauli", np.asarray(rows, dtype=float), np.asarray(tail, dtype=float))
    except (ValidationError, ValueError) as exc:
        raise ConfigError(f"bad noise spec: {exc}") from exc
    raise ConfigError(f"unknown noise type {kind!r}")


_EXPERIMENT_KEYS = {"n", "rate", "trials", "levels", "seed"}


def parse_model(doc: dict) -> ModelConfig:
    """Validate a model document; every unknown key or out-of-range field rejects."""
    if not isinstance(doc, dict):
        raise ConfigError("model must be a JSON object")
    _reject_unknown(doc, {"chain", "noise", "csi", "truncation", "experiment"}, "model")
    if "chain" not in doc or "noise" not in doc:
        raise ConfigError("model needs 'chain' and 'noise'")
    chain_kind, chain_spec, chain_params = _parse_chain(doc["chain"])
    noise = _parse_noise(doc["noise"])
    csi = doc.get("csi", noise.kind != "erasure")
    if not isinstance(csi, bool):
        raise ConfigError("csi must be a boolean")
    truncation = None
    if "truncation" in doc:
        t = doc["truncation"]
        if not isinstance(t, dict):
            raise ConfigError("truncation must be an object")
        _reject_unknown(t, {"level", "augmentation"}, "truncation")
        level = _require_number(t, "level", "truncation", lo=1, integer=True)
        augmentation = t.get("augmentation", "last-column")
        if augmentation not in ("last-column", "linear", "identity-diagonal"):
            raise ConfigError(f"unknown augmentation {augmentation!r}")
        truncation = (level, augmentation)
    if chain_kind == "mm1" and truncation is None:
        raise ConfigError("countable (mm1) chains need a truncation directive")
    experiment = doc.get("experiment", {})
    if not isinstance(experiment, dict):
        raise ConfigError("experiment must be an object")
    _reject_unknown(experiment, _EXPERIMENT_KEYS, "experiment")
    if "n" in experiment:
        _require_number(experiment, "n", "experiment", lo=0, hi=20, integer=True)
    if "rate" in experiment:
        _require_number(experiment, "rate", "experiment", lo=0.0, hi=1.0)
    if "trials" in experiment:
        _require_number(experiment, "trials", "experiment", lo=1, integer=True)
    if "seed" in experiment:
        _require_number(experiment, "seed", "experiment", lo=0, integer=True)
    if "levels" in experiment:
        levels = experiment["levels"]
        if not isinstance(levels, list) or not all(isinstance(x, int) and x >= 1 for x in levels):
            raise ConfigError("experiment.levels must be a list of positive integers")
    return ModelConfig(chain_kind, chain_spec, chain_params, noise, csi, truncation, experiment)


def load_model(path: str) -> ModelConfig:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read model file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"model file is not valid JSON: {exc}") from exc
    return parse_model(doc)


def build_channel(config: ModelConfig) -> channels.MarkovianCqChannel:
    return channels.assemble(config.chain_spec, config.noise, config.csi, config.truncation)


def _fmt(value) -> str:
    if isinstance(value, float):
        return "%.12g" % value
    return str(value)


def write_csv(path: Path, header: list[str], rows: list[tuple]) -> None:
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def _emit_report(doc: dict, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        for key, value in doc.items():
            print(f"{key},{_fmt(value) if not isinstance(value, (list, dict)) else value}")


def _bare_chain(config: ModelConfig) -> FiniteMarkovChain:
    """The (possibly truncated) finite chain, without building the induced law."""
    from .markov import truncate_chain

    spec = config.chain_spec
    if isinstance(spec, FiniteMarkovChain) and config.truncation is None:
        return spec
    level, augmentation = config.truncation
    return truncate_chain(spec, level, augmentation)


def _refuse_no_csi_unital(config: ModelConfig) -> None:
    """Diagnostic for the one mode with no capacity result: unital, hidden state."""
    if config.noise.kind == "erasure" or config.csi:
        return
    if config.noise.kind == "depolarizing":
        rep = analysis.capacity_depolarizing_csi(_bare_chain(config), config.noise)
        raise ConfigError(
            "capacity of depolarizing noise without receiver CSI is unknown; "
            f"Jensen bounds are [{rep.bounds[0]:.6f}, {rep.bounds[1]:.6f}]"
        )
    raise ConfigError("capacity of unital noise without receiver CSI is unsupported")


def _capacity_report(config: ModelConfig, channel) -> dict:
    noise = config.noise
    if noise.kind == "erasure":
        rep = analysis.capacity_erasure(channel.chain, noise, model_id=config.chain_kind)
    elif noise.kind == "depolarizing":
        rep = analysis.capacity_depolarizing_csi(channel.chain, noise, model_id=config.chain_kind)
    else:
        rep = analysis.capacity_unital_csi(channel.chain, noise, model_id=config.chain_kind)
    doc = {"model": rep.model_id, "capacity": rep.capacity, "bits_per_use": rep.capacity}
    if rep.bounds is not None:
        doc["lower_bound"] = rep.bounds[0]
        doc["upper_bound"] = rep.bounds[1]
        doc["jensen_gap"] = rep.jensen_gap
    if config.truncation is not None:
        doc["truncation_level"] = config.truncation[0]
        doc["augmentation"] = config.truncation[1]
    return doc


def _sweep_reference(config: ModelConfig, levels: list[int]) -> Optional[np.ndarray]:
    if config.chain_kind == "mm1":
        ratio = config.chain_params["lambda"] / config.chain_params["mu"]
        length = max(levels) + 1
        while ratio ** length > 1e-13:
            length += 1
        ref = geometric_pmf(ratio, length)
        return ref / ref.sum()
    chain = config.chain_spec
    if isinstance(chain, FiniteMarkovChain):
        return stationary_distribution(chain)
    return None


# ---------------------------------------------------------------------------
# subcommands


def cmd_capacity(args) -> int:
    config = load_model(args.model)
    _refuse_no_csi_unital(config)
    channel = build_channel(config)
    _emit_report(_capacity_report(config, channel), args.format)
    return EXIT_OK


def cmd_truncate(args) -> int:
    config = load_model(args.model)
    levels = args.levels or config.experiment.get("levels")
    if not levels:
        raise ConfigError("truncate needs --levels")
    if isinstance(config.chain_spec, FiniteMarkovChain):
        spec = CountableChainSpec.from_finite(config.chain_spec)
    else:
        spec = config.chain_spec
    reference = _sweep_reference(config, levels)
    ref_level = None if reference is not None else max(levels) + 40
    rows = analysis.truncation_sweep(spec, config.noise, levels,
                                     reference_level=ref_level, reference_pi=reference)
    out = _outdir(args)
    write_csv(out / "sweep.csv", ["level", "l1", "mean_p", "capacity"],
              [(r.level, r.l1_to_reference, r.mean_p, r.capacity) for r in rows])
    print(f"wrote {out / 'sweep.csv'}")
    return EXIT_OK


def cmd_induced_verify(args) -> int:
    config = load_model(args.model)
    channel = build_channel(config)
    trials = args.trials or config.experiment.get("trials", 100_000)
    seed = _seed(args, config)
    report = verify_induced(channel.noise, channel.law, trials,
                            stage_seed(seed, "induced-verify"))
    doc = {
        "trials": report.trials,
        "cells": len(report.cells),
        "failures": [list(f) for f in report.failures],
        "ok": report.ok,
    }
    _emit_report(doc, args.format)
    if not report.ok:
        print(f"induced-law verification failed on cells {report.failures}", file=sys.stderr)
        return EXIT_GATE
    return EXIT_OK


def _polarize(config: ModelConfig, channel, args):
    n = args.n or config.experiment.get("n")
    if n is None:
        raise ConfigError("polarize needs --n")
    trials = args.trials or config.experiment.get("trials", 1000)
    seed = _seed(args, config)
    return analysis.estimate_polarization(channel, n, trials, stage_seed(seed, "polarize"))


def _write_polarization(out: Path, est) -> None:
    write_csv(out / "polarization.csv", ["index", "z_hat", "i_hat", "err_hat"],
              [(i, est.z_hat[i], est.i_hat[i], est.err_hat[i])
               for i in range(est.block_length)])


def cmd_polarize(args) -> int:
    config = load_model(args.model)
    channel = build_channel(config)
    est = _polarize(config, channel, args)
    out = _outdir(args)
    _write_polarization(out, est)
    print(f"wrote {out / 'polarization.csv'}")
    return EXIT_OK


def _write_code(out: Path, code: polar.PolarCode) -> Path:
    path = out / "code.json"
    doc = {
        "n": code.n,
        "info_set": [int(i) for i in code.info_set],
        "frozen_values": [int(b) for b in code.frozen_values],
    }
    path.write_text(json.dumps(doc, sort_keys=True) + "\n")
    return path


def load_code(path: str) -> polar.PolarCode:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read code file: {exc}") from exc
    if not isinstance(doc, dict) or set(doc) - {"n", "info_set", "frozen_values"}:
        raise ConfigError("code file must contain n, info_set, frozen_values")
    try:
        return polar.PolarCode(n=doc["n"], info_set=np.asarray(doc["info_set"], dtype=np.int64),
                               frozen_values=np.asarray(doc.get("frozen_values"), dtype=np.uint8)
                               if doc.get("frozen_values") is not None else None)
    except (ValidationError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad code file: {exc}") from exc


def cmd_construct(args) -> int:
    config = load_model(args.model)
    channel = build_channel(config)
    est = _polarize(config, channel, args)
    rate = args.rate if args.rate is not None else config.experiment.get("rate")
    if rate is None:
        raise ConfigError("construct needs --rate")
    code = analysis.select_information_set(est, rate)
    out = _outdir(args)
    _write_polarization(out, est)
    path = _write_code(out, code)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    config = load_model(args.model)
    channel = build_channel(config)
    if not args.code:
        raise ConfigError("simulate needs --code (emit one with 'construct')")
    code = load_code(args.code)
    trials = args.trials or config.experiment.get("trials", 100)
    seed = _seed(args, config)
    out = _outdir(args)

    # one fully serialized transmission, then the BLER experiment
    rng = np.random.default_rng(stage_seed(seed, "simulate-message"))
    message = rng.integers(0, 2, size=len(code.info_set), dtype=np.uint8)
    record = channels.transmit(channel, polar.encode(code, message),
                               stage_seed(seed, "simulate-transmit"))
    rows = []
    for i in range(len(record.inputs)):
        row = [i, int(record.inputs[i]), int(record.outputs[i])]
        if record.states is not None:
            row.append(int(record.states[i]))
        rows.append(tuple(row))
    header = ["index", "input", "output"] + (["state"] if record.states is not None else [])
    write_csv(out / "transmission.csv", header, rows)

    result = analysis.bler_experiment(channel, code, trials, stage_seed(seed, "bler"))
    write_csv(out / "bler.csv",
              ["N", "rate", "trials", "errors", "bler", "ci_lo", "ci_hi"],
              [(result.block_length, result.rate, result.trials, result.errors,
                result.bler, result.ci_low, result.ci_high)])
    print(f"wrote {out / 'bler.csv'} (bler={result.bler:.4g})")
    return EXIT_OK


def cmd_pipeline(args) -> int:
    config = load_model(args.model)
    seed = _seed(args, config)
    out = _outdir(args)
    written: list[Path] = []
    stage = "assemble"
    try:
        _refuse_no_csi_unital(config)
        channel = build_channel(config)

        if config.chain_kind == "mm1":
            stage = "truncate"
            levels = args.levels or config.experiment.get("levels")
            if levels:
                rows = analysis.truncation_sweep(
                    config.chain_spec, config.noise, levels,
                    reference_pi=_sweep_reference(config, levels))
                path = out / "sweep.csv"
                write_csv(path, ["level", "l1", "mean_p", "capacity"],
                          [(r.level, r.l1_to_reference, r.mean_p, r.capacity) for r in rows])
                written.append(path)

        stage = "induced-verify"
        report = verify_induced(channel.noise, channel.law, 100_000,
                                stage_seed(seed, "induced-verify"))
        if not report.ok:
            print(f"pipeline aborted at {stage}: 3-sigma gate failed on {report.failures}",
                  file=sys.stderr)
            _cleanup(written)
            return EXIT_GATE

        stage = "capacity"
        doc = _capacity_report(config, channel)
        path = out / "capacity.json"
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        written.append(path)

        stage = "polarize"
        est = _polarize(config, channel, args)
        _write_polarization(out, est)
        written.append(out / "polarization.csv")

        stage = "construct"
        rate = args.rate if args.rate is not None else config.experiment.get("rate")
        if rate is None:
            raise ConfigError("pipeline needs --rate")
        code = analysis.select_information_set(est, rate)
        written.append(_write_code(out, code))

        stage = "simulate"
        trials = args.trials or config.experiment.get("trials", 100)
        result = analysis.bler_experiment(channel, code, trials, stage_seed(seed, "bler"))
        path = out / "bler.csv"
        write_csv(path, ["N", "rate", "trials", "errors", "bler", "ci_lo", "ci_hi"],
                  [(result.block_length, result.rate, result.trials, result.errors,
                    result.bler, result.ci_low, result.ci_high)])
        written.append(path)
    except (ConfigError, ValidationError, StructuralError, UnsupportedModeError):
        _cleanup(written)
        raise
    except ResourceError:
        _cleanup(written)
        raise
    except Exception as exc:
        _cleanup(written)
        print(f"pipeline aborted at stage {stage}: {exc}", file=sys.stderr)
        return EXIT_GATE
    print(f"pipeline complete: {', '.join(p.name for p in written)} in {out}")
    return EXIT_OK


def _cleanup(paths: list[Path]) -> None:
    for p in paths:
        try:
            p.unlink()
        except OSError:
            pass


def _seed(args, config: ModelConfig) -> int:
    if args.seed is not None:
        return args.seed
    return config.experiment.get("seed", 0)


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polarmem",
        description="Polar coding over erasure and unital channels with Markov memory",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "capacity": cmd_capacity,
        "truncate": cmd_truncate,
        "induced-verify": cmd_induced_verify,
        "polarize": cmd_polarize,
        "construct": cmd_construct,
        "simulate": cmd_simulate,
        "pipeline": cmd_pipeline,
    }
    for name, fn in commands.items():
        p = sub.add_parser(name)
        p.add_argument("--model", required=True, help="model JSON file")
        p.add_argument("--seed", type=int, default=None, help="root seed (u64)")
        p.add_argument("--trials", type=int, default=None)
        p.add_argument("--n", type=int, default=None, help="log2 blocklength")
        p.add_argument("--rate", type=float, default=None)
        p.add_argument("--levels", type=lambda s: [int(x) for x in s.split(",")], default=None)
        p.add_argument("--out", default="polarmem-out", help="output directory")
        p.add_argument("--format", choices=("csv", "json"), default="json")
        p.add_argument("--code", default=None, help="code JSON file (simulate)")
        p.set_defaults(func=fn)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValidationError, StructuralError, UnsupportedModeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
