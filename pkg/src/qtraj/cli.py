"""Command-line experiment runner.

    qtraj run CONFIG [--output-dir D] [--seed N] [--ensemble N]
    qtraj validate CONFIG
    qtraj presets list
    qtraj presets show NAME

CONFIG is a JSON file or ``preset:NAME``.  Exit status is 0 on success, 2 for
an invalid config and 3 when a numerical invariant breaks during the run.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import evolve, io, linalg
from .errors import DegenerateOutcomeError, InvariantViolation, ValidationError
from .info import (InfoLedgerEntry, info_gain, iter_randomness_pump, probe_entropy, shannon_array,
                   shannon_entropy, von_neumann_entropy)
from .measure import check_axis, outcome_probabilities
from .states import DensityMatrix, PureState, as_density, maximally_mixed

EXPERIMENTS = ("channel", "lindblad", "trajectories", "randomness-pump", "info-gain")

# generator of CNOT: exp(-i pi P) = 1 - 2P with P the projector on |1>|->
CNOT_GENERATOR = np.kron(np.diag([0, 1]), 0.5 * (linalg.IDENTITY - linalg.SIGMA_X)).astype(complex)
INTERACTIONS = {"sigma-z-x": evolve.SIGMA_Z_X, "cnot": CNOT_GENERATOR}

DEFAULTS = {
    "interaction": "sigma-z-x",
    "epsilon": 0.1,
    "delta_t": 1.0,
    "probe_prep": [1, 0],
    "probe_axis": [0, 0, 1],
    "initial_state": [1, 0],
    "steps": 100,
    "ensemble": 1,
    "seed": 0,
    "unraveling": "exact",
    "output_dir": "out",
    "snapshot_stride": 1,
}
KEYS = ("experiment",) + tuple(DEFAULTS)

_PLUS = [0.7071067811865476, 0.7071067811865476]
PRESETS = {
    "cnot-z-info": {"experiment": "info-gain", "interaction": "cnot", "epsilon": math.pi,
                    "initial_state": "maximally-mixed", "probe_axis": [0, 0, 1]},
    "cnot-x-info": {"experiment": "info-gain", "interaction": "cnot", "epsilon": math.pi,
                    "initial_state": "maximally-mixed", "probe_axis": [1, 0, 0]},
    "dephasing-limit": {"experiment": "channel", "epsilon": 0.1, "initial_state": [0.6, 0.8],
                        "steps": 500},
    "dephasing-channel": {"experiment": "channel", "epsilon": 0.1, "initial_state": _PLUS,
                          "steps": 200},
    "dephasing-lindblad": {"experiment": "lindblad", "epsilon": 0.05, "initial_state": _PLUS,
                           "steps": 200},
    "jump": {"experiment": "trajectories", "unraveling": "jump", "epsilon": 0.1,
             "initial_state": _PLUS, "steps": 100, "ensemble": 20000, "snapshot_stride": 1},
    "diffusion": {"experiment": "trajectories", "unraveling": "diffusion", "epsilon": 0.1,
                  "initial_state": _PLUS, "steps": 100, "ensemble": 20000},
    "randomness-pump": {"experiment": "randomness-pump", "steps": 1000},
}


class ConfigError(ValidationError):
    pass


def _complex(v, field):
    if isinstance(v, bool):
        raise ConfigError(f"{field}: expected a number or [re, im], got {v!r}")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
        return complex(v[0], v[1])
    raise ConfigError(f"{field}: expected a number or [re, im], got {v!r}")


def _pure(v, field):
    if not isinstance(v, list) or len(v) != 2:
        raise ConfigError(f"{field}: expected an amplitude pair")
    amps = [_complex(x, f"{field}[{i}]") for i, x in enumerate(v)]
    try:
        return PureState.normalized(amps)
    except ValidationError as exc:
        raise ConfigError(f"{field}: {exc}") from None


def _number(cfg, key, kind=float, positive=False, minimum=None):
    v = cfg[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or (kind is int and not isinstance(v, int)):
        raise ConfigError(f"{key}: expected {'an integer' if kind is int else 'a number'}, got {v!r}")
    if not math.isfinite(v):
        raise ConfigError(f"{key}: must be finite")
    if positive and v <= 0:
        raise ConfigError(f"{key}: must be > 0")
    if minimum is not None and v < minimum:
        raise ConfigError(f"{key}: must be >= {minimum}")
    return kind(v)


@dataclass
class ExperimentConfig:
    """A validated experiment description.  ``raw`` keeps the JSON form with defaults filled in."""

    raw: dict
    experiment: str
    spec: evolve.InteractionSpec
    probe_axis: np.ndarray
    initial: PureState | DensityMatrix
    steps: int
    ensemble: int
    seed: int
    unraveling: str
    output_dir: Path
    snapshot_stride: int

    @classmethod
    def from_dict(cls, data) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        unknown = sorted(set(data) - set(KEYS))
        if unknown:
            raise ConfigError(f"unknown key(s): {', '.join(unknown)}")
        if "experiment" not in data:
            raise ConfigError("experiment: required")
        cfg = {**DEFAULTS, **data}
        if cfg["experiment"] not in EXPERIMENTS:
            raise ConfigError(f"experiment: must be one of {', '.join(EXPERIMENTS)}")

        inter = cfg["interaction"]
        if isinstance(inter, str):
            if inter not in INTERACTIONS:
                raise ConfigError(f"interaction: unknown preset {inter!r}")
            h = INTERACTIONS[inter]
        elif isinstance(inter, list) and len(inter) == 4 and all(isinstance(r, list) and len(r) == 4 for r in inter):
            h = np.array([[_complex(x, f"interaction[{i}][{j}]") for j, x in enumerate(r)]
                          for i, r in enumerate(inter)])
            if not linalg.is_hermitian(h):
                raise ConfigError("interaction: matrix is not Hermitian")
        else:
            raise ConfigError("interaction: expected a preset name or a 4x4 matrix")

        epsilon = _number(cfg, "epsilon", minimum=0)
        delta_t = _number(cfg, "delta_t", positive=True)
        spec = evolve.InteractionSpec(h, epsilon, delta_t, _pure(cfg["probe_prep"], "probe_prep"))
        try:
            axis = check_axis(cfg["probe_axis"])
        except (ValidationError, TypeError, ValueError) as exc:
            raise ConfigError(f"probe_axis: {exc}") from None

        init = cfg["initial_state"]
        if init == "maximally-mixed":
            initial = maximally_mixed(2)
        elif isinstance(init, list):
            initial = _pure(init, "initial_state")
        else:
            raise ConfigError("initial_state: expected an amplitude pair or 'maximally-mixed'")

        if cfg["unraveling"] not in evolve.UNRAVELINGS:
            raise ConfigError(f"unraveling: must be one of {', '.join(evolve.UNRAVELINGS)}")
        if not isinstance(cfg["output_dir"], str):
            raise ConfigError("output_dir: expected a path string")

        conf = cls(
            raw=cfg, experiment=cfg["experiment"], spec=spec, probe_axis=axis, initial=initial,
            steps=_number(cfg, "steps", int, minimum=0), ensemble=_number(cfg, "ensemble", int, minimum=1),
            seed=_number(cfg, "seed", int, minimum=0), unraveling=cfg["unraveling"],
            output_dir=Path(cfg["output_dir"]), snapshot_stride=_number(cfg, "snapshot_stride", int, minimum=1),
        )
        conf._check_experiment()
        return conf

    def _check_experiment(self):
        if self.experiment == "trajectories":
            if not isinstance(self.initial, PureState):
                raise ConfigError("initial_state: trajectories need a pure initial state")
            try:
                self.kraus()
            except ValidationError as exc:
                raise ConfigError(f"unraveling: {exc}") from None
        if self.experiment == "randomness-pump" and self.steps < 1:
            raise ConfigError("steps: randomness-pump needs at least one step")

    def kraus(self):
        return evolve.kraus_for(self.spec, self.unraveling, self.probe_axis)


def load_config(source, overrides=None) -> ExperimentConfig:
    """Read a config file (or ``preset:NAME``) and apply CLI overrides."""
    if str(source).startswith("preset:"):
        name = str(source)[len("preset:"):]
        if name not in PRESETS:
            raise ConfigError(f"unknown preset {name!r}")
        data = dict(PRESETS[name])
    else:
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read {source}: {exc.strerror}") from None
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if isinstance(data, dict):
        data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return ExperimentConfig.from_dict(data)


def _lindblad_on_grid(conf, rho0):
    """Lindblad solution sampled at the probe arrival times."""
    params = evolve.derive_lindblad(conf.spec)
    dt = conf.spec.delta_t
    gnorm = float(np.linalg.norm(params.generator(), 2))
    sub = max(1, math.ceil(gnorm * dt / 0.05))
    return evolve.lindblad_integrate(rho0, params, dt / sub, conf.steps * dt, record_every=sub)


def _max_dev(a, b):
    return float(np.max(np.abs(a.rhos - b.rhos)))


def run_experiment(conf: ExperimentConfig) -> dict:
    """Run ``conf``, write its artifacts and return the summary values."""
    out = conf.output_dir
    out.mkdir(parents=True, exist_ok=True)
    summary = {"experiment": conf.experiment}
    kind = conf.experiment

    if kind in ("channel", "lindblad"):
        rho0 = as_density(conf.initial)
        channel = evolve.channel_evolve(rho0, conf.spec.kraus(conf.probe_axis), conf.steps, conf.spec.delta_t)
        lind = _lindblad_on_grid(conf, rho0)
        series = channel if kind == "channel" else lind
        io.write_series_csv(out / "series.csv", series)
        summary["final_entropy_bits"] = von_neumann_entropy(series.rhos[-1])
        summary["max_deviation_from_oracle"] = _max_dev(channel, lind)
        if kind == "lindblad":
            summary["trace_drift"] = lind.trace_drift

    elif kind == "trajectories":
        kraus = conf.kraus()
        records = evolve.run_trajectories(conf.initial, kraus, conf.ensemble, conf.steps, conf.seed,
                                          conf.unraveling, conf.spec.delta_t, conf.snapshot_stride)
        ens = evolve.ensemble_average(records)
        io.write_json(out / "trajectories.json", io.trajectories_document(records))
        io.write_series_csv(out / "series.csv", ens.series())
        # ensemble-mean ledger; conditional states are pure so gain and entropy are zero
        shannon = shannon_array(np.stack([r.p_plus for r in records])).mean(axis=0)
        ent = np.stack([r.entanglement for r in records]).mean(axis=0)
        io.write_ledger_csv(out / "ledger.csv",
                            [(k + 1, shannon[k], 0.0, ent[k], 0.0) for k in range(conf.steps)])
        oracle = evolve.channel_evolve(conf.initial, kraus, conf.steps, conf.spec.delta_t)
        oracle_rhos = oracle.rhos[::conf.snapshot_stride]
        summary["final_entropy_bits"] = von_neumann_entropy(ens.mean_rho[-1])
        summary["total_info_gain_bits"] = 0.0
        summary["jump_count"] = sum(r.jump_count for r in records)
        summary["mean_jumps_per_trajectory"] = summary["jump_count"] / len(records)
        summary["max_deviation_from_oracle"] = float(np.max(np.abs(ens.mean_rho - oracle_rhos)))
        if len(records) > 1:
            z = np.abs(ens.mean_rho - oracle_rhos)[1:] / np.maximum(ens.entry_stderr[1:], 1e-300)
            summary["max_deviation_in_stderr"] = float(np.max(np.where(ens.entry_stderr[1:] > 0, z, 0.0)))

    elif kind == "randomness-pump":
        entries, rhos = [], []
        for entry, outcome in iter_randomness_pump(conf.steps, conf.seed):
            entries.append(entry)
            rhos.append(as_density(outcome.post_state).matrix)
        io.write_ledger_csv(out / "ledger.csv", entries)
        io.write_series_csv(out / "series.csv", evolve.DensitySeries(np.arange(1, conf.steps + 1), np.array(rhos)))
        summary["total_random_bits"] = sum(e.shannon_bits for e in entries)
        summary["total_info_gain_bits"] = sum(e.info_gain_bits for e in entries)
        summary["final_entropy_bits"] = entries[-1].vn_entropy_bits

    elif kind == "info-gain":
        kraus = conf.spec.kraus(conf.probe_axis)
        rho = as_density(conf.initial)
        p_plus, _ = outcome_probabilities(rho, kraus)
        gain = info_gain(rho, kraus)
        after = von_neumann_entropy(rho) - gain
        entry = InfoLedgerEntry(1, shannon_entropy(p_plus), gain,
                                probe_entropy(rho, conf.spec.unitary(), conf.spec.probe_prep), after)
        io.write_ledger_csv(out / "ledger.csv", [entry])
        summary["p_plus"] = p_plus
        summary["shannon_bits"] = entry.shannon_bits
        summary["total_info_gain_bits"] = gain
        summary["final_entropy_bits"] = after

    io.write_json(out / "config.echo.json", conf.raw)
    return summary


def _print_summary(summary, stream=None):
    stream = stream or sys.stdout
    for key, value in summary.items():
        print(f"{key}: {io.fmt(value) if isinstance(value, float) else value}", file=stream)


def build_parser():
    parser = argparse.ArgumentParser(prog="qtraj", description="Repeated-interaction q-bit experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("config", help="JSON config path or preset:NAME")
    run.add_argument("--output-dir")
    run.add_argument("--seed", type=int)
    run.add_argument("--ensemble", type=int)
    val = sub.add_parser("validate", help="check a config without running it")
    val.add_argument("config")
    presets = sub.add_parser("presets", help="list or show shipped presets")
    presets.add_argument("action", choices=("list", "show"))
    presets.add_argument("name", nargs="?")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "presets":
        if args.action == "list":
            for name, cfg in PRESETS.items():
                print(f"{name}\t{cfg['experiment']}")
            return 0
        if args.name not in PRESETS:
            print(f"error: unknown preset {args.name!r}", file=sys.stderr)
            return 2
        print(json.dumps({**DEFAULTS, **PRESETS[args.name]}, indent=1))
        return 0

    overrides = {}
    if args.command == "run":
        overrides = {"output_dir": args.output_dir, "seed": args.seed, "ensemble": args.ensemble}
    try:
        conf = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.command == "validate":
        print(f"ok: {conf.experiment}")
        return 0
    try:
        summary = run_experiment(conf)
    except InvariantViolation as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return 3
    except DegenerateOutcomeError as exc:
        print(f"invariant violated: outcome probability: {exc}", file=sys.stderr)
        return 3
    _print_summary(summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())
