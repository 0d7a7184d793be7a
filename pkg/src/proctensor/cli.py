"""Batch experiment runner.

Subcommands reproduce the full workflow as machine-readable files:
characterize-povm, reduced-maps, tomo-predict, nonmarkov and volume. A
key-value config file with [run] and [noise] sections may supply defaults;
command-line flags override file keys. Exit codes: 0 success, 2 config
error, 3 numeric non-convergence (partial output written), 4 I/O error.
"""

from __future__ import annotations

import argparse
import configparser
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channels import chi_fidelity, chi_of_operator, reduced_map
from .fileio import config_digest, write_matrix, write_table
from .nonmarkov import bloch_volume, default_theta_grid, sweep_theta
from .process import (
    PROCESS_NAMES,
    ShotConfig,
    generate_records,
    intervention_qpt_data,
    reduced_step_maps,
    markov_predict,
    run_process,
)
from .qubit import (
    CNOT,
    CZ,
    OVERCOMPLETE_LABELS,
    NoiseSpec,
    named_projector,
    state_fidelity,
)
from .tomography import fit_restricted_tensor, qpt_chi, records_to_text

__all__ = ["RunConfig", "main"]

DEFAULT_NOISE_RATE = 0.01
QPT_REPETITIONS = 20


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    process: str = "cnot-cz"
    noise: NoiseSpec | None = None
    shots: int | None = None
    seed: int = 0
    theta_grid: tuple | None = None
    output_dir: Path = Path("out")

    def digest(self) -> str:
        pairs = {
            "process": self.process,
            "shots": self.shots if self.shots is not None else "exact",
            "seed": self.seed,
            "noise_gamma": self.noise.gamma_amp if self.noise else 0.0,
            "noise_lambda": self.noise.lambda_phase if self.noise else 0.0,
            "theta_grid": ",".join(format(t, ".17g") for t in self.theta_grid)
            if self.theta_grid
            else "default",
        }
        return config_digest(pairs)

    def spec(self):
        return PROCESS_NAMES[self.process](self.noise)

    def shot_config(self) -> ShotConfig | None:
        if self.shots is None:
            return None
        return ShotConfig(shots=self.shots, seed=self.seed)


def _parse_theta_grid(text: str) -> tuple:
    try:
        values = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(f"bad theta grid {text!r}: {exc}") from None
    if not values:
        raise ConfigError("theta grid is empty")
    return values


def _load_file(path: str) -> dict:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path!r}")
    out: dict = {}
    if parser.has_section("run"):
        run = parser["run"]
        for key in ("process", "theta_grid", "output_dir"):
            if key in run:
                out[key] = run[key]
        for key in ("shots", "seed"):
            if key in run:
                out[key] = run.getint(key)
    if parser.has_section("noise"):
        noise = parser["noise"]
        out["noise_gamma"] = noise.getfloat("gamma", DEFAULT_NOISE_RATE)
        out["noise_lambda"] = noise.getfloat("lambda", DEFAULT_NOISE_RATE)
    return out


def resolve_config(args) -> RunConfig:
    values: dict = {}
    if args.config:
        values.update(_load_file(args.config))
    for key in ("process", "shots", "seed", "out", "theta_grid"):
        flag = getattr(args, key.replace("-", "_"), None)
        if flag is not None:
            values["output_dir" if key == "out" else key] = flag
    if args.noise_gamma is not None:
        values["noise_gamma"] = args.noise_gamma
        values.setdefault("noise_lambda", DEFAULT_NOISE_RATE)
    if args.noise_lambda is not None:
        values["noise_lambda"] = args.noise_lambda
        values.setdefault("noise_gamma", DEFAULT_NOISE_RATE)

    process = values.get("process", "cnot-cz")
    if process not in PROCESS_NAMES:
        raise ConfigError(f"unknown process {process!r}; choose from {sorted(PROCESS_NAMES)}")
    shots = values.get("shots")
    if shots is not None and shots < 100:
        raise ConfigError(f"shots must be >= 100, got {shots}")
    seed = values.get("seed", 0)
    if seed < 0:
        raise ConfigError(f"seed must be non-negative, got {seed}")
    noise = None
    if "noise_gamma" in values or "noise_lambda" in values:
        try:
            noise = NoiseSpec(
                gamma_amp=values.get("noise_gamma", DEFAULT_NOISE_RATE),
                lambda_phase=values.get("noise_lambda", DEFAULT_NOISE_RATE),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    theta_grid = values.get("theta_grid")
    if isinstance(theta_grid, str):
        theta_grid = _parse_theta_grid(theta_grid)
    return RunConfig(
        process=process,
        noise=noise,
        shots=shots,
        seed=seed,
        theta_grid=theta_grid,
        output_dir=Path(values.get("output_dir", "out")),
    )


def _ensure_outdir(cfg: RunConfig) -> Path:
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    return cfg.output_dir


def _safe_name(label: str) -> str:
    return label.replace("+", "p").replace("-", "m")


def cmd_characterize_povm(cfg: RunConfig) -> int:
    out = _ensure_outdir(cfg)
    digest = cfg.digest()
    rows = []
    summary = []
    for index, label in enumerate(OVERCOMPLETE_LABELS):
        op = named_projector(label)
        ideal = chi_of_operator(op.mat)
        reps = QPT_REPETITIONS if cfg.shots is not None else 1
        fids = []
        for rep in range(reps):
            shot_cfg = None
            if cfg.shots is not None:
                shot_cfg = ShotConfig(shots=cfg.shots, seed=cfg.seed)
            inputs, outputs = intervention_qpt_data(
                op, shot_cfg, run_tag=index * QPT_REPETITIONS + rep
            )
            chi = qpt_chi(inputs, outputs, psd=cfg.shots is not None)
            fid = chi_fidelity(chi, ideal)
            fids.append(fid)
            rows.append((label, rep, fid))
            if rep == 0:
                write_matrix(out / f"chi_povm_{_safe_name(label)}.txt", chi)
        summary.append((label, float(np.mean(fids)), float(np.std(fids))))
    write_table(out / "povm_fidelities.csv", ["povm", "rep", "fidelity"], rows, digest)
    write_table(
        out / "povm_fidelity_summary.csv",
        ["povm", "mean_fidelity", "std_fidelity"],
        summary,
        digest,
    )
    return 0


def cmd_reduced_maps(cfg: RunConfig) -> int:
    out = _ensure_outdir(cfg)
    digest = cfg.digest()
    write_matrix(out / "chi_cz.txt", chi_of_operator(CZ))
    write_matrix(out / "chi_cnot.txt", chi_of_operator(CNOT))
    env_states = {
        "e0": named_projector("z+").mat,
        "e1": named_projector("z-").mat,
        "eym": named_projector("y-").mat,
    }
    rows = []
    for tag, env in env_states.items():
        exact = reduced_map(CZ, env)
        write_matrix(out / f"chi_reduced_cz_{tag}.txt", exact)
        if cfg.noise is not None:
            noisy = reduced_map(CZ, env, cfg.noise)
            write_matrix(out / f"chi_reduced_cz_{tag}_noisy.txt", noisy)
            rows.append((tag, chi_fidelity(noisy, exact)))
    if rows:
        write_table(
            out / "reduced_map_fidelities.csv",
            ["env_state", "fidelity_vs_exact"],
            rows,
            digest,
        )
    return 0


def cmd_tomo_predict(cfg: RunConfig) -> int:
    out = _ensure_outdir(cfg)
    digest = cfg.digest()
    spec = cfg.spec()
    records = generate_records(spec, cfg.shot_config())
    (out / "records.txt").write_text(records_to_text(records))
    fit = fit_restricted_tensor(records, psd=cfg.shots is not None)
    reduced = reduced_step_maps(spec)
    rows = []
    grouped: dict[str, list] = {}
    for l0 in OVERCOMPLETE_LABELS:
        for l1 in OVERCOMPLETE_LABELS:
            ops = [named_projector(l0), named_projector(l1)]
            truth, p_true = run_process(spec, ops)
            if truth is None or p_true < 1e-9:
                continue
            predicted, p_pred = fit.predict(ops)
            fid_tensor = state_fidelity(truth, predicted) if predicted is not None else 0.0
            baseline = markov_predict(spec, ops, reduced)
            fid_markov = state_fidelity(truth, baseline) if baseline is not None else 0.0
            rows.append((l0, l1, p_true, fid_tensor, fid_markov))
            grouped.setdefault(l0, []).append((fid_tensor, fid_markov))
    write_table(
        out / "predictions.csv",
        ["a0", "a1", "p_joint", "fidelity_tensor", "fidelity_markov"],
        rows,
        digest,
    )
    summary = [
        (
            l0,
            float(np.mean([f for f, _ in vals])),
            float(np.mean([m for _, m in vals])),
            len(vals),
        )
        for l0, vals in grouped.items()
    ]
    write_table(
        out / "predictions_by_a0.csv",
        ["a0", "mean_fidelity_tensor", "mean_fidelity_markov", "pairs"],
        summary,
        digest,
    )
    return 0


def cmd_nonmarkov(cfg: RunConfig) -> int:
    out = _ensure_outdir(cfg)
    digest = cfg.digest()
    spec = cfg.spec()
    records = generate_records(spec, cfg.shot_config())
    fit = fit_restricted_tensor(records, psd=cfg.shots is not None)
    thetas = cfg.theta_grid if cfg.theta_grid is not None else default_theta_grid()
    results = sweep_theta(fit, thetas, process=spec)
    rows = []
    all_converged = True
    for theta, n_value, converged, iterations in results:
        if n_value is None:
            rows.append((theta, "absent", False, iterations))
            continue
        rows.append((theta, n_value, converged, iterations))
        all_converged = all_converged and converged
    write_table(
        out / "nonmarkovianity.csv",
        ["theta", "n_value", "converged", "iterations"],
        rows,
        digest,
    )
    return 0 if all_converged else 3


def cmd_volume(cfg: RunConfig, n_samples: int = 200) -> int:
    out = _ensure_outdir(cfg)
    digest = cfg.digest()
    spec = cfg.spec()
    records = generate_records(spec, cfg.shot_config())
    fit = fit_restricted_tensor(records, psd=cfg.shots is not None)
    thetas = (
        cfg.theta_grid
        if cfg.theta_grid is not None
        else (0.0, math.pi / 4, math.pi / 2)
    )
    for kind in ("process-tensor", "markov-map"):
        for idx, theta in enumerate(thetas):
            cloud = bloch_volume(kind, fit, theta, n_samples, process=spec)
            rows = [tuple(row) for row in cloud]
            write_table(
                out / f"volume_{kind}_theta{idx}.csv",
                ["theta_a1", "phi_a1", "bx", "by", "bz"],
                rows,
                digest,
            )
    return 0


COMMANDS = {
    "characterize-povm": cmd_characterize_povm,
    "reduced-maps": cmd_reduced_maps,
    "tomo-predict": cmd_tomo_predict,
    "nonmarkov": cmd_nonmarkov,
    "volume": cmd_volume,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="proctensor",
        description="Two-qubit intervened-process simulation and tomography runner",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="key-value config file")
        p.add_argument("--process", default=None, choices=sorted(PROCESS_NAMES))
        p.add_argument("--shots", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--noise-gamma", type=float, default=None)
        p.add_argument("--noise-lambda", type=float, default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--theta-grid", dest="theta_grid", default=None,
                       help="comma-separated angles in radians")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](cfg)
    except OSError as exc:
        print(f"io-error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
