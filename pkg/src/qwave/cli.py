"""Command-line pipeline: simulate, table, export-dataset, train, predict,
compare, snapshot.

Commands compose through fixed filenames inside io.output_dir, so each
step is restartable on its own.  Exit codes: 0 success, 1 config error,
2 numerical failure, 3 missing artifact.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import compare as cp
from . import dataset as dsm
from . import discretize as dz
from . import evolve as ev
from . import spectral as sp
from . import surrogate as sg
from .config import (
    RunConfig,
    apply_overrides,
    config_keys,
    key_type,
    load_config,
    serialize_config,
    validate_config,
)
from .errors import ConfigError, MissingArtifactError, NumericalError

log = logging.getLogger(__name__)

FRAMES_FILE = "frames.csv"
CONSERVATION_FILE = "conservation.csv"
SCALER_FILE = "scaler.txt"
CHECKPOINT_FILE = "model.ckpt"
LOSS_FILE = "loss.csv"
PRED_FILES = {"one-step": "pred_onestep.csv", "rollout": "pred_rollout.csv"}
REPORT_FILE = "report.csv"
EIGEN_FILE = "eigen.csv"


class _CleanArgumentParser(argparse.ArgumentParser):
    """argparse that raises ConfigError instead of exiting with status 2."""

    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> _CleanArgumentParser:
    # config flags are valid both before and after the subcommand; SUPPRESS
    # keeps an unset position from clobbering a value parsed in the other
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config", metavar="FILE", default=argparse.SUPPRESS, help="key=value config file"
    )
    for key in config_keys():
        cast = _parse_clip if key == "training.clip" else key_type(key)
        common.add_argument(
            f"--{key}", dest=_override_dest(key), metavar="V", type=cast,
            default=argparse.SUPPRESS,
        )

    parser = _CleanArgumentParser(
        prog="qwave", parents=[common], description=__doc__.splitlines()[0]
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sim = sub.add_parser(
        "simulate", parents=[common],
        help="run the evolution; write frames and conservation CSVs",
    )
    sim.add_argument("--dump-eigen", action="store_true", help="also write the eigendecomposition CSV")
    tab = sub.add_parser(
        "table", parents=[common], help="print density values at selected positions and times"
    )
    tab.add_argument("--times", default="0,0.5,1", help="comma-separated times (default 0,0.5,1)")
    tab.add_argument("--indices", default="0,1,2,3,4", help="comma-separated grid indices")
    sub.add_parser(
        "export-dataset", parents=[common],
        help="fit the scaler on the training frames; write scaler.txt",
    )
    sub.add_parser(
        "train", parents=[common], help="train the surrogate; write checkpoint and loss CSV"
    )
    pred = sub.add_parser(
        "predict", parents=[common], help="predict test-horizon frames with a trained model"
    )
    pred.add_argument("--mode", choices=sorted(PRED_FILES), default="one-step")
    sub.add_parser(
        "compare", parents=[common],
        help="score predictions against simulated frames; write report.csv",
    )
    snap = sub.add_parser(
        "snapshot", parents=[common],
        help="write x/truth/prediction columns for selected times",
    )
    snap.add_argument("--times", required=True, help="comma-separated times, e.g. 4.1,5.0")
    snap.add_argument("--mode", choices=sorted(PRED_FILES), default="one-step")
    return parser


def _override_dest(key: str) -> str:
    return "override_" + key.replace(".", "_")


def _parse_clip(text: str) -> float | None:
    if text.lower() == "none":
        return None
    return float(text)


def _parse_float_list(text: str, flag: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"{flag} expects comma-separated numbers, got {text!r}") from exc
    if not values:
        raise ConfigError(f"{flag} must name at least one value")
    return values


def _parse_int_list(text: str, flag: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"{flag} expects comma-separated integers, got {text!r}") from exc
    if not values:
        raise ConfigError(f"{flag} must name at least one value")
    return values


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    config_path = getattr(args, "config", None)
    cfg = load_config(config_path) if config_path else RunConfig()
    overrides = {}
    for key in config_keys():
        value = getattr(args, _override_dest(key), None)
        if value is not None:
            overrides[key] = value
    return validate_config(apply_overrides(cfg, overrides))


def _out_path(cfg: RunConfig, name: str) -> str:
    os.makedirs(cfg.io_output_dir, exist_ok=True)
    return os.path.join(cfg.io_output_dir, name)


def _require(cfg: RunConfig, name: str, producer: str) -> str:
    path = os.path.join(cfg.io_output_dir, name)
    if not os.path.exists(path):
        raise MissingArtifactError(f"{path} not found; run `qwave {producer}` first")
    return path


def _simulate(cfg: RunConfig) -> ev.EvolutionRecord:
    grid = dz.make_grid(cfg.grid_a, cfg.grid_b, cfg.grid_n_points)
    h = dz.assemble_hamiltonian(dz.laplacian(grid), dz.harmonic_potential(grid))
    run = ev.EvolutionConfig(
        grid=grid,
        dt=cfg.evolution_dt,
        n_steps=cfg.evolution_n_steps,
        normalization_mode=cfg.evolution_normalization_mode,
    )
    return ev.run_evolution(run, h)


def _load_frames(cfg: RunConfig) -> tuple[np.ndarray, np.ndarray]:
    path = _require(cfg, FRAMES_FILE, "simulate")
    return ev.read_frames_csv(path)


def _load_split(cfg: RunConfig) -> tuple[dsm.Scaler, dsm.SplitDataset]:
    times, frames = _load_frames(cfg)
    scaler = dsm.load_scaler(_require(cfg, SCALER_FILE, "export-dataset"))
    split = dsm.prepare_split(
        frames, times, cfg.dataset_lookback, cfg.dataset_split_fraction, scaler
    )
    return scaler, split


def cmd_simulate(cfg: RunConfig, dump_eigen: bool = False) -> int:
    record = _simulate(cfg)
    ev.write_frames_csv(record, _out_path(cfg, FRAMES_FILE))
    ev.write_conservation_csv(record, _out_path(cfg, CONSERVATION_FILE))
    if dump_eigen:
        grid = record.config.grid
        h = dz.assemble_hamiltonian(dz.laplacian(grid), dz.harmonic_potential(grid))
        sp.write_eigen_csv(sp.eigendecompose(h), _out_path(cfg, EIGEN_FILE))
    drift = float(np.max(record.conservation_log)) if len(record.conservation_log) else 0.0
    print(
        f"simulate: wrote {len(record.frames)} frames to "
        f"{_out_path(cfg, FRAMES_FILE)} (max norm drift {drift:.3e})"
    )
    return 0


def _record_from_csv(cfg: RunConfig, path: str) -> ev.EvolutionRecord:
    grid = dz.make_grid(cfg.grid_a, cfg.grid_b, cfg.grid_n_points)
    return ev.record_from_frames_csv(grid, cfg.evolution_dt, cfg.evolution_normalization_mode, path)


def cmd_table(cfg: RunConfig, times: list[float], indices: list[int]) -> int:
    frames_path = os.path.join(cfg.io_output_dir, FRAMES_FILE)
    if os.path.exists(frames_path):
        record = _record_from_csv(cfg, frames_path)
    else:
        record = _simulate(cfg)  # compute on the fly; nothing is written
    text = cp.render_table(record, times, indices)
    sys.stdout.write(text)
    with open(_out_path(cfg, "table.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return 0


def cmd_export_dataset(cfg: RunConfig) -> int:
    times, frames = _load_frames(cfg)
    n_fit = dsm.train_frame_count(len(frames), cfg.dataset_lookback, cfg.dataset_split_fraction)
    scaler = dsm.fit_scaler(frames[:n_fit])
    dsm.save_scaler(scaler, _out_path(cfg, SCALER_FILE))
    split = dsm.prepare_split(
        frames, times, cfg.dataset_lookback, cfg.dataset_split_fraction, scaler
    )
    print(
        f"export-dataset: scaler fit on frames[0:{n_fit}] "
        f"(min {scaler.min:.6g}, max {scaler.max:.6g}); "
        f"{len(split.train)} train / {len(split.test)} test pairs"
    )
    return 0


def cmd_train(cfg: RunConfig) -> int:
    _, split = _load_split(cfg)
    model = sg.init_model(cfg.grid_n_points, cfg.training_hidden_dim, cfg.training_rng_seed)
    train_cfg = sg.TrainConfig(
        epochs=cfg.training_epochs,
        rng_seed=cfg.training_rng_seed,
        lr=cfg.training_lr,
        clip_norm=cfg.training_clip,
    )
    trained, history = sg.train(model, split, train_cfg)
    sg.save_checkpoint(trained, _out_path(cfg, CHECKPOINT_FILE))
    sg.write_loss_csv(history, _out_path(cfg, LOSS_FILE))
    print(
        f"train: {cfg.training_epochs} epochs on {len(split.train)} pairs; "
        f"epoch MSE {history.train_mse[0]:.6e} -> {history.train_mse[-1]:.6e}"
    )
    return 0


def cmd_predict(cfg: RunConfig, mode: str) -> int:
    _, split = _load_split(cfg)
    model = sg.load_checkpoint(_require(cfg, CHECKPOINT_FILE, "train"))
    if model.input_dim != cfg.grid_n_points:
        raise ConfigError(
            f"checkpoint input_dim {model.input_dim} does not match grid.n_points "
            f"{cfg.grid_n_points}"
        )
    if mode == "one-step":
        preds = sg.predict_one_step(model, split.test.inputs)
    else:
        preds = sg.predict_rollout(model, split.test.inputs[0], len(split.test))
    _write_pred_csv(preds, split.test.target_times, _out_path(cfg, PRED_FILES[mode]))
    print(f"predict: wrote {len(preds)} {mode} frames to {_out_path(cfg, PRED_FILES[mode])}")
    return 0


def cmd_compare(cfg: RunConfig, mode: str = "one-step") -> int:
    scaler, _ = _load_split(cfg)
    record = _record_from_csv(cfg, _require(cfg, FRAMES_FILE, "simulate"))
    pred_times, preds = _read_pred_csv(
        _require(cfg, PRED_FILES[mode], f"predict --mode {mode}"), cfg.grid_n_points
    )
    report = cp.build_report(record, preds, pred_times, scaler)
    cp.write_report_csv(report, _out_path(cfg, REPORT_FILE))
    print(
        f"compare ({mode}, {len(report.frames)} frames): "
        f"mean mse {report.mean_mse:.6e}, mean mae {report.mean_mae:.6e}, "
        f"mean max_abs_err {report.mean_max_abs_err:.6e}, "
        f"mean peak_position_err {report.mean_peak_position_err:.3f}"
    )
    return 0


def cmd_snapshot(cfg: RunConfig, times: list[float], mode: str) -> int:
    scaler, _ = _load_split(cfg)
    record = _record_from_csv(cfg, _require(cfg, FRAMES_FILE, "simulate"))
    pred_times, preds = _read_pred_csv(
        _require(cfg, PRED_FILES[mode], f"predict --mode {mode}"), cfg.grid_n_points
    )
    physical = dsm.inverse_transform(scaler, preds)
    recorded = record.times
    for t in times:
        k = int(np.argmin(np.abs(recorded - t)))
        if abs(recorded[k] - t) > cfg.evolution_dt / 2:
            raise ConfigError(f"no recorded frame within dt/2 of t={t}")
        j = int(np.argmin(np.abs(pred_times - recorded[k])))
        if abs(pred_times[j] - recorded[k]) > cfg.evolution_dt / 2:
            raise ConfigError(
                f"t={t} is outside the predicted horizon "
                f"[{pred_times[0]:.6g}, {pred_times[-1]:.6g}]"
            )
        path = _out_path(cfg, f"snapshot_{recorded[k]:.2f}.csv")
        cp.write_snapshot_csv(record.config.grid, record.frames[k].density, physical[j], path)
        print(f"snapshot: wrote {path}")
    return 0


def _write_pred_csv(preds: np.ndarray, target_times: np.ndarray, path) -> None:
    """Same row layout as frames.csv; values stay in scaled units."""
    n = preds.shape[1]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t," + ",".join(f"x_{i}" for i in range(n)) + "\n")
        for t, row in zip(target_times, preds):
            fh.write(f"{t:.17g}," + ",".join(f"{v:.17g}" for v in row) + "\n")


def _read_pred_csv(path, n_points: int) -> tuple[np.ndarray, np.ndarray]:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    if header[:1] != ["t"] or len(header) != n_points + 1:
        raise ConfigError(f"{path} has {len(header) - 1} columns, expected {n_points}")
    times = np.array([float(r[0]) for r in rows])
    preds = np.array([[float(v) for v in r[1:]] for r in rows])
    return times, preds


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help()
            return 0
        cfg = _resolve_config(args)
        if args.command == "simulate":
            return cmd_simulate(cfg, dump_eigen=args.dump_eigen)
        if args.command == "table":
            return cmd_table(
                cfg,
                _parse_float_list(args.times, "--times"),
                _parse_int_list(args.indices, "--indices"),
            )
        if args.command == "export-dataset":
            return cmd_export_dataset(cfg)
        if args.command == "train":
            return cmd_train(cfg)
        if args.command == "predict":
            return cmd_predict(cfg, args.mode)
        if args.command == "compare":
            return cmd_compare(cfg)
        if args.command == "snapshot":
            return cmd_snapshot(cfg, _parse_float_list(args.times, "--times"), args.mode)
        raise ConfigError(f"unknown command {args.command!r}")
    except MissingArtifactError as exc:
        print(f"error: missing-artifact: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"error: numerical: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, ValueError) as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
