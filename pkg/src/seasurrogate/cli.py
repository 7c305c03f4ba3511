"""Command line front end.

One executable, seven subcommands covering the whole pipeline:

  synth       irregular-sea elevation record from a spectrum
  oracle-gen  paired wave/motion campaign from the desk-scale oracle
  ingest      campaign -> normalized stencil sample sets
  train       sample sets or campaign -> trained checkpoint + history
  eval        checkpoints vs campaign -> metric tables, PDFs, plots
  diagnose    STFT, 2:1 signature detection, phase portrait
  report      full figure bundle into a timestamped directory

Every subcommand accepts --seed, --out-dir and --config <json>.  Values
from the config file (top-level keys apply everywhere, per-subcommand
sections override them) are in turn overridden by explicit flags, and
the fully resolved configuration is written to ``run.json`` in the
output directory before any work starts.

Exit codes: 0 success, 1 usage, 2 data validation, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import os
import sys

import numpy as np

from . import __version__
from .errors import NumericError, SeaSurrogateError, ValidationError

__all__ = ["main", "entry", "UsageError"]


class UsageError(Exception):
    """Command line misuse that argparse cannot catch on its own."""


# ---------------------------------------------------------------------------
# configuration plumbing


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    if not os.path.exists(path):
        raise ValidationError(f"config file not found: {path}")
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValidationError(f"config file {path} must hold a JSON object")
    return doc


def _resolve(args: argparse.Namespace, defaults: dict) -> dict:
    """Merge defaults <- config file <- explicit flags for one subcommand."""
    config = _load_config(getattr(args, "config", None))
    section = {k: v for k, v in config.items() if not isinstance(v, dict)}
    sub = config.get(args.cmd, {})
    if not isinstance(sub, dict):
        raise ValidationError(f"config section {args.cmd!r} must be an object")
    section.update(sub)
    unknown = sorted(k for k in section if k not in defaults)
    if unknown:
        raise UsageError(
            f"unknown config keys for {args.cmd!r}: {', '.join(unknown)}"
        )
    resolved = dict(defaults)
    resolved.update(section)
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            resolved[key] = value
    return resolved


def _write_run_record(out_dir: str, cmd: str, resolved: dict) -> None:
    os.makedirs(out_dir, exist_ok=True)
    record = {"version": __version__, "subcommand": cmd, "config": resolved}
    with open(os.path.join(out_dir, "run.json"), "w") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _rows_to_csv(rows: list[dict]) -> str:
    from .evaluation import _cell

    if not rows:
        raise ValidationError("no rows to format")
    cols = list(rows[0].keys())
    lines = [",".join(cols)]
    for row in rows:
        lines.append(",".join(_cell(row.get(c, "")) for c in cols))
    return "\n".join(lines) + "\n"


def _series_csv(header: list[str], columns: list[np.ndarray]) -> str:
    from .dataset import _fmt

    lines = [",".join(header)]
    for vals in zip(*columns):
        lines.append(",".join(_fmt(float(v)) for v in vals))
    return "\n".join(lines) + "\n"


def _write_group(group_dir: str, files: dict[str, str | bytes]) -> list[str]:
    """Write a fully rendered figure group; nothing lands on failure."""
    os.makedirs(group_dir, exist_ok=True)
    for name, payload in files.items():
        mode = "wb" if isinstance(payload, bytes) else "w"
        with open(os.path.join(group_dir, name), mode) as fh:
            fh.write(payload)
    return sorted(files)


def _parse_checkpoint_args(items, config_value) -> dict[str, str]:
    """--checkpoint NAME=PATH flags, or a {name: path} config object."""
    named: dict[str, str] = {}
    if items:
        for item in items:
            name, sep, path = item.partition("=")
            if not sep:
                path = item
                name = os.path.splitext(os.path.basename(item))[0]
            if not name or not path:
                raise UsageError(f"malformed checkpoint spec: {item!r}")
            if name in named:
                raise UsageError(f"duplicate checkpoint name: {name!r}")
            named[name] = path
    elif isinstance(config_value, dict):
        named = {str(k): str(v) for k, v in config_value.items()}
    if not named:
        raise UsageError("at least one --checkpoint NAME=PATH is required")
    return named


def _load_checkpoints(named_paths: dict[str, str]):
    from .trainer import load_checkpoint

    out = {}
    for name, path in named_paths.items():
        if not os.path.exists(path):
            raise ValidationError(f"checkpoint not found: {path}")
        out[name] = load_checkpoint(path)
    return out


def _campaign_realizations(manifest_path: str, split_path: str | None,
                           subset: str = "test"):
    from .dataset import load_campaign

    realizations, manifest = load_campaign(manifest_path)
    if split_path:
        if not os.path.exists(split_path):
            raise ValidationError(f"split file not found: {split_path}")
        with open(split_path) as fh:
            split = json.load(fh)
        names = set(split.get(subset, []))
        if not names:
            raise ValidationError(f"split file lists no {subset!r} realizations")
        realizations = [r for r in realizations if r.name in names]
        if not realizations:
            raise ValidationError("split file matches nothing in the campaign")
    return realizations, manifest


def _pick_states(value: str | None) -> list:
    from .oracle import standard_sea_states

    states = standard_sea_states()
    if value in (None, "", "all"):
        return states
    wanted = [s.strip() for s in str(value).split(",") if s.strip()]
    by_label = {s.label: s for s in states}
    missing = [w for w in wanted if w not in by_label]
    if missing:
        raise UsageError(
            f"unknown sea state(s) {missing}; choose from {sorted(by_label)}"
        )
    return [by_label[w] for w in wanted]


# ---------------------------------------------------------------------------
# subcommands


def _cmd_synth(args: argparse.Namespace) -> int:
    from .dataset import _fmt
    from .oracle import standard_sea_states
    from .spectra import SeaState, discretize, synthesize

    defaults = {
        "seed": 0, "out_dir": ".", "state": None, "hs": None, "tp": None,
        "label": None, "duration": 3600.0, "dt": 0.2, "n_components": 200,
        "band": None, "stratified": False, "prefix": "elevation",
    }
    cfg = _resolve(args, defaults)
    if cfg["state"]:
        by_label = {s.label: s for s in standard_sea_states()}
        if cfg["state"] not in by_label:
            raise UsageError(
                f"unknown state {cfg['state']!r}; choose from {sorted(by_label)}"
            )
        base = by_label[cfg["state"]]
        hs = cfg["hs"] if cfg["hs"] is not None else base.hs
        tp = cfg["tp"] if cfg["tp"] is not None else base.tp
        label = cfg["label"] or base.label
    else:
        if cfg["hs"] is None or cfg["tp"] is None:
            raise UsageError("provide either --state or both --hs and --tp")
        hs, tp, label = cfg["hs"], cfg["tp"], cfg["label"] or "custom"
    sea = SeaState(hs=float(hs), tp=float(tp), label=label)
    band = tuple(float(b) for b in cfg["band"]) if cfg["band"] else None
    _write_run_record(cfg["out_dir"], args.cmd, {**cfg, "hs": sea.hs, "tp": sea.tp,
                                                 "label": label})
    comps = discretize(sea, n=int(cfg["n_components"]), band=band,
                       seed=int(cfg["seed"]), stratified=bool(cfg["stratified"]))
    series = synthesize(comps, dt=float(cfg["dt"]), duration=float(cfg["duration"]))
    csv_path = os.path.join(cfg["out_dir"], f"{cfg['prefix']}.csv")
    times = series.times()
    with open(csv_path, "w") as fh:
        fh.write("t,zeta\n")
        for t, z in zip(times, series.samples):
            fh.write(f"{_fmt(t)},{_fmt(z)}\n")
    if band is None:
        from .spectra import DEFAULT_BAND

        band = (DEFAULT_BAND[0] * sea.omega_p, DEFAULT_BAND[1] * sea.omega_p)
    sidecar = {
        "hs": sea.hs, "tp": sea.tp, "label": label, "n": int(cfg["n_components"]),
        "band": [band[0], band[1]], "seed": int(cfg["seed"]), "dt": float(cfg["dt"]),
        "duration": float(cfg["duration"]), "n_samples": series.n,
        "variance": float(np.var(series.samples)),
    }
    with open(os.path.join(cfg["out_dir"], f"{cfg['prefix']}.json"), "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
    from . import figures

    preview_len = min(series.n, int(round(300.0 / series.dt)) + 1)
    figures.save_figure(
        os.path.join(cfg["out_dir"], f"{cfg['prefix']}.svg"),
        figures.make_elevation_preview(
            times[:preview_len], series.samples[:preview_len],
            title=f"{label} (hs={sea.hs} m, tp={sea.tp} s)",
        ),
    )
    print(f"wrote {csv_path} ({series.n} samples, var {sidecar['variance']:.4f})")
    return 0


def _cmd_oracle_gen(args: argparse.Namespace) -> int:
    from .oracle import OracleModels, default_models, generate_campaign

    defaults = {
        "seed": 0, "out_dir": "campaign", "states": None,
        "seeds_per_state": 10, "duration": 360.0, "dt": 0.2, "warmup": 60.0,
        "n_components": 200, "models": None,
    }
    cfg = _resolve(args, defaults)
    states = _pick_states(cfg["states"])
    models = (OracleModels.from_dict(cfg["models"]) if cfg["models"]
              else default_models())
    _write_run_record(cfg["out_dir"], args.cmd,
                      {**cfg, "states": [s.label for s in states],
                       "models": models.to_dict()})
    manifest = generate_campaign(
        states, int(cfg["seeds_per_state"]), models,
        dt=float(cfg["dt"]), duration=float(cfg["duration"]),
        out_dir=cfg["out_dir"], warmup=float(cfg["warmup"]),
        n_components=int(cfg["n_components"]), base_seed=int(cfg["seed"]),
    )
    n_files = sum(len(s["files"]) for s in manifest["states"])
    print(f"wrote {n_files} realizations under {cfg['out_dir']}")
    return 0


def _cmd_ingest(args: argparse.Namespace) -> int:
    from .dataset import (StencilConfig, build_stencil, fit_normalization,
                          load_campaign, merge_samplesets, save_sampleset,
                          split_seeds)

    defaults = {
        "seed": 0, "out_dir": ".", "campaign": None,
        "window": 99, "stride": 1, "train_seeds": None, "test_seeds": None,
    }
    cfg = _resolve(args, defaults)
    if not cfg["campaign"]:
        raise UsageError("--campaign <manifest.json> is required")
    if cfg["train_seeds"] is None or cfg["test_seeds"] is None:
        raise UsageError("--train-seeds and --test-seeds are required")
    _write_run_record(cfg["out_dir"], args.cmd, cfg)
    realizations, _ = load_campaign(cfg["campaign"])
    train, test = split_seeds(realizations, int(cfg["train_seeds"]),
                              int(cfg["test_seeds"]), seed=int(cfg["seed"]))
    norm = fit_normalization(train)
    stencil = StencilConfig(window=int(cfg["window"]), stride=int(cfg["stride"]))
    train_set = merge_samplesets(
        [build_stencil(r, stencil, normalization=norm) for r in train])
    test_set = merge_samplesets(
        [build_stencil(r, stencil, normalization=norm) for r in test])
    save_sampleset(os.path.join(cfg["out_dir"], "train.npz"), train_set)
    save_sampleset(os.path.join(cfg["out_dir"], "test.npz"), test_set)
    split_doc = {
        "train": [r.name for r in train], "test": [r.name for r in test],
        "seed": int(cfg["seed"]), "window": stencil.window, "stride": stencil.stride,
    }
    with open(os.path.join(cfg["out_dir"], "split.json"), "w") as fh:
        json.dump(split_doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"train: {train_set.n} samples from {len(train)} realizations; "
          f"test: {test_set.n} samples from {len(test)} realizations")
    return 0


def _subset_samples(samples, idx):
    from .dataset import SampleSet

    return SampleSet(x=samples.x[idx], y=samples.y[idx],
                     t_index=samples.t_index[idx],
                     normalization=samples.normalization, source=samples.source)


def _cmd_train(args: argparse.Namespace) -> int:
    from .dataset import (StencilConfig, build_stencil, fit_normalization,
                          load_sampleset, merge_samplesets, split_seeds)
    from .evaluation import _write_rows_csv
    from .losses import LossConfig
    from .lstm import LstmArch, init_params
    from .rng import stream
    from .trainer import TrainConfig, history_to_rows, save_checkpoint, train

    defaults = {
        "seed": 0, "out_dir": ".", "samples": None, "campaign": None,
        "window": 99, "stride": 1, "train_seeds": None, "test_seeds": 1,
        "loss": "mse", "lam": 0.1, "beta": 1.0, "scale": 1.0,
        "arch": None, "hidden": 32, "layers": 2,
        "epochs": 40, "batch_size": 512, "learning_rate": 1e-3,
        "patience": 8, "min_delta": 0.0, "grad_clip": 5.0,
        "val_frac": 0.1, "out": None,
    }
    cfg = _resolve(args, defaults)
    if bool(cfg["samples"]) == bool(cfg["campaign"]):
        raise UsageError("provide exactly one of --samples or --campaign")
    if cfg["arch"]:
        try:
            layers_s, hidden_s = str(cfg["arch"]).lower().split("x")
            cfg["layers"], cfg["hidden"] = int(layers_s), int(hidden_s)
        except ValueError:
            raise UsageError(
                f"--arch must look like 2x32 (layers x hidden), got {cfg['arch']!r}"
            ) from None
    _write_run_record(cfg["out_dir"], args.cmd, cfg)

    if cfg["samples"]:
        train_set = load_sampleset(cfg["samples"])
        norm = train_set.normalization
        stencil = StencilConfig(window=train_set.window, stride=int(cfg["stride"]))
        window = train_set.window
    else:
        realizations, _ = _campaign_realizations(cfg["campaign"], None)
        if cfg["train_seeds"] is None:
            raise UsageError("--train-seeds is required with --campaign")
        train_rs, _ = split_seeds(realizations, int(cfg["train_seeds"]),
                                  int(cfg["test_seeds"]), seed=int(cfg["seed"]))
        norm = fit_normalization(train_rs)
        stencil = StencilConfig(window=int(cfg["window"]), stride=int(cfg["stride"]))
        train_set = merge_samplesets(
            [build_stencil(r, stencil, normalization=norm) for r in train_rs])
        window = stencil.window

    val_set = None
    val_frac = float(cfg["val_frac"])
    if not 0.0 <= val_frac < 1.0:
        raise UsageError("--val-frac must be in [0, 1)")
    if val_frac > 0.0:
        n_val = int(round(val_frac * train_set.n))
        if n_val >= 1:
            perm = stream(int(cfg["seed"]), "val-split").permutation(train_set.n)
            val_set = _subset_samples(train_set, np.sort(perm[:n_val]))
            train_set = _subset_samples(train_set, np.sort(perm[n_val:]))

    arch = LstmArch(input_dim=train_set.x.shape[2], hidden=int(cfg["hidden"]),
                    layers=int(cfg["layers"]), output_dim=train_set.y.shape[1])
    params = init_params(arch, seed=int(cfg["seed"]))
    loss_cfg = LossConfig(kind=cfg["loss"], lam=float(cfg["lam"]),
                          beta=float(cfg["beta"]), scale=float(cfg["scale"]))
    train_cfg = TrainConfig(
        epochs=int(cfg["epochs"]), batch_size=int(cfg["batch_size"]),
        learning_rate=float(cfg["learning_rate"]), patience=int(cfg["patience"]),
        min_delta=float(cfg["min_delta"]), grad_clip=float(cfg["grad_clip"]),
        shuffle_seed=int(cfg["seed"]), loss=loss_cfg,
    )
    result = train(params, train_set, train_cfg, val_set=val_set)
    out_path = cfg["out"] or os.path.join(cfg["out_dir"],
                                          f"checkpoint_{cfg['loss']}.json")
    os.makedirs(os.path.dirname(out_path) or ".", exist_ok=True)
    meta = {
        "loss": loss_cfg.describe(), "seed": int(cfg["seed"]),
        "best_epoch": result.best_epoch, "best_val": result.best_val,
        "epochs_run": len(result.history), "stopped_early": result.stopped_early,
        "train_samples": train_set.n, "val_samples": val_set.n if val_set else 0,
    }
    # the stride only thins training samples; prediction is always dense
    save_checkpoint(out_path, result.params, normalization=norm,
                    stencil=StencilConfig(window=window, stride=1), meta=meta)
    history_path = os.path.splitext(out_path)[0] + "_history.csv"
    history_rows = history_to_rows(result.history)
    _write_rows_csv(history_path, history_rows)
    from . import figures

    figures.save_figure(
        os.path.splitext(out_path)[0] + "_history.svg",
        figures.make_loss_curves({loss_cfg.describe(): history_rows}),
    )
    print(f"wrote {out_path} (best epoch {result.best_epoch}, "
          f"val loss {result.best_val:.6g})")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    from . import figures
    from .dataset import CHANNELS
    from .evaluation import (estimate_pdf, gaussian_pdf, pooled_channel,
                             pooled_predictions, seed_ensemble_report)

    defaults = {
        "seed": 0, "out_dir": "eval", "campaign": None, "split": None,
        "checkpoint": None, "channel": "roll",
    }
    cfg = _resolve(args, defaults)
    if not cfg["campaign"]:
        raise UsageError("--campaign <manifest.json> is required")
    if cfg["channel"] not in CHANNELS:
        raise UsageError(f"unknown channel {cfg['channel']!r}")
    named_paths = _parse_checkpoint_args(args.checkpoint, cfg["checkpoint"])
    _write_run_record(cfg["out_dir"], args.cmd, {**cfg, "checkpoint": named_paths})
    named = _load_checkpoints(named_paths)
    realizations, _ = _campaign_realizations(cfg["campaign"], cfg["split"])
    report = seed_ensemble_report(named, realizations, out_dir=cfg["out_dir"])
    files = list(report.pop("files", []))

    by_label: dict[str, list] = {}
    for r in realizations:
        by_label.setdefault(r.label, []).append(r)
    channel = cfg["channel"]
    for label in sorted(by_label):
        group = by_label[label]
        ref = pooled_channel(group, channel)
        ref_pdf = estimate_pdf(ref)
        curves = {"reference": ref_pdf}
        for name, ckpt in sorted(named.items()):
            curves[name] = estimate_pdf(pooled_predictions(ckpt, group, channel))
        gauss = gaussian_pdf(ref_pdf.grid, float(np.mean(ref)), float(np.std(ref)))
        for name, pdf in curves.items():
            fname = f"pdf_{channel}_{label}_{name}.csv"
            with open(os.path.join(cfg["out_dir"], fname), "w") as fh:
                fh.write(_series_csv(["grid", "density"], [pdf.grid, pdf.density]))
            files.append(fname)
        fig = figures.make_pdf_overlay(
            ref_pdf, {k: v for k, v in curves.items() if k != "reference"},
            gaussian=gauss, xlabel=f"{channel} [deg]")
        fname = f"pdf_{channel}_{label}.svg"
        figures.save_figure(os.path.join(cfg["out_dir"], fname), fig)
        files.append(fname)

    report["files"] = sorted(files)
    with open(os.path.join(cfg["out_dir"], "report.json"), "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")
    print(f"evaluated {len(named)} checkpoint(s) on {len(realizations)} "
          f"realizations -> {cfg['out_dir']}")
    return 0


def _detector_config(cfg: dict):
    from .diagnostics import DetectorConfig

    kwargs = {}
    for key in ("band_rel", "min_growth_frames", "growth_min", "wave_frac_min",
                "energy_frac_min", "f_min", "align_slack_bins"):
        if cfg[key] is not None:
            kwargs[key] = type(DetectorConfig.__dataclass_fields__[key].default)(cfg[key])
    if cfg["no_peak_alignment"]:
        kwargs["require_peak_alignment"] = False
    return DetectorConfig(**kwargs)


def _stft_csv(res) -> str:
    from .dataset import _fmt

    header = "freq_hz," + ",".join(_fmt(t) for t in res.times)
    lines = [header]
    for i, f in enumerate(res.freqs):
        row = ",".join(_fmt(v) for v in res.magnitude[i])
        lines.append(f"{_fmt(f)},{row}")
    return "\n".join(lines) + "\n"


def _cmd_diagnose(args: argparse.Namespace) -> int:
    from . import figures
    from .dataset import CHANNELS
    from .diagnostics import detect_parametric_signature, phase_portrait, stft

    defaults = {
        "seed": 0, "out_dir": "diagnostics", "campaign": None,
        "realization": None, "window_len": 256, "hop": 64,
        "f_phi_hint": None, "decimate": 1,
        "band_rel": None, "min_growth_frames": None, "growth_min": None,
        "wave_frac_min": None, "energy_frac_min": None, "f_min": None,
        "align_slack_bins": None, "no_peak_alignment": False,
    }
    cfg = _resolve(args, defaults)
    if not cfg["campaign"]:
        raise UsageError("--campaign <manifest.json> is required")
    realizations, _ = _campaign_realizations(cfg["campaign"], None)
    if cfg["realization"]:
        matches = [r for r in realizations if r.name == cfg["realization"]]
        if not matches:
            names = ", ".join(r.name for r in realizations[:6])
            raise ValidationError(
                f"realization {cfg['realization']!r} not in campaign "
                f"(first few: {names} ...)"
            )
        r = matches[0]
    else:
        r = realizations[-1]
    _write_run_record(cfg["out_dir"], args.cmd, {**cfg, "realization": r.name})

    det_cfg = _detector_config(cfg)
    roll = r.motions[CHANNELS.index("roll")]
    pitch = r.motions[CHANNELS.index("pitch")]
    wave = r.probes[0]
    roll_stft = stft(roll, r.dt, int(cfg["window_len"]), int(cfg["hop"]))
    wave_stft = stft(wave, r.dt, int(cfg["window_len"]), int(cfg["hop"]))
    hint = None if cfg["f_phi_hint"] is None else float(cfg["f_phi_hint"])
    rep = detect_parametric_signature(roll_stft, wave_stft, f_phi_hint=hint,
                                      config=det_cfg)
    pts = phase_portrait(roll, pitch, decimate=int(cfg["decimate"]))

    out = cfg["out_dir"]
    with open(os.path.join(out, "stft_roll.csv"), "w") as fh:
        fh.write(_stft_csv(roll_stft))
    with open(os.path.join(out, "stft_wave.csv"), "w") as fh:
        fh.write(_stft_csv(wave_stft))
    with open(os.path.join(out, "detection.json"), "w") as fh:
        json.dump({"realization": r.name, "config": det_cfg.to_dict(),
                   "report": rep.to_dict()}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(out, "phase_portrait.csv"), "w") as fh:
        fh.write(_series_csv(["roll_deg", "pitch_deg"], [pts[:, 0], pts[:, 1]]))
    f_max = min(4.5 * rep.f_phi, roll_stft.nyquist)
    figures.save_figure(
        os.path.join(out, "stft_roll.svg"),
        figures.make_stft_heatmap(roll_stft.times, roll_stft.freqs,
                                  roll_stft.magnitude, intervals=list(rep.intervals),
                                  title=f"roll | {r.name}", f_max=f_max))
    figures.save_figure(
        os.path.join(out, "stft_wave.svg"),
        figures.make_stft_heatmap(wave_stft.times, wave_stft.freqs,
                                  wave_stft.magnitude, title=f"wave | {r.name}",
                                  f_max=f_max))
    figures.save_figure(os.path.join(out, "phase_portrait.svg"),
                        figures.make_phase_portrait(pts))
    status = "signature detected" if rep.detected else "no signature"
    print(f"{r.name}: {status}; f_phi {rep.f_phi:.4f} Hz, "
          f"{len(rep.intervals)} flagged interval(s) -> {out}")
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    from . import figures
    from .dataset import CHANNELS
    from .diagnostics import detect_parametric_signature, phase_portrait, stft
    from .evaluation import (estimate_pdf, gaussian_pdf, pooled_channel,
                             pooled_predictions, summarize_rows)
    from .evaluation import evaluate_checkpoint as _eval_ckpt
    from .lstm import predict_series

    defaults = {
        "seed": 0, "out_dir": "reports", "campaign": None, "split": None,
        "checkpoint": None, "stamp": None, "channel": "roll",
    }
    cfg = _resolve(args, defaults)
    if not cfg["campaign"]:
        raise UsageError("--campaign <manifest.json> is required")
    if cfg["channel"] not in CHANNELS:
        raise UsageError(f"unknown channel {cfg['channel']!r}")
    named_paths = _parse_checkpoint_args(args.checkpoint, cfg["checkpoint"])
    named = _load_checkpoints(named_paths)
    realizations, _ = _campaign_realizations(cfg["campaign"], cfg["split"])
    stamp = cfg["stamp"] or _dt.datetime.now(_dt.timezone.utc).strftime(
        "%Y%m%d-%H%M%SZ")
    bundle = os.path.join(cfg["out_dir"], f"report-{stamp}")
    _write_run_record(bundle, args.cmd,
                      {**cfg, "checkpoint": named_paths, "stamp": stamp})

    channel = cfg["channel"]
    ch = CHANNELS.index(channel)
    by_label: dict[str, list] = {}
    for r in realizations:
        by_label.setdefault(r.label, []).append(r)
    labels = sorted(by_label)
    index: dict[str, list[str]] = {}

    # group 1: per-state time-series overlays, truth vs every model
    files: dict[str, str | bytes] = {}
    for label in labels:
        r = by_label[label][0]
        times = r.times()
        preds = {}
        for name, ckpt in sorted(named.items()):
            series = predict_series(ckpt.params, r, ckpt.stencil,
                                    normalization=ckpt.normalization)
            preds[name] = series[ch]
        names = sorted(preds)
        files[f"timeseries_{channel}_{label}.csv"] = _series_csv(
            ["t", "reference"] + names,
            [times, r.motions[ch]] + [preds[n] for n in names])
        fig = figures.make_timeseries_overlay(
            times, r.motions[ch], preds, ylabel=f"{channel} [deg]")
        files[f"timeseries_{channel}_{label}.svg"] = figures.render_svg(fig)
    index["timeseries"] = _write_group(os.path.join(bundle, "timeseries"), files)

    # group 2: pooled PDFs with gaussian fit, per state
    files = {}
    for label in labels:
        group = by_label[label]
        ref = pooled_channel(group, channel)
        ref_pdf = estimate_pdf(ref)
        curves = {"reference": ref_pdf}
        for name, ckpt in sorted(named.items()):
            curves[name] = estimate_pdf(pooled_predictions(ckpt, group, channel))
        gauss = gaussian_pdf(ref_pdf.grid, float(np.mean(ref)), float(np.std(ref)))
        for name, pdf in curves.items():
            files[f"pdf_{channel}_{label}_{name}.csv"] = _series_csv(
                ["grid", "density"], [pdf.grid, pdf.density])
        files[f"pdf_{channel}_{label}_gaussian.csv"] = _series_csv(
            ["grid", "density"], [gauss.grid, gauss.density])
        fig = figures.make_pdf_overlay(
            ref_pdf, {k: v for k, v in curves.items() if k != "reference"},
            gaussian=gauss, xlabel=f"{channel} [deg]")
        files[f"pdf_{channel}_{label}.svg"] = figures.render_svg(fig)
    index["pdfs"] = _write_group(os.path.join(bundle, "pdfs"), files)

    # group 3: STFT heatmap; the last label sorts as the harshest state
    r = by_label[labels[-1]][0]
    roll_stft = stft(r.motions[CHANNELS.index("roll")], r.dt)
    wave_stft = stft(r.probes[0], r.dt)
    rep = detect_parametric_signature(roll_stft, wave_stft)
    f_max = min(4.5 * rep.f_phi, roll_stft.nyquist)
    files = {
        "stft_roll.csv": _stft_csv(roll_stft),
        "detection.json": json.dumps(
            {"realization": r.name, "report": rep.to_dict()},
            indent=2, sort_keys=True) + "\n",
        "stft_roll.svg": figures.render_svg(figures.make_stft_heatmap(
            roll_stft.times, roll_stft.freqs, roll_stft.magnitude,
            intervals=list(rep.intervals), title=f"roll | {r.name}", f_max=f_max)),
    }
    index["stft"] = _write_group(os.path.join(bundle, "stft"), files)

    # group 4: roll-pitch phase portrait of the same realization
    pts = phase_portrait(r.motions[CHANNELS.index("roll")],
                         r.motions[CHANNELS.index("pitch")])
    files = {
        "phase_portrait.csv": _series_csv(["roll_deg", "pitch_deg"],
                                          [pts[:, 0], pts[:, 1]]),
        "phase_portrait.svg": figures.render_svg(figures.make_phase_portrait(pts)),
    }
    index["phase"] = _write_group(os.path.join(bundle, "phase"), files)

    # group 5: averaged bar metrics over all held-out seeds
    rows = []
    for name in sorted(named):
        rows.extend(_eval_ckpt(name, named[name], realizations))
    summary = summarize_rows(rows)
    files = {
        "metrics_per_seed.csv": _rows_to_csv(rows),
        "metrics_summary.csv": _rows_to_csv(summary),
        "rse_bars.svg": figures.render_svg(figures.make_rse_bars(summary)),
        "mae_bars.svg": figures.render_svg(
            figures.make_rse_bars(summary, metric="mae_mean")),
    }
    index["bars"] = _write_group(os.path.join(bundle, "bars"), files)

    with open(os.path.join(bundle, "index.json"), "w") as fh:
        json.dump({"stamp": stamp, "channel": channel,
                   "models": sorted(named), "states": labels,
                   "groups": index}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"report bundle: {bundle} ({sum(len(v) for v in index.values())} files "
          f"in {len(index)} groups)")
    return 0


# ---------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, help="master seed for this run")
    p.add_argument("--out-dir", help="directory for outputs")
    p.add_argument("--config", help="JSON config file; flags override it")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="seasurrogate",
                     description="Wave-to-motion surrogate pipeline.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="cmd", parser_class=_Parser)

    p = sub.add_parser("synth", help="synthesize an elevation record")
    _add_common(p)
    p.add_argument("--state", help="bundled sea state label (SS-1|SS-2|SS-3)")
    p.add_argument("--hs", type=float, help="significant wave height [m]")
    p.add_argument("--tp", type=float, help="peak period [s]")
    p.add_argument("--label", help="label stored in the sidecar")
    p.add_argument("--duration", type=float, help="record length [s]")
    p.add_argument("--dt", type=float, help="sample spacing [s]")
    p.add_argument("--n-components", type=int, help="number of wave components")
    p.add_argument("--band", type=float, nargs=2, metavar=("LO", "HI"),
                   help="absolute frequency band [rad/s]")
    p.add_argument("--stratified", action="store_const", const=True,
                   help="jitter component frequencies within their bins")
    p.add_argument("--prefix", help="output file stem")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("oracle-gen", help="generate a wave/motion campaign")
    _add_common(p)
    p.add_argument("--states", help="comma list of state labels (SS-1,SS-2,SS-3), "
                                    "default all")
    p.add_argument("--seeds-per-state", type=int)
    p.add_argument("--duration", type=float, help="usable record length [s]")
    p.add_argument("--dt", type=float)
    p.add_argument("--warmup", type=float, help="discarded leading transient [s]")
    p.add_argument("--n-components", type=int)
    p.set_defaults(func=_cmd_oracle_gen)

    p = sub.add_parser("ingest", help="campaign -> normalized sample sets")
    _add_common(p)
    p.add_argument("--campaign", help="campaign manifest.json")
    p.add_argument("--window", type=int, help="stencil window K")
    p.add_argument("--stride", type=int)
    p.add_argument("--train-seeds", type=int, help="training realizations per state")
    p.add_argument("--test-seeds", type=int, help="held-out realizations per state")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("train", help="train an LSTM surrogate")
    _add_common(p)
    p.add_argument("--samples", help="pre-ingested train.npz")
    p.add_argument("--campaign", help="campaign manifest.json (ingests on the fly)")
    p.add_argument("--window", type=int)
    p.add_argument("--stride", type=int)
    p.add_argument("--train-seeds", type=int)
    p.add_argument("--test-seeds", type=int)
    p.add_argument("--loss", choices=("mse", "re", "awmse"))
    p.add_argument("--lambda", dest="lam", type=float,
                   help="mirror weight of the re loss")
    p.add_argument("--beta", type=float, help="amplitude weight of awmse")
    p.add_argument("--scale", type=float,
                   help="response scale softening awmse/re weights")
    p.add_argument("--arch", help="LAYERSxHIDDEN, e.g. 2x32")
    p.add_argument("--hidden", type=int)
    p.add_argument("--layers", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--patience", type=int)
    p.add_argument("--min-delta", type=float)
    p.add_argument("--grad-clip", type=float)
    p.add_argument("--val-frac", type=float,
                   help="fraction of samples held out for early stopping")
    p.add_argument("--out", help="checkpoint path")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="evaluate checkpoints on a campaign")
    _add_common(p)
    p.add_argument("--campaign", help="campaign manifest.json")
    p.add_argument("--split", help="split.json from ingest; restricts to test set")
    p.add_argument("--checkpoint", action="append", metavar="NAME=PATH",
                   help="repeatable; model name and checkpoint path")
    p.add_argument("--channel", choices=("heave", "pitch", "roll"))
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("diagnose", help="STFT, 2:1 detection, phase portrait")
    _add_common(p)
    p.add_argument("--campaign", help="campaign manifest.json")
    p.add_argument("--realization", help="realization name, e.g. SS-3_s002")
    p.add_argument("--window-len", type=int)
    p.add_argument("--hop", type=int)
    p.add_argument("--f-phi-hint", type=float, help="known roll frequency [Hz]")
    p.add_argument("--decimate", type=int, help="keep every k-th portrait point")
    p.add_argument("--band-rel", type=float)
    p.add_argument("--min-growth-frames", type=int)
    p.add_argument("--growth-min", type=float)
    p.add_argument("--wave-frac-min", type=float)
    p.add_argument("--energy-frac-min", type=float)
    p.add_argument("--f-min", type=float)
    p.add_argument("--align-slack-bins", type=float)
    p.add_argument("--no-peak-alignment", action="store_const", const=True,
                   default=False)
    p.set_defaults(func=_cmd_diagnose)

    p = sub.add_parser("report", help="full figure bundle for a campaign")
    _add_common(p)
    p.add_argument("--campaign", help="campaign manifest.json")
    p.add_argument("--split", help="split.json from ingest; restricts to test set")
    p.add_argument("--checkpoint", action="append", metavar="NAME=PATH")
    p.add_argument("--channel", choices=("heave", "pitch", "roll"))
    p.add_argument("--stamp", help="bundle directory suffix; default UTC time")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else 1
        return 0 if code == 0 else 1
    if not getattr(args, "cmd", None):
        parser.print_help(sys.stderr)
        return 1
    try:
        return int(args.func(args) or 0)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except SeaSurrogateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
