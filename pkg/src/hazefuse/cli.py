"""Command-line interface.

Commands: ``enhance``, ``sweep``, ``batch``, ``synth``, ``metrics``, ``version``.
Exit codes: 0 success, 1 usage error, 2 I/O error, 3 numerical failure.

Every :class:`PipelineConfig` field has a flag and a key in the flat JSON
config file (``--config``); flags override the file, which overrides the
defaults.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    DegenerateInputError,
    ImageIOError,
    NumericalError,
    ShapeMismatchError,
)
from .evaluation import (
    CAST_PRESETS,
    METRIC_COLUMNS,
    HazeModel,
    apply_haze,
    apply_underwater_cast,
    report,
    synthetic_scene,
)
from .image_core import Image, ensure_writable_dir, load_image, save_image
from .pipelines import ALGORITHMS, FLAT_KEYS, PipelineConfig, run_algorithm

log = logging.getLogger("hazefuse")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3
CSV_SCHEMA = "# hazefuse-csv v1"
IMAGE_SUFFIXES = (".png", ".ppm", ".pgm")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# ---------------------------------------------------------------------------
# Config flags
# ---------------------------------------------------------------------------

# flat key -> flag name, where the two differ
_FLAG_ALIASES = {"outer_iterations": "iterations", "xyz_channel_mode": "xyz-mode"}


def _flag_for(key: str) -> str:
    return "--" + _FLAG_ALIASES.get(key, key.replace("_", "-"))


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("pipeline configuration")
    group.add_argument("--config", type=Path, help="flat JSON config file")
    group.add_argument("--algo", choices=ALGORITHMS, default=argparse.SUPPRESS)
    defaults = PipelineConfig().to_flat()
    for key, default in defaults.items():
        kwargs = {"dest": f"cfg_{key}", "default": argparse.SUPPRESS}
        if isinstance(default, bool):
            kwargs["action"] = argparse.BooleanOptionalAction
        elif isinstance(default, list):
            kwargs["type"] = _parse_floats
            kwargs["metavar"] = "LIST"
        else:
            kwargs["type"] = type(default)
            kwargs["metavar"] = key.upper()
        kwargs["help"] = f"(default: {default})"
        group.add_argument(_flag_for(key), **kwargs)
    group.add_argument(
        "--no-color-correct",
        action="store_true",
        default=argparse.SUPPRESS,
        help="disable gray-world and percentile stretch",
    )


def _build_config(args) -> tuple[PipelineConfig, str]:
    flat: dict = {}
    algo = "pa2"
    if getattr(args, "config", None):
        try:
            doc = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise ImageIOError(f"cannot read config {args.config}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {args.config} is not valid JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise UsageError("config file must hold a flat JSON object")
        algo = doc.pop("algo", algo)
        flat.update(doc)
    for key in FLAT_KEYS:
        if hasattr(args, f"cfg_{key}"):
            flat[key] = getattr(args, f"cfg_{key}")
    if getattr(args, "no_color_correct", False):
        flat["gray_world"] = False
        flat["percentile_stretch"] = False
    algo = getattr(args, "algo", algo)
    if algo not in ALGORITHMS:
        raise UsageError(f"unknown algorithm {algo!r}")
    try:
        return PipelineConfig.from_flat(flat), algo
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"invalid configuration: {exc}") from None


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    buf.write(CSV_SCHEMA + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _write_text(path: Path, text: str) -> None:
    ensure_writable_dir(path)
    try:
        path.write_text(text)
    except OSError as exc:
        raise ImageIOError(f"cannot write {path}: {exc}") from None


def _write_manifest(path: Path, **payload) -> None:
    payload.setdefault("created", datetime.now(timezone.utc).isoformat())
    payload.setdefault("version", __version__)
    _write_text(path, json.dumps(payload, indent=2, default=str) + "\n")


def _manifest_path(output: Path) -> Path:
    return output.with_name(output.name + ".manifest.json")


def _check_finite(img: Image) -> Image:
    if not np.all(np.isfinite(img.data)):
        raise NumericalError("output contains non-finite samples")
    return img


def _enhance_one(task):
    """Load, enhance, save and measure one image; picklable for process pools."""
    src, dst, algo, flat, reference = task
    cfg = PipelineConfig.from_flat(flat)
    timings = {}
    t0 = time.perf_counter()
    img = load_image(src)
    timings["load"] = (time.perf_counter() - t0) * 1e3
    t0 = time.perf_counter()
    out = _check_finite(run_algorithm(img, algo, cfg))
    timings["enhance"] = (time.perf_counter() - t0) * 1e3
    t0 = time.perf_counter()
    ensure_writable_dir(dst)
    save_image(out, dst)
    timings["save"] = (time.perf_counter() - t0) * 1e3
    t0 = time.perf_counter()
    ref = load_image(reference) if reference else None
    metrics = report(out, ref)
    timings["metrics"] = (time.perf_counter() - t0) * 1e3
    return metrics.as_row(), timings


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_enhance(args) -> int:
    cfg, algo = _build_config(args)
    output = Path(args.output or args.out or "")
    if not str(output):
        raise UsageError("enhance needs an output path")
    row, timings = _enhance_one((Path(args.input), output, algo, cfg.to_flat(), args.reference))
    _write_manifest(
        _manifest_path(output),
        command=sys.argv,
        algo=algo,
        config=cfg.to_flat(),
        inputs=[str(args.input)],
        outputs=[str(output)],
        columns=METRIC_COLUMNS,
        rows=[row],
        timings_ms=timings,
    )
    log.info("%s -> %s (%s, %.0f ms)", args.input, output, algo, timings["enhance"])
    return EXIT_OK


def _sweep_values(param: str, text: str) -> list:
    raw = [v.strip() for v in text.split(",") if v.strip()]
    if not raw:
        raise UsageError("--values is empty")
    if param == "algo":
        bad = [v for v in raw if v not in ALGORITHMS]
        if bad:
            raise UsageError(f"unknown algorithm(s): {', '.join(bad)}")
        return sorted(raw)
    default = PipelineConfig().to_flat()[param]
    try:
        if isinstance(default, bool):
            values = [v.lower() in ("1", "true", "yes", "on") for v in raw]
        elif isinstance(default, (int, float)):
            values = [type(default)(float(v)) if isinstance(default, int) else float(v) for v in raw]
        elif isinstance(default, list):
            raise UsageError(f"parameter {param} takes a list and cannot be swept")
        else:
            values = raw
    except ValueError as exc:
        raise UsageError(f"bad value for {param}: {exc}") from None
    return sorted(values)


def cmd_sweep(args) -> int:
    cfg, algo = _build_config(args)
    param = args.param
    if param != "algo" and param not in FLAT_KEYS:
        raise UsageError(f"unknown parameter {param!r}")
    values = _sweep_values(param, args.values)
    out_dir = Path(args.out)
    stem = Path(args.input).stem
    header = ["param", "value", "status", "output"] + METRIC_COLUMNS
    rows, outputs, failed = [], [], False
    timings = {}
    for value in values:
        run_algo, flat = algo, cfg.to_flat()
        if param == "algo":
            run_algo = value
        else:
            flat[param] = value
        dst = out_dir / f"{stem}_{param}-{value}.png"
        try:
            PipelineConfig.from_flat(flat)
            metrics, t = _enhance_one((Path(args.input), dst, run_algo, flat, args.reference))
        except (ValueError, NumericalError, DegenerateInputError) as exc:
            log.warning("%s=%s failed: %s", param, value, exc)
            rows.append([param, value, "failed", ""] + [""] * len(METRIC_COLUMNS))
            failed = True
            continue
        timings[str(value)] = t
        rows.append([param, value, "ok", dst.name] + metrics)
        outputs.append(str(dst))
    csv_path = out_dir / "sweep.csv"
    _write_text(csv_path, _csv_text(header, rows))
    _write_manifest(
        out_dir / "sweep.manifest.json",
        command=sys.argv,
        algo=algo,
        config=cfg.to_flat(),
        param=param,
        values=values,
        inputs=[str(args.input)],
        outputs=outputs,
        csv=str(csv_path),
        timings_ms=timings,
    )
    return EXIT_NUMERIC if failed else EXIT_OK


def _list_images(directory: Path) -> list[Path]:
    if not directory.is_dir():
        raise ImageIOError(f"{directory} is not a directory")
    return sorted(p for p in directory.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)


def cmd_batch(args) -> int:
    cfg, algo = _build_config(args)
    inputs = _list_images(Path(args.input_dir))
    out_dir = Path(args.out)
    references: dict[str, str] = {}
    if args.ground_truth:
        try:
            truth = json.loads(Path(args.ground_truth).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ImageIOError(f"cannot read ground truth {args.ground_truth}: {exc}") from None
        base = Path(args.ground_truth).parent
        references = {Path(e["output"]).name: str(base / e["source"]) for e in truth["entries"]}
    flat = cfg.to_flat()
    tasks = [
        (src, out_dir / f"{src.stem}_{algo}.png", algo, flat, references.get(src.name))
        for src in inputs
    ]
    if args.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_enhance_one, tasks))
    else:
        results = [_enhance_one(t) for t in tasks]
    header = ["input", "output", "algo"] + METRIC_COLUMNS
    rows = [[t[0].name, t[1].name, algo] + metrics for t, (metrics, _) in zip(tasks, results)]
    for t in tasks:
        log.info("%s -> %s", t[0].name, t[1].name)
    csv_path = out_dir / "batch.csv"
    _write_text(csv_path, _csv_text(header, rows))
    _write_manifest(
        out_dir / "batch.manifest.json",
        command=sys.argv,
        algo=algo,
        config=flat,
        inputs=[str(t[0]) for t in tasks],
        outputs=[str(t[1]) for t in tasks],
        columns=header,
        rows=rows,
        timings_ms={t[0].name: timing for t, (_, timing) in zip(tasks, results)},
        jobs=args.jobs,
    )
    return EXIT_OK


def _parse_cast(text: str):
    if text in CAST_PRESETS:
        return CAST_PRESETS[text]
    vals = _parse_floats(text)
    if len(vals) != 3:
        raise UsageError(f"cast must be a preset ({', '.join(CAST_PRESETS)}) or r,g,b")
    return tuple(vals)


def cmd_synth(args) -> int:
    out_dir = Path(args.out)
    sources: list[tuple[str, Image]] = []
    if args.scenes:
        for k in range(args.scenes):
            scene = synthetic_scene(args.seed + k, args.size)
            path = out_dir / f"clean_{k:02d}.png"
            ensure_writable_dir(path)
            save_image(scene, path)
            sources.append((path.name, load_image(path)))
    for src in args.inputs:
        sources.append((str(Path(src).resolve()), load_image(src)))
    if not sources:
        raise UsageError("synth needs input images or --scenes N")

    t_values = _parse_floats(args.t) if args.t else ([] if args.cast else [0.4, 0.6, 0.8])
    airlight = _parse_floats(args.airlight)
    airlight = airlight[0] if len(airlight) == 1 else tuple(airlight)
    cast = _parse_cast(args.cast) if args.cast else None
    rng = np.random.default_rng(args.seed)

    entries = []
    for name, clean in sources:
        stem = Path(name).stem
        jobs = [("haze", t) for t in t_values] + ([("cast", cast)] if cast else [])
        for kind, param in jobs:
            try:
                if kind == "haze":
                    degraded = apply_haze(clean, HazeModel(param, airlight))
                    dst = out_dir / f"{stem}_t{param:.2f}.png"
                    params = {"t": param, "airlight": airlight}
                else:
                    degraded = apply_underwater_cast(clean, param)
                    dst = out_dir / f"{stem}_cast.png"
                    params = {"attenuation": list(param)}
            except ValueError as exc:
                raise UsageError(str(exc)) from None
            if args.noise > 0:
                noisy = degraded.data + rng.normal(0.0, args.noise, degraded.data.shape)
                degraded = degraded.with_data(np.clip(noisy, 0.0, 1.0))
                params["noise"] = args.noise
                params["seed"] = args.seed
            ensure_writable_dir(dst)
            save_image(degraded, dst)
            entries.append({"output": dst.name, "source": name, "kind": kind, "params": params})
    _write_manifest(out_dir / "synth_manifest.json", command=sys.argv, entries=entries)
    return EXIT_OK


def cmd_metrics(args) -> int:
    reference = load_image(args.reference) if args.reference else None
    rows = []
    for path in args.images:
        img = load_image(path)
        try:
            metrics = report(img, reference)
        except ShapeMismatchError as exc:
            raise UsageError(str(exc)) from None
        rows.append([Path(path).name] + metrics.as_row())
    text = _csv_text(["image"] + METRIC_COLUMNS, rows)
    if args.out:
        _write_text(Path(args.out), text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_version(args) -> int:
    print(f"hazefuse {__version__}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hazefuse", description="Hazy and underwater image enhancement.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("enhance", help="enhance one image")
    p.add_argument("input")
    p.add_argument("output", nargs="?")
    p.add_argument("--out", help="output path (alternative to the positional)")
    p.add_argument("--reference", help="ground-truth image for the RMSE column")
    _add_config_flags(p)
    p.set_defaults(func=cmd_enhance)

    p = sub.add_parser("sweep", help="run one parameter over a list of values")
    p.add_argument("input")
    p.add_argument("--param", required=True, help="config key to vary, or 'algo'")
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--reference")
    _add_config_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("batch", help="enhance every image in a directory")
    p.add_argument("input_dir")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--ground-truth", help="synth_manifest.json linking inputs to clean sources")
    _add_config_flags(p)
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("synth", help="generate degraded images with known ground truth")
    p.add_argument("inputs", nargs="*")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--scenes", type=int, default=0, help="also generate N built-in clean scenes")
    p.add_argument("--size", type=int, default=128)
    p.add_argument("--t", help="comma-separated transmissions (default 0.4,0.6,0.8)")
    p.add_argument("--airlight", default="0.85", help="scalar or r,g,b")
    p.add_argument("--cast", help="underwater cast preset (green, blue) or r,g,b attenuation")
    p.add_argument("--noise", type=float, default=0.0, help="Gaussian noise sigma")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("metrics", help="print image-quality metrics as CSV")
    p.add_argument("images", nargs="+")
    p.add_argument("--reference")
    p.add_argument("--out")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("version", help="print the version")
    p.set_defaults(func=cmd_version)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"hazefuse: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
    )
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"hazefuse: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ImageIOError, OSError) as exc:
        print(f"hazefuse: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NumericalError, DegenerateInputError, FloatingPointError) as exc:
        print(f"hazefuse: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"hazefuse: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
