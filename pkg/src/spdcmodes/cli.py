"""Command-line front end: simulate, analyze, sweep, correct, fit.

Exit codes: 0 success, 1 runtime/analysis failure, 2 configuration or usage
error. All outputs are deterministic; there is no seed option because all
sampling is stratified, not random.
"""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import imageio, metrics, rates
from .config import ExperimentConfig, load_config
from .correction import optimize_offset, write_trace_csv
from .errors import ConfigError, SpdcError
from .pipeline import render_experiment


def _out_dir(args, cfg: ExperimentConfig | None) -> Path:
    if args.out is not None:
        path = Path(args.out)
    elif cfg is not None:
        path = Path(cfg.output_dir)
    else:
        path = Path("out")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_image(image, out: Path, stem: str, fmt: str) -> list[Path]:
    written = []
    if fmt in ("pgm", "both"):
        p = imageio.write_pgm(image, out / f"{stem}.pgm")
        imageio.write_metadata(image, out / f"{stem}.pgm.meta")
        written.append(p)
    if fmt in ("png", "both"):
        p = imageio.write_png(image, out / f"{stem}.png")
        imageio.write_metadata(image, out / f"{stem}.png.meta")
        written.append(p)
    return written


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args, cfg)
    image = render_experiment(cfg)
    paths = _write_image(image, out, "mode", args.format)
    for p in paths:
        print(f"wrote {p}")
    if "warning" in image.metadata:
        print(f"warning: {image.metadata['warning']}", file=sys.stderr)
    return 0


def cmd_analyze(args) -> int:
    image = imageio.load_mode_image(args.image)
    report = metrics.asymmetry_factor(image)
    print(f"center_x_um = {report.center_x_um:.3f}")
    print(f"center_y_um = {report.center_y_um:.3f}")
    print(f"width_x_a_um = {report.width_x_a_um:.3f}")
    print(f"width_y_b_um = {report.width_y_b_um:.3f}")
    print(f"af = {report.af:.6f}")
    out = _out_dir(args, None)
    csv_path = out / (Path(args.image).stem + "_analysis.csv")
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["center_x_um", "center_y_um", "width_x_a_um",
                         "width_y_b_um", "af"])
        writer.writerow([f"{report.center_x_um:.9g}", f"{report.center_y_um:.9g}",
                         f"{report.width_x_a_um:.9g}", f"{report.width_y_b_um:.9g}",
                         f"{report.af:.9g}"])
    print(f"wrote {csv_path}")
    return 0


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"--values must be a comma-separated number list: {exc}") from exc
    if not values:
        raise ConfigError("--values is empty")
    out = _out_dir(args, cfg)
    rows = metrics.sweep_af(args.param, values, cfg)
    csv_path = metrics.write_sweep_csv(rows, out / f"sweep_{args.param}.csv")
    for row in rows:
        print(f"{args.param} = {row.value:g}: af = {row.af:.4f} "
              f"(a = {row.width_x_a_um:.1f} um, b = {row.width_y_b_um:.1f} um)")
    print(f"wrote {csv_path}")
    if args.images:
        for row in rows:
            image = render_experiment(cfg.with_override(args.param, row.value))
            _write_image(image, out, f"sweep_{args.param}_{row.value:g}", args.format)
    return 0


def cmd_correct(args) -> int:
    cfg = load_config(args.config)
    if cfg.lens is None:
        raise ConfigError("config has no [lens] section; correction needs one")
    out = _out_dir(args, cfg)
    plane_z_m = cfg.geometry.plane_z_mm * 1e-3
    before = render_experiment(cfg.without_lens())
    _write_image(before, out, "before", args.format)
    result = optimize_offset(cfg.without_lens(), cfg.lens, plane_z_m)
    from dataclasses import replace

    best_lens = replace(cfg.lens, offset_x_um=result.offset_x_um,
                        offset_y_um=result.offset_y_um)
    from .pipeline import render_through_lens

    after = render_through_lens(cfg.without_lens(), best_lens, plane_z_m)
    _write_image(after, out, "after", args.format)
    write_trace_csv(result.trace, out / "correction_trace.csv")
    summary = out / "correction_summary.txt"
    lines = [
        f"af_before = {result.af_before:.6f}",
        f"af_after = {result.af_after:.6f}",
        f"offset_x_um = {result.offset_x_um:.3f}",
        f"offset_y_um = {result.offset_y_um:.3f}",
        f"flat_landscape = {result.flat_landscape}",
    ]
    summary.write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    if result.flat_landscape:
        print("warning: offset landscape is flat; lateral offset left at zero",
              file=sys.stderr)
    print(f"wrote {summary}")
    return 0


def cmd_fit(args) -> int:
    rows = rates.read_rate_csv(args.table)
    fit = rates.power_law_fit([l for l, _ in rows], [r for _, r in rows])
    print(f"amplitude = {fit.amplitude:.6g}")
    print(f"exponent = {fit.exponent:.6f}")
    print(f"r_squared = {fit.r_squared:.9f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spdcmodes",
        description="Simulate and analyze walk-off-distorted SPDC emission profiles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="render the configured mode to an image file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--format", choices=("pgm", "png", "both"), default="pgm")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="measure asymmetry of an image file")
    p.add_argument("image", help="PGM or PNG mode image")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="sweep one parameter and tabulate AF")
    p.add_argument("--config", required=True)
    p.add_argument("--param", required=True, choices=metrics.SWEEP_PARAMETERS)
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--out", default=None)
    p.add_argument("--images", action="store_true", help="also write per-point images")
    p.add_argument("--format", choices=("pgm", "png", "both"), default="pgm")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("correct", help="optimize the correction-lens offset")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("pgm", "png", "both"), default="pgm")
    p.set_defaults(func=cmd_correct)

    p = sub.add_parser("fit", help="power-law fit of a rate-vs-length table")
    p.add_argument("table", help="CSV with header length_mm,rate")
    p.set_defaults(func=cmd_fit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SpdcError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
