"""
facepulse CLI Module
--------------------
This module provides the command-line interface for facepulse.
"""

import argparse
import os
import sys
from typing import List, Optional, Sequence

from facepulse.facegeom.mesh import MESH_DATA_FILE, build_mesh, save_mesh
from facepulse.io.datasets import load_dataset
from facepulse.io.frames import load_frames
from facepulse.io.landmarks import load_landmarks
from facepulse.io.synthetic import write_synthetic_dataset
from facepulse.pipeline import (
    VideoInput,
    config_matrix,
    default_grouping,
    load_video,
    run_evaluate,
    run_extract,
    run_plots,
)
from facepulse.utils import Config, get_logger, resolve_level, setup_logging
from facepulse.utils.config import build_pipeline_config, default_config_file
from facepulse.utils.exceptions import ConfigError, FacePulseError
from facepulse.utils.schemas import (
    METHOD_NAMES,
    FacePulseConfig,
    PipelineConfig,
    SyntheticSpec,
)

logger = get_logger()

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_PARTIAL = 4

PIPELINES = ("fixed_crop", "improved", "normalized_single", "multi_region")


def _split_list(value: str) -> List[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def create_parser() -> argparse.ArgumentParser:
    """Create the command-line argument parser."""
    parser = argparse.ArgumentParser(
        prog="facepulse",
        description="facepulse: remote photoplethysmography from facial video and landmarks",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Write a seeded synthetic dataset
  facepulse synth --out data/synthetic --videos 10 --seed 0

  # Evaluate three methods on it with the multi-region pipeline
  facepulse evaluate --dataset data/synthetic/dataset.yaml --method chrom,pos,omit --out runs/synth

  # Grid-size sweep (6x6 to 11x11), then the fixed patches
  facepulse evaluate --dataset data/synthetic/dataset.yaml --grid-sweep --out runs/sweep
  facepulse evaluate --dataset data/synthetic/dataset.yaml --patch-sweep --out runs/patches

  # Figures of a finished run
  facepulse plots runs/synth --log-scale

  # Extract the pulse of one video
  facepulse extract --frames video.raw --landmarks video.csv --out runs/one
""",
    )

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config",
        help="Path to the configuration file (default: FACEPULSE_CONFIG or config/facepulse.yaml)",
    )
    common.add_argument("--verbose", action="store_true", help="Enable verbose logging")
    common.add_argument("--log-file", help="Path to the log file")
    common.add_argument("--out", help="Output directory")
    common.add_argument("--seed", type=int, help="Random seed (synthetic data, ICA)")

    pipeline_opts = argparse.ArgumentParser(add_help=False)
    pipeline_opts.add_argument(
        "--method",
        type=_split_list,
        help=f"Comma-separated methods ({', '.join(METHOD_NAMES)})",
    )
    pipeline_opts.add_argument(
        "--pipeline",
        type=_split_list,
        help=f"Comma-separated pipelines ({', '.join(PIPELINES)})",
    )

    subparsers = parser.add_subparsers(dest="command")

    extract = subparsers.add_parser(
        "extract", parents=[common, pipeline_opts], help="Extract the pulse of one video"
    )
    source = extract.add_argument_group("video source")
    source.add_argument("--frames", help="Frame directory or raw container")
    source.add_argument("--landmarks", help="Landmark CSV file")
    source.add_argument("--video-id", help="Identifier used in output names")
    source.add_argument("--dataset", help="Dataset descriptor (with --video-id)")

    evaluate = subparsers.add_parser(
        "evaluate", parents=[common, pipeline_opts], help="Evaluate pipelines on a dataset"
    )
    evaluate.add_argument("--dataset", required=True, help="Dataset descriptor YAML")
    evaluate.add_argument(
        "--grid-sweep", action="store_true", help="Run the multi-region grids 6x6..11x11"
    )
    evaluate.add_argument(
        "--patch-sweep",
        action="store_true",
        help="Run the forehead, cheeks and combined patches",
    )
    evaluate.add_argument("--jobs", type=int, help="Videos processed in parallel")
    evaluate.add_argument(
        "--group-by",
        choices=["none", "scenario", "grid_n", "method", "pipeline"],
        help="Summary grouping (derived from the run when omitted)",
    )
    evaluate.add_argument(
        "--lag-mode", choices=["per_video", "dataset"], help="Alignment lag per video or median"
    )
    evaluate.add_argument("--no-signals", action="store_true", help="Skip per-video signal files")

    synth = subparsers.add_parser("synth", parents=[common], help="Write a synthetic dataset")
    synth.add_argument("--videos", type=int, default=10, help="Number of videos")
    synth.add_argument("--duration", type=float, help="Video length in seconds")
    synth.add_argument("--motion", choices=["static", "translation"], help="Face motion")
    synth.add_argument("--velocity", type=float, nargs=2, metavar=("VX", "VY"), help="px/s")
    synth.add_argument("--jitter", type=float, help="Landmark jitter in pixels")
    synth.add_argument(
        "--bpm-range", type=float, nargs=2, default=(48.0, 180.0), metavar=("LOW", "HIGH")
    )
    synth.add_argument("--name", default="synthetic", help="Dataset name")

    plots = subparsers.add_parser("plots", parents=[common], help="Render figures of a run")
    plots.add_argument("run_dir", help="Directory written by evaluate")
    plots.add_argument("--log-scale", action="store_true", help="Logarithmic MAE axis")

    mesh = subparsers.add_parser("mesh", parents=[common], help="Write the canonical mesh file")
    mesh.add_argument("--path", help=f"Output file (default: <out>/{MESH_DATA_FILE})")

    return parser


def _load_config(path: Optional[str]) -> FacePulseConfig:
    return Config(path or default_config_file()).model


def _base_pipeline(cfg: FacePulseConfig, seed: Optional[int]) -> PipelineConfig:
    if seed is None:
        return cfg.pipeline
    return build_pipeline_config(cfg.pipeline, methods={"ica_seed": seed})


def _single(values: Optional[Sequence[str]], name: str) -> Optional[str]:
    if values and len(values) > 1:
        raise ConfigError(f"extract takes a single {name}, got {', '.join(values)}")
    return values[0] if values else None


def cmd_extract(args: argparse.Namespace, cfg: FacePulseConfig) -> int:
    pipeline = build_pipeline_config(
        _base_pipeline(cfg, args.seed),
        method=_single(args.method, "method"),
        pipeline=_single(args.pipeline, "pipeline"),
    )
    if args.dataset:
        if not args.video_id:
            raise ConfigError("--dataset needs --video-id")
        descriptor = load_dataset(args.dataset, strict=False)
        entry = next((e for e in descriptor.entries if e.video_id == args.video_id), None)
        if entry is None:
            raise ConfigError(f"Video {args.video_id} is not in {descriptor.name}")
        video = load_video(descriptor, entry)
    else:
        if not (args.frames and args.landmarks):
            raise ConfigError("extract needs --frames and --landmarks (or --dataset)")
        sequence = load_frames(args.frames)
        landmarks = load_landmarks(args.landmarks, n_frames=len(sequence))
        video_id = args.video_id or os.path.splitext(os.path.basename(args.frames.rstrip("/")))[0]
        video = VideoInput(video_id, sequence.frames, sequence.fs, landmarks)

    out_dir = args.out or cfg.run.out_dir
    result = run_extract(video, pipeline, out_dir=out_dir)
    hr = result.hr
    print(f"\n{result.video_id} ({result.pipeline}, {result.method})")
    print(f"  windows: {len(hr)}, valid: {int(hr.valid.sum())}")
    if hr.valid.any():
        print(f"  mean heart rate: {hr.bpm[hr.valid].mean():.1f} bpm")
    if result.flags:
        print(f"  flags: {', '.join(result.flags)}")
    print(f"  outputs: {out_dir}")
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace, cfg: FacePulseConfig) -> int:
    configs = config_matrix(
        _base_pipeline(cfg, args.seed),
        methods=args.method,
        pipelines=args.pipeline,
        grid_sweep=args.grid_sweep,
        patch_sweep=args.patch_sweep,
    )
    eval_cfg = cfg.evaluation
    if args.lag_mode:
        eval_cfg = eval_cfg.model_copy(update={"lag_mode": args.lag_mode})
    run = run_evaluate(
        args.dataset,
        configs,
        out_dir=args.out or cfg.run.out_dir,
        eval_cfg=eval_cfg,
        ref_cfg=cfg.reference,
        jobs=args.jobs or cfg.run.jobs,
        group_by=args.group_by or default_grouping(configs, args.grid_sweep, args.patch_sweep),
        run_meta={"seed": args.seed if args.seed is not None else cfg.run.seed},
        save_signals=not args.no_signals,
    )
    with open(run.paths["table"], "r") as f:
        print(f.read())
    print(f"Reports: {run.paths['csv']}")
    if run.partial:
        print(f"Excluded (video, configuration) pairs: {len(run.exclusions)}")
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_synth(args: argparse.Namespace, cfg: FacePulseConfig) -> int:
    updates = {}
    if args.duration is not None:
        updates["duration_s"] = args.duration
    if args.motion:
        updates["motion"] = args.motion
    if args.velocity:
        updates["velocity"] = tuple(args.velocity)
    if args.jitter is not None:
        updates["landmark_jitter_px"] = args.jitter
    spec = SyntheticSpec(**updates)
    seed = args.seed if args.seed is not None else cfg.run.seed
    out_dir = args.out or os.path.join(cfg.run.out_dir, args.name)
    path = write_synthetic_dataset(
        out_dir,
        n_videos=args.videos,
        seed=seed,
        base=spec,
        bpm_range=tuple(args.bpm_range),
        name=args.name,
    )
    print(f"Synthetic dataset written: {path}")
    return EXIT_OK


def cmd_plots(args: argparse.Namespace, cfg: FacePulseConfig) -> int:
    paths = run_plots(args.run_dir, log_scale=args.log_scale, out_dir=args.out)
    print(f"Wrote {len(paths)} figures")
    return EXIT_OK


def cmd_mesh(args: argparse.Namespace, cfg: FacePulseConfig) -> int:
    path = args.path or os.path.join(args.out or ".", MESH_DATA_FILE)
    checksum = save_mesh(build_mesh(), path)
    print(f"Canonical mesh written to {path} (sha256 {checksum[:12]})")
    return EXIT_OK


COMMANDS = {
    "extract": cmd_extract,
    "evaluate": cmd_evaluate,
    "synth": cmd_synth,
    "plots": cmd_plots,
    "mesh": cmd_mesh,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point for the CLI.

    Returns:
        0 on success, 2 on a configuration error, 3 on a data or processing
        error, 4 when an evaluation excluded some videos
    """
    parser = create_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help()
        return EXIT_CONFIG

    config_path = args.config or default_config_file()
    try:
        cfg = _load_config(config_path)
    except ConfigError as e:
        setup_logging(args.log_file, resolve_level(args.verbose))
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG

    setup_logging(args.log_file or cfg.run.log_file, resolve_level(args.verbose))
    logger.debug(f"Using configuration {config_path}")

    try:
        return COMMANDS[args.command](args, cfg)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except FacePulseError as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
