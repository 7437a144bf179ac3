"""Command-line workflow: synthesize, segment, evaluate, ablate, sweep.

Dataset layout on disk is one directory with two subdirectories:

    <data-dir>/kinematics/<id>.txt|csv    recordings (robot layout or CSV)
    <data-dir>/transcripts/<id>.txt       optional "start end label" files

Demonstrations named by --init-demos seed the mixture (weak init) and are
excluded from both the EM fit and the evaluation; every other
demonstration is fitted and, when it has a transcript, scored. All
settings can come from a JSON config file; command-line flags override
file values field by field.

Exit codes: 0 success, 1 usage or config error, 2 data error, 3 numerical
failure.
"""

import argparse
import csv
import dataclasses
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from kinseg import dictionary as _dictionary
from kinseg import gmm as _gmm
from kinseg import metrics as _metrics
from kinseg import preprocess as _preprocess
from kinseg import synth as _synth
from kinseg.ingest import (
    Demonstration,
    ParseError,
    Transcript,
    compress_labels,
    expand_labels,
    parse_kinematics,
    parse_transcript,
    serialize_kinematics,
    serialize_transcript,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3

FILL = ""  # internal marker for unannotated frames


class ConfigError(Exception):
    """Invalid or incomplete run configuration (exit code 1)."""


@dataclass(frozen=True)
class RunConfig:
    """One segmentation run; defaults are the reference operating point."""

    data_dir: str = ""
    output_dir: str = ""
    layout: str = "auto"  # auto | jigsaws | csv
    sample_rate_hz: float | None = None  # None: 30 for robot files, CSV needs it
    preprocessing: str = "auto"  # auto | kinematic | raw
    fc_hz: float = 1.5
    subsample_factor: int = 3
    window: int = 2
    feature_subset: str = "all"
    em_tol: float = 1e-6
    em_max_iter: int = 300
    seed: int = 0
    init_method: str = "weak"  # weak | kmeans
    init_demos: tuple[str, ...] = ()
    k: int | None = None
    mapping: str | None = None  # path, or "builtin" for the shipped rules
    sidecar: str | None = None


_INT_FIELDS = {"subsample_factor", "window", "em_max_iter", "seed", "k"}
_FLOAT_FIELDS = {"fc_hz", "em_tol", "sample_rate_hz"}
_CONFIG_FIELDS = {f.name for f in dataclasses.fields(RunConfig)}


def _coerce(name: str, value):
    if value is None:
        return None
    try:
        if name in _INT_FIELDS:
            if isinstance(value, float) and value != int(value):
                raise ValueError
            return int(value)
        if name in _FLOAT_FIELDS:
            return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"config field {name!r}: expected a number, got {value!r}")
    if name == "init_demos":
        if isinstance(value, str):
            value = [tok for tok in value.split(",") if tok]
        return tuple(str(v) for v in value)
    return value


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, config file, and explicit flags (in rising priority)."""
    merged = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}")
        if not isinstance(doc, dict):
            raise ConfigError("config file must hold a JSON object")
        for key, value in doc.items():
            if key not in _CONFIG_FIELDS:
                raise ConfigError(f"unknown config field {key!r}")
            merged[key] = _coerce(key, value)
    for name in _CONFIG_FIELDS:
        value = getattr(args, name, None)
        if value is not None:
            merged[name] = _coerce(name, value)
    config = RunConfig(**merged)
    _validate(config)
    return config


def _validate(config: RunConfig) -> None:
    if not config.data_dir:
        raise ConfigError("a data directory is required (--data-dir)")
    if not config.output_dir:
        raise ConfigError("an output directory is required (--output-dir)")
    if config.layout not in ("auto", "jigsaws", "csv"):
        raise ConfigError(f"unknown layout {config.layout!r}")
    if config.preprocessing not in ("auto", "kinematic", "raw"):
        raise ConfigError(f"unknown preprocessing mode {config.preprocessing!r}")
    if config.init_method not in ("weak", "kmeans"):
        raise ConfigError(f"unknown init method {config.init_method!r}")
    if config.init_method == "weak" and not config.init_demos:
        raise ConfigError("weak init needs at least one --init-demos id")
    if config.fc_hz <= 0:
        raise ConfigError("fc_hz must be positive")
    if config.sample_rate_hz is not None and config.sample_rate_hz <= 0:
        raise ConfigError("sample_rate_hz must be positive")
    if config.subsample_factor < 1:
        raise ConfigError("subsample_factor must be >= 1")
    if config.window < 0:
        raise ConfigError("window must be >= 0")
    if config.em_tol <= 0:
        raise ConfigError("em_tol must be positive")
    if config.em_max_iter < 1:
        raise ConfigError("em_max_iter must be >= 1")
    if config.k is not None and config.k < 1:
        raise ConfigError("k must be >= 1")
    try:
        _preprocess.resolve_subset(config.feature_subset)
    except ValueError as exc:
        raise ConfigError(str(exc))


@dataclass
class LoadedDemo:
    demo: Demonstration
    transcript: Transcript | None


def load_dataset(config: RunConfig) -> dict[str, LoadedDemo]:
    """Read every recording (and its transcript when present), sorted by id."""
    kin_dir = os.path.join(config.data_dir, "kinematics")
    if not os.path.isdir(kin_dir):
        raise OSError(f"no kinematics directory at {kin_dir}")
    files = sorted(
        name
        for name in os.listdir(kin_dir)
        if os.path.splitext(name)[1] in (".txt", ".csv")
    )
    if not files:
        raise OSError(f"no kinematic files (.txt or .csv) in {kin_dir}")
    dataset: dict[str, LoadedDemo] = {}
    for name in files:
        demo_id, ext = os.path.splitext(name)
        if config.layout == "auto":
            layout = "generic_csv" if ext == ".csv" else "jigsaws"
        else:
            layout = {"jigsaws": "jigsaws", "csv": "generic_csv"}[config.layout]
        with open(os.path.join(kin_dir, name)) as fh:
            try:
                demo = parse_kinematics(
                    fh, layout, id=demo_id, sample_rate_hz=config.sample_rate_hz
                )
            except ParseError as exc:
                raise ParseError(f"{name}: {exc}") from None
        transcript = None
        tpath = os.path.join(config.data_dir, "transcripts", f"{demo_id}.txt")
        if os.path.isfile(tpath):
            with open(tpath) as fh:
                try:
                    transcript = parse_transcript(fh)
                except ParseError as exc:
                    raise ParseError(f"{demo_id}.txt: {exc}") from None
        dataset[demo_id] = LoadedDemo(demo, transcript)
    return dataset


def _load_mapping(config: RunConfig):
    if config.mapping is None:
        return None, None
    if config.mapping == "builtin":
        mapping = _dictionary.default_mapping()
    else:
        with open(config.mapping) as fh:
            mapping = _dictionary.parse_mapping(fh)
    sidecar = None
    if config.sidecar is not None:
        with open(config.sidecar) as fh:
            sidecar = _dictionary.parse_sidecar(fh)
    return mapping, sidecar


def _features(config: RunConfig, demo: Demonstration):
    mode = config.preprocessing
    if mode == "auto":
        mode = "kinematic" if demo.n_channels == 38 else "raw"
    if mode == "kinematic":
        return _preprocess.build_features(
            demo,
            config.feature_subset,
            fc_hz=config.fc_hz,
            subsample_factor=config.subsample_factor,
        )
    if config.feature_subset != "all":
        raise ConfigError(
            "feature subsets apply only to the kinematic pipeline "
            f"(demonstration {demo.id!r} is processed raw)"
        )
    return _preprocess.raw_features(demo, subsample_factor=config.subsample_factor)


@dataclass
class RunResult:
    model: _gmm.GmmModel
    report: _metrics.EvaluationReport
    per_demo: dict[str, _metrics.EvaluationReport]
    predictions: dict[str, list[str]]  # per-frame labels on the original grid
    row_predictions: dict[str, list[str]]
    augmented: dict[str, _preprocess.AugmentedMatrix]


def _empty_report() -> _metrics.EvaluationReport:
    return _metrics.EvaluationReport(
        accuracy=None,
        nmi=None,
        si_pred=None,
        si_truth=None,
        per_label_accuracy={},
        confusion_labels=[],
        confusion=np.zeros((0, 0), dtype=int),
        n_frames_evaluated=0,
    )


def _score(
    pred_frames, truth_frames, rows, pred_rows, truth_rows, with_accuracy
) -> _metrics.EvaluationReport:
    """Report over annotated frames; silhouettes over augmented rows.

    si_pred covers every row (the clustering's own geometry); si_truth only
    rows with an annotated reference label.
    """
    pairs = [(p, t) for p, t in zip(pred_frames, truth_frames) if t != FILL]
    if not pairs:
        report = _empty_report()
    else:
        pred, truth = zip(*pairs)
        report = _metrics.evaluate(pred, truth, with_accuracy=with_accuracy)
    if rows is not None and len(pred_rows) >= 2:
        report.si_pred = _metrics._try_silhouette(rows, pred_rows)
        annotated = [i for i, t in enumerate(truth_rows) if t != FILL]
        if len(annotated) >= 2:
            report.si_truth = _metrics._try_silhouette(
                rows[annotated], [truth_rows[i] for i in annotated]
            )
    return report


def run_pipeline(config: RunConfig, dataset: dict[str, LoadedDemo]) -> RunResult:
    """Fit on the non-init demonstrations and score the annotated ones."""
    mapping, sidecar = _load_mapping(config)
    transcripts: dict[str, Transcript] = {}
    for demo_id, item in dataset.items():
        if item.transcript is None:
            continue
        t = item.transcript
        if mapping is not None:
            t = _dictionary.apply_mapping(t, mapping, sidecar, demo_id=demo_id)
        transcripts[demo_id] = t

    for demo_id in config.init_demos:
        if demo_id not in dataset:
            raise ValueError(f"init demonstration {demo_id!r} not in the dataset")

    augmented: dict[str, _preprocess.AugmentedMatrix] = {}
    for demo_id, item in dataset.items():
        fm = _features(config, item.demo)
        augmented[demo_id] = _preprocess.augment(fm, config.window)

    fit_ids = [d for d in dataset if d not in set(config.init_demos)]
    if not fit_ids:
        raise ValueError("every demonstration is an init demonstration; nothing to fit")

    if config.init_method == "weak":
        init = _weak_init_model(config, dataset, transcripts, augmented)
    else:
        init = _kmeans_init_model(config, transcripts, augmented, fit_ids)

    fit_data = np.vstack([augmented[d].values for d in fit_ids])
    model = _gmm.em_fit(
        fit_data, init, tol=config.em_tol, max_iter=config.em_max_iter
    )

    predictions: dict[str, list[str]] = {}
    row_predictions: dict[str, list[str]] = {}
    for demo_id, item in dataset.items():
        X = augmented[demo_id]
        row_labels, _ = _gmm.predict_labels(model, X)
        row_predictions[demo_id] = row_labels
        predictions[demo_id] = _preprocess.rows_to_frames(
            row_labels, X, item.demo.n_frames
        )

    with_accuracy = model.has_labels()
    per_demo: dict[str, _metrics.EvaluationReport] = {}
    pooled_pred_frames: list[str] = []
    pooled_truth_frames: list[str] = []
    pooled_rows = []
    pooled_pred_rows: list[str] = []
    pooled_truth_rows: list[str] = []
    for demo_id in fit_ids:
        if demo_id not in transcripts:
            continue
        item = dataset[demo_id]
        X = augmented[demo_id]
        truth_frames = expand_labels(transcripts[demo_id], item.demo.n_frames, FILL)
        truth_rows = _preprocess.labels_at_rows(truth_frames, X, X.n_rows)
        per_demo[demo_id] = _score(
            predictions[demo_id],
            truth_frames,
            X.values,
            row_predictions[demo_id],
            truth_rows,
            with_accuracy,
        )
        pooled_pred_frames.extend(predictions[demo_id])
        pooled_truth_frames.extend(truth_frames)
        pooled_rows.append(X.values)
        pooled_pred_rows.extend(row_predictions[demo_id])
        pooled_truth_rows.extend(truth_rows)

    if pooled_rows:
        report = _score(
            pooled_pred_frames,
            pooled_truth_frames,
            np.vstack(pooled_rows),
            pooled_pred_rows,
            pooled_truth_rows,
            with_accuracy,
        )
    else:
        report = _empty_report()
    return RunResult(model, report, per_demo, predictions, row_predictions, augmented)


def _weak_init_model(config, dataset, transcripts, augmented) -> _gmm.GmmModel:
    labeled = []
    for demo_id in config.init_demos:
        if demo_id not in transcripts:
            raise ValueError(
                f"init demonstration {demo_id!r} has no transcript"
            )
        item = dataset[demo_id]
        X = augmented[demo_id]
        frame_labels = expand_labels(transcripts[demo_id], item.demo.n_frames, FILL)
        row_labels = _preprocess.labels_at_rows(frame_labels, X, X.n_rows)
        keep = [i for i, lab in enumerate(row_labels) if lab != FILL]
        if not keep:
            raise ValueError(
                f"init demonstration {demo_id!r} has no annotated rows"
            )
        labeled.append((X.values[keep], [row_labels[i] for i in keep]))
    return _gmm.weak_init(labeled)


def _kmeans_init_model(config, transcripts, augmented, fit_ids) -> _gmm.GmmModel:
    if config.k is not None:
        k = config.k
    else:
        labels = _dictionary.dictionary_labels(list(transcripts.values()))
        if not labels:
            raise ConfigError(
                "k-means init needs --k when no transcripts are available"
            )
        k = len(labels)
    fit_data = np.vstack([augmented[d].values for d in fit_ids])
    return _gmm.kmeans_init(fit_data, k, config.seed)


def _augmented_feature_names(config, dataset, X) -> list[str]:
    demo = next(iter(dataset.values())).demo
    mode = config.preprocessing
    if mode == "auto":
        mode = "kinematic" if demo.n_channels == 38 else "raw"
    if mode == "kinematic":
        _, kept = _preprocess.resolve_subset(config.feature_subset)
        base = [_preprocess.FULL_CHANNEL_NAMES[i] for i in kept]
    else:
        base = demo.channel_names or [f"c{i}" for i in range(X.base_channels)]
    return [f"{name}_t{w}" for w in range(X.window + 1) for name in base]


def _write_segment_outputs(config, dataset, result: RunResult) -> None:
    out = config.output_dir
    os.makedirs(os.path.join(out, "predictions"), exist_ok=True)
    os.makedirs(os.path.join(out, "transitions"), exist_ok=True)

    for demo_id in sorted(dataset):
        t = compress_labels(result.predictions[demo_id], FILL)
        with open(os.path.join(out, "predictions", f"{demo_id}.txt"), "w") as fh:
            fh.write(serialize_transcript(t))

    _gmm.save_model(result.model, os.path.join(out, "model.json"))

    with open(os.path.join(out, "report.json"), "w") as fh:
        fh.write(result.report.to_json())
    per_demo = {
        demo_id: json.loads(result.per_demo[demo_id].to_json())
        for demo_id in sorted(result.per_demo)
    }
    with open(os.path.join(out, "report_per_demo.json"), "w") as fh:
        fh.write(json.dumps(per_demo, indent=2) + "\n")

    for demo_id in sorted(dataset):
        X = result.augmented[demo_id]
        names = _augmented_feature_names(config, {demo_id: dataset[demo_id]}, X)
        points = _gmm.transition_points(result.row_predictions[demo_id], X)
        path = os.path.join(out, "transitions", f"{demo_id}.csv")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["row_index", "from_label", "to_label"] + names)
            for p in points:
                writer.writerow(
                    [p.row, p.from_label, p.to_label]
                    + [repr(float(v)) for v in p.vector]
                )


def cmd_segment(config: RunConfig) -> int:
    dataset = load_dataset(config)
    result = run_pipeline(config, dataset)
    _write_segment_outputs(config, dataset, result)
    print(f"segmented {len(dataset)} demonstration(s) into {config.output_dir}")
    _print_report_line(result.report)
    return EXIT_OK


def _print_report_line(report: _metrics.EvaluationReport) -> None:
    def fmt(v):
        return "n/a" if v is None else f"{v:.4f}"

    print(
        f"accuracy={fmt(report.accuracy)} nmi={fmt(report.nmi)} "
        f"si_pred={fmt(report.si_pred)} si_truth={fmt(report.si_truth)} "
        f"frames={report.n_frames_evaluated}"
    )


def _metric_row(report: _metrics.EvaluationReport) -> list[str]:
    return [
        "" if v is None else repr(float(v))
        for v in (report.accuracy, report.nmi, report.si_pred, report.si_truth)
    ]


def cmd_sweep_window(config: RunConfig, w_values: list[int]) -> int:
    dataset = load_dataset(config)
    rows = []
    for w in w_values:
        run_config = dataclasses.replace(config, window=w)
        result = run_pipeline(run_config, dataset)
        rows.append([str(w)] + _metric_row(result.report))
        print(f"window={w}: ", end="")
        _print_report_line(result.report)
    os.makedirs(config.output_dir, exist_ok=True)
    path = os.path.join(config.output_dir, "sweep_window.csv")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["window", "accuracy", "nmi", "si_pred", "si_truth"])
        writer.writerows(rows)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_ablate(config: RunConfig, subsets: list[str]) -> int:
    dataset = load_dataset(config)
    rows = []
    for subset in subsets:
        run_config = dataclasses.replace(config, feature_subset=subset)
        result = run_pipeline(run_config, dataset)
        rows.append([subset] + _metric_row(result.report))
        print(f"subset={subset}: ", end="")
        _print_report_line(result.report)
    os.makedirs(config.output_dir, exist_ok=True)
    path = os.path.join(config.output_dir, "ablate.csv")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["subset", "accuracy", "nmi", "si_pred", "si_truth"])
        writer.writerows(rows)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    if args.n_demos < 1:
        raise ConfigError("need at least one demonstration")
    if args.noise_sigma < 0:
        raise ConfigError("noise sigma must be >= 0")
    regimes = _synth.make_random_regimes(
        args.regimes, args.dim, args.seed, args.contraction
    )
    schedule = _synth.cycling_schedule(args.regimes, args.segments, args.segment_frames)
    noise_cov = (args.noise_sigma**2) * np.eye(args.dim)
    kin_dir = os.path.join(args.output_dir, "kinematics")
    tr_dir = os.path.join(args.output_dir, "transcripts")
    os.makedirs(kin_dir, exist_ok=True)
    os.makedirs(tr_dir, exist_ok=True)
    transcript = _synth.schedule_transcript(schedule)
    for i in range(args.n_demos):
        demo_id = f"synth{i:02d}"
        model = _synth.SwitchedLds(
            regimes=tuple(regimes),
            noise_cov=noise_cov,
            schedule=schedule,
            x0=np.zeros(args.dim),
            seed=args.seed + i,
            sample_rate_hz=args.rate,
        )
        demo, _ = _synth.generate(model, id=demo_id)
        with open(os.path.join(kin_dir, f"{demo_id}.csv"), "w") as fh:
            fh.write(serialize_kinematics(demo, "generic_csv"))
        with open(os.path.join(tr_dir, f"{demo_id}.txt"), "w") as fh:
            fh.write(serialize_transcript(transcript))
    print(f"wrote {args.n_demos} demonstration(s) into {args.output_dir}")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; the contract here says 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}")


def _str_list(text: str) -> list[str]:
    return [tok.strip() for tok in text.split(",") if tok.strip()]


def _add_run_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file; flags override its fields")
    parser.add_argument("--data-dir", dest="data_dir", help="dataset directory")
    parser.add_argument("--output-dir", dest="output_dir", help="where results go")
    parser.add_argument(
        "--layout",
        choices=["auto", "jigsaws", "csv"],
        help="kinematics file layout (default: auto by extension)",
    )
    parser.add_argument(
        "--sample-rate",
        dest="sample_rate_hz",
        type=float,
        help="recording rate in Hz (CSV input; robot files default to 30)",
    )
    parser.add_argument(
        "--preprocessing",
        choices=["auto", "kinematic", "raw"],
        help="kinematic pipeline, raw passthrough, or auto by channel count",
    )
    parser.add_argument("--fc", dest="fc_hz", type=float, help="low-pass cutoff in Hz")
    parser.add_argument(
        "--subsample", dest="subsample_factor", type=int, help="keep every n-th frame"
    )
    parser.add_argument("--window", type=int, help="sliding-window length W")
    parser.add_argument(
        "--subset",
        dest="feature_subset",
        help="feature subset: all, no-pose, no-velocity, no-distance, or 1-based indices",
    )
    parser.add_argument("--em-tol", dest="em_tol", type=float, help="EM stopping tolerance")
    parser.add_argument(
        "--em-max-iter", dest="em_max_iter", type=int, help="EM iteration cap"
    )
    parser.add_argument("--seed", type=int, help="random seed")
    parser.add_argument(
        "--init",
        dest="init_method",
        choices=["weak", "kmeans"],
        help="mixture initialization",
    )
    parser.add_argument(
        "--init-demos",
        dest="init_demos",
        help="comma-separated ids of the annotated demonstrations used for weak init",
    )
    parser.add_argument(
        "--k", type=int, help="component count for k-means init (default: label count)"
    )
    parser.add_argument(
        "--mapping",
        help="label remapping file, or 'builtin' for the shipped suturing rules",
    )
    parser.add_argument("--sidecar", help="JSON sidecar with split boundaries/overrides")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kinseg", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("segment", help="fit a mixture and segment a dataset")
    _add_run_arguments(p)
    p.set_defaults(run=lambda args: cmd_segment(resolve_config(args)))

    p = sub.add_parser("sweep-window", help="repeat a run across window lengths")
    _add_run_arguments(p)
    p.add_argument(
        "--w-values",
        dest="w_values",
        type=_int_list,
        required=True,
        help="comma-separated window lengths",
    )
    p.set_defaults(
        run=lambda args: cmd_sweep_window(resolve_config(args), args.w_values)
    )

    p = sub.add_parser("ablate", help="repeat a run across feature subsets")
    _add_run_arguments(p)
    p.add_argument(
        "--subsets",
        type=_str_list,
        required=True,
        help="comma-separated subset names",
    )
    p.set_defaults(run=lambda args: cmd_ablate(resolve_config(args), args.subsets))

    p = sub.add_parser("synth", help="generate a labeled synthetic dataset")
    p.add_argument("--output-dir", dest="output_dir", required=True)
    p.add_argument("--n-demos", dest="n_demos", type=int, default=2)
    p.add_argument("--regimes", type=int, default=4, help="number of dynamics regimes")
    p.add_argument("--dim", type=int, default=6, help="state dimension")
    p.add_argument("--contraction", type=float, default=_synth.DEFAULT_CONTRACTION)
    p.add_argument(
        "--noise-sigma",
        dest="noise_sigma",
        type=float,
        default=0.05,
        help="process-noise standard deviation (isotropic)",
    )
    p.add_argument("--segments", type=int, default=12, help="segments per demonstration")
    p.add_argument(
        "--segment-frames",
        dest="segment_frames",
        type=int,
        default=150,
        help="frames per segment",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rate", type=float, default=30.0, help="nominal sample rate in Hz")
    p.set_defaults(run=cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.run(args)
    except ConfigError as exc:
        print(f"kinseg: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, OSError) as exc:
        print(f"kinseg: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (_gmm.NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"kinseg: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"kinseg: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
