"""Command-line workflow: qc, synth, train, eval, compare, pipeline.

Exit codes are a stable contract: 0 success, 64 usage/configuration error,
2 data or runtime error. Every command is deterministic given (config, seed):
with a fixed effective config the output directory is byte-identical across
reruns and thread counts.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import jsonio
from .classifiers import load_model, save_model, train_all
from .config import RunConfig
from .dataset import (CLASS_DIRS, ClassLabel, build_manifest, default_config,
                      flatten, load_instances, split, synth_generate,
                      write_instance_csv)
from .dataset.io import write_matrix_csv
from .dataset.model import FeatureMatrix, TimeSeriesInstance
from .errors import ConfigError, HydetError
from .evaluation import EvalReport, evaluate
from .quality import (apply_imputer, apply_normalizer, fit_boxplots, fit_imputer,
                      fit_normalizer, quality_report, render_boxplot_svg,
                      treat_outliers, BoxplotStats, ImputationModel,
                      NormalizationModel)
from .stats import compare_models

EXIT_OK = 0
EXIT_DATA = 2
EXIT_USAGE = 64

MODEL_DISPLAY = {"dt": "Decision Tree", "knn": "k-NN", "nb": "Naive Bayes"}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 64 instead of argparse's 2
        raise _UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hydet",
                     description="Hydrate-detection workflow for well telemetry")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", metavar="JSON", default=None,
                       help="run configuration file")
        p.add_argument("--seed", type=int, default=None, help="override seed")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--models", default=None,
                       help="comma list from dt,knn,nb")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads for batch scoring")
        p.add_argument("--data", default=None,
                       help="dataset root (folder-per-class corpus)")
        p.add_argument("--variables", default=None,
                       help="comma list of channels to use")

    for name, help_txt in (
            ("qc", "audit data quality and write quality_report.json + boxplots"),
            ("synth", "generate a synthetic corpus on disk"),
            ("train", "preprocess, split and fit the classifiers"),
            ("eval", "evaluate previously trained models"),
            ("compare", "pairwise KS/MWU comparison of model F1 vectors"),
            ("pipeline", "end-to-end: qc, preprocess, train, eval, compare")):
        p = sub.add_parser(name, help=help_txt)
        common(p)
        if name == "qc":
            p.add_argument("--report", metavar="JSON", default=None,
                           help="write the quality report to this path instead "
                                "of <out>/quality_report.json")
            p.add_argument("--points", metavar="CSV", default=None,
                           help="also export the labeled flattened rows")
        if name == "compare":
            p.add_argument("--from-f1", metavar="JSON", default=None,
                           help="file mapping model name -> list of F1 scores")
            p.add_argument("--eval-reports", nargs="*", default=None,
                           help="eval_*.json files to compare")
    return parser


def _load_run_config(args) -> RunConfig:
    if args.config is not None:
        config = RunConfig.from_json_dict(jsonio.load(args.config))
    else:
        config = RunConfig()
    updates: dict = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.out is not None:
        updates["out_dir"] = args.out
    if args.models is not None:
        updates["models"] = tuple(m.strip() for m in args.models.split(",") if m.strip())
    if args.threads is not None:
        updates["threads"] = args.threads
    if args.data is not None:
        updates["data_root"] = args.data
        updates["synth"] = None
    if args.variables is not None:
        updates["variables"] = tuple(v.strip() for v in args.variables.split(",")
                                     if v.strip())
    if updates:
        from dataclasses import replace
        config = replace(config, **updates)
    return config


def _load_corpus(config: RunConfig) -> list[TimeSeriesInstance]:
    config.require_data()
    if config.data_root is not None:
        manifest = build_manifest(config.data_root)
        if not manifest.entries:
            return []
        return load_instances(config.data_root, manifest)
    synth = config.synth or default_config()
    return synth_generate(synth, config.seed)


def _echo_config(config: RunConfig, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    jsonio.dump(config.to_json_dict(), out / "config.json")


def _shared_channels(instances: list[TimeSeriesInstance]) -> tuple[str, ...]:
    """Channels present in every instance, in first-instance order."""
    first = instances[0].variable_names
    return tuple(v for v in first
                 if all(v in inst.channels for inst in instances))


def _write_quality(config: RunConfig, instances, out: Path,
                   variables: tuple[str, ...],
                   report_path: Path | None = None) -> None:
    matrix = flatten(instances, variables)
    report = quality_report(instances, matrix,
                            tukey_k=config.preprocess.tukey_multiplier,
                            quartile_method=config.preprocess.quartile_method)
    jsonio.dump(report.to_json_dict(), report_path or out / "quality_report.json")
    for j, name in enumerate(matrix.column_names):
        svg = render_boxplot_svg(matrix.values[:, j], name,
                                 tukey_k=config.preprocess.tukey_multiplier,
                                 quartile_method=config.preprocess.quartile_method)
        safe = name.replace("/", "_")
        (out / f"boxplot_{safe}.svg").write_text(svg, encoding="utf-8", newline="\n")


def cmd_qc(config: RunConfig, args) -> int:
    out = Path(config.out_dir)
    _echo_config(config, out)
    instances = _load_corpus(config)
    if not instances:
        raise HydetError("dataset is empty: nothing to audit")
    # standalone qc audits every channel in the corpus unless restricted,
    # so 8-channel corpora report all-channel aggregates by default
    variables = config.variables if args.variables is not None \
        else (_shared_channels(instances) or config.variables)
    report_path = Path(args.report) if args.report else None
    _write_quality(config, instances, out, variables, report_path)
    if args.points:
        write_matrix_csv(flatten(instances, variables), args.points)
    print(f"quality report written to "
          f"{report_path or out / 'quality_report.json'}")
    return EXIT_OK


def cmd_synth(config: RunConfig) -> int:
    out = Path(config.out_dir)
    _echo_config(config, out)
    synth = config.synth or default_config()
    instances = synth_generate(synth, config.seed)
    dir_of = {label: name for name, label in CLASS_DIRS.items()}
    for label in ClassLabel:
        (out / dir_of[label]).mkdir(parents=True, exist_ok=True)
    for inst in instances:
        stem = inst.instance_id.split("/")[-1]
        write_instance_csv(inst, out / dir_of[inst.label] / f"{stem}.csv")
    manifest = build_manifest(out)
    jsonio.dump(manifest.to_json_dict(), out / "manifest.json")
    print(f"wrote {len(instances)} instances under {out}")
    return EXIT_OK


def _preprocess_fit(config: RunConfig, train: FeatureMatrix):
    imputer = fit_imputer(train)
    train_imp = apply_imputer(imputer, train)
    fences = fit_boxplots(train_imp, config.preprocess.tukey_multiplier,
                          config.preprocess.quartile_method)
    train_w = treat_outliers(train_imp, fences)
    normalizer = fit_normalizer(train_w, config.preprocess.normalization)
    return imputer, fences, normalizer, apply_normalizer(normalizer, train_w)


def _preprocess_apply(imputer, fences, normalizer,
                      matrix: FeatureMatrix) -> FeatureMatrix:
    return apply_normalizer(normalizer,
                            treat_outliers(apply_imputer(imputer, matrix), fences))


def _preprocess_to_json(imputer, fences, normalizer) -> dict:
    return {
        "format": "hydet-preprocess", "version": 1,
        "imputer": imputer.to_json_dict(),
        "fences": [{"q1": s.q1, "median": s.median, "q3": s.q3, "iqr": s.iqr,
                    "lower_fence": s.lower_fence, "upper_fence": s.upper_fence}
                   for s in fences],
        "normalizer": normalizer.to_json_dict(),
    }


def _preprocess_from_json(data: dict):
    if data.get("format") != "hydet-preprocess" or data.get("version") != 1:
        raise HydetError("unsupported preprocess model file")
    imp = ImputationModel(column_names=tuple(data["imputer"]["columns"]),
                          means=tuple(data["imputer"]["means"]))
    fences = tuple(BoxplotStats(q1=f["q1"], median=f["median"], q3=f["q3"],
                                iqr=f["iqr"], lower_fence=f["lower_fence"],
                                upper_fence=f["upper_fence"],
                                outlier_row_indices=())
                   for f in data["fences"])
    norm = NormalizationModel(column_names=tuple(data["normalizer"]["columns"]),
                              center=tuple(data["normalizer"]["center"]),
                              scale=tuple(data["normalizer"]["scale"]),
                              mode=data["normalizer"]["mode"])
    return imp, fences, norm


def _split_matrices(config: RunConfig, instances):
    matrix = flatten(instances, config.variables)
    return split(matrix, config.split)


def cmd_train(config: RunConfig) -> int:
    out = Path(config.out_dir)
    _echo_config(config, out)
    instances = _load_corpus(config)
    train_m, _ = _split_matrices(config, instances)
    imputer, fences, normalizer, train_ready = _preprocess_fit(config, train_m)
    (out / "models").mkdir(parents=True, exist_ok=True)
    jsonio.dump(_preprocess_to_json(imputer, fences, normalizer),
                out / "models" / "preprocess.json")
    result = train_all(train_ready, config.classifiers, config.models)
    for name, model in result.models.items():
        save_model(model, out / "models" / f"{name}.json")
        print(f"trained {MODEL_DISPLAY[name]} in {result.seconds[name]:.3f}s")
    return EXIT_OK


def _eval_reports(config: RunConfig, models: dict, test_ready) -> dict[str, EvalReport]:
    reports = {}
    for name, model in models.items():
        reports[name] = evaluate(model, test_ready, MODEL_DISPLAY[name],
                                 threads=config.threads)
    return reports


def _write_eval_outputs(reports: dict[str, EvalReport], out: Path) -> None:
    for name, report in reports.items():
        jsonio.dump(report.to_json_dict(), out / f"eval_{name}.json")
        (out / f"eval_{name}_confusion.csv").write_text(
            report.matrix.to_csv(), encoding="utf-8", newline="\n")


def cmd_eval(config: RunConfig) -> int:
    out = Path(config.out_dir)
    models_dir = out / "models"
    if not models_dir.is_dir():
        raise HydetError(f"no models directory at {models_dir}; run train first")
    _echo_config(config, out)
    instances = _load_corpus(config)
    _, test_m = _split_matrices(config, instances)
    imputer, fences, normalizer = _preprocess_from_json(
        jsonio.load(models_dir / "preprocess.json"))
    test_ready = _preprocess_apply(imputer, fences, normalizer, test_m)
    models = {name: load_model(models_dir / f"{name}.json")
              for name in config.models if (models_dir / f"{name}.json").exists()}
    if not models:
        raise HydetError(f"no model files found under {models_dir}")
    reports = _eval_reports(config, models, test_ready)
    _write_eval_outputs(reports, out)
    _print_eval_summary(reports)
    return EXIT_OK


def _comparison_outputs(f1_vectors, config: RunConfig, out: Path) -> None:
    table = compare_models(f1_vectors, config.stats)
    jsonio.dump(table.to_json_dict(), out / "comparison.json")
    (out / "comparison.csv").write_text(table.to_csv(), encoding="utf-8",
                                        newline="\n")
    _print_comparison(table)


def cmd_compare(config: RunConfig, args) -> int:
    out = Path(config.out_dir)
    _echo_config(config, out)
    if args.from_f1:
        raw = jsonio.load(args.from_f1)
        f1_vectors = {str(k): [float(x) for x in v] for k, v in raw.items()}
    else:
        paths = args.eval_reports
        if not paths:
            paths = sorted(str(p) for p in out.glob("eval_*.json"))
        f1_vectors = {}
        for path in paths:
            data = jsonio.load(path)
            per_class = data["per_class"]
            f1_vectors[data["model"]] = [per_class[c]["f1"] for c in data["classes"]]
    if len(f1_vectors) < 2:
        raise _UsageError(f"comparison needs at least 2 models, got {len(f1_vectors)}")
    _comparison_outputs(f1_vectors, config, out)
    return EXIT_OK


def cmd_pipeline(config: RunConfig) -> int:
    out = Path(config.out_dir)
    stage = "configure"
    try:
        _echo_config(config, out)
        (out / "INCOMPLETE").unlink(missing_ok=True)
        stage = "ingest"
        instances = _load_corpus(config)
        if not instances:
            raise HydetError("dataset is empty")
        stage = "quality-audit"
        _write_quality(config, instances, out, config.variables)
        stage = "split"
        train_m, test_m = _split_matrices(config, instances)
        stage = "preprocess"
        imputer, fences, normalizer, train_ready = _preprocess_fit(config, train_m)
        test_ready = _preprocess_apply(imputer, fences, normalizer, test_m)
        (out / "models").mkdir(parents=True, exist_ok=True)
        jsonio.dump(_preprocess_to_json(imputer, fences, normalizer),
                    out / "models" / "preprocess.json")
        stage = "train"
        result = train_all(train_ready, config.classifiers, config.models)
        for name, model in result.models.items():
            save_model(model, out / "models" / f"{name}.json")
            print(f"trained {MODEL_DISPLAY[name]} in {result.seconds[name]:.3f}s")
        stage = "evaluate"
        reports = _eval_reports(config, result.models, test_ready)
        _write_eval_outputs(reports, out)
        _print_eval_summary(reports)
        stage = "compare"
        if len(reports) >= 2:
            f1_vectors = {MODEL_DISPLAY[name]: list(r.f1_vector())
                          for name, r in reports.items()}
            _comparison_outputs(f1_vectors, config, out)
        else:
            print("comparison skipped: needs at least 2 models")
        return EXIT_OK
    except (HydetError, OSError, ValueError) as exc:
        if out.is_dir():  # flag partial outputs for reproducibility audits
            (out / "INCOMPLETE").write_text(f"pipeline aborted in stage {stage}\n",
                                            encoding="utf-8")
        raise HydetError(f"stage {stage} failed: {exc}") from exc


def _print_eval_summary(reports: dict[str, EvalReport]) -> None:
    classes = tuple(ClassLabel)
    head = "model".ljust(14) + "accuracy".rjust(10)
    for c in classes:
        head += f"F1({c.display_name})".rjust(10 + len(c.display_name))
    print(head)
    for report in reports.values():
        line = report.model_name.ljust(14) + f"{report.accuracy:10.4f}"
        for c in classes:
            line += f"{report.per_class[c].f1:{10 + len(c.display_name)}.2f}"
        print(line)


def _print_comparison(table) -> None:
    print("comparison".ljust(30) + "KS".rjust(6) + "p".rjust(8)
          + "U".rjust(8) + "p".rjust(8) + "  significant")
    for pc in table.pairs:
        print(pc.name.ljust(30)
              + f"{pc.ks.statistic:6.2f}{pc.ks.p_value:8.3f}"
              + f"{pc.mwu.u_statistic:8.1f}{pc.mwu.p_value:8.3f}"
              + ("  yes" if pc.significant else "  no"))


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = _load_run_config(args)
        if args.command == "qc":
            return cmd_qc(config, args)
        if args.command == "synth":
            return cmd_synth(config)
        if args.command == "train":
            return cmd_train(config)
        if args.command == "eval":
            return cmd_eval(config)
        if args.command == "compare":
            return cmd_compare(config, args)
        if args.command == "pipeline":
            return cmd_pipeline(config)
        raise _UsageError(f"unknown command {args.command!r}")
    except (_UsageError, ConfigError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (HydetError, FileNotFoundError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
