"""Command-line surface: fit, predict, cv, simulate, bench, featurize, diagnose.

Exit codes: 0 success, 2 validation error, 3 convergence error, 4 I/O error.
Every stochastic command takes an explicit --seed; --threads (default from
SFDA_THREADS, else 1) bounds the worker pool for replicated work, and results
are independent of the thread count.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import os
import sys

import numpy as np

from . import io as sfda_io
from .baselines import nearest_centroid_predict, ridge_lda_predict
from .classify import classify_batch
from .diagnostics import (build_theory, consistency_experiment,
                          gaussian_block_generator)
from .errors import ConvergenceError, SfdaError, ValidationError
from .estimators import summarize
from .features import WaveletFamily, featurize
from .model import FitParams, Variant, fit
from .model_selection import (DEFAULT_KAPPA_FACTORS, DEFAULT_LAMBDAS,
                              DEFAULT_TAUS, TuningGrid, cross_validate)
from .simulate import SimModel, SimScenario, misclassification_rate, simulate
from .solver import PenaltySpec

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CONVERGENCE = 3
EXIT_IO = 4


def _check_distinct_paths(inputs, outputs):
    resolved_in = {os.path.abspath(p) for p in inputs if p}
    for out in outputs:
        if out and os.path.abspath(out) in resolved_in:
            raise ValidationError(f"output path {out} would overwrite an input")


def _float_list(text: str):
    return tuple(float(tok) for tok in text.split(",") if tok.strip())


def _int_list(text: str):
    return tuple(int(tok) for tok in text.split(",") if tok.strip())


def _variant(name: str) -> Variant:
    return Variant(name)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sfda",
        description="Sparse Fisher discriminant analysis with thresholded "
                    "linear constraints")
    parser.add_argument("--threads", type=int,
                        default=int(os.environ.get("SFDA_THREADS", "1")),
                        help="worker pool cap for replicated work")
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit a model from a labeled CSV")
    p_fit.add_argument("--train", required=True)
    p_fit.add_argument("--tau", type=float, required=True)
    p_fit.add_argument("--lam", type=float, required=True)
    p_fit.add_argument("--kappa", type=float, default=0.0)
    p_fit.add_argument("--kappa-factor", type=float, default=None)
    p_fit.add_argument("--variant", type=_variant, default=Variant.THRESHOLDED,
                       choices=list(Variant))
    p_fit.add_argument("--out", required=True)

    p_pred = sub.add_parser("predict", help="classify rows of a CSV")
    p_pred.add_argument("--model", required=True)
    p_pred.add_argument("--input", required=True)
    p_pred.add_argument("--out", required=True)

    p_cv = sub.add_parser("cv", help="cross-validate the tuning grids")
    p_cv.add_argument("--train", required=True)
    p_cv.add_argument("--seed", type=int, required=True)
    p_cv.add_argument("--folds", type=int, default=5)
    p_cv.add_argument("--taus", type=_float_list, default=DEFAULT_TAUS)
    p_cv.add_argument("--lambdas", type=_float_list, default=DEFAULT_LAMBDAS)
    p_cv.add_argument("--kappa-factors", type=_float_list,
                      default=DEFAULT_KAPPA_FACTORS)
    p_cv.add_argument("--variant", type=_variant, default=Variant.THRESHOLDED,
                      choices=list(Variant))
    p_cv.add_argument("--table-out", required=True)
    p_cv.add_argument("--params-out", default=None)

    p_sim = sub.add_parser("simulate", help="generate a synthetic dataset")
    p_sim.add_argument("--model", type=SimModel, required=True,
                       choices=list(SimModel))
    p_sim.add_argument("--sigma2", type=float, required=True)
    p_sim.add_argument("--p", type=int, default=500)
    p_sim.add_argument("--n-total", type=int, default=1500)
    p_sim.add_argument("--n-train", type=int, default=150)
    p_sim.add_argument("--seed", type=int, required=True)
    p_sim.add_argument("--mean-seed", type=int, default=None)
    p_sim.add_argument("--out-prefix", required=True)

    p_bench = sub.add_parser("bench", help="replicated benchmark table")
    p_bench.add_argument("--model", type=SimModel, required=True,
                         choices=list(SimModel))
    p_bench.add_argument("--sigma2", type=float, action="append", required=True,
                         help="may be given multiple times, one row each")
    p_bench.add_argument("--reps", type=int, default=10)
    p_bench.add_argument("--seed", type=int, required=True)
    p_bench.add_argument("--p", type=int, default=500)
    p_bench.add_argument("--n-total", type=int, default=1500)
    p_bench.add_argument("--n-train", type=int, default=150)
    p_bench.add_argument("--folds", type=int, default=5)
    p_bench.add_argument("--out-prefix", required=True)

    p_feat = sub.add_parser("featurize", help="FFT + wavelet features")
    p_feat.add_argument("--input", required=True)
    p_feat.add_argument("--channels", type=int, required=True)
    p_feat.add_argument("--timepoints", type=int, required=True)
    p_feat.add_argument("--coeffs", type=int, default=64)
    p_feat.add_argument("--family", type=WaveletFamily,
                        default=WaveletFamily.HAAR, choices=list(WaveletFamily))
    p_feat.add_argument("--out", required=True)

    p_diag = sub.add_parser("diagnose", help="consistency trends and identity checks")
    p_diag.add_argument("--p", type=int, default=100)
    p_diag.add_argument("--n-list", type=_int_list, default=(100, 400, 1600))
    p_diag.add_argument("--n-seeds", type=int, default=20)
    p_diag.add_argument("--seed", type=int, required=True)
    p_diag.add_argument("--out", required=True)

    return parser


def _cmd_fit(args, written):
    _check_distinct_paths([args.train], [args.out])
    data = sfda_io.read_labeled_csv(args.train)
    params = FitParams(penalty=PenaltySpec(args.tau, args.lam),
                       kappa=args.kappa, kappa_factor=args.kappa_factor,
                       variant=args.variant)
    model = fit(data, params)
    sfda_io.save_model(args.out, model)
    written.append(args.out)
    print(f"fitted {model.components.shape[0]} components on "
          f"{data.n} x {data.p} -> {args.out}")


def _load_prediction_matrix(path: str, p: int) -> np.ndarray:
    with open(path) as handle:
        first = handle.readline()
        if not first.strip():
            raise ValidationError(f"{path}: empty file")
        skip = 1 if sfda_io._has_header(first) else 0
    raw = np.loadtxt(path, delimiter=",", skiprows=skip, ndmin=2)
    if raw.shape[1] == p + 1:
        return raw[:, 1:]   # labeled contract: drop the label column
    if raw.shape[1] == p:
        return raw
    raise ValidationError(f"{path}: expected {p} feature columns "
                          f"(optionally preceded by a label), got {raw.shape[1]}")


def _cmd_predict(args, written):
    _check_distinct_paths([args.model, args.input], [args.out])
    model = sfda_io.load_model(args.model)
    points = _load_prediction_matrix(args.input, model.p)
    labels = classify_batch(model, points)
    sfda_io.write_predictions_csv(args.out, labels)
    written.append(args.out)
    print(f"wrote {labels.size} predictions -> {args.out}")


def _cmd_cv(args, written):
    _check_distinct_paths([args.train], [args.table_out, args.params_out])
    data = sfda_io.read_labeled_csv(args.train)
    grid = TuningGrid(taus=args.taus, lambdas=args.lambdas,
                      kappa_factors=args.kappa_factors, folds=args.folds,
                      seed=args.seed)
    params, table = cross_validate(data, grid, variant=args.variant)
    sfda_io.write_cv_table_csv(args.table_out, table)
    written.append(args.table_out)
    chosen = {"tau": params.penalty.tau, "lambda": params.penalty.lam,
              "kappa_factor": params.kappa_factor,
              "variant": params.variant.value}
    if args.params_out:
        sfda_io.atomic_write_text(args.params_out, json.dumps(chosen) + "\n")
        written.append(args.params_out)
    print("selected " + json.dumps(chosen))


def _cmd_simulate(args, written):
    scn = SimScenario(model_id=args.model, sigma2=args.sigma2, p=args.p,
                      n_total=args.n_total, n_train=args.n_train,
                      seed=args.seed, mean_seed=args.mean_seed)
    train, test, truth = simulate(scn)
    paths = {
        "train": f"{args.out_prefix}_train.csv",
        "test": f"{args.out_prefix}_test.csv",
        "truth": f"{args.out_prefix}_truth.json",
    }
    sfda_io.write_labeled_csv(paths["train"], train)
    written.append(paths["train"])
    sfda_io.write_labeled_csv(paths["test"], test)
    written.append(paths["test"])
    sidecar = {
        "scenario": {"model": scn.model_id.value, "sigma2": scn.sigma2,
                     "p": scn.p, "n_total": scn.n_total,
                     "n_train": scn.n_train, "seed": scn.seed,
                     "mean_seed": scn.effective_mean_seed},
        "signal_coords": truth.signal_coords.tolist(),
        "common_cov": truth.common_cov,
        "notes": truth.notes,
        "true_means": truth.true_means.tolist(),
    }
    sfda_io.atomic_write_text(paths["truth"], json.dumps(sidecar) + "\n")
    written.append(paths["truth"])
    print(f"wrote {paths['train']}, {paths['test']}, {paths['truth']}")


def bench_replicate(model_id: SimModel, sigma2: float, rep: int, seed: int,
                    p: int, n_total: int, n_train: int, folds: int) -> dict:
    """One benchmark replicate: simulate, tune both variants, fit, score."""
    ss = np.random.SeedSequence(entropy=(seed, rep))
    scn_seed, fold_seed = (int(s) for s in ss.generate_state(2))
    scn = SimScenario(model_id=model_id, sigma2=sigma2, p=p, n_total=n_total,
                      n_train=n_train, seed=scn_seed)
    train, test, _ = simulate(scn)
    results = {}
    for key, variant in (("sfda_threshold", Variant.THRESHOLDED),
                         ("sfda_unthresholded", Variant.UNTHRESHOLDED)):
        grid = TuningGrid(folds=folds, seed=fold_seed)
        params, _ = cross_validate(train, grid, variant=variant)
        model = fit(train, params)
        pred = classify_batch(model, test.observations)
        results[key] = misclassification_rate(pred, test.labels)
    summaries = summarize(train)
    results["nearest_centroid"] = misclassification_rate(
        nearest_centroid_predict(summaries, test.observations), test.labels)
    results["ridge_lda"] = misclassification_rate(
        ridge_lda_predict(summaries, test.observations), test.labels)
    return results


BENCH_COLUMNS = ("sfda_threshold", "sfda_unthresholded", "nearest_centroid",
                 "ridge_lda")


def run_bench(model_id: SimModel, sigma2_list, reps: int, seed: int,
              threads: int = 1, p: int = 500, n_total: int = 1500,
              n_train: int = 150, folds: int = 5):
    """Benchmark rows: per sigma2, mean and sd (percent) per method."""
    rows = []
    for sigma2 in sigma2_list:
        tasks = [(model_id, sigma2, rep, seed, p, n_total, n_train, folds)
                 for rep in range(reps)]
        if threads > 1:
            with concurrent.futures.ProcessPoolExecutor(
                    max_workers=min(threads, reps)) as pool:
                reps_out = list(pool.map(_bench_star, tasks))
        else:
            reps_out = [_bench_star(task) for task in tasks]
        row = {"scenario": model_id.value, "sigma2": sigma2, "reps": reps}
        for col in BENCH_COLUMNS:
            vals = 100.0 * np.array([r[col] for r in reps_out])
            row[f"{col}_mean"] = float(vals.mean())
            row[f"{col}_sd"] = float(vals.std(ddof=1)) if reps > 1 else 0.0
        rows.append(row)
    return rows


def _bench_star(task):
    return bench_replicate(*task)


def _bench_markdown(rows) -> str:
    header = ("| scenario | sigma2 | SFDA-threshold | SFDA-unthresholded "
              "| nearest-centroid | ridge-LDA |")
    sep = "|---|---|---|---|---|---|"
    lines = [header, sep]
    for row in rows:
        cells = [row["scenario"], f"{row['sigma2']:g}"]
        for col in BENCH_COLUMNS:
            cells.append(f"{row[f'{col}_mean']:.2f} ({row[f'{col}_sd']:.2f})")
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def _cmd_bench(args, written):
    rows = run_bench(args.model, args.sigma2, args.reps, args.seed,
                     threads=args.threads, p=args.p, n_total=args.n_total,
                     n_train=args.n_train, folds=args.folds)
    csv_path = f"{args.out_prefix}.csv"
    md_path = f"{args.out_prefix}.md"
    cols = ["scenario", "sigma2", "reps"]
    for col in BENCH_COLUMNS:
        cols += [f"{col}_mean", f"{col}_sd"]
    lines = [",".join(cols)]
    for row in rows:
        lines.append(",".join(str(row[c]) for c in cols))
    sfda_io.atomic_write_text(csv_path, "\n".join(lines) + "\n")
    written.append(csv_path)
    markdown = _bench_markdown(rows)
    sfda_io.atomic_write_text(md_path, markdown)
    written.append(md_path)
    print(markdown, end="")


def _cmd_featurize(args, written):
    _check_distinct_paths([args.input], [args.out])
    records, labels = sfda_io.read_records_csv(args.input, args.channels,
                                               args.timepoints)
    feats = np.vstack([featurize(rec, args.coeffs, args.family)
                       for rec in records])
    sfda_io.write_features_csv(args.out, labels, feats)
    written.append(args.out)
    print(f"wrote {feats.shape[0]} x {feats.shape[1]} features -> {args.out}")


def _cmd_diagnose(args, written):
    generator, sigma, means = gaussian_block_generator(p=args.p,
                                                       mean_seed=args.seed)
    rows = consistency_experiment(generator, sigma, means,
                                  n_list=args.n_list,
                                  seeds=range(args.n_seeds))
    sfda_io.write_trend_csv(args.out, rows)
    written.append(args.out)
    config_path = args.out + ".config.json"
    sfda_io.atomic_write_text(config_path, json.dumps({
        "p": args.p, "n_list": list(args.n_list), "n_seeds": args.n_seeds,
        "seed": args.seed}) + "\n")
    written.append(config_path)
    for row in rows:
        print(f"n={row['n']:6d}  median |a1_hat - a1| = {row['median_alpha_err']:.4f}  "
              f"median proj dist = {row['median_proj_err']:.4f}  "
              f"s_n = {row['s_n']:.4f}  failures = {row['failures']}")
    ctx = build_theory(sigma, means)
    checks = []
    for i in range(ctx.n_classes):
        for j in range(i + 1, ctx.n_classes):
            delta = ctx.means[j] - ctx.means[i]
            lhs = np.linalg.solve(sigma, delta)
            rhs = ctx.D @ delta
            checks.append(np.linalg.norm(lhs - rhs) / np.linalg.norm(lhs))
    parallel_ok = max(checks) <= 1e-8
    ortho = np.abs(ctx.gammas @ ctx.gammas.T - np.eye(ctx.gammas.shape[0])).max()
    print(f"metric/inverse-covariance parallelism: "
          f"{'PASS' if parallel_ok else 'FAIL'} (max rel diff {max(checks):.2e})")
    print(f"whitened component orthogonality: "
          f"{'PASS' if ortho <= 1e-8 else 'FAIL'} (max dev {ortho:.2e})")
    trend_ok = all(a["median_alpha_err"] > b["median_alpha_err"]
                   for a, b in zip(rows, rows[1:]))
    print(f"component error decreasing in n: {'PASS' if trend_ok else 'FAIL'}")


_COMMANDS = {
    "fit": _cmd_fit,
    "predict": _cmd_predict,
    "cv": _cmd_cv,
    "simulate": _cmd_simulate,
    "bench": _cmd_bench,
    "featurize": _cmd_featurize,
    "diagnose": _cmd_diagnose,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    written: list[str] = []
    try:
        _COMMANDS[args.command](args, written)
        return EXIT_OK
    except (SfdaError, OSError) as exc:
        for path in written:
            try:
                os.remove(path)
            except OSError:
                pass
        if isinstance(exc, ConvergenceError):
            code, status = "convergence_error", EXIT_CONVERGENCE
        elif isinstance(exc, SfdaError):
            code, status = "validation_error", EXIT_VALIDATION
        else:
            code, status = "io_error", EXIT_IO
        print(f"{code}: {exc}", file=sys.stderr)
        return status


if __name__ == "__main__":
    sys.exit(main())
