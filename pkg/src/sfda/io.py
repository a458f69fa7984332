"""CSV contracts and model serialization.

Labeled-data CSV: first column integer label, remaining columns numeric
features; an optional header row is detected by a non-numeric first token.
Models are stored as versioned JSON with small arrays plain and the two
p x p blocks base64-encoded (exact float64 round trip either way).
"""

from __future__ import annotations

import base64
import json
import os

import numpy as np

from .errors import ValidationError
from .estimators import ClassSummaries, LabeledDataset
from .features import MultichannelRecord
from .model import DiscriminantModel, FitParams, Variant
from .solver import InitStrategy, PenaltySpec, SolverConfig

MODEL_FORMAT = "sfda-model"
MODEL_VERSION = 1


def atomic_write_text(path: str, text: str):
    """Write via a temporary file and rename, so readers never see partial output."""
    tmp = f"{path}.tmp-{os.getpid()}"
    with open(tmp, "w") as handle:
        handle.write(text)
    os.replace(tmp, path)


def _format_float(x: float) -> str:
    return repr(float(x))


def write_labeled_csv(path: str, data: LabeledDataset, header: bool = True):
    lines = []
    if header:
        lines.append("label," + ",".join(f"f{i + 1}" for i in range(data.p)))
    for label, row in zip(data.labels, data.observations):
        lines.append(str(int(label)) + "," + ",".join(map(_format_float, row)))
    atomic_write_text(path, "\n".join(lines) + "\n")


def _has_header(first_line: str) -> bool:
    token = first_line.split(",", 1)[0].strip()
    try:
        float(token)
        return False
    except ValueError:
        return True


def read_labeled_csv(path: str) -> LabeledDataset:
    with open(path) as handle:
        first = handle.readline()
        if not first.strip():
            raise ValidationError(f"{path}: empty file")
        skip = 1 if _has_header(first) else 0
    raw = np.loadtxt(path, delimiter=",", skiprows=skip, ndmin=2)
    if raw.shape[1] < 2:
        raise ValidationError(f"{path}: need a label column plus features")
    labels = raw[:, 0]
    int_labels = labels.astype(int)
    if not np.array_equal(int_labels, labels):
        raise ValidationError(f"{path}: labels must be integers")
    return LabeledDataset(raw[:, 1:], int_labels, int(int_labels.max()))


def write_predictions_csv(path: str, labels: np.ndarray):
    lines = ["row,predicted_class"]
    lines += [f"{i},{int(label)}" for i, label in enumerate(labels)]
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_features_csv(path: str, labels, features: np.ndarray):
    rows = np.atleast_2d(np.asarray(features, dtype=float))
    lines = ["label," + ",".join(f"f{i + 1}" for i in range(rows.shape[1]))]
    for label, row in zip(labels, rows):
        lines.append(str(int(label)) + "," + ",".join(map(_format_float, row)))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_records_csv(path: str, n_channels: int, n_timepoints: int):
    """Read (label, c*T row-major curve values) rows into records."""
    with open(path) as handle:
        first = handle.readline()
        if not first.strip():
            raise ValidationError(f"{path}: empty file")
        skip = 1 if _has_header(first) else 0
    raw = np.loadtxt(path, delimiter=",", skiprows=skip, ndmin=2)
    expected = 1 + n_channels * n_timepoints
    if raw.shape[1] != expected:
        raise ValidationError(
            f"{path}: rows have {raw.shape[1]} columns; expected {expected} "
            f"(label + {n_channels} x {n_timepoints} values)")
    labels = raw[:, 0].astype(int)
    records = [MultichannelRecord(row[1:].reshape(n_channels, n_timepoints))
               for row in raw]
    return records, labels


def _encode_block(arr: np.ndarray) -> dict:
    arr = np.ascontiguousarray(arr, dtype=np.float64)
    return {"dtype": "float64", "shape": list(arr.shape),
            "data_b64": base64.b64encode(arr.tobytes()).decode("ascii")}


def _decode_block(block: dict) -> np.ndarray:
    data = base64.b64decode(block["data_b64"])
    return np.frombuffer(data, dtype=np.float64).reshape(block["shape"]).copy()


def save_model(path: str, model: DiscriminantModel):
    params = model.params
    solver = params.solver
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "p": model.p,
        "n_classes": model.n_classes,
        "params": {
            "tau": params.penalty.tau,
            "lambda": params.penalty.lam,
            "kappa": params.kappa,
            "kappa_factor": params.kappa_factor,
            "variant": params.variant.value,
            "solver": {
                "max_outer_iters": solver.max_outer_iters,
                "max_inner_iters": solver.max_inner_iters,
                "tol_outer": solver.tol_outer,
                "tol_inner": solver.tol_inner,
                "init": solver.init.value,
            },
        },
        "components": model.components.tolist(),
        "constraints": model.constraints.tolist(),
        "class_means": model.summaries.class_means.tolist(),
        "counts": model.summaries.counts.tolist(),
        "overall_mean": model.summaries.overall_mean.tolist(),
        "gram": model.gram.tolist(),
        "within_cov": _encode_block(model.summaries.within_cov),
        "discriminant": _encode_block(model.discriminant),
    }
    atomic_write_text(path, json.dumps(doc))


def load_model(path: str) -> DiscriminantModel:
    with open(path) as handle:
        doc = json.load(handle)
    if doc.get("format") != MODEL_FORMAT:
        raise ValidationError(f"{path}: not a model file")
    if doc.get("version") != MODEL_VERSION:
        raise ValidationError(f"{path}: unsupported model version {doc.get('version')}")
    p = int(doc["p"])
    raw_params = doc["params"]
    raw_solver = raw_params["solver"]
    params = FitParams(
        penalty=PenaltySpec(raw_params["tau"], raw_params["lambda"]),
        kappa=raw_params["kappa"],
        kappa_factor=raw_params["kappa_factor"],
        variant=Variant(raw_params["variant"]),
        solver=SolverConfig(
            max_outer_iters=raw_solver["max_outer_iters"],
            max_inner_iters=raw_solver["max_inner_iters"],
            tol_outer=raw_solver["tol_outer"],
            tol_inner=raw_solver["tol_inner"],
            init=InitStrategy(raw_solver["init"]),
        ),
    )
    class_means = np.array(doc["class_means"], dtype=float)
    counts = np.array(doc["counts"], dtype=float)
    overall_mean = np.array(doc["overall_mean"], dtype=float)
    # rebuild the between-class covariance exactly as the estimator does
    dev = class_means - overall_mean
    between = (dev * counts[:, None]).T @ dev / counts.sum()
    between = 0.5 * (between + between.T)
    summaries = ClassSummaries(class_means=class_means, counts=counts,
                               overall_mean=overall_mean,
                               within_cov=_decode_block(doc["within_cov"]),
                               between_cov=between)
    constraints = np.array(doc["constraints"], dtype=float)
    if constraints.size == 0:
        constraints = np.empty((0, p))
    return DiscriminantModel(
        components=np.array(doc["components"], dtype=float),
        constraints=constraints,
        summaries=summaries,
        gram=np.array(doc["gram"], dtype=float),
        discriminant=_decode_block(doc["discriminant"]),
        params=params)


def write_cv_table_csv(path: str, table):
    lines = ["tau,lambda,kappa_factor,mean_error,sd_error"]
    for cell in table:
        lines.append(",".join([_format_float(cell.tau), _format_float(cell.lam),
                               _format_float(cell.kappa_factor),
                               _format_float(cell.mean_error),
                               _format_float(cell.sd_error)]))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_trend_csv(path: str, rows):
    lines = ["n,median_alpha_err,median_proj_err,Lambda_p,s_n,failures"]
    for row in rows:
        lines.append(",".join([str(row["n"]),
                               _format_float(row["median_alpha_err"]),
                               _format_float(row["median_proj_err"]),
                               _format_float(row["Lambda_p"]),
                               _format_float(row["s_n"]),
                               str(row["failures"])]))
    atomic_write_text(path, "\n".join(lines) + "\n")
