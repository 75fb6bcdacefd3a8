"""Repeated train/test comparison of the adaptation methods against the pooled baseline."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from rawlsian.baseline import fit_pooled_lda
from rawlsian.config import ExperimentConfig, FlatConfig
from rawlsian.core.models import Guarantee, LinearThresholdModel, ThresholdClassifier
from rawlsian.core.types import LabeledDataset, all_subpops
from rawlsian.errors import RawlsianError
from rawlsian.evaluation import evaluate
from rawlsian.fat import fat_adapt
from rawlsian.flat import solve_flat_general, solve_flat_spherical
from rawlsian.stats import estimate_moments, project_scores

logger = logging.getLogger(__name__)

RUN_COLUMNS = ["repetition", "method", "max_error", "accuracy", "r_star", "j_star", "failed"]


@dataclass
class ExperimentReport:
    """One row per (repetition, method) plus the per-method aggregate."""
    runs: pd.DataFrame
    summary: pd.DataFrame
    settings: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        methods = {}
        for method, row in self.summary.iterrows():
            methods[method] = {k: (None if pd.isna(v) else float(v)) for k, v in row.items()}
        runs = [
            {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in rec.items()}
            for rec in self.runs.to_dict(orient="records")
        ]
        return {"settings": self.settings, "methods": methods, "runs": runs}


def stratified_split(data: LabeledDataset, train_fraction: float, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Split row indices so every sub-population keeps the same train share."""
    train, test = [], []
    for s in all_subpops(data.p):
        idx = np.flatnonzero(data.mask(s))
        idx = idx[rng.permutation(len(idx))]
        cut = int(round(train_fraction * len(idx)))
        train.append(idx[:cut])
        test.append(idx[cut:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def fit_method(method: str, train: LabeledDataset, flat: FlatConfig, regularization: float) -> ThresholdClassifier:
    """Fit one named method on the training rows."""
    if method == "baseline":
        return fit_pooled_lda(train)
    if method == "flat1":
        return solve_flat_spherical(estimate_moments(train, "full", regularization)).to_model("flat1")
    if method == "flat2":
        result = solve_flat_general(
            estimate_moments(train, "full", regularization),
            tol_kappa=flat.tol_kappa,
            max_bisection=flat.max_bisection,
            feasibility_iters=flat.feasibility_iters,
            step_scale=flat.step_scale,
            kappa_cap=flat.kappa_cap,
        )
        return result.to_model("flat2")
    if method == "fat":
        # adapt the threshold of the baseline's linear score
        base = fit_pooled_lda(train)
        scores = project_scores(train, base.w)
        result = fat_adapt(estimate_moments(scores, "score", regularization))
        return LinearThresholdModel(
            w=base.w, b=result.b_star, guarantee=Guarantee(result.r_star, result.j_star), method="fat",
        )
    raise ValueError(f"unknown method {method!r}")


def run_experiment(
    data: LabeledDataset,
    config: ExperimentConfig | None = None,
    flat: FlatConfig | None = None,
    regularization: float = 1e-9,
) -> ExperimentReport:
    config = config or ExperimentConfig()
    flat = flat or FlatConfig()
    records = []
    for rep in range(config.repetitions):
        rng = np.random.Generator(np.random.Philox(config.seed + rep))
        train_idx, test_idx = stratified_split(data, config.train_fraction, rng)
        train, test = data.subset(train_idx), data.subset(test_idx)
        for method in config.methods:
            try:
                model = fit_method(method, train, flat, regularization)
                report = evaluate(test, model)
            except RawlsianError as exc:
                logger.warning("repetition %d: %s failed: %s", rep, method, exc)
                records.append([rep, method, math.nan, math.nan, math.nan, None, True])
                continue
            g = model.guarantee
            records.append([
                rep, method, report.max_error, report.accuracy,
                g.r_star if g else math.nan, g.j_star if g else None, False,
            ])
            logger.debug("repetition %d %s: max_error=%.4f accuracy=%.4f", rep, method, report.max_error, report.accuracy)

    runs = pd.DataFrame.from_records(records, columns=RUN_COLUMNS)
    ok = runs[~runs["failed"]]
    summary = ok.groupby("method", sort=False)[["max_error", "accuracy", "r_star"]].agg(["mean", "std"])
    summary.columns = [f"{col}_{stat}" for col, stat in summary.columns]
    summary = summary.reindex(config.methods)
    summary["failures"] = runs.groupby("method", sort=False)["failed"].sum().reindex(config.methods).astype(float)
    logger.info("experiment finished: %d repetitions x %d methods", config.repetitions, len(config.methods))
    settings = {
        "train_fraction": config.train_fraction,
        "repetitions": config.repetitions,
        "seed": config.seed,
        "methods": list(config.methods),
    }
    return ExperimentReport(runs=runs, summary=summary, settings=settings)
