"""k-fold evaluation of full pipelines, per project and pooled, and the five-setting ablation.

Every fold refits vectorizer, chi-square mask and classifier on its training
tickets; test tickets are only ever transformed.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .classifiers import ClassifierSpec
from .features import DEFAULT_K
from .ingest import Corpus
from .metrics import Metrics, ci95, compute_metrics, stratified_kfold
from .mlp import FRAMEWORK_DEFAULTS, GRID_SEARCH_BEST, MlpParams
from .pipeline import fit_pipeline
from .text import PipelineConfig

logger = logging.getLogger(__name__)

METRIC_NAMES = ("precision", "recall", "f1", "accuracy")
BEST_INDIVIDUAL = (37_362, (15, 9, 10, 11, 9, 15, 11))


@dataclass(frozen=True)
class SettingConfig:
    id: int
    pipeline: PipelineConfig
    n_features: int | None
    mlp: MlpParams
    mlp_source: str

    @property
    def spec(self) -> ClassifierSpec:
        return ClassifierSpec("MLP", self.mlp.to_dict())

    def describe(self) -> dict:
        return {"id": self.id, "pipeline": self.pipeline.to_dict(), "n_features": self.n_features,
                "mlp": self.mlp.to_dict(), "mlp_source": self.mlp_source}


def setting(setting_id: int, individual=BEST_INDIVIDUAL, n_features: int = DEFAULT_K) -> SettingConfig:
    """Configuration of ablation setting 1-5.

    1. uni-grams, raw tf, no df filtering, all features, default MLP
    2. uni+bi-grams, log tf, df filtering, all features, default MLP
    3. uni+bi+tri-grams, log tf, df filtering, top ``n_features`` by chi-square, default MLP
    4. as 3 with the grid-searched MLP parameters
    5. as 4 with the GA individual's feature count and hidden layers
    """
    trigram = PipelineConfig(ngram_min=1, ngram_max=3)
    if setting_id == 1:
        cfg = PipelineConfig(ngram_min=1, ngram_max=1, max_df_ratio=1.0, min_df_docs=1, sublinear_tf=False)
        return SettingConfig(1, cfg, None, FRAMEWORK_DEFAULTS, "defaults")
    if setting_id == 2:
        return SettingConfig(2, PipelineConfig(ngram_min=1, ngram_max=2), None, FRAMEWORK_DEFAULTS, "defaults")
    if setting_id == 3:
        return SettingConfig(3, trigram, n_features, FRAMEWORK_DEFAULTS, "defaults")
    if setting_id == 4:
        return SettingConfig(4, trigram, n_features, GRID_SEARCH_BEST, "grid-search")
    if setting_id == 5:
        k, layers = individual
        return SettingConfig(5, trigram, int(k), replace(GRID_SEARCH_BEST, hidden_layers=tuple(layers)),
                             "genetic")
    raise ValueError(f"setting id must be 1-5, got {setting_id}")


@dataclass
class FoldReport:
    scope: str
    name: str
    folds: list[Metrics]
    summary: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.summary:
            self.summary = {m: ci95([getattr(f, m) for f in self.folds]) for m in METRIC_NAMES}

    def mean(self, metric: str = "f1") -> float:
        return self.summary[metric][0]

    def ci(self, metric: str = "f1") -> float:
        return self.summary[metric][1]


@dataclass
class SettingReport:
    setting: SettingConfig
    projects: list[FoldReport]
    cross_project: FoldReport
    mean_projects: dict

    def reports(self) -> list[FoldReport]:
        return self.projects + [self.cross_project]

    def to_records(self) -> list[dict]:
        recs = []
        for rep in self.reports():
            for m in METRIC_NAMES:
                recs.append({"setting": self.setting.id, "scope": rep.scope, "name": rep.name,
                             "metric": m, "mean": rep.mean(m), "ci95": rep.ci(m),
                             "folds": [getattr(f, m) for f in rep.folds]})
        for m in METRIC_NAMES:
            if m in self.mean_projects:
                recs.append({"setting": self.setting.id, "scope": "mean-projects", "name": "mean-projects",
                             "metric": m, "mean": self.mean_projects[m], "ci95": None, "folds": []})
        return recs


def evaluate_folds(corpus: Corpus, setting_cfg: SettingConfig, splits, scope: str, name: str) -> FoldReport:
    y = corpus.labels()
    folds = []
    for train_idx, test_idx in splits:
        pipe = fit_pipeline(corpus.subset(train_idx), setting_cfg.pipeline, setting_cfg.n_features,
                            setting_cfg.spec)
        folds.append(compute_metrics(y[test_idx], pipe.predict(corpus.subset(test_idx))))
    return FoldReport(scope, name, folds)


def evaluate_setting(corpus: Corpus, setting_cfg: SettingConfig, k: int = 10, seed: int = 0,
                     per_project: bool = True) -> SettingReport:
    projects = []
    if per_project:
        for project in corpus.projects():
            sub = corpus.by_project(project)
            try:
                splits = stratified_kfold(sub.labels(), k, seed)
            except ValueError as exc:
                logger.warning("skipping project %s: %s", project, exc)
                continue
            projects.append(evaluate_folds(sub, setting_cfg, splits, "per-project", project))
    cross = evaluate_folds(corpus, setting_cfg, stratified_kfold(corpus.labels(), k, seed),
                           "cross-project", "cross-project")
    mean_projects = ({m: float(np.mean([p.mean(m) for p in projects])) for m in METRIC_NAMES}
                     if projects else {})
    return SettingReport(setting_cfg, projects, cross, mean_projects)


def run_ablation(corpus: Corpus, k: int = 10, seed: int = 0, settings=None,
                 per_project: bool = True) -> list[SettingReport]:
    """Settings 1-5 in order; the same seed gives every setting identical folds."""
    settings = settings or [setting(i) for i in range(1, 6)]
    return [evaluate_setting(corpus, s, k, seed, per_project) for s in settings]


def format_reports(reports) -> str:
    lines = ["setting\tscope\tname\tmetric\tmean\tci95"]
    for rep in reports:
        for r in rep.to_records():
            ci = "" if r["ci95"] is None else f"{r['ci95']:.6f}"
            lines.append(f"{r['setting']}\t{r['scope']}\t{r['name']}\t{r['metric']}\t{r['mean']:.6f}\t{ci}")
    return "\n".join(lines)


def reports_json(reports, config: dict | None = None) -> str:
    doc = {"config": config or {}, "settings": [rep.setting.describe() for rep in reports],
           "results": [r for rep in reports for r in rep.to_records()]}
    return json.dumps(doc, indent=2)
