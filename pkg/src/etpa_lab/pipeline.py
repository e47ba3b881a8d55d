"""Simulate / analyze / roundtrip / demo runs built from a RunConfig."""
from __future__ import annotations

import hashlib
import logging
import warnings
from dataclasses import replace
from pathlib import Path

from . import __version__
from .config import RunConfig
from .dataset_io import load_dataset
from .estimator import ExperimentAnalysis, ProductComparison, analyze_dataset
from .model import ExperimentGeometry, ModelBreakdownWarning, SampleSpec
from .reference_data import DEGENERATE_PAIRS, RHB_ROWS, ZNTPP_ROWS
from .report import Report, compare_to_truth, reference_checks
from .source import Dataset, SourceConfig, run_experiment

__all__ = ["analyze", "demo", "demo_experiments", "provenance", "roundtrip", "simulate"]

log = logging.getLogger(__name__)


def provenance(config: RunConfig, dataset_sha256: str | None = None) -> dict[str, str]:
    out = {
        "tool": "etpa-lab",
        "version": __version__,
        "config_sha256": config.sha256,
        "seed": str(config.seed),
        "mode": config.mode,
    }
    if dataset_sha256 is not None:
        out["dataset_sha256"] = dataset_sha256
    return out


def _simulate(source: SourceConfig, samples, geometry: ExperimentGeometry, stream: int = 0) -> Dataset:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ModelBreakdownWarning)
        ds = run_experiment(source, samples, geometry, stream=stream)
    for msg in dict.fromkeys(str(w.message) for w in caught):
        log.warning("%s", msg)
    return ds


def simulate(config: RunConfig) -> Dataset:
    return _simulate(config.source, config.samples, config.geometry)


def analyze(config: RunConfig, dataset: Dataset | None = None) -> Report:
    """Analyze ``dataset``, or the CSV named in the config."""
    dataset_sha = None
    if dataset is None:
        if config.dataset is None:
            raise ValueError("no dataset given")
        path = Path(config.dataset)
        dataset_sha = hashlib.sha256(path.read_bytes()).hexdigest()
        dataset = load_dataset(path)
    result = analyze_dataset(dataset, config.geometry, config.analysis)
    return Report([result], provenance(config, dataset_sha))


def roundtrip(config: RunConfig) -> tuple[Dataset, Report]:
    """Simulate, analyze, and score each estimate against the configured truth."""
    dataset = simulate(config)
    report = analyze(config, dataset)
    report.truth = compare_to_truth(report.experiments, list(config.samples), config.geometry)
    return dataset, report


def demo_experiments() -> list[tuple[SampleSpec, list[SampleSpec]]]:
    """(solvent, samples) for ZnTPP in toluene and RhB in methanol."""
    out = []
    for solvent, rows in (("toluene", ZNTPP_ROWS), ("methanol", RHB_ROWS)):
        out.append((SampleSpec(solvent), [SampleSpec(r.label, r.concentration, r.sigma_e) for r in rows]))
    return out


def demo(config: RunConfig | None = None) -> tuple[list[Dataset], Report]:
    """Simulate every tabulated concentration and check the table's internal consistency."""
    config = replace(config or RunConfig(), mode="demo")
    geometry = config.geometry
    datasets: list[Dataset] = []
    analyses: list[ExperimentAnalysis] = []
    truth_samples: list[SampleSpec] = []
    for stream, (solvent, samples) in enumerate(demo_experiments()):
        ds = _simulate(config.source, [solvent, *samples], geometry, stream=stream)
        datasets.append(ds)
        analyses.append(analyze_dataset(ds, geometry, config.analysis))
        truth_samples.extend(samples)
    report = Report(analyses, provenance(config))
    report.truth = compare_to_truth(analyses, truth_samples, geometry)
    report.reference_checks = reference_checks(geometry)
    report.reference_products = [
        ProductComparison(a.label, b.label, a.sigma_e * a.concentration, b.sigma_e * b.concentration)
        for a, b in DEGENERATE_PAIRS
    ]
    return datasets, report
